"""Constraint language: parser, AST, and verifier."""

from .nodes import (
    EPSILON,
    AttrName,
    AttributeDecl,
    Comparison,
    Constraint,
    ConstraintSpec,
    ElementKind,
    FieldAccess,
    OpCall,
    constraint_label,
    render,
)
from .parser import parse_spec
from .verifier import (
    Violation,
    ViolationReport,
    builtin_catalog,
    graph_fingerprint,
    verify,
)

__all__ = [
    "EPSILON",
    "AttrName",
    "AttributeDecl",
    "Comparison",
    "Constraint",
    "ConstraintSpec",
    "ElementKind",
    "FieldAccess",
    "OpCall",
    "Violation",
    "ViolationReport",
    "builtin_catalog",
    "constraint_label",
    "graph_fingerprint",
    "parse_spec",
    "render",
    "verify",
]
