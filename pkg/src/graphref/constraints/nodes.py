"""AST for the graph-constraint language, plus a canonical renderer.

A document declares element attributes and a list of forall-constraints:

    G { // optional comment
      attributes { face norm {x, y, z} }
      constraints {
        forall (face) {norm.z>0}
        forall (edge) {connected_face()==1 or connected_face()==2}
      }
    }

Constraint bodies are one comparison or several joined by `or`. The special
value `epsilon` is resolved at verification time.
"""

from dataclasses import dataclass
from enum import Enum


class ElementKind(Enum):
    VERTEX = "vertex"
    EDGE = "edge"
    FACE = "face"


class AttrName(Enum):
    DEGREE = "degree"
    VALUE = "value"
    NEIGHBOR = "neighbor"
    NORM = "norm"


class _Epsilon:
    _instance = None

    def __new__(cls):
        if cls._instance is None:
            cls._instance = super().__new__(cls)
        return cls._instance

    def __repr__(self):
        return "EPSILON"


EPSILON = _Epsilon()

COMPARISON_OPS = ("==", "!=", "<=", ">=", "<", ">")


@dataclass(frozen=True)
class FieldAccess:
    """Attribute-field operand, e.g. norm.z or degree.out."""

    attr: AttrName
    field: str


@dataclass(frozen=True)
class OpCall:
    """Built-in math-operator operand, e.g. area() or fan_connected()."""

    name: str


@dataclass(frozen=True)
class Comparison:
    lhs: "FieldAccess | OpCall"
    op: str
    value: "float | bool | _Epsilon"


@dataclass(frozen=True)
class Constraint:
    element: ElementKind
    comparisons: tuple[Comparison, ...]  # joined by `or`; violated iff all fail


@dataclass(frozen=True)
class AttributeDecl:
    element: ElementKind
    attr: AttrName
    fields: tuple[str, ...] = ()
    directions: tuple[str, ...] = ()


@dataclass(frozen=True)
class ConstraintSpec:
    attributes: tuple[AttributeDecl, ...]
    constraints: tuple[Constraint, ...]


def _render_value(value) -> str:
    if value is EPSILON:
        return "epsilon"
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, float) and value.is_integer():
        return str(int(value))
    return repr(value)


def render_operand(operand) -> str:
    if isinstance(operand, OpCall):
        return f"{operand.name}()"
    return f"{operand.attr.value}.{operand.field}"


def render_comparison(cmp: Comparison) -> str:
    return f"{render_operand(cmp.lhs)}{cmp.op}{_render_value(cmp.value)}"


def constraint_label(c: Constraint) -> str:
    """Stable human-readable tag, used for violation histograms."""
    body = " or ".join(render_comparison(cmp) for cmp in c.comparisons)
    return f"{c.element.value}:{body}"


def render(spec: ConstraintSpec) -> str:
    """Canonical text form; parse(render(spec)) reproduces the AST."""
    lines = ["G {"]
    lines.append("  attributes {")
    for decl in spec.attributes:
        if decl.attr is AttrName.NEIGHBOR:
            body = f"dir=[{', '.join(decl.directions)}]"
        else:
            body = ", ".join(decl.fields)
        lines.append(f"    {_element_word(decl.element)} {decl.attr.value} {{{body}}}")
    lines.append("  }")
    lines.append("  constraints {")
    for c in spec.constraints:
        body = " or ".join(render_comparison(cmp) for cmp in c.comparisons)
        lines.append(f"    forall ({_element_word(c.element)}) {{{body}}}")
    lines.append("  }")
    lines.append("}")
    return "\n".join(lines) + "\n"


def _element_word(kind: ElementKind) -> str:
    # The grammar spells the vertex element "vertice"; both spellings parse.
    return "vertice" if kind is ElementKind.VERTEX else kind.value
