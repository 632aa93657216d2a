"""Neighbor-aware mutation engine."""

from .engine import DEFAULT_OP_WEIGHTS, mutate_n, mutate_n_inplace
from .operators import (
    APPLICABLE_FAMILIES,
    MutationOp,
    MutationRecord,
    OpKind,
    apply,
    apply_inplace,
)
from .policy import NeighborPolicy, effective_sigma, select_cohort, similarity_weight

__all__ = [
    "APPLICABLE_FAMILIES",
    "DEFAULT_OP_WEIGHTS",
    "MutationOp",
    "MutationRecord",
    "NeighborPolicy",
    "OpKind",
    "apply",
    "apply_inplace",
    "effective_sigma",
    "mutate_n",
    "mutate_n_inplace",
    "select_cohort",
    "similarity_weight",
]
