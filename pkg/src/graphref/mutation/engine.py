"""Budgeted mutation driver: draws operators from a weight table."""

import numpy as np

from ..errors import MutationFailureError, OpNotApplicableError
from ..graph import Graph
from .operators import MutationOp, MutationRecord, OpKind, apply_inplace
from .policy import NeighborPolicy

DEFAULT_OP_WEIGHTS: dict[OpKind, float] = {kind: 1.0 for kind in OpKind}


def _sampler(op_weights: dict[OpKind, float]):
    kinds = [k for k in OpKind if op_weights.get(k, 0.0) > 0.0]
    if not kinds:
        raise ValueError("op_weights has no positive entries")
    weights = np.array([op_weights[k] for k in kinds], dtype=float)
    cumulative = np.cumsum(weights / weights.sum())

    def draw(rng) -> OpKind:
        return kinds[int(np.searchsorted(cumulative, rng.random(), side="right"))]

    return draw


def mutate_n_inplace(
    g: Graph,
    budget: int,
    op_weights: dict[OpKind, float] | None = None,
    policy: NeighborPolicy | None = None,
    rng=None,
    op_params: dict[OpKind, dict] | None = None,
) -> list[MutationRecord]:
    if budget < 1:
        raise ValueError("budget must be >= 1")
    policy = policy or NeighborPolicy()
    rng = rng if rng is not None else np.random.default_rng(0)
    draw = _sampler(op_weights or DEFAULT_OP_WEIGHTS)
    op_params = op_params or {}
    records: list[MutationRecord] = []
    retries = 5 * budget
    step = 0
    while len(records) < budget:
        kind = draw(rng)
        op = MutationOp(kind, dict(op_params.get(kind, {})))
        try:
            records.append(apply_inplace(g, op, policy, rng, label=f"s{step}"))
            step += 1
        except OpNotApplicableError:
            retries -= 1
            if retries <= 0:
                raise MutationFailureError(
                    f"retry budget exhausted after {len(records)}/{budget} mutations"
                ) from None
    return records


def mutate_n(
    g: Graph,
    budget: int,
    op_weights: dict[OpKind, float] | None = None,
    policy: NeighborPolicy | None = None,
    rng=None,
    op_params: dict[OpKind, dict] | None = None,
) -> tuple[Graph, list[MutationRecord]]:
    """Apply exactly `budget` operators to a copy of g.

    Inapplicable draws are retried (at most 5 * budget retries overall);
    exhausting the retry budget raises MutationFailureError. Returns the
    mutated copy and the records in application order.
    """
    work = g.copy()
    records = mutate_n_inplace(work, budget, op_weights, policy, rng, op_params)
    return work, records
