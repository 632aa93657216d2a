"""Neighbor-similarity policy: Gaussian kernel weights and cohort sampling."""

import math
from dataclasses import dataclass

from ..graph import Graph, GraphFamily, attr_distance, neighbors


@dataclass(frozen=True)
class NeighborPolicy:
    """Controls how a mutation spreads from its anchor to nearby vertices.

    sigma is the kernel bandwidth; None selects the mean length of edges
    around the anchor's 1-hop neighborhood (recomputed per anchor), which
    suits geometric families. Grids and sequences have uniform attribute
    scales, so their default bandwidth is fixed.

    spread_rho scales inclusion probabilities: the most similar neighbor is
    co-mutated with probability rho, everyone else proportionally less.
    A disabled policy always yields the single-member cohort {anchor}.
    """

    hops: int = 2
    sigma: float | None = None
    spread_rho: float = 0.5
    enabled: bool = True

    def __post_init__(self):
        if self.hops < 1:
            raise ValueError("hops must be >= 1")
        if not 0.0 <= self.spread_rho <= 1.0:
            raise ValueError("spread_rho must lie in [0, 1]")
        if self.sigma is not None and self.sigma <= 0:
            raise ValueError("sigma must be positive")


_FIXED_SIGMA_DEFAULTS = {
    GraphFamily.GRID: 16.0,
    GraphFamily.SEQUENCE: 0.25,
}


def similarity_weight(g: Graph, u: int, v: int, sigma: float) -> float:
    """exp(-|attrs(u)-attrs(v)|^2 / (2 sigma^2)); 1.0 when u == v."""
    if sigma <= 0:
        raise ValueError("sigma must be positive")
    if u == v:
        g.vertex(u)
        return 1.0
    d = attr_distance(g.vertex(u).attrs, g.vertex(v).attrs)
    return math.exp(-(d * d) / (2.0 * sigma * sigma))


def effective_sigma(g: Graph, anchor: int, policy: NeighborPolicy) -> float:
    if policy.sigma is not None:
        return policy.sigma
    fixed = _FIXED_SIGMA_DEFAULTS.get(g.family)
    if fixed is not None:
        return fixed
    # Mean length of edges touching the anchor's 1-hop neighborhood.
    region = {anchor} | neighbors(g, anchor, 1)
    seen: set[int] = set()
    total = 0.0
    for vid in region:
        for eid in g._vertex_edges.get(vid, ()):
            if eid in seen:
                continue
            seen.add(eid)
            e = g.edges[eid]
            total += attr_distance(g.vertices[e.u].attrs, g.vertices[e.v].attrs)
    if not seen or total <= 0.0:
        diag = g.bbox_diagonal()
        return diag * 0.01 if diag > 0 else 1.0
    return total / len(seen)


def select_cohort(g: Graph, anchor: int, policy: NeighborPolicy, rng) -> list[int]:
    """Anchor plus a similarity-weighted sample of its neighborhood.

    Each candidate v joins independently with probability
    rho * w(anchor, v) / max_w, so the most similar candidate joins with
    probability rho exactly. Returns sorted ids, anchor always included.
    """
    g.vertex(anchor)
    if not policy.enabled or policy.spread_rho == 0.0:
        return [anchor]
    candidates = sorted(neighbors(g, anchor, policy.hops))
    if not candidates:
        return [anchor]
    sigma = effective_sigma(g, anchor, policy)
    weights = [similarity_weight(g, anchor, v, sigma) for v in candidates]
    max_w = max(weights)
    if max_w <= 0.0:
        return [anchor]
    chosen = {anchor}
    for v, w in zip(candidates, weights):
        if rng.random() < policy.spread_rho * (w / max_w):
            chosen.add(v)
    return sorted(chosen)
