"""Campaign metrics: semantic preservation and mutation diversity.

Diversity is geometric for mesh/relational graphs (symmetric chamfer distance
between vertex position sets, normalized by the larger of the two bounding
box diagonals) and attribute/structure based for grid/sequence graphs
(normalized L1 over index-aligned attribute vectors plus the L1 distance of
the degree histograms).
"""

import math
from dataclasses import dataclass

import numpy as np

from ..errors import FamilyMismatchError
from ..graph import Graph, GraphFamily


def semantic_preservation(original_label: str, mutant_labels: list[str]) -> float | None:
    """Fraction of mutant labels equal to the original after trimming.

    An empty list is not-applicable (None), not zero.
    """
    if not mutant_labels:
        return None
    original = original_label.strip()
    matches = sum(1 for label in mutant_labels if label.strip() == original)
    return matches / len(mutant_labels)


_CHAMFER_POINT_CAP = 512


def _positions(g: Graph, cap: int = _CHAMFER_POINT_CAP) -> np.ndarray:
    """Vertex positions in id order; graphs beyond `cap` vertices are
    stride-subsampled deterministically so pairwise chamfer stays tractable."""
    vids = sorted(g.vertices)
    if len(vids) > cap:
        stride = -(-len(vids) // cap)  # ceil division
        vids = vids[::stride]
    return np.array([g.vertices[vid].attrs[:3] for vid in vids], dtype=float)


def _chamfer_directed(a: np.ndarray, b: np.ndarray) -> float:
    """Mean over a of the distance to the nearest point of b (chunked)."""
    total = 0.0
    for start in range(0, len(a), 256):
        chunk = a[start : start + 256]
        diff = chunk[:, None, :] - b[None, :, :]
        dists = np.sqrt((diff * diff).sum(axis=2))
        total += float(dists.min(axis=1).sum())
    return total / len(a)


def _bbox_diag(points: np.ndarray) -> float:
    if len(points) == 0:
        return 0.0
    return float(np.linalg.norm(points.max(axis=0) - points.min(axis=0)))


def chamfer_dissimilarity(a: Graph, b: Graph) -> float:
    """Symmetric chamfer distance over vertex positions, scale-normalized."""
    pa, pb = _positions(a), _positions(b)
    if len(pa) == 0 and len(pb) == 0:
        return 0.0
    if len(pa) == 0 or len(pb) == 0:
        return 1.0
    raw = 0.5 * (_chamfer_directed(pa, pb) + _chamfer_directed(pb, pa))
    norm = max(_bbox_diag(pa), _bbox_diag(pb))
    if norm == 0.0:
        return 0.0 if raw == 0.0 else 1.0
    return raw / norm


def _degree_histogram(g: Graph) -> np.ndarray:
    degrees = [len(g._vertex_edges.get(vid, ())) for vid in g.vertices]
    if not degrees:
        return np.zeros(1)
    hist = np.bincount(degrees).astype(float)
    return hist / hist.sum()


def attribute_structure_dissimilarity(a: Graph, b: Graph) -> float:
    """Aligned-attribute L1 term plus degree-histogram L1 term."""
    va = [a.vertices[vid].attrs for vid in sorted(a.vertices)]
    vb = [b.vertices[vid].attrs for vid in sorted(b.vertices)]
    n = min(len(va), len(vb))
    if n == 0:
        attr_term = 0.0 if len(va) == len(vb) else 1.0
    else:
        fa = np.array(va[:n], dtype=float).ravel()
        fb = np.array(vb[:n], dtype=float).ravel()
        span = float(max(fa.max(), fb.max()) - min(fa.min(), fb.min()))
        attr_term = float(np.abs(fa - fb).mean()) / span if span > 0 else 0.0
    ha, hb = _degree_histogram(a), _degree_histogram(b)
    width = max(len(ha), len(hb))
    ha = np.pad(ha, (0, width - len(ha)))
    hb = np.pad(hb, (0, width - len(hb)))
    structure_term = 0.5 * float(np.abs(ha - hb).sum())
    return attr_term + structure_term


def pair_dissimilarity(a: Graph, b: Graph) -> float:
    if a.family is not b.family:
        raise FamilyMismatchError("diversity compares graphs of one family")
    if a.family in (GraphFamily.TRIANGLE_MESH, GraphFamily.RELATIONAL):
        return chamfer_dissimilarity(a, b)
    return attribute_structure_dissimilarity(a, b)


@dataclass(frozen=True)
class DiversitySummary:
    mean: float
    min: float
    max: float
    std: float
    pairs: int

    def to_dict(self) -> dict:
        return {
            "mean": self.mean,
            "min": self.min,
            "max": self.max,
            "std": self.std,
            "pairs": self.pairs,
        }


def mutation_diversity(
    graphs: list[Graph], sample_seed: int = 0, max_pairs: int = 10_000, sample_size: int = 1_000
) -> DiversitySummary:
    """Summary statistics of pairwise dissimilarity over a corpus.

    All unordered pairs are scored unless there are more than max_pairs, in
    which case a uniform sample of sample_size pairs (seeded, deterministic)
    stands in.
    """
    if len(graphs) < 2:
        raise ValueError("diversity needs at least two graphs")
    family = graphs[0].family
    for g in graphs[1:]:
        if g.family is not family:
            raise FamilyMismatchError("diversity compares graphs of one family")
    n = len(graphs)
    all_pairs = n * (n - 1) // 2
    if all_pairs > max_pairs:
        rng = np.random.default_rng(sample_seed)
        seen: set[tuple[int, int]] = set()
        while len(seen) < sample_size:
            i = int(rng.integers(n))
            j = int(rng.integers(n))
            if i != j:
                seen.add((min(i, j), max(i, j)))
        pairs = sorted(seen)
    else:
        pairs = [(i, j) for i in range(n) for j in range(i + 1, n)]
    values = np.array([pair_dissimilarity(graphs[i], graphs[j]) for i, j in pairs])
    return DiversitySummary(
        mean=float(values.mean()),
        min=float(values.min()),
        max=float(values.max()),
        std=float(values.std()),
        pairs=len(pairs),
    )


def octant_label(points: np.ndarray) -> str:
    """Sign octant of the centroid, e.g. '+-+'; used by the labeling target."""
    centroid = points.mean(axis=0)
    return "".join("+" if c >= 0 else "-" for c in centroid[:3])


def stage_sum_within_slack(stage_ms: dict, total_ms: float, slack: float = 0.05) -> bool:
    return sum(stage_ms.values()) <= total_ms * (1.0 + slack) + 1e-6


def is_finite_ratio(value: float | None) -> bool:
    return value is None or (0.0 <= value <= 1.0 and math.isfinite(value))
