import math

import numpy as np
import pytest

from graphref.errors import FamilyMismatchError
from graphref.graph import Graph, GraphFamily
from graphref.harness.metrics import (
    mutation_diversity,
    pair_dissimilarity,
    semantic_preservation,
)
from procgen import heightfield_mesh, single_triangle


# semantic_preservation ---------------------------------------------------------


def test_sps_two_of_three():
    assert semantic_preservation("chair", ["chair", "chair", "table"]) == pytest.approx(2 / 3)


def test_sps_all_match():
    assert semantic_preservation("cup", [" cup", "cup "]) == 1.0


def test_sps_empty_is_not_applicable():
    assert semantic_preservation("cup", []) is None


# chamfer dissimilarity -----------------------------------------------------------


def relational_cloud(points) -> Graph:
    g = Graph(GraphFamily.RELATIONAL)
    vids = [g.add_vertex(tuple(map(float, p))) for p in points]
    for a, b in zip(vids, vids[1:]):
        g.add_edge(a, b)
    return g


def brute_chamfer(points_a, points_b) -> float:
    """Plain-loop chamfer oracle, no numpy, no shared code."""

    def directed(src, dst):
        total = 0.0
        for p in src:
            total += min(math.dist(p, q) for q in dst)
        return total / len(src)

    return 0.5 * (directed(points_a, points_b) + directed(points_b, points_a))


def bbox_diag(points) -> float:
    lo = [min(p[i] for p in points) for i in range(3)]
    hi = [max(p[i] for p in points) for i in range(3)]
    return math.dist(lo, hi)


def test_identical_graphs_zero():
    g = heightfield_mesh(3, 3)
    assert pair_dissimilarity(g, g.copy()) == 0.0


def test_translate_by_own_diagonal_anti_diagonal_cloud():
    """Four collinear points perpendicular to their bbox diagonal: translating
    by the diagonal gives normalized chamfer exactly 1 (no point shadows
    another, so every nearest distance equals the shift length)."""
    base = [(k, -k, 0.0) for k in range(4)]  # bbox diagonal (3, 3, 0)
    shift = (3.0, 3.0, 0.0)
    moved = [(p[0] + shift[0], p[1] + shift[1], p[2] + shift[2]) for p in base]

    oracle = brute_chamfer(base, moved) / max(bbox_diag(base), bbox_diag(moved))
    assert oracle == pytest.approx(1.0, abs=1e-12)

    got = pair_dissimilarity(relational_cloud(base), relational_cloud(moved))
    assert got == pytest.approx(1.0, abs=1e-6)


def test_chamfer_matches_brute_oracle_on_random_clouds():
    rng = np.random.default_rng(44)
    for _ in range(10):
        pa = [tuple(rng.uniform(-1, 1, 3)) for _ in range(15)]
        pb = [tuple(rng.uniform(-1, 1, 3)) for _ in range(12)]
        expected = brute_chamfer(pa, pb) / max(bbox_diag(pa), bbox_diag(pb))
        got = pair_dissimilarity(relational_cloud(pa), relational_cloud(pb))
        assert got == pytest.approx(expected, rel=1e-9)


def test_family_mismatch_rejected():
    mesh = single_triangle()
    cloud = relational_cloud([(0, 0, 0), (1, 1, 1)])
    with pytest.raises(FamilyMismatchError):
        pair_dissimilarity(mesh, cloud)


# grid / sequence diversity --------------------------------------------------------


def tiny_grid(values, width, height) -> Graph:
    g = Graph(GraphFamily.GRID)
    g.grid_dims = (width, height)
    for v in values:
        g.add_vertex((float(v),))
    for row in range(height):
        for col in range(width):
            vid = row * width + col
            if col + 1 < width:
                g.add_edge(vid, vid + 1, 0.0)
            if row + 1 < height:
                g.add_edge(vid, vid + width, 0.0)
    return g


def test_grid_identical_zero():
    a = tiny_grid([1, 2, 3, 4], 2, 2)
    assert pair_dissimilarity(a, tiny_grid([1, 2, 3, 4], 2, 2)) == 0.0


def test_grid_value_difference_scales():
    a = tiny_grid([0, 0, 0, 0], 2, 2)
    b = tiny_grid([10, 10, 10, 10], 2, 2)
    c = tiny_grid([20, 20, 20, 20], 2, 2)
    assert 0.0 < pair_dissimilarity(a, b) <= pair_dissimilarity(a, c)


def test_structure_term_sees_degree_change():
    a = tiny_grid([5, 5, 5, 5], 2, 2)
    b = tiny_grid([5, 5, 5, 5], 2, 2)
    b.remove_edge(0)
    assert pair_dissimilarity(a, b) > 0.0


# mutation_diversity summary -------------------------------------------------------


def test_diversity_summary_statistics():
    rng = np.random.default_rng(9)
    graphs = [heightfield_mesh(3, 3, rng=rng) for _ in range(5)]
    summary = mutation_diversity(graphs)
    assert summary.pairs == 10
    assert summary.min <= summary.mean <= summary.max
    assert summary.std >= 0.0
    values = [pair_dissimilarity(graphs[i], graphs[j]) for i in range(5) for j in range(i + 1, 5)]
    assert summary.mean == pytest.approx(float(np.mean(values)))


def test_diversity_requires_two_graphs():
    with pytest.raises(ValueError):
        mutation_diversity([single_triangle()])


def test_diversity_sampling_is_deterministic():
    rng = np.random.default_rng(12)
    graphs = [heightfield_mesh(3, 3, rng=rng) for _ in range(150)]  # 11175 pairs
    a = mutation_diversity(graphs, sample_seed=5)
    b = mutation_diversity(graphs, sample_seed=5)
    assert a == b
    assert a.pairs == 1000
