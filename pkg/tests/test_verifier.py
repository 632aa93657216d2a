import pytest

import graphref
from graphref.constraints import parse_spec, verify
from graphref.constraints.verifier import graph_fingerprint
from graphref.errors import FamilyMismatchError
from graphref.graph import Graph, GraphFamily
from naive_checker import naive_mesh_violations
from procgen import (
    fixture_corpus,
    mesh_with_isolated_vertex,
    single_triangle,
    tetrahedron,
    zero_area_face_mesh,
)


def test_clean_triangle_is_clean(mesh_spec):
    report = verify(mesh_spec, single_triangle(up=True), epsilon=1e-9)
    assert report.is_clean()


def test_reversed_winding_violates_first_constraint(mesh_spec):
    report = verify(mesh_spec, single_triangle(up=False), epsilon=1e-9)
    assert len(report) == 1
    v = report.entries[0]
    assert v.constraint_index == 0 and v.element_kind == "face"
    assert v.measured.startswith("-1.0")


def test_isolated_vertex_violates_fan(mesh_spec):
    g = mesh_with_isolated_vertex()
    report = verify(mesh_spec, g)
    assert len(report) == 1
    v = report.entries[0]
    assert v.constraint_index == 3 and v.element_kind == "vertex"
    assert v.element_id == 3 and v.measured == "false"


def test_zero_area_face_flagged_with_normal(mesh_spec):
    report = verify(mesh_spec, zero_area_face_mesh())
    flagged = {(v.constraint_index, v.element_id) for v in report.entries}
    # The degenerate face fails both the normal and the area constraints.
    assert (0, 1) in flagged and (1, 1) in flagged


def test_monotone_in_epsilon(mesh_spec):
    g = zero_area_face_mesh()
    small = {(v.constraint_index, v.element_id) for v in verify(mesh_spec, g, 1e-12).entries}
    large = {(v.constraint_index, v.element_id) for v in verify(mesh_spec, g, 1e-3).entries}
    assert small <= large
    huge = {(v.constraint_index, v.element_id) for v in verify(mesh_spec, g, 10.0).entries}
    assert large <= huge


def test_verify_never_mutates(mesh_spec):
    g = tetrahedron()
    before = graph_fingerprint(g)
    verify(mesh_spec, g)
    assert graph_fingerprint(g) == before


def test_family_mismatch_for_face_constraints(mesh_spec):
    g = Graph(GraphFamily.RELATIONAL)
    g.add_vertex((0.0, 0.0, 0.0))
    with pytest.raises(FamilyMismatchError):
        verify(mesh_spec, g)


def test_report_order_is_deterministic(mesh_spec):
    g = tetrahedron()  # several normal violations
    first = verify(mesh_spec, g).entries
    second = verify(mesh_spec, g).entries
    assert first == second
    ids = [(v.element_kind, v.element_id, v.constraint_index) for v in first]
    assert ids == sorted(ids, key=lambda t: ({"vertex": 0, "edge": 1, "face": 2}[t[0]], t[1], t[2]))


def test_matches_naive_checker_on_fixture_corpus(mesh_spec):
    eps = 1e-9
    for name, g in fixture_corpus():
        got = {
            (v.constraint_index, v.element_id)
            for v in verify(mesh_spec, g, eps).entries
        }
        expected = naive_mesh_violations(g, eps)
        assert got == expected, f"fixture {name}: {got ^ expected}"


# degree / value semantics -----------------------------------------------------


def test_degree_on_directed_sequence():
    spec = parse_spec(
        "G { attributes{ vertice degree {in, out} }"
        " constraints{ forall (vertice) {degree.out>=1} } }"
    )
    g = Graph(GraphFamily.SEQUENCE)
    a = g.add_vertex((0.1,))
    b = g.add_vertex((0.2,))
    g.add_edge(a, b)
    report = verify(spec, g)
    assert [v.element_id for v in report.entries] == [b]  # the tail has out-degree 0


def test_degree_on_undirected_reports_total():
    spec = parse_spec(
        "G { attributes{ vertice degree {in, out} }"
        " constraints{ forall (vertice) {degree.in==2} } }"
    )
    g = Graph(GraphFamily.RELATIONAL)
    vids = [g.add_vertex((float(i), 0.0, 0.0)) for i in range(3)]
    g.add_edge(vids[0], vids[1])
    g.add_edge(vids[1], vids[2])
    report = verify(spec, g)
    assert {v.element_id for v in report.entries} == {vids[0], vids[2]}


def test_value_range_checks_every_component():
    spec = parse_spec(
        "G { attributes{ vertice value {range} }"
        " constraints{ forall (vertice) {value.range<=255} } }"
    )
    g = Graph(GraphFamily.GRID)
    g.grid_dims = (2, 1)
    a = g.add_vertex((100.0,))
    b = g.add_vertex((300.0,))
    g.add_edge(a, b, 200.0)
    report = verify(spec, g)
    assert [v.element_id for v in report.entries] == [b]
    assert report.entries[0].measured == "300.0"


def test_value_range_on_edges_uses_weight():
    spec = parse_spec(
        "G { attributes{ edge value {range} }"
        " constraints{ forall (edge) {value.range<=1} } }"
    )
    g = Graph(GraphFamily.RELATIONAL)
    a = g.add_vertex((0.0, 0.0, 0.0))
    b = g.add_vertex((5.0, 0.0, 0.0))
    g.add_edge(a, b)  # weight 5.0
    report = verify(spec, g)
    assert len(report) == 1 and report.entries[0].element_kind == "edge"


# grid neighbor declarations ----------------------------------------------------


def grid_graph(width, height):
    g = Graph(GraphFamily.GRID)
    g.grid_dims = (width, height)
    for i in range(width * height):
        g.add_vertex((float(i % 7),))
    for row in range(height):
        for col in range(width):
            vid = row * width + col
            if col + 1 < width:
                g.add_edge(vid, vid + 1, 0.0)
            if row + 1 < height:
                g.add_edge(vid, vid + width, 0.0)
    return g


NEIGHBOR_SPEC = (
    "G { attributes{ vertice neighbor {dir=[U, D, L, R]} } constraints{} }"
)


def test_grid_neighbor_declaration_clean():
    spec = parse_spec(NEIGHBOR_SPEC)
    assert verify(spec, grid_graph(4, 4)).is_clean()


def test_grid_neighbor_missing_edge_flagged():
    spec = parse_spec(NEIGHBOR_SPEC)
    g = grid_graph(4, 4)
    center = 1 * 4 + 1
    g.remove_edge(g.edge_between(center, center + 1))
    report = verify(spec, g)
    flagged = {v.element_id for v in report.entries}
    # Both interior endpoints of the removed edge miss a neighbor now.
    assert flagged == {center, center + 1}
    assert all(v.constraint_index == 0 for v in report.entries)  # synthetic index
    assert "missing" in report.entries[0].measured


def test_grid_neighbor_border_exempt():
    spec = parse_spec(NEIGHBOR_SPEC)
    g = grid_graph(3, 3)
    g.remove_edge(g.edge_between(0, 1))  # border edge only
    assert verify(spec, g).is_clean()


def test_neighbor_declaration_requires_grid():
    spec = parse_spec(NEIGHBOR_SPEC)
    with pytest.raises(FamilyMismatchError):
        verify(spec, single_triangle())
