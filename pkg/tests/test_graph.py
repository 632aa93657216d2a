import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from graphref.errors import ElementNotFoundError, InvariantViolationError
from graphref.graph import (
    Graph,
    GraphFamily,
    face_area,
    face_normal,
    incident_faces,
    is_fan_connected,
    neighbors,
    vertex_fan_components,
)
from procgen import (
    bowtie,
    build_mesh,
    nonmanifold_book,
    single_triangle,
    tetrahedron,
    umbrella,
)


def path_graph(n: int, family=GraphFamily.RELATIONAL) -> Graph:
    g = Graph(family)
    vids = [g.add_vertex((float(i), 0.0, 0.0)) for i in range(n)]
    for a, b in zip(vids, vids[1:]):
        g.add_edge(a, b)
    return g


# face_normal --------------------------------------------------------------


def test_face_normal_axis_aligned():
    g = single_triangle(up=True)
    assert face_normal(g, 0) == pytest.approx((0.0, 0.0, 1.0))


def test_face_normal_reversed_winding():
    g = single_triangle(up=False)
    assert face_normal(g, 0) == pytest.approx((0.0, 0.0, -1.0))


def test_face_normal_collinear_is_zero():
    g = build_mesh([(0, 0, 0), (1, 0, 0), (2, 0, 0)], [(0, 1, 2)])
    assert face_normal(g, 0) == (0.0, 0.0, 0.0)


def test_face_normal_unknown_face():
    g = single_triangle()
    with pytest.raises(ElementNotFoundError):
        face_normal(g, 99)


# face_area ----------------------------------------------------------------


def test_face_area_half_unit_square():
    assert face_area(single_triangle(), 0) == pytest.approx(0.5)


def test_face_area_degenerate():
    g = build_mesh([(0, 0, 0), (1, 0, 0), (2, 0, 0)], [(0, 1, 2)])
    assert face_area(g, 0) == 0.0


def test_face_area_scales_quadratically():
    g = build_mesh([(0, 0, 0), (2, 0, 0), (0, 2, 0)], [(0, 1, 2)])
    assert face_area(g, 0) == pytest.approx(2.0)


# neighbors ----------------------------------------------------------------


def test_neighbors_one_hop_on_path():
    g = path_graph(3)
    assert neighbors(g, 1, 1) == {0, 2}


def test_neighbors_two_hops_on_path():
    g = path_graph(3)
    assert neighbors(g, 0, 2) == {1, 2}


def test_neighbors_isolated_vertex():
    g = Graph(GraphFamily.RELATIONAL)
    vid = g.add_vertex((0.0, 0.0, 0.0))
    assert neighbors(g, vid, 3) == set()


def test_neighbors_monotone_in_hops():
    g = path_graph(6)
    for h1, h2 in [(1, 2), (2, 4), (1, 5)]:
        assert neighbors(g, 0, h1) <= neighbors(g, 0, h2)


def test_neighbors_requires_positive_hops():
    g = path_graph(2)
    with pytest.raises(ValueError):
        neighbors(g, 0, 0)


# incident_faces -----------------------------------------------------------


def brute_force_incident(g: Graph, eid: int) -> set[int]:
    e = g.edges[eid]
    return {fid for fid, f in g.faces.items() if e.u in f.corners and e.v in f.corners}


def test_incident_faces_single_triangle():
    g = single_triangle()
    for eid in g.edges:
        assert incident_faces(g, eid) == brute_force_incident(g, eid)
        assert len(incident_faces(g, eid)) == 1


def test_incident_faces_tetrahedron():
    g = tetrahedron()
    assert len(g.edges) == 6 and len(g.faces) == 4
    for eid in g.edges:
        oracle = brute_force_incident(g, eid)
        assert incident_faces(g, eid) == oracle
        assert len(oracle) == 2


def test_incident_faces_nonmanifold_book():
    g = nonmanifold_book(3)
    spine = g.edge_between(0, 1)
    assert len(incident_faces(g, spine)) == 3
    for eid in g.edges:
        assert incident_faces(g, eid) == brute_force_incident(g, eid)


def test_incident_face_counts_sum_to_three_per_face():
    for g in (single_triangle(), tetrahedron(), umbrella(7), nonmanifold_book(4)):
        total = sum(len(incident_faces(g, eid)) for eid in g.edges)
        assert total == 3 * len(g.faces)


# is_fan_connected ----------------------------------------------------------


def brute_force_fan(g: Graph, vid: int) -> bool:
    incident = [f for f in g.faces.values() if vid in f.corners]
    if not incident:
        return False
    seen = {incident[0].id}
    frontier = [incident[0]]
    while frontier:
        cur = frontier.pop()
        cur_others = {c for c in cur.corners if c != vid}
        for other in incident:
            if other.id in seen:
                continue
            if any(c in cur_others for c in other.corners if c != vid):
                seen.add(other.id)
                frontier.append(other)
    return len(seen) == len(incident)


def test_fan_connected_umbrella_apex():
    g = umbrella(8, closed=True)
    assert is_fan_connected(g, 0) is True


def test_fan_connected_bowtie_center():
    g = bowtie()
    assert is_fan_connected(g, 2) is False
    assert brute_force_fan(g, 2) is False
    assert len(vertex_fan_components(g, 2)) == 2


def test_fan_connected_interior_of_disc():
    g = umbrella(9, closed=True)
    for vid in g.vertices:
        assert is_fan_connected(g, vid) == brute_force_fan(g, vid)


def test_fan_connected_zero_faces_is_false():
    g = Graph(GraphFamily.TRIANGLE_MESH)
    vid = g.add_vertex((0.0, 0.0, 0.0))
    assert is_fan_connected(g, vid) is False


def test_fan_matches_oracle_on_fixtures():
    from procgen import fixture_corpus

    for name, g in fixture_corpus():
        for vid in g.vertices:
            assert is_fan_connected(g, vid) == brute_force_fan(g, vid), (name, vid)


# structural invariants ------------------------------------------------------


def test_add_edge_rejects_self_loop_and_duplicates():
    g = Graph(GraphFamily.RELATIONAL)
    a = g.add_vertex((0.0, 0.0, 0.0))
    b = g.add_vertex((1.0, 0.0, 0.0))
    g.add_edge(a, b)
    with pytest.raises(InvariantViolationError):
        g.add_edge(a, a)
    with pytest.raises(InvariantViolationError):
        g.add_edge(b, a)  # same unordered pair


def test_sequence_graph_allows_antiparallel_edges():
    g = Graph(GraphFamily.SEQUENCE)
    a = g.add_vertex((0.0,))
    b = g.add_vertex((1.0,))
    g.add_edge(a, b)
    g.add_edge(b, a)  # ordered pairs differ
    assert len(g.edges) == 2


def test_add_face_requires_edges():
    g = Graph(GraphFamily.TRIANGLE_MESH)
    vids = [g.add_vertex(p) for p in ((0, 0, 0), (1, 0, 0), (0, 1, 0))]
    with pytest.raises(InvariantViolationError):
        g.add_face(*vids)


def test_remove_vertex_cascades():
    g = tetrahedron()
    g.remove_vertex(0)
    g.check_invariants()
    assert len(g.faces) == 1 and len(g.edges) == 3


def test_remove_edge_cascades_faces():
    g = single_triangle()
    g.remove_edge(next(iter(g.edges)))
    g.check_invariants()
    assert len(g.faces) == 0 and len(g.edges) == 2


def test_tombstoned_ids_never_reused():
    g = single_triangle()
    g.remove_vertex(2)
    new = g.add_vertex((5.0, 5.0, 5.0))
    assert new == 3


def test_copy_is_independent():
    g = single_triangle()
    clone = g.copy()
    clone.set_vertex_attrs(0, (9.0, 9.0, 9.0))
    clone.remove_face(0)
    assert g.vertices[0].attrs == (0.0, 0.0, 0.0)
    assert 0 in g.faces
    g.check_invariants()
    clone.check_invariants()


def test_grid_invariant_checked():
    g = Graph(GraphFamily.GRID)
    g.grid_dims = (2, 2)
    for value in (0.0, 1.0, 2.0, 3.0):
        g.add_vertex((value,))
    g.add_edge(0, 1, 1.0)
    g.add_edge(2, 3, 1.0)
    g.add_edge(0, 2, 2.0)
    with pytest.raises(InvariantViolationError):
        g.check_invariants()  # one grid edge missing
    g.add_edge(1, 3, 2.0)
    g.check_invariants()


# geometry properties ---------------------------------------------------------

finite_coord = st.floats(
    min_value=-100, max_value=100, allow_nan=False, allow_infinity=False
)
triangle_points = st.tuples(
    st.tuples(finite_coord, finite_coord, finite_coord),
    st.tuples(finite_coord, finite_coord, finite_coord),
    st.tuples(finite_coord, finite_coord, finite_coord),
)


@given(triangle_points)
@settings(max_examples=200, deadline=None)
def test_area_invariant_under_corner_rotation(points):
    p0, p1, p2 = points
    g1 = build_mesh([p0, p1, p2], [(0, 1, 2)])
    g2 = build_mesh([p0, p1, p2], [(1, 2, 0)])
    a1, a2 = face_area(g1, 0), face_area(g2, 0)
    assert a1 >= 0.0
    # 1e-12 relative, with an absolute floor for near-degenerate slivers:
    # cancellation in the cross product makes the relative error unbounded
    # as the area approaches zero, but the absolute error stays within a
    # few ulps of the squared coordinate scale.
    scale = max(1.0, max(abs(c) for p in points for c in p))
    assert a2 == pytest.approx(a1, rel=1e-12, abs=1e-12 * scale * scale)


@given(triangle_points)
@settings(max_examples=200, deadline=None)
def test_normal_z_flips_under_corner_swap(points):
    p0, p1, p2 = points
    g = build_mesh([p0, p1, p2], [(0, 1, 2)])
    if face_area(g, 0) == 0.0:
        return
    flipped = build_mesh([p0, p1, p2], [(0, 2, 1)])
    nz = face_normal(g, 0)[2]
    assert face_normal(flipped, 0)[2] == pytest.approx(-nz, rel=1e-9, abs=1e-12)
