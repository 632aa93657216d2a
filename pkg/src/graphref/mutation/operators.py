"""The 20-operator mutation catalog.

Every operator preserves the graph's structural invariants (edge endpoint
existence, face-edge closure, pair uniqueness, grid shape). Constraint-level
validity is deliberately NOT preserved; producing repairable violations is
the point. Operators that cannot find an applicable element raise
OpNotApplicableError so the engine can draw a different operator.

Cohort-aware operators perturb the anchor and every cohort member with the
same parameters, then add a per-member jitter whose magnitude is at most 10%
of the operator scale, so nearby elements receive similar but not identical
edits.
"""

import math
from dataclasses import dataclass, field
from enum import Enum

import numpy as np

from ..errors import OpNotApplicableError
from ..graph import Graph, GraphFamily, attr_distance, face_normal, neighbors
from .policy import NeighborPolicy, select_cohort

_MESH = GraphFamily.TRIANGLE_MESH
_GRID = GraphFamily.GRID
_SEQ = GraphFamily.SEQUENCE
_REL = GraphFamily.RELATIONAL
_ALL = (_MESH, _GRID, _SEQ, _REL)


class OpKind(Enum):
    ADD_VERTEX_NOISE = "AddVertexNoise"
    ADD_EDGE_NOISE = "AddEdgeNoise"
    SET_VERTEX_VALUE = "SetVertexValue"
    SET_EDGE_VALUE = "SetEdgeValue"
    INSERT_VERTEX_ON_EDGE = "InsertVertexOnEdge"
    ADD_VERTEX = "AddVertex"
    DELETE_VERTEX = "DeleteVertex"
    DELETE_EDGE = "DeleteEdge"
    ADD_EDGE = "AddEdge"
    DELETE_FACE = "DeleteFace"
    EDGE_FLIP = "EdgeFlip"
    EDGE_COLLAPSE = "EdgeCollapse"
    FACE_SPLIT = "FaceSplit"
    TRANSLATE_COHORT = "TranslateCohort"
    SCALE_COHORT = "ScaleCohort"
    ROTATE_COHORT = "RotateCohort"
    SMOOTH_COHORT = "SmoothCohort"
    JITTER_SINGLE_CHANNEL = "JitterSingleChannel"
    SWAP_VERTEX_ATTRS = "SwapVertexAttrs"
    DUPLICATE_VERTEX_FAN = "DuplicateVertexFan"


APPLICABLE_FAMILIES: dict[OpKind, tuple[GraphFamily, ...]] = {
    OpKind.ADD_VERTEX_NOISE: _ALL,
    OpKind.ADD_EDGE_NOISE: _ALL,
    OpKind.SET_VERTEX_VALUE: _ALL,
    OpKind.SET_EDGE_VALUE: _ALL,
    OpKind.INSERT_VERTEX_ON_EDGE: (_MESH, _REL, _SEQ),
    OpKind.ADD_VERTEX: (_MESH, _REL),
    OpKind.DELETE_VERTEX: (_MESH, _REL, _SEQ),
    OpKind.DELETE_EDGE: (_MESH, _REL),
    OpKind.ADD_EDGE: (_MESH, _REL),
    OpKind.DELETE_FACE: (_MESH,),
    OpKind.EDGE_FLIP: (_MESH,),
    OpKind.EDGE_COLLAPSE: (_MESH, _REL),
    OpKind.FACE_SPLIT: (_MESH,),
    OpKind.TRANSLATE_COHORT: _ALL,
    OpKind.SCALE_COHORT: _ALL,
    OpKind.ROTATE_COHORT: (_MESH, _REL),
    OpKind.SMOOTH_COHORT: _ALL,
    OpKind.JITTER_SINGLE_CHANNEL: _ALL,
    OpKind.SWAP_VERTEX_ATTRS: _ALL,
    OpKind.DUPLICATE_VERTEX_FAN: (_MESH,),
}


@dataclass(frozen=True)
class MutationOp:
    kind: OpKind
    params: dict = field(default_factory=dict)

    def __post_init__(self):
        scale = self.params.get("scale")
        if scale is not None and scale < 0:
            raise ValueError("scale must be >= 0")
        angle = self.params.get("max_angle")
        if angle is not None and not (0 < angle <= math.pi):
            raise ValueError("max_angle must lie in (0, pi]")


@dataclass(frozen=True)
class MutationRecord:
    op_kind: str
    anchor: int
    anchor_kind: str  # "vertex" | "edge" | "face"
    cohort: tuple[int, ...]
    params: dict
    rng_state_label: str

    def to_dict(self) -> dict:
        return {
            "op": self.op_kind,
            "anchor": self.anchor,
            "anchor_kind": self.anchor_kind,
            "cohort": list(self.cohort),
            "params": {k: v for k, v in sorted(self.params.items())},
            "rng": self.rng_state_label,
        }


def _pick(ids: list[int], rng) -> int:
    return ids[int(rng.integers(len(ids)))]


def _require(condition: bool, why: str) -> None:
    if not condition:
        raise OpNotApplicableError(why)


def _any_vertex(g: Graph, rng) -> int:
    _require(bool(g.vertices), "graph has no vertices")
    return _pick(sorted(g.vertices), rng)


def _any_edge(g: Graph, rng) -> int:
    _require(bool(g.edges), "graph has no edges")
    return _pick(sorted(g.edges), rng)


def _any_face(g: Graph, rng) -> int:
    _require(bool(g.faces), "graph has no faces")
    return _pick(sorted(g.faces), rng)


def _auto_scale(g: Graph, op: MutationOp) -> float:
    scale = op.params.get("scale")
    if scale is not None:
        return float(scale)
    return 0.01 * g.bbox_diagonal()


def _jitter(rng, width: int, scale: float) -> np.ndarray:
    """Random vector with norm <= 0.1 * scale."""
    if scale == 0.0:
        return np.zeros(width)
    direction = rng.standard_normal(width)
    norm = float(np.linalg.norm(direction))
    if norm == 0.0:
        return np.zeros(width)
    return direction * (float(rng.random()) * 0.1 * scale / norm)


def _random_bbox_point(g: Graph, rng) -> tuple[float, ...]:
    box = g.bounding_box()
    _require(box is not None, "graph has no vertices")
    lo, hi = box
    return tuple(lo[i] + float(rng.random()) * (hi[i] - lo[i]) for i in range(len(lo)))


def _move_cohort(g: Graph, cohort: list[int], new_attrs: dict[int, np.ndarray]) -> None:
    for vid in cohort:
        g.set_vertex_attrs(vid, tuple(new_attrs[vid]))
    g.refresh_edge_weights(cohort)


# -- value perturbations ----------------------------------------------------


def _op_add_vertex_noise(g, op, policy, rng):
    anchor = _any_vertex(g, rng)
    cohort = select_cohort(g, anchor, policy, rng)
    scale = _auto_scale(g, op)
    width = g.attr_width()
    base = rng.standard_normal(width) * scale
    new_attrs = {
        vid: np.asarray(g.vertices[vid].attrs) + base + _jitter(rng, width, scale)
        for vid in cohort
    }
    _move_cohort(g, cohort, new_attrs)
    return anchor, "vertex", cohort, {"scale": scale}


def _op_set_vertex_value(g, op, policy, rng):
    anchor = _any_vertex(g, rng)
    cohort = select_cohort(g, anchor, policy, rng)
    target = np.asarray(_random_bbox_point(g, rng))
    jitter_scale = _auto_scale(g, op)
    width = g.attr_width()
    new_attrs = {vid: target + _jitter(rng, width, jitter_scale) for vid in cohort}
    _move_cohort(g, cohort, new_attrs)
    return anchor, "vertex", cohort, {"scale": jitter_scale}


def _op_add_edge_noise(g, op, policy, rng):
    eid = _any_edge(g, rng)
    scale = _auto_scale(g, op)
    delta = float(rng.standard_normal()) * scale
    g.set_edge_weight(eid, g.edges[eid].weight + delta)
    return eid, "edge", [eid], {"scale": scale}


def _op_set_edge_value(g, op, policy, rng):
    eid = _any_edge(g, rng)
    weights = [e.weight for e in g.edges.values()]
    lo, hi = min(weights), max(weights)
    g.set_edge_weight(eid, lo + float(rng.random()) * (hi - lo))
    return eid, "edge", [eid], {}


def _op_jitter_single_channel(g, op, policy, rng):
    anchor = _any_vertex(g, rng)
    cohort = select_cohort(g, anchor, policy, rng)
    width = g.attr_width()
    channel = int(rng.integers(width))
    scale = _auto_scale(g, op)
    base = float(rng.standard_normal()) * scale
    new_attrs = {}
    for vid in cohort:
        attrs = np.asarray(g.vertices[vid].attrs)
        attrs[channel] += base + float(rng.uniform(-0.1, 0.1)) * scale
        new_attrs[vid] = attrs
    _move_cohort(g, cohort, new_attrs)
    return anchor, "vertex", cohort, {"scale": scale, "channel": channel}


def _op_swap_vertex_attrs(g, op, policy, rng):
    _require(len(g.vertices) >= 2, "need two vertices to swap")
    ids = sorted(g.vertices)
    a = _pick(ids, rng)
    b = _pick([v for v in ids if v != a], rng)
    attrs_a, attrs_b = g.vertices[a].attrs, g.vertices[b].attrs
    g.set_vertex_attrs(a, attrs_b)
    g.set_vertex_attrs(b, attrs_a)
    g.refresh_edge_weights((a, b))
    return a, "vertex", [a, b], {}


# -- rigid / local geometry edits -------------------------------------------


def _op_translate_cohort(g, op, policy, rng):
    anchor = _any_vertex(g, rng)
    cohort = select_cohort(g, anchor, policy, rng)
    scale = _auto_scale(g, op)
    width = g.attr_width()
    delta = rng.standard_normal(width) * scale
    new_attrs = {
        vid: np.asarray(g.vertices[vid].attrs) + delta + _jitter(rng, width, scale)
        for vid in cohort
    }
    _move_cohort(g, cohort, new_attrs)
    return anchor, "vertex", cohort, {"scale": scale}


def _op_scale_cohort(g, op, policy, rng):
    anchor = _any_vertex(g, rng)
    cohort = select_cohort(g, anchor, policy, rng)
    spread = float(op.params.get("spread", 0.1))
    factor = 1.0 + float(rng.uniform(-spread, spread))
    pts = {vid: np.asarray(g.vertices[vid].attrs) for vid in cohort}
    centroid = np.mean(list(pts.values()), axis=0)
    jitter_scale = _auto_scale(g, op)
    width = g.attr_width()
    new_attrs = {
        vid: centroid + factor * (pts[vid] - centroid) + _jitter(rng, width, jitter_scale)
        for vid in cohort
    }
    _move_cohort(g, cohort, new_attrs)
    return anchor, "vertex", cohort, {"factor": factor}


def _rotation_matrix(axis: np.ndarray, angle: float) -> np.ndarray:
    axis = axis / np.linalg.norm(axis)
    x, y, z = axis
    c, s = math.cos(angle), math.sin(angle)
    t = 1.0 - c
    return np.array(
        [
            [t * x * x + c, t * x * y - s * z, t * x * z + s * y],
            [t * x * y + s * z, t * y * y + c, t * y * z - s * x],
            [t * x * z - s * y, t * y * z + s * x, t * z * z + c],
        ]
    )


def _op_rotate_cohort(g, op, policy, rng):
    _require(g.attr_width() >= 3, "rotation needs 3-component positions")
    anchor = _any_vertex(g, rng)
    cohort = select_cohort(g, anchor, policy, rng)
    max_angle = float(op.params.get("max_angle", math.pi / 6))
    angle = float(rng.uniform(-max_angle, max_angle))
    axis = rng.standard_normal(3)
    while float(np.linalg.norm(axis)) == 0.0:
        axis = rng.standard_normal(3)
    rot = _rotation_matrix(axis, angle)
    pts = {vid: np.asarray(g.vertices[vid].attrs) for vid in cohort}
    centroid = np.mean([p[:3] for p in pts.values()], axis=0)
    jitter_scale = _auto_scale(g, op)
    new_attrs = {}
    for vid in cohort:
        attrs = pts[vid].copy()
        attrs[:3] = centroid + rot @ (attrs[:3] - centroid)
        attrs[:3] += _jitter(rng, 3, jitter_scale)
        new_attrs[vid] = attrs
    _move_cohort(g, cohort, new_attrs)
    return anchor, "vertex", cohort, {"angle": angle}


def _op_smooth_cohort(g, op, policy, rng):
    anchor = _any_vertex(g, rng)
    cohort = select_cohort(g, anchor, policy, rng)
    lam = float(op.params.get("smooth_lambda", 0.5))
    # Targets come from pre-move positions, so the step order cannot matter.
    needed = set(cohort)
    neighborhood = {vid: sorted(neighbors(g, vid, 1)) for vid in cohort}
    for nbs in neighborhood.values():
        needed.update(nbs)
    originals = {vid: np.asarray(g.vertices[vid].attrs) for vid in needed}
    new_attrs = {}
    for vid in cohort:
        nbs = neighborhood[vid]
        if not nbs:
            new_attrs[vid] = originals[vid]
            continue
        mean_nb = np.mean([originals[n] for n in nbs], axis=0)
        new_attrs[vid] = originals[vid] + lam * (mean_nb - originals[vid])
    _move_cohort(g, cohort, new_attrs)
    return anchor, "vertex", cohort, {"smooth_lambda": lam}


# -- structural edits --------------------------------------------------------


def _op_insert_vertex_on_edge(g, op, policy, rng):
    eid = _any_edge(g, rng)
    edge = g.edges[eid]
    a, b = edge.u, edge.v
    old_faces = [g.faces[fid] for fid in sorted(g._vertex_faces[a] & g._vertex_faces[b])]
    mid = tuple(
        (x + y) / 2.0 for x, y in zip(g.vertices[a].attrs, g.vertices[b].attrs)
    )
    g.remove_edge(eid)
    m = g.add_vertex(mid)
    g.add_edge(a, m)
    g.add_edge(m, b)
    for old in old_faces:
        corners = old.corners
        for i in range(3):
            s, t = corners[i], corners[(i + 1) % 3]
            if {s, t} == {a, b}:
                third = corners[(i + 2) % 3]
                g.ensure_edge(m, third)
                g.add_face(s, m, third)
                g.add_face(m, t, third)
                break
    return m, "vertex", [m], {"split_edge": eid}


def _op_add_vertex(g, op, policy, rng):
    attrs = _random_bbox_point(g, rng)
    connected = False
    corners: tuple[int, ...] = ()
    if g.family is _MESH and g.faces and rng.random() < 0.5:
        # Edge additions are restricted to the corners of one existing triangle.
        fid = _any_face(g, rng)
        corners = g.faces[fid].corners
        connected = True
    vid = g.add_vertex(attrs)
    for c in corners:
        g.ensure_edge(vid, c)
    return vid, "vertex", [vid], {"connected": 1.0 if connected else 0.0}


def _op_delete_vertex(g, op, policy, rng):
    vid = _any_vertex(g, rng)
    if g.family is _SEQ:
        prev_ids = sorted(e.u for e in map(g.edges.get, g._vertex_edges[vid]) if e.v == vid)
        next_ids = sorted(e.v for e in map(g.edges.get, g._vertex_edges[vid]) if e.u == vid)
        g.remove_vertex(vid)
        for p in prev_ids:
            for n in next_ids:
                if p != n and g.edge_between(p, n) is None:
                    g.add_edge(p, n)
        return vid, "vertex", [vid], {}
    g.remove_vertex(vid)
    return vid, "vertex", [vid], {}


def _op_delete_edge(g, op, policy, rng):
    eid = _any_edge(g, rng)
    g.remove_edge(eid)
    return eid, "edge", [eid], {}


def _op_add_edge(g, op, policy, rng):
    ids = sorted(g.vertices)
    _require(len(ids) >= 2, "need two vertices")
    if g.family is _MESH:
        _require(bool(g.faces), "mesh edge addition needs a triangle to anchor to")
        fid = _any_face(g, rng)
        corners = g.faces[fid].corners
        outside = [v for v in ids if v not in corners]
        _require(bool(outside), "no vertex outside the chosen triangle")
        for _ in range(30):
            u = _pick(outside, rng)
            candidates = [c for c in corners if g.edge_between(u, c) is None]
            if candidates:
                target = min(
                    candidates,
                    key=lambda c: (attr_distance(g.vertices[u].attrs, g.vertices[c].attrs), c),
                )
                eid = g.add_edge(u, target)
                return eid, "edge", [eid], {"face": fid}
        raise OpNotApplicableError("no connectable vertex found near the triangle")
    for _ in range(30):
        u = _pick(ids, rng)
        v = _pick(ids, rng)
        if u != v and g.edge_between(u, v) is None:
            eid = g.add_edge(u, v)
            return eid, "edge", [eid], {}
    raise OpNotApplicableError("no unconnected vertex pair found")


def _op_delete_face(g, op, policy, rng):
    fid = _any_face(g, rng)
    g.remove_face(fid)
    return fid, "face", [fid], {}


def _op_edge_flip(g, op, policy, rng):
    _require(bool(g.edges), "graph has no edges")
    eids = sorted(g.edges)
    for _ in range(30):
        eid = _pick(eids, rng)
        e = g.edges[eid]
        fids = sorted(g._vertex_faces[e.u] & g._vertex_faces[e.v])
        if len(fids) != 2:
            continue
        f1, f2 = (g.faces[f] for f in fids)
        c = next(v for v in f1.corners if v not in (e.u, e.v))
        d = next(v for v in f2.corners if v not in (e.u, e.v))
        if c == d or g.edge_between(c, d) is not None:
            continue
        a, b = e.u, e.v
        g.remove_edge(eid)  # cascades both faces
        g.add_edge(c, d)
        g.add_face(c, d, b)
        g.add_face(d, c, a)
        return eid, "edge", [eid], {"opposite_a": c, "opposite_b": d}
    raise OpNotApplicableError("no flippable edge found")


def _op_edge_collapse(g, op, policy, rng):
    eid = _any_edge(g, rng)
    e = g.edges[eid]
    a, b = e.u, e.v
    mid = tuple((x + y) / 2.0 for x, y in zip(g.vertices[a].attrs, g.vertices[b].attrs))
    surviving = []
    for fid in sorted(g._vertex_faces[b]):
        corners = g.faces[fid].corners
        if a in corners:
            continue  # collapses away with the edge
        surviving.append(tuple(a if v == b else v for v in corners))
    g.set_vertex_attrs(a, mid)
    for corners in surviving:
        if len(set(corners)) != 3:
            continue
        x, y, z = corners
        ok = True
        for u, v in ((x, y), (y, z), (z, x)):
            if u == v:
                ok = False
                break
            g.ensure_edge(u, v)
        if ok:
            g.add_face(x, y, z)
    g.remove_vertex(b)
    g.refresh_edge_weights([a])
    return eid, "edge", [eid], {"kept": a, "removed": b}


def _op_face_split(g, op, policy, rng):
    fid = _any_face(g, rng)
    a, b, c = g.faces[fid].corners
    centroid = tuple(
        (x + y + z) / 3.0
        for x, y, z in zip(g.vertices[a].attrs, g.vertices[b].attrs, g.vertices[c].attrs)
    )
    m = g.add_vertex(centroid)
    g.remove_face(fid)
    for u, v in ((a, b), (b, c), (c, a)):
        g.ensure_edge(m, u)
        g.ensure_edge(m, v)
        g.add_face(u, v, m)
    return fid, "face", [m], {"new_vertex": m}


def _op_duplicate_vertex_fan(g, op, policy, rng):
    candidates = sorted(vid for vid, fids in g._vertex_faces.items() if fids)
    _require(bool(candidates), "no vertex with incident faces")
    vid = _pick(candidates, rng)
    fids = sorted(g._vertex_faces[vid])
    normal = np.zeros(3)
    for fid in fids:
        normal += np.asarray(face_normal(g, fid))
    norm = float(np.linalg.norm(normal))
    direction = normal / norm if norm > 0 else np.array([1.0, 0.0, 0.0])
    offset = 0.02 * g.bbox_diagonal() or 0.02
    attrs = np.asarray(g.vertices[vid].attrs)
    attrs[:3] += direction * offset
    dup = g.add_vertex(tuple(attrs))
    for fid in fids:
        corners = tuple(dup if v == vid else v for v in g.faces[fid].corners)
        x, y, z = corners
        for u, v in ((x, y), (y, z), (z, x)):
            g.ensure_edge(u, v)
        g.add_face(x, y, z)
    return vid, "vertex", [vid, dup], {"duplicate": dup}


_DISPATCH = {
    OpKind.ADD_VERTEX_NOISE: _op_add_vertex_noise,
    OpKind.ADD_EDGE_NOISE: _op_add_edge_noise,
    OpKind.SET_VERTEX_VALUE: _op_set_vertex_value,
    OpKind.SET_EDGE_VALUE: _op_set_edge_value,
    OpKind.INSERT_VERTEX_ON_EDGE: _op_insert_vertex_on_edge,
    OpKind.ADD_VERTEX: _op_add_vertex,
    OpKind.DELETE_VERTEX: _op_delete_vertex,
    OpKind.DELETE_EDGE: _op_delete_edge,
    OpKind.ADD_EDGE: _op_add_edge,
    OpKind.DELETE_FACE: _op_delete_face,
    OpKind.EDGE_FLIP: _op_edge_flip,
    OpKind.EDGE_COLLAPSE: _op_edge_collapse,
    OpKind.FACE_SPLIT: _op_face_split,
    OpKind.TRANSLATE_COHORT: _op_translate_cohort,
    OpKind.SCALE_COHORT: _op_scale_cohort,
    OpKind.ROTATE_COHORT: _op_rotate_cohort,
    OpKind.SMOOTH_COHORT: _op_smooth_cohort,
    OpKind.JITTER_SINGLE_CHANNEL: _op_jitter_single_channel,
    OpKind.SWAP_VERTEX_ATTRS: _op_swap_vertex_attrs,
    OpKind.DUPLICATE_VERTEX_FAN: _op_duplicate_vertex_fan,
}


def apply_inplace(
    g: Graph, op: MutationOp, policy: NeighborPolicy, rng, label: str = "s0"
) -> MutationRecord:
    """Apply an operator to an exclusively owned graph."""
    if g.family not in APPLICABLE_FAMILIES[op.kind]:
        raise OpNotApplicableError(
            f"{op.kind.value} does not apply to {g.family.value} graphs"
        )
    anchor, anchor_kind, cohort, extra = _DISPATCH[op.kind](g, op, policy, rng)
    params = dict(op.params)
    params.update(extra)
    return MutationRecord(
        op_kind=op.kind.value,
        anchor=anchor,
        anchor_kind=anchor_kind,
        cohort=tuple(cohort),
        params=params,
        rng_state_label=label,
    )


def apply(g: Graph, op: MutationOp, policy: NeighborPolicy, rng) -> tuple[Graph, MutationRecord]:
    """Apply an operator to a copy of the graph, returning (mutant, record)."""
    work = g.copy()
    record = apply_inplace(work, op, policy, rng)
    return work, record
