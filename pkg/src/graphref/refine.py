"""Constraint-guided repair of mutated graphs.

The refine loop verifies, maps the violated constraint kinds to local repair
stages, applies the stages in a fixed order, and re-verifies until the graph
is clean or the iteration budget runs out. Stages recompute their targets
from the current graph state, so a cascade (removing a degenerate face leaves
a dangling edge, removing that edge isolates a vertex) resolves within one
iteration instead of inflating the next verify's violation count.

Stage order inside an iteration:

1. merge duplicate vertices        (area violations)
2. remove degenerate triangles     (area violations)
3. trim excess faces per edge      (connected_face violations, count too high)
4. merge collinear pass-through vertices
5. split bowtie vertices
6. remove dangling edges
7. handle isolated vertices        (remove, or connect into nearest triangle)
8. flip face winding               (norm violations)

Stages 4 to 7 run whenever the corresponding constraints exist and the report
contained any structural violation; they no-op when nothing matches.
"""

import math
from dataclasses import dataclass
from enum import Enum

import numpy as np

from .constraints.nodes import (
    EPSILON,
    AttrName,
    Constraint,
    ConstraintSpec,
    FieldAccess,
    OpCall,
)
from .constraints.verifier import ViolationReport, compare_values, verify
from .graph import (
    Graph,
    GraphFamily,
    face_area,
    face_centroid,
    face_normal,
    vertex_fan_components,
)


class RefineStatus(Enum):
    CLEAN = "clean"
    REPAIRED = "repaired"
    DISCARDED = "discarded"


class RepairKind(Enum):
    MERGE_DUPLICATE_VERTICES = "MergeDuplicateVertices"
    REMOVE_DEGENERATE_TRIANGLES = "RemoveDegenerateTriangles"
    MERGE_COLLINEAR_VERTICES = "MergeCollinearVertices"
    REMOVE_ISOLATED_VERTICES = "RemoveIsolatedVertices"
    RESTRICT_EDGE_TO_TRIANGLE = "RestrictEdgeToTriangle"
    REMOVE_DANGLING_EDGES = "RemoveDanglingEdges"
    FLIP_FACE_WINDING = "FlipFaceWinding"
    SPLIT_BOWTIE_VERTEX = "SplitBowtieVertex"
    TRIM_EXCESS_FACES = "TrimExcessFaces"


class IsolatedMode(Enum):
    REMOVE = "remove"
    CONNECT_WITHIN_TRIANGLE = "connect_within_triangle"


@dataclass(frozen=True)
class RepairAction:
    kind: RepairKind
    affected: tuple[int, ...]

    def to_dict(self) -> dict:
        return {"kind": self.kind.value, "affected": list(self.affected)}


@dataclass(frozen=True)
class Tolerances:
    merge_tol: float | None = None  # None: 1e-6 * bbox diagonal
    angle_tol: float = 1e-3
    isolated_mode: IsolatedMode = IsolatedMode.CONNECT_WITHIN_TRIANGLE


@dataclass(frozen=True)
class RefineOutcome:
    status: RefineStatus
    iterations: int
    actions: tuple[RepairAction, ...]
    final_report: ViolationReport
    violation_counts: tuple[int, ...]  # one entry per verify call, initial first
    initial_by_kind: tuple[tuple[str, int], ...] = ()  # pre-repair histogram

    @property
    def violations_before(self) -> int:
        return self.violation_counts[0]

    @property
    def violations_after(self) -> int:
        return len(self.final_report)


def _resolve(value, epsilon: float):
    return epsilon if value is EPSILON else value


def _pure_kind(c: Constraint) -> str | None:
    """'area', 'connected_face', 'fan_connected', or 'norm' when every
    comparison in the constraint uses that operand; None for mixed bodies."""
    kinds = set()
    for cmp in c.comparisons:
        if isinstance(cmp.lhs, OpCall):
            kinds.add(cmp.lhs.name)
        elif isinstance(cmp.lhs, FieldAccess) and cmp.lhs.attr is AttrName.NORM:
            kinds.add("norm")
        else:
            kinds.add("other")
    if len(kinds) == 1:
        kind = kinds.pop()
        if kind in ("area", "connected_face", "fan_connected", "norm"):
            return kind
    return None


def _count_satisfies(c: Constraint, count: int, epsilon: float) -> bool:
    return any(
        compare_values(count, cmp.op, _resolve(cmp.value, epsilon)) for cmp in c.comparisons
    )


# -- merge duplicate vertices -------------------------------------------------


def _merge_duplicates_inplace(g: Graph, tol: float) -> list[int]:
    """Union-find over the position-proximity relation; returns removed ids."""
    if tol <= 0 or len(g.vertices) < 2:
        return []
    ids = sorted(g.vertices)
    pos = {vid: g.vertices[vid].position for vid in ids}
    cells: dict[tuple[int, int, int], list[int]] = {}
    for vid in ids:
        x, y, z = pos[vid]
        key = (math.floor(x / tol), math.floor(y / tol), math.floor(z / tol))
        cells.setdefault(key, []).append(vid)

    parent = {vid: vid for vid in ids}

    def find(a: int) -> int:
        while parent[a] != a:
            parent[a] = parent[parent[a]]
            a = parent[a]
        return a

    def union(a: int, b: int) -> None:
        ra, rb = find(a), find(b)
        if ra != rb:
            lo, hi = (ra, rb) if ra < rb else (rb, ra)
            parent[hi] = lo  # cluster representative = lowest id

    for (cx, cy, cz), members in cells.items():
        for dx in (0, 1):
            for dy in (-1, 0, 1):
                for dz in (-1, 0, 1):
                    if dx == 0 and (dy < 0 or (dy == 0 and dz < 0)):
                        continue  # visit each unordered cell pair once
                    other = cells.get((cx + dx, cy + dy, cz + dz))
                    if other is None:
                        continue
                    for a in members:
                        for b in other:
                            if b != a and math.dist(pos[a], pos[b]) < tol:
                                union(a, b)

    clusters: dict[int, list[int]] = {}
    for vid in ids:
        clusters.setdefault(find(vid), []).append(vid)
    clusters = {rep: sorted(ms) for rep, ms in clusters.items() if len(ms) > 1}
    if not clusters:
        return []

    remap = {vid: rep for rep, ms in clusters.items() for vid in ms}
    dead_set = {vid for vid, rep in remap.items() if vid != rep}
    centroids = {
        rep: tuple(np.mean([g.vertices[m].attrs for m in ms], axis=0))
        for rep, ms in clusters.items()
    }

    face_triples = []
    for fid in sorted(g.faces):
        corners = g.faces[fid].corners
        if any(c in dead_set for c in corners):
            face_triples.append(tuple(remap.get(c, c) for c in corners))
            g.remove_face(fid)
    edge_pairs = []
    for eid in sorted(g.edges):
        e = g.edges[eid]
        if e.u in dead_set or e.v in dead_set:
            edge_pairs.append((remap.get(e.u, e.u), remap.get(e.v, e.v)))
            g.remove_edge(eid)
    for vid in sorted(dead_set):
        g.remove_vertex(vid)
    for rep, centroid in sorted(centroids.items()):
        g.set_vertex_attrs(rep, centroid)
    g.refresh_edge_weights(sorted(centroids))
    for u, v in edge_pairs:
        if u != v and g.edge_between(u, v) is None:
            g.add_edge(u, v)
    for corners in face_triples:
        if len(set(corners)) == 3:
            g.add_face(*corners)
    return sorted(dead_set)


def merge_duplicate_vertices(g: Graph, tol: float) -> Graph:
    """Merge vertices whose positions differ by less than tol (transitively).

    The surviving vertex keeps the lowest id and moves to the cluster
    centroid; edges and face corners re-target it, collapsing self-loops,
    duplicate edges, and faces with repeated corners.
    """
    work = g.copy()
    _merge_duplicates_inplace(work, tol)
    return work


# -- remove degenerate triangles ----------------------------------------------


def _face_geometry_arrays(g: Graph):
    """(face ids, areas, unit normals) as arrays; degenerate normals are zero."""
    fids = sorted(g.faces)
    if not fids:
        return fids, np.zeros(0), np.zeros((0, 3))
    vids = sorted(g.vertices)
    row_of = {vid: i for i, vid in enumerate(vids)}
    verts = g.vertices
    pos = np.fromiter(
        (c for vid in vids for c in verts[vid].attrs[:3]), dtype=float, count=3 * len(vids)
    ).reshape(-1, 3)
    faces = g.faces
    corners = np.fromiter(
        (row_of[c] for fid in fids for c in faces[fid].corners),
        dtype=np.intp,
        count=3 * len(fids),
    ).reshape(-1, 3)
    tri = pos[corners]
    cross = np.cross(tri[:, 1] - tri[:, 0], tri[:, 2] - tri[:, 0])
    mags = np.sqrt((cross * cross).sum(axis=1))
    safe = np.where(mags > 0.0, mags, 1.0)
    normals = np.where(mags[:, None] > 0.0, cross / safe[:, None], 0.0)
    return fids, 0.5 * mags, normals


def _remove_degenerate_inplace(g: Graph, epsilon: float) -> list[int]:
    fids, areas, _ = _face_geometry_arrays(g)
    removed = []
    for row in np.nonzero(areas <= epsilon)[0]:
        fid = fids[row]
        g.remove_face(fid)
        removed.append(fid)
    return removed


def remove_degenerate_triangles(g: Graph, epsilon: float) -> Graph:
    """Remove every face whose area is at or below epsilon. Edges are kept."""
    work = g.copy()
    _remove_degenerate_inplace(work, epsilon)
    return work


# -- merge collinear pass-through vertices -------------------------------------


def _merge_collinear_inplace(g: Graph, angle_tol: float) -> list[int]:
    removed = []
    threshold = -math.cos(angle_tol)
    for vid in sorted(g.vertices):
        if vid not in g.vertices:
            continue  # removed earlier in this sweep
        if g._vertex_faces.get(vid):
            continue
        eids = sorted(g._vertex_edges.get(vid, ()))
        if len(eids) != 2:
            continue
        e1, e2 = (g.edges[e] for e in eids)
        a, b = e1.other(vid), e2.other(vid)
        if a == b:
            continue
        p = g.vertices[vid].position
        pa = g.vertices[a].position
        pb = g.vertices[b].position
        d1 = (pa[0] - p[0], pa[1] - p[1], pa[2] - p[2])
        d2 = (pb[0] - p[0], pb[1] - p[1], pb[2] - p[2])
        n1 = math.sqrt(sum(x * x for x in d1))
        n2 = math.sqrt(sum(x * x for x in d2))
        if n1 == 0.0 or n2 == 0.0:
            continue
        cosine = (d1[0] * d2[0] + d1[1] * d2[1] + d1[2] * d2[2]) / (n1 * n2)
        if cosine > threshold:
            continue  # not antiparallel enough
        g.remove_vertex(vid)
        if g.edge_between(a, b) is None:
            g.add_edge(a, b)
        removed.append(vid)
    return removed


def merge_collinear_vertices(g: Graph, angle_tol: float) -> Graph:
    """Fuse degree-2 face-free vertices whose two edges are antiparallel.

    The vertex vanishes and its two edges become one direct edge, restoring
    the segment an on-edge insertion split.
    """
    work = g.copy()
    _merge_collinear_inplace(work, angle_tol)
    return work


# -- isolated vertices ----------------------------------------------------------


def _connect_into_triangle(g: Graph, vid: int, epsilon: float) -> bool:
    """Connect vid to the corners of the nearest face, replacing it with the
    three sub-faces through vid. Returns False when the construction would
    create a degenerate sub-face (caller falls back to removal)."""
    if not g.faces:
        return False
    p = g.vertices[vid].position
    nearest = min(sorted(g.faces), key=lambda fid: (math.dist(face_centroid(g, fid), p), fid))
    a, b, c = g.faces[nearest].corners
    base_normal = face_normal(g, nearest)
    pts = {x: g.vertices[x].position for x in (a, b, c)}
    pts[vid] = p

    def sub_normal_area(u, v):
        ux, uy, uz = (pts[v][i] - pts[u][i] for i in range(3))
        wx, wy, wz = (p[i] - pts[u][i] for i in range(3))
        cx = uy * wz - uz * wy
        cy = uz * wx - ux * wz
        cz = ux * wy - uy * wx
        mag = math.sqrt(cx * cx + cy * cy + cz * cz)
        return (cx, cy, cz), 0.5 * mag

    subs = []
    for u, v in ((a, b), (b, c), (c, a)):
        normal, area = sub_normal_area(u, v)
        if area <= epsilon:
            return False
        dot = sum(n * m for n, m in zip(normal, base_normal))
        subs.append((u, v, vid) if dot >= 0 else (v, u, vid))
    g.remove_face(nearest)
    for u, v, m in subs:
        g.ensure_edge(m, u)
        g.ensure_edge(m, v)
        g.add_face(u, v, m)
    return True


def _isolated_inplace(
    g: Graph, mode: IsolatedMode, epsilon: float
) -> tuple[list[int], list[int]]:
    """Returns (connected ids, removed ids)."""
    connected, removed = [], []
    for vid in sorted(g.vertices):
        if g.degree(vid) != 0:
            continue
        if mode is IsolatedMode.CONNECT_WITHIN_TRIANGLE and _connect_into_triangle(
            g, vid, epsilon
        ):
            connected.append(vid)
        else:
            g.remove_vertex(vid)
            removed.append(vid)
    return connected, removed


def handle_isolated_vertices(
    g: Graph, mode: IsolatedMode, epsilon: float = 1e-9
) -> Graph:
    """Remove zero-degree vertices, or fan them into the nearest triangle."""
    work = g.copy()
    _isolated_inplace(work, mode, epsilon)
    return work


# -- remaining stage cores -----------------------------------------------------


def _satisfying_counts(cf_constraints: list[Constraint], epsilon: float, top: int) -> set[int]:
    """Face counts in [0, top] that satisfy every connectivity constraint."""
    return {
        k
        for k in range(top + 1)
        if all(_count_satisfies(c, k, epsilon) for c in cf_constraints)
    }


def _trim_excess_inplace(g: Graph, cf_constraints: list[Constraint], epsilon: float) -> list[int]:
    removed = []
    eids = sorted(g.edges)
    if not eids:
        return removed
    counter = g._edge_face_count
    counts = np.fromiter((counter[eid] for eid in eids), dtype=np.intp, count=len(eids))
    ok_counts = _satisfying_counts(cf_constraints, epsilon, int(counts.max(initial=0)))
    ok_mask = np.isin(counts, sorted(ok_counts)) | (counts == 0)
    for row in np.nonzero(~ok_mask)[0]:
        eid = eids[row]
        if eid not in g.edges:
            continue
        e = g.edges[eid]
        incident = sorted(g._vertex_faces[e.u] & g._vertex_faces[e.v])
        count = len(incident)
        if count == 0:
            continue
        if all(_count_satisfies(c, count, epsilon) for c in cf_constraints):
            continue
        target = None
        for k in range(count - 1, 0, -1):
            if all(_count_satisfies(c, k, epsilon) for c in cf_constraints):
                target = k
                break
        if target is None:
            continue  # face removal cannot satisfy this constraint
        ranked = sorted(incident, key=lambda fid: (-face_area(g, fid), fid))
        for fid in ranked[target:]:
            g.remove_face(fid)
            removed.append(fid)
    return removed


def _dangling_inplace(g: Graph, cf_constraints: list[Constraint], epsilon: float) -> list[int]:
    if all(_count_satisfies(c, 0, epsilon) for c in cf_constraints):
        return []
    removed = []
    counter = g._edge_face_count
    for eid in sorted(g.edges):
        if counter[eid] == 0:
            g.remove_edge(eid)
            removed.append(eid)
    return removed


def _split_bowties_inplace(g: Graph, merge_tol: float) -> list[int]:
    affected = []
    diag = g.bbox_diagonal()
    offset = max(10.0 * merge_tol, 1e-4 * diag, 1e-12)
    from .graph import is_fan_connected

    for vid in sorted(g.vertices):
        if vid not in g.vertices:
            continue
        if not g._vertex_faces.get(vid) or is_fan_connected(g, vid):
            continue
        components = vertex_fan_components(g, vid)
        if len(components) < 2:
            continue
        components.sort(key=lambda comp: (-len(comp), comp[0]))
        affected.append(vid)
        for comp in components[1:]:
            normal = np.zeros(3)
            for fid in comp:
                normal += np.asarray(face_normal(g, fid))
            mag = float(np.linalg.norm(normal))
            direction = normal / mag if mag > 0 else np.array([1.0, 0.0, 0.0])
            attrs = np.asarray(g.vertices[vid].attrs, dtype=float)
            attrs[:3] += direction * offset
            dup = g.add_vertex(tuple(attrs))
            affected.append(dup)
            comp_corners: set[int] = set()
            for fid in comp:
                corners = g.faces[fid].corners
                comp_corners.update(c for c in corners if c != vid)
                new_corners = tuple(dup if c == vid else c for c in corners)
                x, y, z = new_corners
                for u, v in ((x, y), (y, z), (z, x)):
                    g.ensure_edge(u, v)
                g.remove_face(fid)
                g.add_face(x, y, z)
            for x in sorted(comp_corners):
                eid = g.edge_between(vid, x)
                if eid is None:
                    continue
                e = g.edges[eid]
                if not (g._vertex_faces[e.u] & g._vertex_faces[e.v]):
                    g.remove_edge(eid)
    return affected


_NP_CMP = {
    "==": np.equal,
    "!=": np.not_equal,
    "<=": np.less_equal,
    ">=": np.greater_equal,
    "<": np.less,
    ">": np.greater,
}

_AXIS_INDEX = {"x": 0, "y": 1, "z": 2}


def _norm_satisfied_mask(normals: np.ndarray, c: Constraint, epsilon: float) -> np.ndarray:
    ok = np.zeros(len(normals), dtype=bool)
    for cmp in c.comparisons:
        column = normals[:, _AXIS_INDEX[cmp.lhs.field]]
        ok |= _NP_CMP[cmp.op](column, _resolve(cmp.value, epsilon))
    return ok


def _flip_winding_inplace(
    g: Graph, norm_constraints: list[Constraint], epsilon: float
) -> list[int]:
    flipped = []
    fids, _, normals = _face_geometry_arrays(g)
    if not fids:
        return flipped
    ok_all = np.ones(len(fids), dtype=bool)
    for c in norm_constraints:
        ok_all &= _norm_satisfied_mask(normals, c, epsilon)
    if ok_all.all():
        return flipped
    negated = -normals
    ok_negated = np.ones(len(fids), dtype=bool)
    for c in norm_constraints:
        ok_negated &= _norm_satisfied_mask(negated, c, epsilon)
    for row in np.nonzero(~ok_all & ok_negated)[0]:
        fid = fids[row]
        a, b, c_ = g.faces[fid].corners
        g.replace_face_corners(fid, (a, c_, b))
        flipped.append(fid)
    return flipped


# -- the refine loop -----------------------------------------------------------


def resolve_tolerances(g: Graph, tolerances: Tolerances | None) -> tuple[float, float, IsolatedMode]:
    tolerances = tolerances or Tolerances()
    merge_tol = tolerances.merge_tol
    if merge_tol is None:
        diag = g.bbox_diagonal()
        merge_tol = 1e-6 * diag if diag > 0 else 1e-12
    return merge_tol, tolerances.angle_tol, tolerances.isolated_mode


def refine(
    g: Graph,
    spec: ConstraintSpec,
    epsilon: float = 1e-9,
    tolerances: Tolerances | None = None,
    max_iters: int = 10,
) -> tuple[Graph, RefineOutcome]:
    """Repair a structurally valid graph until it satisfies the spec.

    Returns the (possibly repaired) graph and the outcome: Clean when the
    first verify finds nothing, Repaired when a later verify comes back
    empty, Discarded when the iteration budget is exhausted. A Discarded
    graph is returned in its last repaired state with the residual report.

    The input graph is never modified; callers that own their graph and do
    not need it afterwards can use refine_owned to skip the defensive copy.
    """
    return refine_owned(g.copy(), spec, epsilon, tolerances, max_iters)


def refine_owned(
    work: Graph,
    spec: ConstraintSpec,
    epsilon: float = 1e-9,
    tolerances: Tolerances | None = None,
    max_iters: int = 10,
) -> tuple[Graph, RefineOutcome]:
    """refine() over an exclusively owned graph, repaired in place."""
    if max_iters < 1:
        raise ValueError("max_iters must be >= 1")
    merge_tol, angle_tol, isolated_mode = resolve_tolerances(work, tolerances)

    cf_cs = [c for c in spec.constraints if _pure_kind(c) == "connected_face"]
    fan_cs = [c for c in spec.constraints if _pure_kind(c) == "fan_connected"]
    norm_cs = [c for c in spec.constraints if _pure_kind(c) == "norm"]
    kind_of: dict[int, str | None] = {
        i: _pure_kind(c) for i, c in enumerate(spec.constraints)
    }

    actions: list[RepairAction] = []
    counts: list[int] = []
    report = verify(spec, work, epsilon)
    counts.append(len(report))
    initial_by_kind = tuple(sorted(report.by_kind().items()))
    if report.is_clean():
        return work, RefineOutcome(
            RefineStatus.CLEAN, 0, (), report, tuple(counts), initial_by_kind
        )

    def record(kind: RepairKind, affected: list[int]) -> bool:
        if affected:
            actions.append(RepairAction(kind, tuple(affected)))
        return bool(affected)

    iterations = 0
    while iterations < max_iters:
        iterations += 1
        violated = {kind_of.get(v.constraint_index) for v in report.entries}
        has_area = "area" in violated
        has_cf = "connected_face" in violated
        has_fan = "fan_connected" in violated
        has_norm = "norm" in violated
        structural = has_area or has_cf or has_fan
        mesh = work.family is GraphFamily.TRIANGLE_MESH

        changed = False
        if mesh and has_area:
            changed |= record(
                RepairKind.MERGE_DUPLICATE_VERTICES,
                _merge_duplicates_inplace(work, merge_tol),
            )
            changed |= record(
                RepairKind.REMOVE_DEGENERATE_TRIANGLES,
                _remove_degenerate_inplace(work, epsilon),
            )
        if mesh and has_cf and cf_cs:
            changed |= record(
                RepairKind.TRIM_EXCESS_FACES, _trim_excess_inplace(work, cf_cs, epsilon)
            )
        if mesh and fan_cs and structural:
            changed |= record(
                RepairKind.MERGE_COLLINEAR_VERTICES,
                _merge_collinear_inplace(work, angle_tol),
            )
            changed |= record(
                RepairKind.SPLIT_BOWTIE_VERTEX, _split_bowties_inplace(work, merge_tol)
            )
        if mesh and cf_cs and structural:
            changed |= record(
                RepairKind.REMOVE_DANGLING_EDGES, _dangling_inplace(work, cf_cs, epsilon)
            )
        if mesh and fan_cs and structural:
            connected, removed = _isolated_inplace(work, isolated_mode, epsilon)
            changed |= record(RepairKind.RESTRICT_EDGE_TO_TRIANGLE, connected)
            changed |= record(RepairKind.REMOVE_ISOLATED_VERTICES, removed)
        if mesh and norm_cs and (has_norm or changed):
            # `changed` matters: repairs above may add faces (triangle
            # subdivision, bowtie duplicates) whose winding needs fixing now,
            # not one verify round later.
            changed |= record(
                RepairKind.FLIP_FACE_WINDING, _flip_winding_inplace(work, norm_cs, epsilon)
            )

        if not changed:
            # No stage can make progress; further iterations would verify the
            # same graph. Report the full budget as consumed.
            iterations = max_iters
            break
        report = verify(spec, work, epsilon)
        counts.append(len(report))
        if report.is_clean():
            return work, RefineOutcome(
                RefineStatus.REPAIRED,
                iterations,
                tuple(actions),
                report,
                tuple(counts),
                initial_by_kind,
            )
    return work, RefineOutcome(
        RefineStatus.DISCARDED,
        iterations,
        tuple(actions),
        report,
        tuple(counts),
        initial_by_kind,
    )
