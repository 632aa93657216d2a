"""Attributed-graph data model shared by every other module.

A :class:`Graph` holds vertices with numeric attribute vectors, weighted
edges, and (for triangle meshes) oriented triangular faces. Element ids are
handed out by monotonic counters and never reused, so a deleted element's id
stays resolvable as "tombstoned" in mutation records and repair logs.

Element values (:class:`Vertex`, :class:`Edge`, :class:`Face`) are frozen;
editing the graph replaces whole elements. That makes :meth:`Graph.copy`
cheap (shallow dict copies) and lets copies be shared across threads safely:
a graph handed to another owner must not be mutated afterwards.

Mesh positions are the first three attribute components. Extra components
are carried opaquely.
"""

import math
from collections import deque
from dataclasses import dataclass
from enum import Enum

import numpy as np

from .errors import ElementNotFoundError, FamilyMismatchError, InvariantViolationError

Vec3 = tuple[float, float, float]


class GraphFamily(Enum):
    SEQUENCE = "sequence"
    GRID = "grid"
    TRIANGLE_MESH = "triangle_mesh"
    RELATIONAL = "relational"

    @property
    def directed(self) -> bool:
        return self is GraphFamily.SEQUENCE


@dataclass(frozen=True, slots=True)
class Vertex:
    id: int
    attrs: tuple[float, ...]

    @property
    def position(self) -> Vec3:
        return self.attrs[0], self.attrs[1], self.attrs[2]


@dataclass(frozen=True, slots=True)
class Edge:
    id: int
    u: int
    v: int
    weight: float

    @property
    def endpoints(self) -> tuple[int, int]:
        return self.u, self.v

    def other(self, vid: int) -> int:
        return self.v if vid == self.u else self.u


@dataclass(frozen=True, slots=True)
class Face:
    id: int
    corners: tuple[int, int, int]

    def sides(self) -> tuple[tuple[int, int], tuple[int, int], tuple[int, int]]:
        a, b, c = self.corners
        return (a, b), (b, c), (c, a)


def attr_distance(a: tuple[float, ...], b: tuple[float, ...]) -> float:
    """Euclidean distance between two attribute vectors."""
    return math.dist(a, b)


class Graph:
    """Mutable container of immutable elements, tagged with a structural family.

    Maintained invariants (see :meth:`check_invariants`):

    * every edge references two distinct live vertices;
    * at most one edge per vertex pair (ordered pair for Sequence graphs,
      unordered otherwise);
    * every face references three distinct live vertices whose three pairwise
      edges all exist;
    * Grid graphs keep exactly ``width * height`` vertices and the 4-way
      adjacency edge count.

    The public removal methods cascade so the invariants can never be
    observed broken: removing a vertex removes its edges and faces, removing
    an edge removes the faces that used it.
    """

    __slots__ = (
        "family",
        "vertices",
        "edges",
        "faces",
        "grid_dims",
        "token_table",
        "_next_vid",
        "_next_eid",
        "_next_fid",
        "_pair_edge",
        "_vertex_edges",
        "_vertex_faces",
        "_fan_cache",
        "_edge_face_count",
    )

    def __init__(self, family: GraphFamily):
        self.family = family
        self.vertices: dict[int, Vertex] = {}
        self.edges: dict[int, Edge] = {}
        self.faces: dict[int, Face] = {}
        self.grid_dims: tuple[int, int] | None = None
        # Sequence graphs: maps attribute value -> source token for re-emission.
        self.token_table: dict[float, str] | None = None
        self._next_vid = 0
        self._next_eid = 0
        self._next_fid = 0
        self._pair_edge: dict[tuple[int, int], int] = {}
        self._vertex_edges: dict[int, set[int]] = {}
        self._vertex_faces: dict[int, set[int]] = {}
        # Memoized is_fan_connected flags; entries drop when a corner's face
        # set changes. Fan status depends only on the incident face corners.
        self._fan_cache: dict[int, bool] = {}
        # Number of faces using each edge as a side, maintained incrementally.
        self._edge_face_count: dict[int, int] = {}

    # -- element access -------------------------------------------------

    def vertex(self, vid: int) -> Vertex:
        try:
            return self.vertices[vid]
        except KeyError:
            raise ElementNotFoundError("vertex", vid) from None

    def edge(self, eid: int) -> Edge:
        try:
            return self.edges[eid]
        except KeyError:
            raise ElementNotFoundError("edge", eid) from None

    def face(self, fid: int) -> Face:
        try:
            return self.faces[fid]
        except KeyError:
            raise ElementNotFoundError("face", fid) from None

    def _pair_key(self, u: int, v: int) -> tuple[int, int]:
        if self.family.directed:
            return (u, v)
        return (u, v) if u < v else (v, u)

    def edge_between(self, u: int, v: int) -> int | None:
        """Id of the edge connecting u and v, or None."""
        return self._pair_edge.get(self._pair_key(u, v))

    def degree(self, vid: int) -> int:
        self.vertex(vid)
        return len(self._vertex_edges.get(vid, ()))

    def in_out_degree(self, vid: int) -> tuple[int, int]:
        """(in, out) degrees. Undirected families report total degree for both."""
        self.vertex(vid)
        if not self.family.directed:
            d = len(self._vertex_edges.get(vid, ()))
            return d, d
        din = dout = 0
        for eid in self._vertex_edges.get(vid, ()):
            e = self.edges[eid]
            if e.u == vid:
                dout += 1
            if e.v == vid:
                din += 1
        return din, dout

    def edge_face_count(self, eid: int) -> int:
        """Number of faces bordered by this edge (maintained incrementally)."""
        self.edge(eid)
        return self._edge_face_count[eid]

    def vertex_face_ids(self, vid: int) -> set[int]:
        self.vertex(vid)
        return set(self._vertex_faces.get(vid, ()))

    def vertex_edge_ids(self, vid: int) -> set[int]:
        self.vertex(vid)
        return set(self._vertex_edges.get(vid, ()))

    # -- construction / mutation entry points ----------------------------

    def add_vertex(self, attrs: tuple[float, ...]) -> int:
        attrs = tuple(float(a) for a in attrs)
        if self.vertices:
            width = len(next(iter(self.vertices.values())).attrs)
            if len(attrs) != width:
                raise InvariantViolationError(
                    f"attribute width {len(attrs)} != graph width {width}"
                )
        vid = self._next_vid
        self._next_vid += 1
        self.vertices[vid] = Vertex(vid, attrs)
        self._vertex_edges[vid] = set()
        self._vertex_faces[vid] = set()
        return vid

    def add_edge(self, u: int, v: int, weight: float | None = None) -> int:
        if u == v:
            raise InvariantViolationError(f"self-loop on vertex {u}")
        vu, vv = self.vertex(u), self.vertex(v)
        key = self._pair_key(u, v)
        if key in self._pair_edge:
            raise InvariantViolationError(f"duplicate edge between {u} and {v}")
        if weight is None:
            weight = attr_distance(vu.attrs, vv.attrs)
        weight = float(weight)
        if not math.isfinite(weight):
            raise InvariantViolationError(f"non-finite edge weight {weight}")
        eid = self._next_eid
        self._next_eid += 1
        self.edges[eid] = Edge(eid, u, v, weight)
        self._pair_edge[key] = eid
        self._vertex_edges[u].add(eid)
        self._vertex_edges[v].add(eid)
        self._edge_face_count[eid] = 0
        return eid

    def ensure_edge(self, u: int, v: int, weight: float | None = None) -> int:
        """Return the existing edge between u and v, creating it if absent."""
        eid = self.edge_between(u, v)
        if eid is not None:
            return eid
        return self.add_edge(u, v, weight)

    def add_face(self, a: int, b: int, c: int) -> int:
        if self.family is not GraphFamily.TRIANGLE_MESH:
            raise FamilyMismatchError("faces only exist on triangle mesh graphs")
        if len({a, b, c}) != 3:
            raise InvariantViolationError(f"face corners not distinct: {(a, b, c)}")
        for vid in (a, b, c):
            self.vertex(vid)
        for u, v in ((a, b), (b, c), (c, a)):
            if self.edge_between(u, v) is None:
                raise InvariantViolationError(
                    f"face side {u}-{v} has no edge; create edges before faces"
                )
        fid = self._next_fid
        self._next_fid += 1
        self.faces[fid] = Face(fid, (a, b, c))
        for vid in (a, b, c):
            self._vertex_faces[vid].add(fid)
            self._fan_cache.pop(vid, None)
        for u, v in ((a, b), (b, c), (c, a)):
            self._edge_face_count[self._pair_edge[self._pair_key(u, v)]] += 1
        return fid

    def set_vertex_attrs(self, vid: int, attrs: tuple[float, ...]) -> None:
        old = self.vertex(vid)
        attrs = tuple(float(a) for a in attrs)
        if len(attrs) != len(old.attrs):
            raise InvariantViolationError("attribute width change is not allowed")
        self.vertices[vid] = Vertex(vid, attrs)

    def set_edge_weight(self, eid: int, weight: float) -> None:
        old = self.edge(eid)
        weight = float(weight)
        if not math.isfinite(weight):
            raise InvariantViolationError(f"non-finite edge weight {weight}")
        self.edges[eid] = Edge(eid, old.u, old.v, weight)

    def replace_face_corners(self, fid: int, corners: tuple[int, int, int]) -> None:
        """Swap a face's corner triple in place, keeping its id (used by winding flips)."""
        old = self.face(fid)
        if set(corners) != set(old.corners):
            raise InvariantViolationError("replace_face_corners may only reorder corners")
        self.faces[fid] = Face(fid, corners)

    def refresh_edge_weights(self, vids) -> None:
        """Recompute weights of all edges touching the given vertices from attrs."""
        seen: set[int] = set()
        for vid in vids:
            for eid in self._vertex_edges.get(vid, ()):
                if eid in seen:
                    continue
                seen.add(eid)
                e = self.edges[eid]
                w = attr_distance(self.vertices[e.u].attrs, self.vertices[e.v].attrs)
                self.edges[eid] = Edge(eid, e.u, e.v, w)

    def remove_face(self, fid: int) -> None:
        face = self.face(fid)
        del self.faces[fid]
        for vid in face.corners:
            self._vertex_faces[vid].discard(fid)
            self._fan_cache.pop(vid, None)
        for u, v in face.sides():
            eid = self._pair_edge.get(self._pair_key(u, v))
            if eid is not None:
                self._edge_face_count[eid] -= 1

    def remove_edge(self, eid: int) -> None:
        """Remove an edge and every face that used it as a side."""
        edge = self.edge(eid)
        for fid in sorted(self._vertex_faces.get(edge.u, set()) & self._vertex_faces.get(edge.v, set())):
            self.remove_face(fid)
        del self.edges[eid]
        del self._pair_edge[self._pair_key(edge.u, edge.v)]
        del self._edge_face_count[eid]
        self._vertex_edges[edge.u].discard(eid)
        self._vertex_edges[edge.v].discard(eid)

    def remove_vertex(self, vid: int) -> None:
        """Remove a vertex together with its incident edges and faces."""
        self.vertex(vid)
        for fid in sorted(self._vertex_faces.get(vid, set())):
            self.remove_face(fid)
        for eid in sorted(self._vertex_edges.get(vid, set())):
            self.remove_edge(eid)
        del self.vertices[vid]
        del self._vertex_edges[vid]
        del self._vertex_faces[vid]
        self._fan_cache.pop(vid, None)

    # -- whole-graph helpers ---------------------------------------------

    def copy(self) -> "Graph":
        """Independent copy. Element values are shared (they are immutable)."""
        g = Graph(self.family)
        g.vertices = dict(self.vertices)
        g.edges = dict(self.edges)
        g.faces = dict(self.faces)
        g.grid_dims = self.grid_dims
        g.token_table = dict(self.token_table) if self.token_table is not None else None
        g._next_vid = self._next_vid
        g._next_eid = self._next_eid
        g._next_fid = self._next_fid
        g._pair_edge = dict(self._pair_edge)
        g._vertex_edges = {vid: set(s) for vid, s in self._vertex_edges.items()}
        g._vertex_faces = {vid: set(s) for vid, s in self._vertex_faces.items()}
        g._fan_cache = dict(self._fan_cache)
        g._edge_face_count = dict(self._edge_face_count)
        return g

    def attr_width(self) -> int:
        if not self.vertices:
            return 0
        return len(next(iter(self.vertices.values())).attrs)

    def bounding_box(self) -> tuple[tuple[float, ...], tuple[float, ...]] | None:
        """Per-component (min, max) over all vertex attribute vectors."""
        if not self.vertices:
            return None
        width = self.attr_width()
        flat = np.fromiter(
            (a for v in self.vertices.values() for a in v.attrs),
            dtype=float,
            count=width * len(self.vertices),
        ).reshape(-1, width)
        return tuple(flat.min(axis=0)), tuple(flat.max(axis=0))

    def bbox_diagonal(self) -> float:
        box = self.bounding_box()
        if box is None:
            return 0.0
        lo, hi = box
        return math.dist(lo, hi)

    def check_invariants(self) -> None:
        """Raise InvariantViolationError if any structural invariant is broken."""
        for eid, e in self.edges.items():
            if e.u == e.v:
                raise InvariantViolationError(f"edge {eid} is a self-loop")
            if e.u not in self.vertices or e.v not in self.vertices:
                raise InvariantViolationError(f"edge {eid} references a missing vertex")
            if not math.isfinite(e.weight):
                raise InvariantViolationError(f"edge {eid} has non-finite weight")
            if self._pair_edge.get(self._pair_key(e.u, e.v)) != eid:
                raise InvariantViolationError(f"edge {eid} missing from pair index")
        if len(self._pair_edge) != len(self.edges):
            raise InvariantViolationError("duplicate edges collapse in the pair index")
        for fid, f in self.faces.items():
            if len(set(f.corners)) != 3:
                raise InvariantViolationError(f"face {fid} has repeated corners")
            for vid in f.corners:
                if vid not in self.vertices:
                    raise InvariantViolationError(f"face {fid} references a missing vertex")
            for u, v in f.sides():
                if self.edge_between(u, v) is None:
                    raise InvariantViolationError(f"face {fid} side {u}-{v} has no edge")
        if self.family is GraphFamily.GRID and self.grid_dims is not None:
            w, h = self.grid_dims
            if len(self.vertices) != w * h:
                raise InvariantViolationError("grid vertex count != width * height")
            expected = w * (h - 1) + h * (w - 1)
            if len(self.edges) != expected:
                raise InvariantViolationError("grid edge count mismatch")
        for vid, eids in self._vertex_edges.items():
            for eid in eids:
                if eid not in self.edges or vid not in self.edges[eid].endpoints:
                    raise InvariantViolationError("vertex-edge index out of sync")
        for vid, fids in self._vertex_faces.items():
            for fid in fids:
                if fid not in self.faces or vid not in self.faces[fid].corners:
                    raise InvariantViolationError("vertex-face index out of sync")
        for eid, e in self.edges.items():
            actual = len(
                self._vertex_faces.get(e.u, set()) & self._vertex_faces.get(e.v, set())
            )
            if self._edge_face_count.get(eid) != actual:
                raise InvariantViolationError(f"edge {eid} face count out of sync")


# -- geometry and adjacency queries ---------------------------------------


def face_points(g: Graph, fid: int) -> tuple[Vec3, Vec3, Vec3]:
    f = g.face(fid)
    a, b, c = f.corners
    return g.vertex(a).position, g.vertex(b).position, g.vertex(c).position


def face_normal(g: Graph, fid: int) -> Vec3:
    """Unit normal of a face by the right-hand rule over its corner order.

    Degenerate faces (zero cross product) return the zero vector instead of
    raising, so a verifier can observe the degeneracy and schedule a repair.
    """
    if g.family is not GraphFamily.TRIANGLE_MESH:
        raise FamilyMismatchError("face_normal requires a triangle mesh")
    p0, p1, p2 = face_points(g, fid)
    ux, uy, uz = p1[0] - p0[0], p1[1] - p0[1], p1[2] - p0[2]
    vx, vy, vz = p2[0] - p0[0], p2[1] - p0[1], p2[2] - p0[2]
    cx = uy * vz - uz * vy
    cy = uz * vx - ux * vz
    cz = ux * vy - uy * vx
    n = math.sqrt(cx * cx + cy * cy + cz * cz)
    if n == 0.0:
        return 0.0, 0.0, 0.0
    return cx / n, cy / n, cz / n


def face_area(g: Graph, fid: int) -> float:
    """Triangle area: half the cross-product magnitude of two side vectors."""
    if g.family is not GraphFamily.TRIANGLE_MESH:
        raise FamilyMismatchError("face_area requires a triangle mesh")
    p0, p1, p2 = face_points(g, fid)
    ux, uy, uz = p1[0] - p0[0], p1[1] - p0[1], p1[2] - p0[2]
    vx, vy, vz = p2[0] - p0[0], p2[1] - p0[1], p2[2] - p0[2]
    cx = uy * vz - uz * vy
    cy = uz * vx - ux * vz
    cz = ux * vy - uy * vx
    return 0.5 * math.sqrt(cx * cx + cy * cy + cz * cz)


def face_centroid(g: Graph, fid: int) -> Vec3:
    p0, p1, p2 = face_points(g, fid)
    return (
        (p0[0] + p1[0] + p2[0]) / 3.0,
        (p0[1] + p1[1] + p2[1]) / 3.0,
        (p0[2] + p1[2] + p2[2]) / 3.0,
    )


def neighbors(g: Graph, vid: int, hops: int) -> set[int]:
    """Vertices reachable within `hops` edges of vid, excluding vid itself.

    Edges are traversed in both directions regardless of family so that a
    sequence token's predecessor and successor both count as neighbors.
    """
    g.vertex(vid)
    if hops < 1:
        raise ValueError("hops must be >= 1")
    seen = {vid}
    frontier = [vid]
    out: set[int] = set()
    for _ in range(hops):
        nxt: list[int] = []
        for u in frontier:
            for eid in g._vertex_edges.get(u, ()):
                w = g.edges[eid].other(u)
                if w not in seen:
                    seen.add(w)
                    out.add(w)
                    nxt.append(w)
        if not nxt:
            break
        frontier = nxt
    return out


def incident_faces(g: Graph, eid: int) -> set[int]:
    """All faces whose corner triple contains both endpoints of the edge."""
    e = g.edge(eid)
    return set(g._vertex_faces.get(e.u, set()) & g._vertex_faces.get(e.v, set()))


def is_fan_connected(g: Graph, vid: int) -> bool:
    """True iff the faces around vid form one edge-connected fan.

    Two incident faces are adjacent exactly when they share an edge through
    vid; the test is whether that adjacency graph has a single component.
    A vertex with no incident faces returns False.
    """
    if vid not in g.vertices:
        raise ElementNotFoundError("vertex", vid)
    cached = g._fan_cache.get(vid)
    if cached is not None:
        return cached
    fids = g._vertex_faces.get(vid)
    if not fids:
        g._fan_cache[vid] = False
        return False
    count = len(fids)
    if count == 1:
        g._fan_cache[vid] = True
        return True
    faces = g.faces
    if count == 2:
        a, b = fids
        other = faces[b].corners
        result = any(c != vid and c in other for c in faces[a].corners)
        g._fan_cache[vid] = result
        return result
    # Union faces through their shared "other corner": faces at vid sharing
    # the edge (vid, x) both list x among their remaining corners.
    parent: dict[int, int] = {}

    def find(x: int) -> int:
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    corner_owner: dict[int, int] = {}
    roots = 0
    for fid in fids:
        parent[fid] = fid
        roots += 1
        for x in faces[fid].corners:
            if x == vid:
                continue
            owner = corner_owner.get(x)
            if owner is None:
                corner_owner[x] = fid
            else:
                ra, rb = find(fid), find(owner)
                if ra != rb:
                    parent[ra] = rb
                    roots -= 1
    result = roots == 1
    g._fan_cache[vid] = result
    return result


def vertex_fan_components(g: Graph, vid: int) -> list[list[int]]:
    """Incident faces grouped into edge-connected components (sorted ids)."""
    g.vertex(vid)
    fids = sorted(g._vertex_faces.get(vid, ()))
    if not fids:
        return []
    adjacency: dict[int, set[int]] = {fid: set() for fid in fids}
    corner_faces: dict[int, list[int]] = {}
    for fid in fids:
        for x in g.faces[fid].corners:
            if x != vid:
                corner_faces.setdefault(x, []).append(fid)
    for shared in corner_faces.values():
        for i in range(1, len(shared)):
            adjacency[shared[0]].add(shared[i])
            adjacency[shared[i]].add(shared[0])
    components: list[list[int]] = []
    seen: set[int] = set()
    for fid in fids:
        if fid in seen:
            continue
        comp = []
        queue = deque([fid])
        seen.add(fid)
        while queue:
            cur = queue.popleft()
            comp.append(cur)
            for nxt in adjacency[cur]:
                if nxt not in seen:
                    seen.add(nxt)
                    queue.append(nxt)
        components.append(sorted(comp))
    return components
