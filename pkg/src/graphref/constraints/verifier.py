"""Constraint evaluation over graphs, producing violation reports.

Built-in semantics:

* ``area()``            face area (mesh only)
* ``fan_connected()``   single-fan test of a vertex (mesh only)
* ``connected_face()``  number of faces incident to an edge (mesh only)
* ``norm.x/y/z``        unit-normal components of a face (mesh only)
* ``degree.in / .out``  directed degrees; undirected graphs report total degree
* ``value.range``       the comparison must hold for every attribute component
                        of a vertex (for an edge, its weight)

``neighbor{dir=[...]}`` declarations apply to Grid graphs only: interior
vertices must actually have an edge to each declared 4-way neighbor; border
vertices are exempt. Their violations are reported under synthetic constraint
indices numbered after the explicit constraints.

Evaluation walks vertices, then edges, then faces, each in id order, applying
the applicable constraints in declaration order, so reports are deterministic.
Internally each constraint is evaluated as a vectorized mask over all elements
of its kind; measured values are rendered only for violators.
"""

import math
from dataclasses import dataclass

import numpy as np

from ..errors import FamilyMismatchError
from ..graph import Graph, GraphFamily, is_fan_connected
from .nodes import (
    EPSILON,
    AttrName,
    ConstraintSpec,
    ElementKind,
    FieldAccess,
    OpCall,
    constraint_label,
)

_MESH_ONLY_OPS = frozenset({"area", "fan_connected", "connected_face"})

_NP_OPS = {
    "==": np.equal,
    "!=": np.not_equal,
    "<=": np.less_equal,
    ">=": np.greater_equal,
    "<": np.less,
    ">": np.greater,
}


def builtin_catalog() -> tuple[tuple[str, ElementKind, str], ...]:
    """The fixed (name, element kind, result type) registry of built-ins."""
    return (
        ("area", ElementKind.FACE, "numeric"),
        ("fan_connected", ElementKind.VERTEX, "boolean"),
        ("connected_face", ElementKind.EDGE, "numeric"),
    )


@dataclass(frozen=True)
class Violation:
    constraint_index: int
    element_id: int
    element_kind: str
    measured: str
    label: str


@dataclass(frozen=True)
class ViolationReport:
    entries: tuple[Violation, ...]

    def is_clean(self) -> bool:
        return not self.entries

    def __len__(self) -> int:
        return len(self.entries)

    def by_kind(self) -> dict[str, int]:
        hist: dict[str, int] = {}
        for v in self.entries:
            hist[v.label] = hist.get(v.label, 0) + 1
        return hist


def compare_values(measured, op: str, expected) -> bool:
    """Apply one comparison operator; shared by verify and the repair stages."""
    if op == "==":
        return measured == expected
    if op == "!=":
        return measured != expected
    if op == "<=":
        return measured <= expected
    if op == ">=":
        return measured >= expected
    if op == "<":
        return measured < expected
    return measured > expected


def _spec_needs_mesh(spec: ConstraintSpec) -> bool:
    for c in spec.constraints:
        if c.element is ElementKind.FACE:
            return True
        for cmp in c.comparisons:
            if isinstance(cmp.lhs, OpCall) and cmp.lhs.name in _MESH_ONLY_OPS:
                return True
            if isinstance(cmp.lhs, FieldAccess) and cmp.lhs.attr is AttrName.NORM:
                return True
    return any(d.element is ElementKind.FACE for d in spec.attributes)


class _KindData:
    """Lazily computed measurement arrays for one element kind."""

    def __init__(self, g: Graph, kind: ElementKind):
        self.g = g
        self.kind = kind
        if kind is ElementKind.VERTEX:
            self.ids = sorted(g.vertices)
        elif kind is ElementKind.EDGE:
            self.ids = sorted(g.edges)
        else:
            self.ids = sorted(g.faces)
        self._cache: dict[str, np.ndarray] = {}
        self._face_geom_done = False

    def _face_geometry(self) -> None:
        if self._face_geom_done:
            return
        self._face_geom_done = True
        g = self.g
        fids = self.ids
        if not fids:
            self._cache["area"] = np.zeros(0)
            for axis in ("x", "y", "z"):
                self._cache[f"norm.{axis}"] = np.zeros(0)
            return
        vids = sorted(g.vertices)
        row_of = {vid: i for i, vid in enumerate(vids)}
        verts = g.vertices
        pos = np.fromiter(
            (c for vid in vids for c in verts[vid].attrs[:3]),
            dtype=float,
            count=3 * len(vids),
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
        self._cache["area"] = 0.5 * mags
        self._cache["norm.x"] = normals[:, 0]
        self._cache["norm.y"] = normals[:, 1]
        self._cache["norm.z"] = normals[:, 2]

    def values(self, lhs) -> np.ndarray:
        """Measurement array aligned with self.ids (bool for fan_connected)."""
        g = self.g
        if isinstance(lhs, OpCall):
            key = lhs.name
        else:
            key = f"{lhs.attr.value}.{lhs.field}"
        cached = self._cache.get(key)
        if cached is not None:
            return cached
        if key in ("area", "norm.x", "norm.y", "norm.z"):
            self._face_geometry()
            return self._cache[key]
        if key == "connected_face":
            counter = g._edge_face_count
            out = np.fromiter(
                (counter[eid] for eid in self.ids), dtype=np.intp, count=len(self.ids)
            )
        elif key == "fan_connected":
            out = np.array([is_fan_connected(g, vid) for vid in self.ids], dtype=bool)
        elif key in ("degree.in", "degree.out"):
            if g.family.directed:
                din = {vid: 0 for vid in self.ids}
                dout = {vid: 0 for vid in self.ids}
                for e in g.edges.values():
                    dout[e.u] += 1
                    din[e.v] += 1
                chosen = din if key == "degree.in" else dout
                out = np.array([chosen[vid] for vid in self.ids], dtype=np.intp)
            else:
                out = np.array(
                    [len(g._vertex_edges.get(vid, ())) for vid in self.ids], dtype=np.intp
                )
        elif key == "value.range":
            if self.kind is ElementKind.EDGE:
                out = np.array([g.edges[eid].weight for eid in self.ids], dtype=float)
            else:
                out = np.array([g.vertices[vid].attrs for vid in self.ids], dtype=float)
        else:  # pragma: no cover - the parser rejects anything else
            raise AssertionError(f"unknown operand {key}")
        self._cache[key] = out
        return out

    def satisfied_mask(self, cmp, epsilon: float) -> np.ndarray:
        expected = epsilon if cmp.value is EPSILON else cmp.value
        values = self.values(cmp.lhs)
        mask = _NP_OPS[cmp.op](values, expected)
        if mask.ndim == 2:  # value.range over multi-component attrs
            mask = mask.all(axis=1)
        return mask

    def measured_text(self, cmp, element_row: int, epsilon: float) -> str:
        values = self.values(cmp.lhs)
        row = values[element_row]
        if values.ndim == 2:
            expected = epsilon if cmp.value is EPSILON else cmp.value
            for component in row:
                if not compare_values(float(component), cmp.op, expected):
                    return repr(float(component))
            return repr(float(row[0]))
        if values.dtype == bool:
            return "true" if row else "false"
        if values.dtype == np.intp:
            return str(int(row))
        return repr(float(row))


def verify(spec: ConstraintSpec, g: Graph, epsilon: float = 1e-9) -> ViolationReport:
    """Evaluate every constraint over every element of its kind.

    Returns all violations, not just the first. The graph is never modified.
    Face constraints (and mesh-only built-ins) on a non-mesh graph raise
    FamilyMismatchError, as do neighbor declarations on non-grid graphs.
    """
    if epsilon <= 0:
        raise ValueError("epsilon must be positive")
    if _spec_needs_mesh(spec) and g.family is not GraphFamily.TRIANGLE_MESH:
        raise FamilyMismatchError(
            f"spec requires a triangle mesh, graph family is {g.family.value}"
        )
    neighbor_decls = [d for d in spec.attributes if d.attr is AttrName.NEIGHBOR]
    if neighbor_decls and g.family is not GraphFamily.GRID:
        raise FamilyMismatchError("neighbor declarations require a grid graph")

    entries: list[Violation] = []
    for kind in (ElementKind.VERTEX, ElementKind.EDGE, ElementKind.FACE):
        applicable = [
            (idx, c) for idx, c in enumerate(spec.constraints) if c.element is kind
        ]
        if not applicable:
            continue
        data = _KindData(g, kind)
        if not data.ids:
            continue
        masks = []
        for idx, c in applicable:
            ok = data.satisfied_mask(c.comparisons[0], epsilon)
            for cmp in c.comparisons[1:]:
                ok = ok | data.satisfied_mask(cmp, epsilon)
            masks.append((idx, c, ok))
        any_violation = ~masks[0][2]
        for _, _, ok in masks[1:]:
            any_violation |= ~ok
        for row in np.nonzero(any_violation)[0]:
            element_id = data.ids[row]
            for idx, c, ok in masks:
                if ok[row]:
                    continue
                texts: list[str] = []
                for cmp in c.comparisons:
                    text = data.measured_text(cmp, row, epsilon)
                    if text not in texts:
                        texts.append(text)
                entries.append(
                    Violation(idx, element_id, kind.value, ", ".join(texts), constraint_label(c))
                )

    if neighbor_decls and g.grid_dims is not None:
        entries.extend(_check_grid_neighbors(spec, g, neighbor_decls))
    return ViolationReport(tuple(entries))


_DIR_OFFSETS = {"U": (0, -1), "D": (0, 1), "L": (-1, 0), "R": (1, 0)}


def _check_grid_neighbors(spec, g: Graph, decls) -> list[Violation]:
    width, height = g.grid_dims
    base = len(spec.constraints)
    out: list[Violation] = []
    for offset, decl in enumerate(decls):
        idx = base + offset
        label = f"vertex:neighbor[{','.join(decl.directions)}]"
        for row in range(1, height - 1):
            for col in range(1, width - 1):
                vid = row * width + col
                if vid not in g.vertices:
                    continue
                missing = []
                for d in decl.directions:
                    dx, dy = _DIR_OFFSETS[d]
                    nid = (row + dy) * width + (col + dx)
                    if nid not in g.vertices or g.edge_between(vid, nid) is None:
                        missing.append(d)
                if missing:
                    out.append(
                        Violation(idx, vid, "vertex", "missing " + ",".join(missing), label)
                    )
    return out


def graph_fingerprint(g: Graph) -> int:
    """Order-independent hash of graph content; used to assert verify purity."""
    acc = hash((g.family, g.grid_dims, len(g.vertices), len(g.edges), len(g.faces)))
    for vid in sorted(g.vertices):
        acc ^= hash((vid, g.vertices[vid].attrs))
    for eid in sorted(g.edges):
        e = g.edges[eid]
        acc ^= hash((eid, e.u, e.v, e.weight))
    for fid in sorted(g.faces):
        acc ^= hash((fid, g.faces[fid].corners))
    return acc


def epsilon_or_default(value: float | None) -> float:
    if value is None:
        return 1e-9
    if value <= 0 or not math.isfinite(value):
        raise ValueError("epsilon must be positive and finite")
    return value
