"""XYZ point-list converter producing k-nearest-neighbor relational graphs.

An undirected edge u-v exists iff v is among the k nearest neighbors of u or
u is among the k nearest of v. Equal distances break toward the lower point
index so conversion is deterministic.
"""

import numpy as np

from ..errors import FamilyMismatchError, ParseError
from ..graph import Graph, GraphFamily


def _parse_points(data: bytes) -> list[tuple[float, float, float]]:
    try:
        text = data.decode("utf-8")
    except UnicodeDecodeError as exc:
        raise ParseError(f"XYZ data is not valid UTF-8: {exc}") from None
    points = []
    for lineno, raw in enumerate(text.splitlines(), start=1):
        parts = raw.split()
        if not parts:
            continue
        if len(parts) != 3:
            raise ParseError(f"expected 3 numbers per line, got {len(parts)}", line=lineno)
        try:
            points.append(tuple(float(p) for p in parts))
        except ValueError:
            raise ParseError(f"malformed coordinate in {raw!r}", line=lineno) from None
    return points


def knn_pairs(points, k: int) -> set[tuple[int, int]]:
    """Unordered index pairs of the symmetric kNN relation, ties by lower index."""
    n = len(points)
    if n < 2 or k < 1:
        return set()
    arr = np.asarray(points, dtype=np.float64)
    diff = arr[:, None, :] - arr[None, :, :]
    dist = np.sqrt((diff * diff).sum(axis=2))
    pairs: set[tuple[int, int]] = set()
    idx = np.arange(n)
    for u in range(n):
        order = np.lexsort((idx, dist[u]))
        picked = 0
        for v in order:
            if v == u:
                continue
            pairs.add((u, v) if u < v else (v, u))
            picked += 1
            if picked >= k:
                break
    return pairs


def pointcloud_to_graph(data: bytes, k: int) -> Graph:
    if k < 1:
        raise ValueError("k must be >= 1")
    points = _parse_points(data)
    g = Graph(GraphFamily.RELATIONAL)
    vids = [g.add_vertex(p) for p in points]
    for u, v in sorted(knn_pairs(points, k)):
        g.add_edge(vids[u], vids[v])
    return g


def graph_to_pointcloud(g: Graph) -> bytes:
    if g.family is not GraphFamily.RELATIONAL:
        raise FamilyMismatchError("graph_to_pointcloud requires a relational graph")
    lines = []
    for vid in sorted(g.vertices):
        x, y, z = g.vertices[vid].position
        lines.append(f"{float(x)!r} {float(y)!r} {float(z)!r}")
    if not lines:
        return b""
    return ("\n".join(lines) + "\n").encode("utf-8")
