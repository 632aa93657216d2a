"""Wavefront OBJ reader/writer for triangle meshes.

Reader subset: `v x y z` and triangular `f i j k` lines. Face entries of the
form `i/t/n` keep the vertex index before the first slash. Everything else
(vn, vt, usemtl, comments, blank lines, ...) is skipped; skipped line kinds
are summarized in one log warning per parse.

Writer: canonical form, vertices in id order then faces in id order,
`f` indices 1-based in the order the vertices were written. Coordinates are
emitted as shortest round-trip floats so read(write(g)) reproduces positions
exactly.
"""

import logging
from collections import Counter

from ..errors import InvariantViolationError, ParseError, UnsupportedFeatureError
from ..graph import Graph, GraphFamily

logger = logging.getLogger(__name__)


def _parse_float(token: str, lineno: int) -> float:
    try:
        return float(token)
    except ValueError:
        raise ParseError(f"malformed numeric literal {token!r}", line=lineno) from None


def _face_index(token: str, lineno: int, nverts: int) -> int:
    head = token.split("/", 1)[0]
    try:
        idx = int(head)
    except ValueError:
        raise ParseError(f"malformed face index {token!r}", line=lineno) from None
    if idx < 1 or idx > nverts:
        raise ParseError(f"face index {idx} out of range 1..{nverts}", line=lineno)
    return idx - 1


def mesh_to_graph(data: bytes) -> Graph:
    try:
        text = data.decode("utf-8")
    except UnicodeDecodeError as exc:
        raise ParseError(f"OBJ data is not valid UTF-8: {exc}") from None

    g = Graph(GraphFamily.TRIANGLE_MESH)
    vids: list[int] = []
    skipped: Counter[str] = Counter()

    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line:
            skipped["blank"] += 1
            continue
        parts = line.split()
        tag = parts[0]
        if tag == "v":
            if len(parts) not in (4, 5):
                raise ParseError(
                    f"vertex line needs 3 coordinates, got {len(parts) - 1}", line=lineno
                )
            x, y, z = (_parse_float(p, lineno) for p in parts[1:4])
            vids.append(g.add_vertex((x, y, z)))
        elif tag == "f":
            if len(parts) != 4:
                raise UnsupportedFeatureError(
                    f"only triangular faces are supported, got {len(parts) - 1} corners",
                    line=lineno,
                )
            a, b, c = (_face_index(p, lineno, len(vids)) for p in parts[1:])
            if len({a, b, c}) != 3:
                raise ParseError("face corners are not distinct", line=lineno)
            ca, cb, cc = vids[a], vids[b], vids[c]
            for u, v in ((ca, cb), (cb, cc), (cc, ca)):
                g.ensure_edge(u, v)
            g.add_face(ca, cb, cc)
        elif tag.startswith("#"):
            skipped["comment"] += 1
        else:
            skipped[tag] += 1

    if skipped:
        detail = ", ".join(f"{kind} x{count}" for kind, count in sorted(skipped.items()))
        logger.warning("OBJ parse skipped unsupported lines: %s", detail)
    return g


def graph_to_mesh(g: Graph) -> bytes:
    if g.family is not GraphFamily.TRIANGLE_MESH:
        raise InvariantViolationError("graph_to_mesh requires a triangle mesh graph")
    lines: list[str] = []
    index_of: dict[int, int] = {}
    for pos, vid in enumerate(sorted(g.vertices), start=1):
        index_of[vid] = pos
        x, y, z = g.vertices[vid].position
        lines.append(f"v {float(x)!r} {float(y)!r} {float(z)!r}")
    for fid in sorted(g.faces):
        corners = g.faces[fid].corners
        try:
            i, j, k = (index_of[c] for c in corners)
        except KeyError as exc:
            raise InvariantViolationError(
                f"face {fid} references tombstoned vertex {exc.args[0]}"
            ) from None
        lines.append(f"f {i} {j} {k}")
    if not lines:
        return b""
    return ("\n".join(lines) + "\n").encode("utf-8")
