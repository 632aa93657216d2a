"""Plain-text converter: token chains as directed sequence graphs.

Each whitespace-delimited token becomes a vertex whose single attribute is a
stable 48-bit hash scaled to [0, 1). The graph keeps a hash -> token table so
serialization can re-emit the original tokens; attribute values with no entry
(possible after value mutations) serialize as a deterministic placeholder.
Original whitespace is not preserved: tokens re-join with single spaces.
"""

import hashlib

from ..errors import FamilyMismatchError, ParseError
from ..graph import Graph, GraphFamily

_HASH_SPAN = float(1 << 48)


def token_value(token: str) -> float:
    digest = hashlib.blake2b(token.encode("utf-8"), digest_size=6).digest()
    return int.from_bytes(digest, "big") / _HASH_SPAN


def text_to_graph(data: bytes) -> Graph:
    try:
        text = data.decode("utf-8")
    except UnicodeDecodeError as exc:
        raise ParseError(f"text is not valid UTF-8: {exc}") from None
    g = Graph(GraphFamily.SEQUENCE)
    g.token_table = {}
    prev = None
    for token in text.split():
        value = token_value(token)
        g.token_table[value] = token
        vid = g.add_vertex((value,))
        if prev is not None:
            g.ensure_edge(prev, vid)
        prev = vid
    return g


def graph_to_text(g: Graph) -> bytes:
    if g.family is not GraphFamily.SEQUENCE:
        raise FamilyMismatchError("graph_to_text requires a sequence graph")
    table = g.token_table or {}
    tokens = []
    for vid in sorted(g.vertices):
        value = g.vertices[vid].attrs[0]
        token = table.get(value)
        if token is None:
            token = "u%012x" % (int(abs(value) * _HASH_SPAN) & ((1 << 48) - 1))
        tokens.append(token)
    return " ".join(tokens).encode("utf-8")
