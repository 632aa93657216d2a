"""PGM grayscale image converter (P5 binary and P2 ASCII read, P5 write).

One vertex per pixel in row-major order, attribute vector [gray]. Edges join
4-way pixel neighbors with weight = absolute gray difference.
"""

from ..errors import FamilyMismatchError, ParseError
from ..graph import Graph, GraphFamily


def _header_tokens(data: bytes):
    """Yield (token, offset_after_token) honoring '#' comments."""
    i = 0
    n = len(data)
    while i < n:
        c = data[i : i + 1]
        if c.isspace():
            i += 1
        elif c == b"#":
            while i < n and data[i : i + 1] not in (b"\n", b"\r"):
                i += 1
        else:
            j = i
            while j < n and not data[j : j + 1].isspace() and data[j : j + 1] != b"#":
                j += 1
            yield data[i:j], j
            i = j


def image_to_graph(data: bytes) -> Graph:
    tokens = _header_tokens(data)
    try:
        magic, _ = next(tokens)
    except StopIteration:
        raise ParseError("empty PGM data") from None
    if magic not in (b"P2", b"P5"):
        raise ParseError(f"unsupported PGM magic {magic!r}")
    try:
        (w_tok, _), (h_tok, _), (max_tok, max_end) = next(tokens), next(tokens), next(tokens)
        width, height, maxval = int(w_tok), int(h_tok), int(max_tok)
    except (StopIteration, ValueError):
        raise ParseError("malformed PGM header") from None
    if width < 1 or height < 1:
        raise ParseError(f"bad PGM dimensions {width}x{height}")
    if maxval < 1 or maxval > 255:
        raise ParseError(f"PGM maxval {maxval} outside 1..255")

    count = width * height
    if magic == b"P5":
        start = max_end + 1  # single whitespace byte after maxval
        raster = data[start : start + count]
        if len(raster) != count:
            raise ParseError(f"PGM raster truncated: expected {count} bytes")
        values = list(raster)
    else:
        values = []
        for tok, _ in tokens:
            try:
                values.append(int(tok))
            except ValueError:
                raise ParseError(f"malformed PGM sample {tok!r}") from None
        if len(values) != count:
            raise ParseError(f"expected {count} samples, got {len(values)}")
    for v in values:
        if v < 0 or v > maxval:
            raise ParseError(f"sample {v} outside 0..{maxval}")

    g = Graph(GraphFamily.GRID)
    g.grid_dims = (width, height)
    vids = [g.add_vertex((float(v),)) for v in values]
    for row in range(height):
        for col in range(width):
            here = vids[row * width + col]
            if col + 1 < width:
                right = vids[row * width + col + 1]
                g.add_edge(here, right, abs(values[row * width + col] - values[row * width + col + 1]))
            if row + 1 < height:
                down = vids[(row + 1) * width + col]
                g.add_edge(here, down, abs(values[row * width + col] - values[(row + 1) * width + col]))
    return g


def graph_to_image(g: Graph, clamp: bool = True) -> bytes:
    if g.family is not GraphFamily.GRID or g.grid_dims is None:
        raise FamilyMismatchError("graph_to_image requires a grid graph with dimensions")
    width, height = g.grid_dims
    samples = bytearray()
    for vid in sorted(g.vertices):
        value = g.vertices[vid].attrs[0]
        rounded = int(round(value))
        if clamp:
            rounded = min(255, max(0, rounded))
        elif rounded < 0 or rounded > 255:
            raise ParseError(f"pixel value {value} outside 0..255 with clamping disabled")
        samples.append(rounded)
    if len(samples) != width * height:
        raise FamilyMismatchError("grid vertex count does not match grid_dims")
    return b"P5\n%d %d\n255\n" % (width, height) + bytes(samples)
