"""Bidirectional converters between on-disk formats and graphs.

Supported formats and the families they produce:

* OBJ triangle meshes  -> TRIANGLE_MESH
* PGM grayscale images -> GRID
* XYZ point lists      -> RELATIONAL (k-nearest-neighbor edges)
* plain UTF-8 text     -> SEQUENCE (token chain)
"""

from dataclasses import dataclass, field
from enum import Enum

from ..errors import ConfigError
from ..graph import Graph
from .obj import graph_to_mesh, mesh_to_graph
from .pgm import graph_to_image, image_to_graph
from .text import graph_to_text, text_to_graph
from .xyz import graph_to_pointcloud, pointcloud_to_graph


class FormatKind(Enum):
    OBJ_MESH = "obj"
    PGM_IMAGE = "pgm"
    XYZ_POINT_CLOUD = "xyz"
    PLAIN_TEXT = "txt"


@dataclass(frozen=True)
class FormatDescriptor:
    kind: FormatKind
    options: dict[str, str] = field(default_factory=dict)

    def knn_k(self) -> int:
        k = int(self.options.get("knn_k", "4"))
        if k < 1:
            raise ConfigError("knn_k must be >= 1")
        return k


_EXTENSIONS = {
    ".obj": FormatKind.OBJ_MESH,
    ".pgm": FormatKind.PGM_IMAGE,
    ".xyz": FormatKind.XYZ_POINT_CLOUD,
    ".txt": FormatKind.PLAIN_TEXT,
}


def format_for_path(path) -> FormatKind:
    import os

    ext = os.path.splitext(str(path))[1].lower()
    try:
        return _EXTENSIONS[ext]
    except KeyError:
        raise ConfigError(f"cannot infer format from extension {ext!r}") from None


def load_bytes(data: bytes, fmt: FormatDescriptor) -> Graph:
    if fmt.kind is FormatKind.OBJ_MESH:
        return mesh_to_graph(data)
    if fmt.kind is FormatKind.PGM_IMAGE:
        return image_to_graph(data)
    if fmt.kind is FormatKind.XYZ_POINT_CLOUD:
        return pointcloud_to_graph(data, fmt.knn_k())
    return text_to_graph(data)


def dump_bytes(g: Graph, fmt: FormatDescriptor) -> bytes:
    if fmt.kind is FormatKind.OBJ_MESH:
        return graph_to_mesh(g)
    if fmt.kind is FormatKind.PGM_IMAGE:
        return graph_to_image(g)
    if fmt.kind is FormatKind.XYZ_POINT_CLOUD:
        return graph_to_pointcloud(g)
    return graph_to_text(g)


__all__ = [
    "FormatDescriptor",
    "FormatKind",
    "dump_bytes",
    "format_for_path",
    "graph_to_image",
    "graph_to_mesh",
    "graph_to_pointcloud",
    "graph_to_text",
    "image_to_graph",
    "load_bytes",
    "mesh_to_graph",
    "pointcloud_to_graph",
    "text_to_graph",
]
