"""graphref: structured-input fuzzing over attributed graphs.

Inputs (meshes, images, point clouds, text) convert to a shared graph
representation, mutate under a neighbor-similarity policy, get repaired
against declarative constraints, and run against an external target program
while the campaign tracks validity, semantic preservation, diversity, and
per-stage latency.
"""

from importlib import resources

from .graph import (
    Edge,
    Face,
    Graph,
    GraphFamily,
    Vertex,
    face_area,
    face_centroid,
    face_normal,
    incident_faces,
    is_fan_connected,
    neighbors,
)
from .refine import (
    IsolatedMode,
    RefineOutcome,
    RefineStatus,
    RepairAction,
    RepairKind,
    Tolerances,
    handle_isolated_vertices,
    merge_collinear_vertices,
    merge_duplicate_vertices,
    refine,
    remove_degenerate_triangles,
)

__version__ = "0.1.0"


def builtin_spec_text(name: str = "triangle_mesh") -> str:
    """Text of a constraint document shipped with the package."""
    return (
        resources.files("graphref").joinpath("specs").joinpath(f"{name}.gcon").read_text("utf-8")
    )


__all__ = [
    "Edge",
    "Face",
    "Graph",
    "GraphFamily",
    "IsolatedMode",
    "RefineOutcome",
    "RefineStatus",
    "RepairAction",
    "RepairKind",
    "Tolerances",
    "Vertex",
    "builtin_spec_text",
    "face_area",
    "face_centroid",
    "face_normal",
    "handle_isolated_vertices",
    "incident_faces",
    "is_fan_connected",
    "merge_collinear_vertices",
    "merge_duplicate_vertices",
    "neighbors",
    "refine",
    "remove_degenerate_triangles",
]
