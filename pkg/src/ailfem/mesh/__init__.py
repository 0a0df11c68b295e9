from ailfem.mesh.generators import make_lshape_initial, make_triangle, make_unit_square
from ailfem.mesh.io import dump_mesh, load_mesh
from ailfem.mesh.marks import MarkSet
from ailfem.mesh.mesh import (
    LOCAL_EDGES,
    MAX_GENERATION,
    EdgeTopology,
    Mesh,
    MeshDiagnostic,
    build_topology,
    validate,
)
from ailfem.mesh.refine import overlay, refine, uniform_refine

__all__ = [
    "LOCAL_EDGES",
    "MAX_GENERATION",
    "EdgeTopology",
    "MarkSet",
    "Mesh",
    "MeshDiagnostic",
    "build_topology",
    "dump_mesh",
    "load_mesh",
    "make_lshape_initial",
    "make_triangle",
    "make_unit_square",
    "overlay",
    "refine",
    "uniform_refine",
    "validate",
]
