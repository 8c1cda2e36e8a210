"""Admissible polygonal meshes: generation, validation, persistence."""

from .core import (
    AdmissibilityReport,
    Cell,
    Face,
    Mesh,
    assemble_mesh,
    boundary_enclosed_area,
    compute_transmissibilities,
    mesh_from_polygons,
    orthogonality_defects,
    point_segment_distance,
    polygon_area,
    polygon_centroid,
    validate_admissibility,
)
from .domain import DomainSpec, signed_distance
from .generate import Tessellation, default_lloyd_tol, generate_mesh
from .io import load_mesh, mesh_from_dict, mesh_to_dict, save_mesh

__all__ = [
    "AdmissibilityReport",
    "Cell",
    "DomainSpec",
    "Face",
    "Mesh",
    "Tessellation",
    "assemble_mesh",
    "boundary_enclosed_area",
    "compute_transmissibilities",
    "default_lloyd_tol",
    "generate_mesh",
    "load_mesh",
    "mesh_from_dict",
    "mesh_from_polygons",
    "mesh_to_dict",
    "orthogonality_defects",
    "point_segment_distance",
    "polygon_area",
    "polygon_centroid",
    "save_mesh",
    "signed_distance",
    "validate_admissibility",
]
