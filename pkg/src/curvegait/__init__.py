"""Discrete curvature of triangle meshes applied to synthetic human gait.

The package builds a procedural walking humanoid, computes Gaussian, mean,
principal, absolute and RMS curvature fields per frame, and analyses knee
curvature over the gait cycle, left/right symmetry and cycle-averaged maps.
"""

__version__ = "0.1.0"

from .analysis import (
    AverageCurvatureMap,
    Classification,
    KneeTimeSeries,
    RegionSample,
    SymmetryEntry,
    average_curvature_map,
    classify_symmetry,
    detect_knee_region,
    half_cycle_pairs,
    knee_time_series,
    symmetry_report,
)
from .colormap import ColorScale, auto_scale, colorize_mesh, map_to_color
from .curvature import (
    CurvatureField,
    curvature_field,
    derived_fields,
    gaussian_field,
    mean_field,
    principal_from_hk,
)
from .estimators import CurvatureTransformer, GaitSymmetryClassifier, KneeCurvatureTransformer
from .mesh import (
    MeshError,
    OneRingTable,
    TriangleMesh,
    ValidationReport,
    VertexAreas,
    build_one_rings,
    validate,
    vertex_areas,
)
from .mesh_io import load_mesh, read_mesh, save_mesh, write_mesh
from .synth import (
    BodyParams,
    GaitSequence,
    GaitType,
    PoseAngles,
    PostureLabel,
    SkinWeights,
    gait_angles,
    make_body,
    pose_body,
    synth_gait,
)
