"""Periodic geodesic search in locally uniquely geodesic spaces.

Backends: round sphere, flat torus, and triangulated surfaces with their
intrinsic metric.  Closed geodesics are found by iterated two-stage
shortest-path replacement, either on single seed loops (systole mode) or on
whole sweep-out families via a minimax iteration.
"""

from .analytic import SphereBackend, TorusBackend
from .core import (
    OpenPath,
    Point,
    PolyCurve,
    SpaceBackend,
    constant_curve,
    curve_from_json,
    curve_length,
    curve_to_json,
    distance,
    resample_constant_speed,
    shortest_path,
)
from .errors import GeodesicError
from .mesh import (
    MeshBackend,
    SteinerGraph,
    TriMesh,
    epsilon_estimate,
    load_mesh,
    mesh_distance,
    mesh_shortest_path,
)
from .shortening import (
    ShorteningParams,
    ShorteningTrace,
    birkhoff_step,
    choose_k,
    lipschitz_bound,
    prepare_for_step,
    shorten_to_limit,
    sup_displacement,
)
from .sweepout import (
    CertificationResult,
    MinimaxReport,
    SweepFamily,
    SystoleReport,
    build_family,
    certify_geodesic,
    foliation_circle,
    minimax_run,
    systole_search,
)

__version__ = "0.1.0"

__all__ = [
    "SphereBackend", "TorusBackend", "MeshBackend", "TriMesh", "SteinerGraph",
    "Point", "PolyCurve", "OpenPath", "SpaceBackend",
    "distance", "shortest_path", "curve_length", "resample_constant_speed",
    "constant_curve", "curve_to_json", "curve_from_json",
    "load_mesh", "mesh_distance", "mesh_shortest_path", "epsilon_estimate",
    "ShorteningParams", "ShorteningTrace", "choose_k", "birkhoff_step",
    "lipschitz_bound", "shorten_to_limit", "prepare_for_step",
    "sup_displacement",
    "foliation_circle", "build_family", "minimax_run", "systole_search",
    "certify_geodesic", "SweepFamily", "MinimaxReport", "SystoleReport",
    "CertificationResult",
    "GeodesicError",
    "__version__",
]
