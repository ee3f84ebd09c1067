"""Approximate point-to-face shortest paths among polyhedral obstacles in 3D."""

__version__ = "0.1.0"

from .errors import (  # noqa: F401
    BadFaceRef,
    Blocked,
    DegenerateGeometry,
    FacepathError,
    Infeasible,
    NoFeasibleSequence,
    OffPlane,
    ParseError,
    SourceInsideObstacle,
    Unreachable,
    ValidationError,
)
from .scene import FaceRef, Scene, load_scene, load_scene_path, scene_from_dict  # noqa: F401
from .solver import SolveConfig, SolveOutcome, solve  # noqa: F401
