"""Frames of integer translates, their Gramian fields and reductions by a matrix."""

from .classify import FrameReport, classify, frame_bounds, length_of
from .errors import FrameforgeError
from .linalg import DEFAULT_TOL, ToleranceConfig
from .reduction import (
    GenericityReport,
    ReductionCertificate,
    angle_profile,
    certify,
    certify_analytic,
    certify_geometric,
    check_sandwich,
    in_R,
    kernel_shortcut,
    scan_generic,
    square_case,
)
from .scenarios import Scenario, builtin, load, save
from .subspace import Subspace, friedrichs_cos, friedrichs_sin
from .torus import GeneratorSpec, GramianField, Piece, SamplingGrid, TrigPoly, conjugate, gramian_at

__version__ = "0.1.0"
