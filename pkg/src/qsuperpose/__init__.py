"""Superposing unknown qubit states with a known state: channel construction,
circle extraction, and Bloch-sphere measure estimates."""

from .bloch import (
    ONE,
    ZERO,
    BlochPoint,
    PureQubit,
    SphereCircle,
    bloch_to_state,
    circle_points,
    circle_residual,
    sample_sphere,
    state_to_bloch,
)
from .extract import ExtractionError, ExtractionTrace, extract_circle, fit_plane, scan_superposable
from .measure import band_fraction, superposable_fraction
from .qudit import QuditProtocol, dependence_matrix, is_dependent, violation_circle, violation_fraction
from .superposition import (
    CPMap,
    FitReport,
    KrausOperator,
    SuperpositionSpec,
    apply_kraus,
    fit_phase,
    is_superposable,
    residual_H,
    target_vector,
)
from .synthesize import (
    SuperpositionChannel,
    alternate_channel_example,
    phase_for_state,
    success_probability,
    synthesize_channel,
)

__version__ = "0.1.0"
