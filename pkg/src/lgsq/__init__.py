"""Temporal sign-correlators of squeezed states and their macrorealism bounds.

A one-mode squeezed state probed twice with a coarse-grained sign
measurement gives a closed-form two-time correlator; three settings give
the standard three-measurement strings whose classical range is [-3, 1].
This package evaluates the correlators (several exact series and limit
forms plus an independent brute-force oracle), assembles the strings,
and maps where in parameter space they leave the classical range.
"""

from .core import (
    DEFAULT_TOL,
    BranchAmbiguity,
    ConvergenceFailure,
    PolarForm,
    SingularConfiguration,
    SqueezeParams,
    ToleranceConfig,
    UnsupportedCombination,
    polar_decompose,
    reduce_angle,
)
from .kernel import (
    CROSS_SIGN_CHOICES,
    IDENTITY_CHANNEL,
    DecoherenceChannel,
    GaussKernel,
    apply_decoherence,
    kernel_coefficients,
    pair_scale,
)
from .correlator import (
    METHODS,
    CorrelatorResult,
    MeasurementSpec,
    correlator,
    correlator_general,
    correlator_plateau,
    correlator_zero_angle,
    rectangle_integral,
)
from .lgi import (
    CLASSIFICATIONS,
    LOWER_BOUND,
    UPPER_BOUND,
    LgiStrings,
    Protocol3,
    k3_protocol,
    qubit_k3,
    strings_from_correlators,
)
from .mapper import (
    DecoherenceSeries,
    EllMaximum,
    ViolationMap,
    alpha_shift,
    amplitude_slice,
    angle_slice,
    contour_lines,
    decoherence_scan,
    maximize_over_ell,
    scan_2d,
)
from . import oracle

__version__ = "0.1.0"

__all__ = [
    "BranchAmbiguity",
    "CLASSIFICATIONS",
    "CROSS_SIGN_CHOICES",
    "ConvergenceFailure",
    "CorrelatorResult",
    "DEFAULT_TOL",
    "DecoherenceChannel",
    "DecoherenceSeries",
    "EllMaximum",
    "GaussKernel",
    "IDENTITY_CHANNEL",
    "LOWER_BOUND",
    "LgiStrings",
    "METHODS",
    "MeasurementSpec",
    "PolarForm",
    "Protocol3",
    "SingularConfiguration",
    "SqueezeParams",
    "ToleranceConfig",
    "UPPER_BOUND",
    "UnsupportedCombination",
    "ViolationMap",
    "alpha_shift",
    "amplitude_slice",
    "angle_slice",
    "apply_decoherence",
    "contour_lines",
    "correlator",
    "correlator_general",
    "correlator_plateau",
    "correlator_zero_angle",
    "decoherence_scan",
    "k3_protocol",
    "kernel_coefficients",
    "maximize_over_ell",
    "oracle",
    "pair_scale",
    "polar_decompose",
    "qubit_k3",
    "rectangle_integral",
    "reduce_angle",
    "scan_2d",
    "strings_from_correlators",
]
