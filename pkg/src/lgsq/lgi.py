"""Three-measurement temporal-correlation strings and their bounds.

For measurements at three times with pairwise correlators C_ab, C_bc,
C_ac, macrorealism bounds both strings

    k3       = C_ab + C_bc - C_ac
    k3_prime = -C_ab - C_bc - C_ac

to the interval [-3, 1].  The two always satisfy
k3 + k3_prime = -2 C_ac.  A protocol here is a triple of squeezed-state
settings probed with one shared bin width and decoherence channel.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .core import DEFAULT_TOL, SqueezeParams, ToleranceConfig
from .correlator import MeasurementSpec, correlator
from .kernel import IDENTITY_CHANNEL, DecoherenceChannel

UPPER_BOUND = 1.0
LOWER_BOUND = -3.0

CLASSIFICATIONS = ("classical", "upper_violation", "lower_violation")


@dataclass(frozen=True)
class Protocol3:
    """Three measurement settings probed pairwise in a fixed order."""

    a: SqueezeParams
    b: SqueezeParams
    c: SqueezeParams
    measurement: MeasurementSpec
    channel: DecoherenceChannel = IDENTITY_CHANNEL

    def __post_init__(self):
        if not isinstance(self.measurement, MeasurementSpec):
            object.__setattr__(self, "measurement", MeasurementSpec(self.measurement))


@dataclass(frozen=True)
class LgiStrings:
    """Both strings with per-string bound classification.

    ``margin`` is the slack used when classifying: a string only counts
    as violating once it clears the bound by more than the margin.
    """

    k3: float
    k3_prime: float
    k3_class: str
    k3_prime_class: str
    margin: float


def _classify(k: float, margin: float) -> str:
    if k > UPPER_BOUND + margin:
        return "upper_violation"
    if k < LOWER_BOUND - margin:
        return "lower_violation"
    return "classical"


def strings_from_correlators(
    c_ab: float,
    c_bc: float,
    c_ac: float,
    margin: float = 0.0,
) -> LgiStrings:
    """Assemble both strings from already-computed correlators."""
    if margin < 0.0 or not math.isfinite(margin):
        raise ValueError(f"margin must be finite and >= 0, got {margin!r}")
    k3 = c_ab + c_bc - c_ac
    k3p = -c_ab - c_bc - c_ac
    return LgiStrings(float(k3), float(k3p), _classify(k3, margin), _classify(k3p, margin), margin)


def k3_protocol(protocol: Protocol3, tol: ToleranceConfig = DEFAULT_TOL) -> LgiStrings:
    """Evaluate both strings for a protocol.

    The classification margin is three times the propagated correlator
    error, so a reported violation survives the numerical uncertainty.
    """
    r_ab = correlator(protocol.a, protocol.b, protocol.measurement, protocol.channel, tol)
    r_bc = correlator(protocol.b, protocol.c, protocol.measurement, protocol.channel, tol)
    r_ac = correlator(protocol.a, protocol.c, protocol.measurement, protocol.channel, tol)
    err = r_ab.err_estimate + r_bc.err_estimate + r_ac.err_estimate
    return strings_from_correlators(r_ab.value, r_bc.value, r_ac.value, margin=3.0 * err)


def qubit_k3(omega_tau):
    """Two-level benchmark string 2 cos(w t) - cos(2 w t).

    Peaks at 1.5 for w t = pi/3; the standard yardstick the squeezed
    protocols are compared against.  Accepts scalars or arrays.
    """
    x = np.asarray(omega_tau, dtype=float)
    out = 2.0 * np.cos(x) - np.cos(2.0 * x)
    return float(out) if np.isscalar(omega_tau) else out
