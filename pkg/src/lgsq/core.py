"""Shared parameter containers, tolerances and exceptions.

A measurement protocol in this package is specified by one single-mode
squeezed Gaussian state per measurement time.  Each state is described by
a squeezing amplitude ``r >= 0`` and a squeezing angle ``phi``; the angle
enters all observables only through ``exp(2j*phi)``, so it is reduced to
the fundamental interval ``(-pi/2, pi/2]`` on construction.

Every state has an equivalent polar description ``rho * exp(1j*theta)``
of the complex combination ``1 - tanh(r)*exp(2j*phi)``, which is what the
closed-form correlator kernels are written in.  ``polar_decompose``
produces it; ``rho`` lies in ``(0, 2]`` and ``theta`` in
``(-pi/2, pi/2)`` for any finite ``r``.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass


class SingularConfiguration(Exception):
    """The closed-form kernel degenerates for this parameter combination.

    Raised when a denominator that is generically nonzero (the pair
    determinant, or the polar radius) falls below the configured
    threshold, so the generic formulas lose all precision.  Callers that
    can tolerate a limit value should go through the top-level dispatcher,
    which evaluates a nudged configuration instead of raising.
    """


class ConvergenceFailure(Exception):
    """A series or quadrature did not reach the requested tolerance."""


class BranchAmbiguity(Exception):
    """A multivalued function was evaluated on (or too near) its cut.

    Only the infinite-width limit can trigger this: its closed form
    contains an inverse hyperbolic tangent whose argument is generically
    complex, and the result is branch-independent unless the argument
    lands on the real axis with modulus >= 1.
    """


class UnsupportedCombination(Exception):
    """The requested feature combination has no implemented evaluation path."""


def reduce_angle(phi: float) -> float:
    """Reduce a squeezing angle to the fundamental interval (-pi/2, pi/2].

    All observables depend on the angle through exp(2j*phi) only, so they
    are periodic with period pi.
    """
    if not math.isfinite(phi):
        raise ValueError(f"squeezing angle must be finite, got {phi!r}")
    return phi - math.pi * math.ceil(phi / math.pi - 0.5)


@dataclass(frozen=True)
class SqueezeParams:
    """Single-mode squeezed state: amplitude ``r >= 0``, angle ``phi``.

    The angle is reduced to (-pi/2, pi/2] on construction, and forced to
    exactly 0.0 when ``r == 0`` (the vacuum carries no angle).  Instances
    are hashable and compare by the canonical field values.
    """

    r: float
    phi: float = 0.0

    def __post_init__(self):
        r = float(self.r)
        if not math.isfinite(r) or r < 0.0:
            raise ValueError(f"squeezing amplitude must be finite and >= 0, got {self.r!r}")
        phi = 0.0 if r == 0.0 else reduce_angle(float(self.phi))
        object.__setattr__(self, "r", r)
        object.__setattr__(self, "phi", phi)

    def polar_complex(self) -> complex:
        """The combination 1 - tanh(r)*exp(2j*phi) the kernels are built from."""
        return 1.0 - math.tanh(self.r) * cmath.exp(2j * self.phi)


@dataclass(frozen=True)
class PolarForm:
    """Polar description rho*exp(1j*theta) of ``SqueezeParams.polar_complex``."""

    rho: float
    theta: float


def polar_decompose(params: SqueezeParams) -> PolarForm:
    """Return the polar form of ``1 - tanh(r)*exp(2j*phi)``.

    For finite ``r`` the real part is ``1 - tanh(r)*cos(2*phi) > 0``, so
    ``theta`` is strictly inside (-pi/2, pi/2) and ``rho`` inside (0, 2].
    Raises SingularConfiguration if ``rho`` underflows to zero, which can
    only happen once tanh(r) rounds to 1 (r above ~19).
    """
    w = params.polar_complex()
    rho = abs(w)
    if rho == 0.0:
        raise SingularConfiguration(
            f"state {params} is numerically at the infinite-squeezing limit (rho = 0)"
        )
    return PolarForm(rho=rho, theta=math.atan2(w.imag, w.real))


@dataclass(frozen=True)
class ToleranceConfig:
    """Numerical knobs shared across evaluation paths.

    series_tail_tol     absolute bound allowed for every truncated series tail
    quadrature_rel_tol  relative tolerance for adaptive quadratures
    singular_threshold  scale below which the pair determinant counts as singular
    max_terms           hard cap on series terms per direction
    """

    series_tail_tol: float = 1e-10
    quadrature_rel_tol: float = 1e-8
    singular_threshold: float = 1e-8
    max_terms: int = 10_000

    def __post_init__(self):
        for name in ("series_tail_tol", "quadrature_rel_tol", "singular_threshold"):
            v = float(getattr(self, name))
            if not (math.isfinite(v) and v > 0.0):
                raise ValueError(f"{name} must be finite and > 0, got {v!r}")
            object.__setattr__(self, name, v)
        n = int(self.max_terms)
        if n < 1:
            raise ValueError(f"max_terms must be >= 1, got {self.max_terms!r}")
        object.__setattr__(self, "max_terms", n)


DEFAULT_TOL = ToleranceConfig()
