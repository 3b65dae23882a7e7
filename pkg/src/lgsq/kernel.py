"""Closed-form Gaussian kernel for the two-time sign correlator.

For a pair of squeezed states (one per measurement time) the two-time
position-sign correlator reduces to a lattice sum of Gaussian rectangle
integrals:

    C = Re[ sum_{n,m} (-1)**(n+m) *
            integral over bin_n x bin_m of  k(x, y) dx dy ]

where ``k(x, y) = prefactor * exp(quad_a*x**2 + quad_b*y**2 + cross*x*y)``
and bin_n = [n*ell, (n+1)*ell].  This module builds the four complex
coefficients from the state pair, and applies the optional Gaussian
dephasing channel, which acts as

    k(x, y) -> k(x, y) * exp(-xi*(x - y)**2 / 2)

i.e. a shift of the three quadratic coefficients with the prefactor
unchanged.

Branch conventions are load-bearing here.  With w = 1 - tanh(r)*exp(2j*phi)
per state and s = Im(w_a * conj(w_b)), the prefactor is the product

    (8/pi) / (cosh(r_a) * cosh(r_b) * sqrt(conj(w_a)) * sqrt(w_b)
              * sqrt(128j * s))

with the principal square root applied to each factor separately.  Taking
a principal root of the combined product instead flips the sign whenever
s < 0 and breaks the exchange symmetry C(a, b) = C(b, a); the product
form is correct for both signs of s.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass

import numpy as np

from .core import DEFAULT_TOL, SingularConfiguration, SqueezeParams, ToleranceConfig

CROSS_SIGN_CHOICES = ("subtract", "add")


@dataclass(frozen=True)
class DecoherenceChannel:
    """Single-parameter Gaussian dephasing in the measured coordinate.

    xi          channel strength, >= 0 (0 is the identity channel)
    cross_sign  sign convention for the cross-coefficient shift;
                derivations in the literature disagree on it.
                "subtract": cross -> cross - xi   (default)
                "add":      cross -> cross + xi   (direct expansion of
                            the dephasing factor exp(-xi*(x-y)**2/2))
                Both shift the diagonal coefficients by -xi/2.
    """

    xi: float = 0.0
    cross_sign: str = "subtract"

    def __post_init__(self):
        xi = float(self.xi)
        if not (math.isfinite(xi) and xi >= 0.0):
            raise ValueError(f"channel strength xi must be finite and >= 0, got {self.xi!r}")
        if self.cross_sign not in CROSS_SIGN_CHOICES:
            raise ValueError(
                f"cross_sign must be one of {CROSS_SIGN_CHOICES}, got {self.cross_sign!r}"
            )
        object.__setattr__(self, "xi", xi)


IDENTITY_CHANNEL = DecoherenceChannel(xi=0.0)


@dataclass(frozen=True)
class GaussKernel:
    """k(x, y) = prefactor * exp(quad_a*x**2 + quad_b*y**2 + cross*x*y).

    ``x`` is the coordinate of the first measurement in the pair, ``y``
    the second.  Exchanging the two states maps the kernel to
    (prefactor, quad_b, quad_a, cross) conjugated, which leaves the real
    part of every lattice sum unchanged.
    """

    prefactor: complex
    quad_a: complex
    quad_b: complex
    cross: complex

    def real_decay_form(self) -> np.ndarray:
        """2x2 symmetric matrix S with |k| ~ exp(-(x,y) S (x,y)^T).

        S must be positive definite for any absolutely integrable kernel.
        """
        return np.array(
            [
                [-self.quad_a.real, -self.cross.real / 2.0],
                [-self.cross.real / 2.0, -self.quad_b.real],
            ]
        )

    @property
    def is_integrable(self) -> bool:
        s = self.real_decay_form()
        return s[0, 0] > 0.0 and s[1, 1] > 0.0 and float(np.linalg.det(s)) > 0.0

    def __call__(self, x, y):
        x = np.asarray(x)
        y = np.asarray(y)
        return self.prefactor * np.exp(
            self.quad_a * x**2 + self.quad_b * y**2 + self.cross * x * y
        )


def pair_scale(a: SqueezeParams, b: SqueezeParams) -> float:
    """Im(w_a * conj(w_b)): the scale every generic denominator carries.

    Vanishes exactly when both angles are 0, when the states are equal,
    and on the other measure-zero singular manifolds.  The top-level
    dispatcher routes configurations with |pair_scale| below
    ``singular_threshold`` to dedicated limit paths.
    """
    wa = a.polar_complex()
    wb = b.polar_complex()
    return (wa * wb.conjugate()).imag


def kernel_coefficients(
    a: SqueezeParams,
    b: SqueezeParams,
    tol: ToleranceConfig = DEFAULT_TOL,
) -> GaussKernel:
    """Build the pair kernel from the two squeezed states.

    Raises SingularConfiguration when |Im(w_a conj(w_b))| falls below
    ``tol.singular_threshold``; the coefficients diverge there and the
    series limits must be taken analytically instead.
    """
    wa = a.polar_complex()
    wb = b.polar_complex()
    s = (wa * wb.conjugate()).imag
    if abs(s) < tol.singular_threshold:
        raise SingularConfiguration(
            f"pair scale {s:.3e} below threshold {tol.singular_threshold:.3e} "
            f"for states {a} and {b}"
        )
    cc = math.cosh(a.r) * math.cosh(b.r)
    quad_a = -1.0 / wa.conjugate() + 1j * (wb + wb.conjugate() - wa * wb.conjugate()) / (2.0 * s)
    quad_b = -1.0 / wb + 1j * (wa + wa.conjugate() - wa * wb.conjugate()) / (2.0 * s)
    cross = -1j / (s * cc)
    # principal root on each factor separately; see module docstring
    prefactor = (8.0 / math.pi) / (
        cc * cmath.sqrt(wa.conjugate()) * cmath.sqrt(wb) * cmath.sqrt(128j * s)
    )
    kernel = GaussKernel(prefactor=prefactor, quad_a=quad_a, quad_b=quad_b, cross=cross)
    if not kernel.is_integrable:
        # cannot happen for valid states; guards against NaN fallout upstream
        raise SingularConfiguration(
            f"kernel for states {a} and {b} lost integrability (real decay form not PD)"
        )
    return kernel


def apply_decoherence(kernel: GaussKernel, channel: DecoherenceChannel) -> GaussKernel:
    """Shift the quadratic coefficients by the dephasing channel.

    The prefactor is untouched.  Both sign conventions keep the kernel
    integrable for every xi >= 0 (the added real quadratic form is
    negative semidefinite on top of a definite one).
    """
    if channel.xi == 0.0:
        return kernel
    xi = channel.xi
    shift = -xi if channel.cross_sign == "subtract" else xi
    return GaussKernel(
        prefactor=kernel.prefactor,
        quad_a=kernel.quad_a - xi / 2.0,
        quad_b=kernel.quad_b - xi / 2.0,
        cross=kernel.cross + shift,
    )
