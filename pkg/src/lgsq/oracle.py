"""Independent reference path for the two-time sign correlator.

Everything in this module follows the six-variable Gaussian-elimination
route: closed-form squeezed wavefunctions, the 6x6 coupling matrix of
the joint Gaussian integral, its determinant in closed (trigonometric)
form, and the explicit coefficients of the eliminated quadratic form.
The correlator is integrated rectangle by rectangle with tensor
Gauss-Legendre panels plus a global node-doubling check.

No evaluation code is shared with kernel.py or correlator.py; the test
suite compares the two paths against each other, so this module must
stay an independent derivation, not a refactoring target.
"""

from __future__ import annotations

import json
import math
from typing import Sequence

import numpy as np

from .core import (
    DEFAULT_TOL,
    ConvergenceFailure,
    SingularConfiguration,
    SqueezeParams,
    ToleranceConfig,
)

_GL_ORDER = 16
_GL_X, _GL_W = np.polynomial.legendre.leggauss(_GL_ORDER)


def wavefunction(p: SqueezeParams, q) -> np.ndarray:
    """Position wavefunction of the squeezed vacuum, vectorized over q.

    psi(q) = pi**-0.25 * cosh(r)**-0.5 * (1 - z)**-0.5
             * exp(-(1 + z)/(1 - z) * q**2 / 2),  z = exp(2j*phi)*tanh(r)

    The principal root of (1 - z) is safe: Re(1 - z) > 0 always.
    """
    q = np.asarray(q, dtype=float)
    z = np.exp(2j * p.phi) * math.tanh(p.r)
    pref = np.pi**-0.25 / math.sqrt(math.cosh(p.r)) / np.sqrt(1.0 - z)
    return pref * np.exp(-(1.0 + z) / (1.0 - z) * q * q / 2.0)


def coupling_matrix(a: SqueezeParams, b: SqueezeParams) -> np.ndarray:
    """6x6 complex symmetric matrix of the joint Gaussian integral.

    Variable order: the two internal quadratures first, then the
    (real, imag) pairs tied to the second and first measurement
    coordinates.  Symmetric, not hermitian.
    """
    za = np.exp(2j * a.phi) * math.tanh(a.r)
    zb = np.exp(2j * b.phi) * math.tanh(b.r)
    ca, cb = math.cosh(a.r), math.cosh(b.r)
    m = np.zeros((6, 6), dtype=complex)
    m[0, 0] = 2.0 - np.conj(za) - zb
    m[0, 1] = -1j * np.conj(za) + 1j * zb
    m[0, 2] = -1.0 / cb
    m[0, 3] = -1j / cb
    m[0, 4] = -1.0 / ca
    m[0, 5] = 1j / ca
    m[1, 1] = 2.0 + np.conj(za) + zb
    m[1, 2] = 1j / cb
    m[1, 3] = -1.0 / cb
    m[1, 4] = -1j / ca
    m[1, 5] = -1.0 / ca
    m[2, 2] = 3.0 + np.conj(zb)
    m[2, 3] = -1j + 1j * np.conj(zb)
    m[3, 3] = 1.0 - np.conj(zb)
    m[4, 4] = 3.0 + za
    m[4, 5] = 1j - 1j * za
    m[5, 5] = 1.0 - za
    return m + np.triu(m, 1).T


def coupling_det(a: SqueezeParams, b: SqueezeParams) -> complex:
    """Closed form of det(coupling_matrix(a, b))."""
    ta, tb = math.tanh(a.r), math.tanh(b.r)
    return -128j * (
        math.sin(2 * a.phi) * ta
        - math.sin(2 * b.phi) * tb
        - math.sin(2 * (a.phi - b.phi)) * ta * tb
    )


def overlap_quad_coeffs(a: SqueezeParams, b: SqueezeParams) -> tuple[complex, complex, complex]:
    """Explicit coefficients (c_first, c_second, c_cross) of the eliminated form.

    These are the closed form of (1/2) J^T M^{-1} J with the source
    vector J = -sqrt(2)*(0, 0, y, -i*y, x, i*x): c_first couples x**2,
    c_second couples y**2, c_cross couples x*y.
    """
    za = np.exp(2j * a.phi) * math.tanh(a.r)
    zb = np.exp(2j * b.phi) * math.tanh(b.r)
    d = coupling_det(a, b)
    c_second = -64.0 / d * (1.0 - np.conj(za) + np.conj(zb) - za * np.conj(zb))
    c_first = -64.0 / d * (1.0 + za - zb - za * np.conj(zb))
    c_cross = 128.0 / (d * math.cosh(a.r) * math.cosh(b.r))
    return complex(c_first), complex(c_second), complex(c_cross)


def source_vector(x, y) -> np.ndarray:
    """Linear source of the joint Gaussian integral at one point pair.

    Zeros in the first two slots by construction (those variables only
    couple quadratically); the second coordinate feeds slots 3-4, the
    first slots 5-6.
    """
    return -math.sqrt(2.0) * np.array([0.0, 0.0, y, -1j * y, x, 1j * x])


def matrix_element(a: SqueezeParams, b: SqueezeParams, x, y) -> np.ndarray:
    """<x| U_a U_b^dagger |y> for the two squeeze operators, vectorized.

    Principal branch of det(M)**(-1/2); verified against a truncated
    number-basis representation for both signs of Im(det).  Requires the
    determinant to clear the singular threshold.
    """
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    d = coupling_det(a, b)
    if abs(d) / 128.0 < DEFAULT_TOL.singular_threshold:
        raise SingularConfiguration(
            f"coupling determinant {abs(d):.3e} below the singular threshold for {a}, {b}"
        )
    c_first, c_second, c_cross = overlap_quad_coeffs(a, b)
    pref = 8.0 / math.sqrt(math.pi) / math.sqrt(math.cosh(a.r) * math.cosh(b.r)) / np.sqrt(complex(d))
    return pref * np.exp(
        -(x * x) / 2.0 - (y * y) / 2.0 + c_first * x * x + c_second * y * y + c_cross * x * y
    )


def _full_quad_coeffs(a: SqueezeParams, b: SqueezeParams) -> tuple[complex, complex, complex]:
    """Quadratic coefficients of conj(psi_a(x)) * me(x, y) * psi_b(y)."""
    za = np.exp(2j * a.phi) * math.tanh(a.r)
    zb = np.exp(2j * b.phi) * math.tanh(b.r)
    c_first, c_second, c_cross = overlap_quad_coeffs(a, b)
    e1 = -0.5 * (1.0 + np.conj(za)) / (1.0 - np.conj(za)) - 0.5 + c_first
    e2 = -0.5 * (1.0 + zb) / (1.0 - zb) - 0.5 + c_second
    return complex(e1), complex(e2), complex(c_cross)


def _integrand_scale(a: SqueezeParams, b: SqueezeParams) -> float:
    d = coupling_det(a, b)
    za = np.exp(2j * a.phi) * math.tanh(a.r)
    zb = np.exp(2j * b.phi) * math.tanh(b.r)
    return float(
        (8.0 / math.pi)
        / (math.cosh(a.r) * math.cosh(b.r))
        / abs(np.sqrt(1.0 - np.conj(za)) * np.sqrt(1.0 - zb) * np.sqrt(complex(d)))
    )


def _axis_nodes(n_lo: int, n_hi: int, ell: float, panels: np.ndarray):
    """GL nodes/weights/signs for bins [n*ell, (n+1)*ell), n in [n_lo, n_hi)."""
    xs, ws, sg = [], [], []
    for i, n in enumerate(range(n_lo, n_hi)):
        p = int(panels[i])
        edges = n * ell + ell * np.arange(p + 1) / p
        half = 0.5 * (edges[1:] - edges[:-1])
        mid = 0.5 * (edges[1:] + edges[:-1])
        xs.append((mid[:, None] + half[:, None] * _GL_X[None, :]).ravel())
        ws.append((half[:, None] * _GL_W[None, :]).ravel())
        sg.append(np.full(p * _GL_ORDER, -1.0 if n % 2 else 1.0))
    return np.concatenate(xs), np.concatenate(ws), np.concatenate(sg)


def _panel_counts(n_lo: int, n_hi: int, ell: float, im_diag: float, im_cross: float, rmax: float):
    """Per-bin panel counts from a phase-span estimate (order-16 panels)."""
    n = np.arange(n_lo, n_hi, dtype=float)
    hi = np.maximum(np.abs(n), np.abs(n + 1)) * ell
    lo = np.minimum(np.abs(n), np.abs(n + 1)) * ell
    span = im_diag * (hi * hi - lo * lo) + im_cross * rmax * ell
    return np.maximum(1, np.ceil(span / (2.0 * math.pi * 2.5)).astype(int))


def _correlator_with_err(
    a: SqueezeParams,
    b: SqueezeParams,
    ell: float,
    tol: ToleranceConfig = DEFAULT_TOL,
) -> tuple[float, float]:
    """Reference correlator with its internal error estimate attached."""
    if not (ell > 0.0 and math.isfinite(ell)):
        raise ValueError(f"ell must be finite and > 0, got {ell!r}")
    e1, e2, ec = _full_quad_coeffs(a, b)
    decay = np.array([[-e1.real, -ec.real / 2.0], [-ec.real / 2.0, -e2.real]])
    lam = float(np.linalg.eigvalsh(decay)[0])
    if lam <= 0.0:
        raise ConvergenceFailure(f"reference integrand not absolutely integrable for {a}, {b}")
    scale = _integrand_scale(a, b)
    tail_target = tol.series_tail_tol
    radius2 = max(math.log(max(scale, 1.0) * math.pi / (lam * tail_target)), 1.0) / lam
    radius = math.sqrt(radius2)
    nbin = int(math.ceil(radius / ell))
    if 2 * nbin > tol.max_terms:
        raise ConvergenceFailure(f"bin lattice of {2 * nbin} bins exceeds max_terms={tol.max_terms}")
    tail_bound = scale * math.pi / lam * math.exp(-lam * radius2)

    px = _panel_counts(-nbin, nbin, ell, abs(e1.imag), abs(ec.imag), radius)
    py = _panel_counts(-nbin, nbin, ell, abs(e2.imag), abs(ec.imag), radius)

    def one_pass(mult: int) -> float:
        x, wx, sx = _axis_nodes(-nbin, nbin, ell, px * mult)
        y, wy, sy = _axis_nodes(-nbin, nbin, ell, py * mult)
        if x.size * y.size > 4e8:
            raise ConvergenceFailure("reference quadrature grid exceeds the node budget")
        col = wy * sy * wavefunction(b, y)
        row = wx * sx * np.conj(wavefunction(a, x))
        total = 0.0 + 0.0j
        chunk = max(1, int(2**21 // max(y.size, 1)))
        for i in range(0, x.size, chunk):
            me = matrix_element(a, b, x[i : i + chunk, None], y[None, :])
            total += row[i : i + chunk] @ (me @ col)
        return float(total.real)

    prev = one_pass(1)
    mult = 2
    for _ in range(3):
        cur = one_pass(mult)
        diff = abs(cur - prev)
        if diff <= tol.quadrature_rel_tol * max(abs(cur), 1e-2) + tail_target:
            return cur, diff + tail_bound
        prev = cur
        mult *= 2
    raise ConvergenceFailure(
        f"reference quadrature did not settle (last change {abs(cur - prev):.3e})"
    )


def oracle_correlator(
    a: SqueezeParams,
    b: SqueezeParams,
    ell: float,
    tol: ToleranceConfig = DEFAULT_TOL,
) -> float:
    """Two-time sign correlator at coarse-graining width ell, reference route.

    Integrates conj(psi_a(x)) * <x|U_a U_b^dag|y> * psi_b(y) against the
    alternating-sign bin lattice by brute quadrature, node-doubling until
    settled.  Raises ConvergenceFailure if doubling stalls or the bin
    lattice would exceed the series cap.
    """
    return _correlator_with_err(a, b, ell, tol)[0]


def dump_matrix_elements(path, entries: Sequence[dict]) -> None:
    """Write matrix-element fixtures as JSON.

    Each entry must carry 'a' and 'b' as {'r': .., 'phi': ..} plus the
    evaluation point 'Qt', 'Qb'.  The stored record adds
    matrix_element_re / matrix_element_im computed by this module.
    """
    out = []
    for e in entries:
        pa = SqueezeParams(**e["a"])
        pb = SqueezeParams(**e["b"])
        me = complex(matrix_element(pa, pb, float(e["Qt"]), float(e["Qb"])))
        out.append(
            {
                "a": {"r": pa.r, "phi": pa.phi},
                "b": {"r": pb.r, "phi": pb.phi},
                "Qt": float(e["Qt"]),
                "Qb": float(e["Qb"]),
                "matrix_element_re": me.real,
                "matrix_element_im": me.imag,
            }
        )
    with open(path, "w") as fh:
        json.dump(out, fh, indent=1)
        fh.write("\n")
