"""Two-time sign-correlator evaluation.

The correlator is an alternating lattice sum of Gaussian rectangle
integrals of the pair kernel (see kernel.py).  Four evaluation paths
cover the parameter space:

 * equal_time         identical states, identity channel: C = 1 exactly
 * zero_angle_series  both angles exactly zero: the kernel degenerates to
                      a delta coupling and the sum collapses to a single
                      1D error-function series
 * plateau            infinite bin width: closed form through a complex
                      inverse tangent
 * general_series     everything else

The production general engine integrates the second coordinate
analytically, bin by bin, into error-function columns, and only the
first coordinate numerically (adaptive panel Gauss-Legendre).  This
stays accurate arbitrarily close to the singular manifolds, where the
quadratic coefficients individually diverge like 1/s but the fused
column exponent stays O(1).  A literal rectangle-by-rectangle summation
(rectangle_integral) is kept as the simple reference form; tests assert
both give the same values.

A second exact engine (_spectral_value) expands the alternating bin
lattice in its odd-harmonic Fourier series and sums Gaussian transforms;
it is much faster for parameter scans and is used by the mapper.  It is
slow only near the singular manifolds, which the scan dispatcher never
hits.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy import special

from .core import (
    DEFAULT_TOL,
    BranchAmbiguity,
    ConvergenceFailure,
    SingularConfiguration,
    SqueezeParams,
    ToleranceConfig,
    UnsupportedCombination,
)
from .kernel import (
    IDENTITY_CHANNEL,
    DecoherenceChannel,
    GaussKernel,
    apply_decoherence,
    kernel_coefficients,
    pair_scale,
)

METHODS = ("equal_time", "general_series", "zero_angle_series", "plateau")

_GL_N = 12
_GL_X, _GL_W = np.polynomial.legendre.leggauss(_GL_N)

_MAX_DEPTH = 20  # dyadic subdivision cap
_NUDGE_DELTA = 1e-4


@dataclass(frozen=True)
class MeasurementSpec:
    """Coarse-graining width of the binned sign measurement.

    ``ell`` is the bin width; ``math.inf`` selects the plateau limit
    where the operator becomes the plain sign of the coordinate.
    """

    ell: float

    def __post_init__(self):
        ell = float(self.ell)
        if math.isnan(ell) or ell <= 0.0:
            raise ValueError(f"bin width ell must be > 0 (inf allowed), got {self.ell!r}")
        object.__setattr__(self, "ell", ell)

    @property
    def is_plateau(self) -> bool:
        return math.isinf(self.ell)


@dataclass(frozen=True)
class CorrelatorResult:
    value: float
    err_estimate: float
    method: str


def _ell_of(spec) -> float:
    ell = spec.ell if isinstance(spec, MeasurementSpec) else float(spec)
    if math.isnan(ell) or ell <= 0.0:
        raise ValueError(f"bin width ell must be > 0 (inf allowed), got {spec!r}")
    return ell


# ---------------------------------------------------------------------------
# literal rectangle integral (reference form of the lattice sum)


def _tensor_panels(lo: float, hi: float, parts: int) -> tuple[np.ndarray, np.ndarray]:
    edges = lo + (hi - lo) * np.arange(parts + 1) / parts
    half = 0.5 * np.diff(edges)
    mid = 0.5 * (edges[:-1] + edges[1:])
    x = (mid[:, None] + half[:, None] * _GL_X[None, :]).ravel()
    w = (half[:, None] * _GL_W[None, :]).ravel()
    return x, w


def _tensor_gauss(k: GaussKernel, x0, x1, y0, y1, px, py) -> complex:
    x, wx = _tensor_panels(x0, x1, px)
    y, wy = _tensor_panels(y0, y1, py)
    if x.size * y.size > 2e8:
        raise ConvergenceFailure("rectangle quadrature grid exceeds the node budget")
    total = 0.0 + 0.0j
    chunk = max(1, int(2**21 // y.size))
    ey = k.quad_b * y * y
    for i in range(0, x.size, chunk):
        xs = x[i : i + chunk, None]
        f = np.exp(k.quad_a * xs * xs + k.cross * xs * y[None, :] + ey[None, :])
        total += wx[i : i + chunk] @ (f @ wy)
    return complex(total)


def rectangle_integral(
    k: GaussKernel,
    x0: float,
    x1: float,
    y0: float,
    y1: float,
    tol: ToleranceConfig = DEFAULT_TOL,
) -> complex:
    """Integral of exp(quad_a x^2 + quad_b y^2 + cross x y) over a rectangle.

    The prefactor is NOT included; callers of the lattice sum multiply it
    once outside.  Tensor Gauss-Legendre with oscillation-matched initial
    panels, then global panel doubling until the change is below
    ``quadrature_rel_tol``.  Raises ConvergenceFailure past the dyadic
    depth cap.
    """
    if not (x0 < x1 and y0 < y1) or not all(map(math.isfinite, (x0, x1, y0, y1))):
        raise ValueError(f"bad rectangle [{x0}, {x1}] x [{y0}, {y1}]")
    ymax = max(abs(y0), abs(y1))
    xmax = max(abs(x0), abs(x1))
    span_x = abs(k.quad_a.imag) * abs(x1 * x1 - x0 * x0) + abs(k.cross.imag) * ymax * (x1 - x0)
    span_y = abs(k.quad_b.imag) * abs(y1 * y1 - y0 * y0) + abs(k.cross.imag) * xmax * (y1 - y0)
    px = 1 + int(span_x / 10.0)
    py = 1 + int(span_y / 10.0)
    cur = _tensor_gauss(k, x0, x1, y0, y1, px, py)
    scale = math.exp(
        max(
            (k.quad_a * x * x + k.quad_b * y * y + k.cross * x * y).real
            for x in (x0, x1, 0.0 if x0 < 0.0 < x1 else x0)
            for y in (y0, y1, 0.0 if y0 < 0.0 < y1 else y0)
        )
    ) * (x1 - x0) * (y1 - y0)
    for _ in range(_MAX_DEPTH):
        px *= 2
        py *= 2
        nxt = _tensor_gauss(k, x0, x1, y0, y1, px, py)
        if abs(nxt - cur) <= tol.quadrature_rel_tol * max(abs(nxt), 1e-6 * scale) + 1e-300:
            return nxt
        cur = nxt
    raise ConvergenceFailure(
        f"rectangle quadrature did not settle within depth {_MAX_DEPTH}"
    )


# ---------------------------------------------------------------------------
# production general engine: analytic columns + adaptive outer quadrature


class _PanelBudget(Exception):
    """Internal: outer refinement would exceed the panel budget."""


def _erf_column_value(k: GaussKernel, ell: float, tol: ToleranceConfig) -> tuple[float, float]:
    """Lattice sum via analytic inner-axis reduction.

    Inner (second) coordinate integrated exactly per bin into erf
    differences; outer coordinate by adaptive Gauss-Legendre panels.
    Near the singular manifolds the asymptotic erf tails oscillate too
    fast for any panel count; there the run drops them, integrates the
    remaining piecewise-smooth staircase with panels aligned to the erf
    transition zones, and charges a rigorous integration-by-parts bound
    on the dropped oscillatory integrals to the error estimate.
    """
    try:
        return _erf_column_run(k, ell, tol, drop_tails=False)
    except _PanelBudget:
        return _erf_column_run(k, ell, tol, drop_tails=True)


def _dropped_tail_budget(
    qa: complex,
    qb: complex,
    cx: complex,
    shift: complex,
    alpha: complex,
    ell: float,
    big_x: float,
    nbin: int,
    p2: float,
    b2i: float,
    l_cut: float,
) -> tuple[float, list[float]]:
    """Bound on |integral of the dropped asymptotic boundary terms|.

    Each inner lattice boundary m contributes, where it sits in the
    asymptotic regime, an integrand exp(qa x^2 + cx m ell x + qb m^2
    ell^2) * poly / (sqrt(pi) z_m(x)) whose phase derivative 2 Im(qa) x
    + Im(cx) m ell stays away from zero outside the erf zone, so
    integration by parts bounds each piece.  Pieces are cut at bin edges
    (the outer sign flips there) and split geometrically away from the
    phase-stationary vertex so the 1/|z| amplitude is tracked.  Also
    returns the zone edges, which the caller must use as panel cuts.
    """
    sr, si = shift.real, shift.imag
    a2s = sr * sr + si * si
    iqa, icx = qa.imag, cx.imag
    rqa, rcx, rqb = qa.real, cx.real, qb.real
    aab = abs(alpha)
    rt_pi = math.sqrt(math.pi)
    zcut = 20.0 / aab  # |m ell + shift x| below this -> erf mode
    t0 = zcut / max(math.sqrt(a2s), 1e-12)

    xs = np.linspace(-big_x, big_x, 129)
    v = si * xs
    ur = sr * xs
    disc = np.sqrt(v * v * b2i * b2i + p2 * (p2 * v * v + l_cut))
    m_min = int(np.floor((((-v * b2i - disc) / p2 - ur) / ell).min())) - 1
    m_max = int(np.ceil((((-v * b2i + disc) / p2 - ur) / ell).max())) + 1

    cuts: list[float] = []
    total = 0.0
    for m in range(m_min, m_max + 1):
        yl = m * ell
        xz = -yl * sr / a2s if a2s > 0.0 else 0.0
        bh = yl * sr
        dq = bh * bh - a2s * (yl * yl - zcut * zcut)
        if dq > 0.0 and a2s > 0.0:
            rad = math.sqrt(dq)
            zl, zr = (-bh - rad) / a2s, (-bh + rad) / a2s
            for p in (zl, zr):
                if -big_x < p < big_x:
                    cuts.append(p)
        else:
            zl = zr = xz  # no erf zone for this boundary

        def zdist(x: float) -> float:
            return math.hypot(yl + sr * x, si * x)

        def rexp(x: float) -> float:
            return min(rqa * x * x + rcx * yl * x + rqb * yl * yl, 0.0)

        def sub_bound(alo: float, ahi: float) -> float:
            if ahi <= alo:
                return 0.0
            zmin = max(min(zdist(alo), zdist(ahi)), zcut * 0.99)
            r_cand = max(rexp(alo), rexp(ahi))
            if rqa < 0.0:
                r_cand = max(r_cand, rexp(min(max(-rcx * yl / (2.0 * rqa), alo), ahi)))
            amax = 1.3 * math.exp(r_cand) / (rt_pi * aab * zmin)
            pa = 2.0 * iqa * alo + icx * yl
            pb = 2.0 * iqa * ahi + icx * yl
            length = ahi - alo
            out = 0.0
            if pa == 0.0 or pb == 0.0 or (pa < 0.0) != (pb < 0.0):
                # phase-stationary point inside: excise a band around it
                delta = min(2.0 / math.sqrt(abs(iqa) + 1e-300), 0.5 * length)
                out += 2.0 * delta * amax
                pmin = 2.0 * abs(iqa) * delta
                if pmin <= 0.0:
                    return amax * length
                length = max(length - 2.0 * delta, 0.0)
                out += 2.0 * amax / pmin
            else:
                pmin = min(abs(pa), abs(pb))
                out += amax / abs(pa) + amax / abs(pb)
            rv = 2.0 * abs(rqa) * max(abs(alo), abs(ahi)) + abs(rcx * yl)
            wob = 3.0 * math.sqrt(a2s) / zmin  # modulus+phase wobble of poly/z
            out += amax * length * (rv + wob) / pmin
            out += amax * length * 2.0 * abs(iqa) / (pmin * pmin)
            return out

        def geom_bound(u1: float, u2: float, sgn: float) -> float:
            out = 0.0
            lo_t = u1
            while lo_t < u2:
                hi_t = min(max(2.0 * lo_t, lo_t + t0), u2)
                x1 = xz + sgn * lo_t
                x2 = xz + sgn * hi_t
                out += sub_bound(min(x1, x2), max(x1, x2))
                lo_t = hi_t
            return out

        def piece_bound(alo: float, ahi: float) -> float:
            ta, tb = alo - xz, ahi - xz
            if tb <= 0.0:
                return geom_bound(-tb, -ta, -1.0)
            if ta >= 0.0:
                return geom_bound(ta, tb, 1.0)
            return geom_bound(0.0, -ta, -1.0) + geom_bound(0.0, tb, 1.0)

        for n in range(-nbin, nbin):
            alo, ahi = n * ell, (n + 1) * ell
            if zr <= alo or zl >= ahi or zl == zr:
                total += piece_bound(alo, ahi)
            else:
                if zl > alo:
                    total += piece_bound(alo, min(zl, ahi))
                if zr < ahi:
                    total += piece_bound(max(zr, alo), ahi)

    # each boundary term enters two adjacent segments: weight at most 2
    return 2.0 * total, cuts


def _erf_column_run(
    k: GaussKernel, ell: float, tol: ToleranceConfig, drop_tails: bool
) -> tuple[float, float]:
    qa, qb, cx, pref = k.quad_a, k.quad_b, k.cross, k.prefactor
    p1, p2 = -qa.real, -qb.real
    qr = cx.real
    gamma = p1 - qr * qr / (4.0 * p2)  # Schur complement of the real decay form
    if gamma <= 0.0 or p2 <= 0.0:
        raise ConvergenceFailure("kernel real decay form is not positive definite")
    alpha = complex(np.sqrt(-qb))  # Re > 0
    alpha_abs2 = abs(qb)
    shift = cx / (2.0 * qb)
    fused = qa - cx * cx / (4.0 * qb)
    pref_col = pref * math.sqrt(math.pi) / (2.0 * alpha)
    col_amp = abs(pref) * math.sqrt(math.pi / p2)
    tail = tol.series_tail_tol
    b2i = qb.imag

    # outer truncation radius from the exact column envelope
    env_total = col_amp * math.sqrt(math.pi / gamma)
    arg = tail / (3.0 * max(env_total, 1e-300))
    xmax = 2.0 * ell if arg >= 1.0 else float(special.erfcinv(max(arg, 1e-300))) / math.sqrt(gamma)
    nbin = max(1, int(math.ceil(xmax / ell)))
    if 2 * nbin > tol.max_terms:
        raise ConvergenceFailure(
            f"outer lattice of {2 * nbin} bins exceeds max_terms={tol.max_terms}"
        )
    big_x = nbin * ell
    err_tail_x = env_total * float(special.erfc(math.sqrt(gamma) * big_x))

    # inner-window cut: keep segments while the corner weight exceeds e^{-l_cut}
    l_cut = max(20.0, math.log((2.0 * big_x / ell + 16.0) * 100.0 / tail))

    # oscillation census of the asymptotic boundary terms; when resolving
    # them would dwarf any panel budget, switch to the dropped-tail mode
    # (sound only while the dephasing offset stays inside the erf zones)
    m_len = abs(shift) * big_x + math.sqrt(l_cut / p2) + ell
    osc_panels = (2.0 * abs(qa.imag) * big_x + abs(cx.imag) * m_len) * big_x / 15.0
    si_confined = abs(shift.imag) * big_x <= 0.25 * 20.0 / math.sqrt(alpha_abs2)
    if not drop_tails and osc_panels > 25_000.0 and si_confined:
        raise _PanelBudget
    drop_err = 0.0
    zone_cuts: list[float] = []
    if drop_tails:
        if not si_confined:
            raise ConvergenceFailure(
                "boundary-term oscillation cannot be bounded: dephasing offset "
                "leaves the erf transition zones"
            )
        drop_err, zone_cuts = _dropped_tail_budget(
            qa, qb, cx, shift, alpha, ell, big_x, nbin, p2, b2i, l_cut
        )

    err_box = [0.0]  # column-side error accumulator, H-units

    def column_block(x: np.ndarray, v: np.ndarray, m_lo: np.ndarray, width: int) -> np.ndarray:
        mm = m_lo[:, None] + np.arange(width)[None, :]
        y = mm * ell
        u = y + (shift.real * x)[:, None]
        vv = v[:, None]
        zmod2 = alpha_abs2 * (u * u + vv * vv)
        z = alpha * (u + 1j * vv)
        large = zmod2 >= 400.0
        g = special.erf(np.where(large, 1.0 + 0.0j, z))
        sigma = np.where(z.real >= 0.0, 1.0, -1.0)
        efx = np.exp(fused * x * x)[:, None]
        l1, l2 = large[:, :-1], large[:, 1:]
        g1, g2 = g[:, :-1], g[:, 1:]
        s1, s2 = sigma[:, :-1], sigma[:, 1:]
        both_large = l1 & l2
        mixed_hi = l2 & ~l1
        mixed_lo = l1 & ~l2
        if drop_tails:
            seg = np.where(
                both_large,
                efx * (s2 - s1),
                np.where(
                    mixed_hi,
                    efx * (s2 - g1),
                    np.where(mixed_lo, efx * (g2 - s1), efx * (g2 - g1)),
                ),
            )
        else:
            # corner exponents qa x^2 + cx x y + qb y^2 (Re <= 0 by integrability)
            xs = x[:, None]
            corner = np.exp(qa * xs * xs + cx * xs * y + qb * y * y)
            z_large = np.where(large, z, 1.0)  # asymptotic form only read where large
            t = 1.0 / (z_large * z_large)
            etail = (
                corner / (math.sqrt(math.pi) * z_large)
                * (1.0 + t * (-0.5 + t * (0.75 - 1.875 * t)))
            )
            e1, e2 = etail[:, :-1], etail[:, 1:]
            # erf(z) = sign(Re z) - exp(-z^2)/(sqrt(pi) z) (1 - ...) at large |z|;
            # the sign difference survives when the segment interior passes
            # the origin, and underflows through efx when deep asymptotic
            seg = np.where(
                both_large,
                efx * (s2 - s1) - (e2 - e1),
                np.where(
                    mixed_hi,
                    efx * (s2 - g1) - e2,
                    np.where(mixed_lo, efx * (g2 - s1) + e1, efx * (g2 - g1)),
                ),
            )
            # truncated asymptotic series contributes its relative remainder
            err_box[0] += 3e-10 * float((np.abs(etail) * large).sum())
        sgn = np.where((mm[:, :-1] % 2) == 0, 1.0, -1.0)
        return (sgn * seg).sum(axis=1)

    def column_h(x: np.ndarray) -> np.ndarray:
        """H(x) = exp(fused x^2) * sum_m (-1)^m [erf(z_{m+1}) - erf(z_m)]."""
        v = shift.imag * x
        ur = shift.real * x
        disc = np.sqrt(v * v * b2i * b2i + p2 * (p2 * v * v + l_cut))
        m_lo = np.floor(((-v * b2i - disc) / p2 - ur) / ell).astype(np.int64) - 1
        m_hi = np.ceil(((-v * b2i + disc) / p2 - ur) / ell).astype(np.int64) + 1
        width = int((m_hi - m_lo).max()) + 1
        if width > tol.max_terms:
            raise ConvergenceFailure(
                f"inner window of {width} bins exceeds max_terms={tol.max_terms}"
            )
        out = np.empty(len(x), dtype=complex)
        step = max(1, 2_000_000 // max(width, 1))
        for i in range(0, len(x), step):
            j = min(i + step, len(x))
            out[i:j] = column_block(x[i:j], v[i:j], m_lo[i:j], width)
        return out

    # outer bins and initial panels; zone edges are mandatory cuts so the
    # dropped-tail staircase jumps always sit on panel boundaries
    bins = np.arange(-nbin, nbin)
    lo_edge = np.abs(bins) * ell
    hi_edge = np.abs(bins + 1) * ell
    osc = abs(fused.imag) * np.abs(hi_edge * hi_edge - lo_edge * lo_edge)
    steps = min(abs(shift.real) * ell * math.sqrt(p2) / 2.0, 48.0)
    p0 = np.minimum(64, 1 + (osc / 12.0).astype(int) + int(steps))
    cuts_arr = np.array(sorted(zone_cuts)) if zone_cuts else np.empty(0)

    pan_lo, pan_hi, pan_sign = [], [], []
    for n, parts in zip(bins, p0):
        lo, hi = n * ell, (n + 1) * ell
        edges = lo + (hi - lo) * np.arange(parts + 1) / parts
        if len(cuts_arr):
            inner = cuts_arr[(cuts_arr > lo + 1e-12 * ell) & (cuts_arr < hi - 1e-12 * ell)]
            if len(inner):
                edges = np.unique(np.concatenate([edges, inner]))
        pan_lo.append(edges[:-1])
        pan_hi.append(edges[1:])
        pan_sign.append(np.full(len(edges) - 1, -1.0 if n % 2 else 1.0))
    pan_lo = np.concatenate(pan_lo)
    pan_hi = np.concatenate(pan_hi)
    pan_sign = np.concatenate(pan_sign)

    def panel_integrals(los: np.ndarray, his: np.ndarray) -> np.ndarray:
        half = 0.5 * (his - los)
        mid = 0.5 * (his + los)
        nodes = (mid[:, None] + half[:, None] * _GL_X[None, :]).ravel()
        vals = column_h(nodes).reshape(len(los), _GL_N)
        return (vals @ _GL_W) * half

    # absolute budget distributed per unit length; the tolerance of a split
    # panel halves with its length, so the total stays bounded by the budget
    quad_budget = max(4.0 * tail, tol.quadrature_rel_tol * 0.05) / max(abs(pref_col), 1e-300)
    local_tol = quad_budget * (pan_hi - pan_lo) / (pan_hi[-1] - pan_lo[0])

    total = 0.0 + 0.0j
    abs_total = 0.0
    quad_err = 0.0
    cur_lo, cur_hi, cur_sign, cur_tol = pan_lo, pan_hi, pan_sign, local_tol
    cur_val = panel_integrals(cur_lo, cur_hi)
    for depth in range(_MAX_DEPTH + 1):
        mid = 0.5 * (cur_lo + cur_hi)
        left = panel_integrals(cur_lo, mid)
        right = panel_integrals(mid, cur_hi)
        fine = left + right
        delta = np.abs(fine - cur_val)
        # the relative floor stops splitting once machine precision is reached
        done = delta <= np.maximum(cur_tol, 5e-15 * (np.abs(left) + np.abs(right)))
        if depth == _MAX_DEPTH and not done.all():
            raise ConvergenceFailure(
                f"outer quadrature did not settle within depth {_MAX_DEPTH}"
            )
        total += complex((cur_sign[done] * fine[done]).sum())
        abs_total += float(np.abs(fine[done]).sum())
        quad_err += float(delta[done].sum())
        keep = ~done
        if not keep.any():
            break
        if 2 * int(keep.sum()) > 60_000:
            if not drop_tails:
                raise _PanelBudget
            raise ConvergenceFailure(
                "outer quadrature refinement exceeded the panel budget"
            )
        cur_lo = np.concatenate([cur_lo[keep], mid[keep]])
        cur_hi = np.concatenate([mid[keep], cur_hi[keep]])
        cur_sign = np.concatenate([cur_sign[keep], cur_sign[keep]])
        cur_tol = np.concatenate([cur_tol[keep] / 2.0, cur_tol[keep] / 2.0])
        cur_val = np.concatenate([left[keep], right[keep]])

    scale = abs(pref_col)
    err_m = abs(pref) * 4.0 * big_x * math.exp(-l_cut)
    value = (pref_col * total).real
    err = (
        err_tail_x
        + err_m
        + scale * (quad_err + err_box[0] + drop_err)
        + 1e-15 * scale * abs_total
        + 1e-16
    )
    return float(value), float(err)


# ---------------------------------------------------------------------------
# fast exact engine: odd-harmonic Fourier expansion of the bin lattice


def _spectral_value(
    k: GaussKernel, ell: float, tol: ToleranceConfig, term_budget: int | None = None
) -> tuple[float, float]:
    """Same lattice sum through the square-wave Fourier series.

    C = Re[ pref * sum_{j,k odd} 16/(pi j k) D^{-1/2}
            (e^{E+} - e^{E-}) ],   E+- = (quad_b a^2 + quad_a b^2 +- cross a b)/D,
    a = j pi/ell, b = k pi/ell, D = 4 quad_a quad_b - cross^2.

    Every Re(E) <= 0 (transform of an absolutely integrable Gaussian), so
    the double series has rigorous Gaussian tails.  Used for scans; slow
    when the decay margin degenerates near singular manifolds.
    """
    qa, qb, cx, pref = k.quad_a, k.quad_b, k.cross, k.prefactor
    d = 4.0 * qa * qb - cx * cx
    sd = complex(np.sqrt(d))  # principal; d never reaches the cut (decay form PD)
    w2 = (math.pi / ell) ** 2
    ca = qb * w2 / d
    cb = qa * w2 / d
    cc = cx * w2 / d
    p = -ca.real
    p2 = -cb.real
    q = abs(cc.real)
    if not (p > 0.0 and p2 > 0.0 and 4.0 * p * p2 > q * q):
        raise ConvergenceFailure("spectral exponents lost their decay form")
    lam = 0.5 * ((p + p2) - math.hypot(p - p2, q))
    amp = 16.0 / math.pi * abs(pref / sd)
    tail = tol.series_tail_tol
    jmax = math.sqrt(max(math.log(max(amp, 1e-30) * 50.0 / (tail * lam)), 1.0) / lam)
    jtop = int(jmax) | 1
    if jtop > tol.max_terms:
        raise ConvergenceFailure(
            f"spectral series needs {jtop} harmonics, above max_terms={tol.max_terms}"
        )
    if term_budget is not None and ((jtop + 1) // 2) ** 2 > term_budget:
        raise ConvergenceFailure(
            f"spectral series of {((jtop + 1) // 2) ** 2} terms exceeds the scan budget"
        )
    j = np.arange(1, jtop + 1, 2, dtype=float)
    inv = 1.0 / j
    total = 0.0 + 0.0j
    abs_total = 0.0
    chunk = max(1, int(4e6 // j.size))
    for i in range(0, j.size, chunk):
        jj = j[i : i + chunk, None]
        kk = j[None, :]
        ee = ca * jj * jj + cb * kk * kk
        eo = cc * jj * kk
        t = (np.exp(ee + eo) - np.exp(ee - eo)) * (inv[i : i + chunk, None] * inv[None, :])
        total += t.sum()
        abs_total += float(np.abs(t).sum())

    def odd_tail(m: int) -> float:
        r = math.exp(-4.0 * lam * (m + 1))
        return math.exp(-lam * m * m) / max(1.0 - r, 1e-16)

    s_all = odd_tail(1)
    s_out = odd_tail(jtop + 2)
    err = amp * (2.0 * s_out * s_all + s_out * s_out) + 1e-15 * amp * abs_total + 1e-16
    value = 16.0 / math.pi * (pref / sd * total).real
    return float(value), float(err)


# ---------------------------------------------------------------------------
# zero-angle erf series


def _zero_angle_value(r_a: float, r_b: float, ell: float, tol: ToleranceConfig) -> tuple[float, float]:
    if r_a > r_b:
        r_a, r_b = r_b, r_a  # exchange symmetry; keeps <= 1 inner flip per bin
    ea = math.exp(r_a)
    eb = math.exp(r_b)
    slope = math.exp(r_a - r_b)
    tail = tol.series_tail_tol
    nbin = int(math.ceil(float(special.erfcinv(min(tail, 1.0))) / (ea * ell))) + 1
    if 2 * nbin > tol.max_terms:
        raise ConvergenceFailure(
            f"zero-angle series of {2 * nbin} bins exceeds max_terms={tol.max_terms}"
        )
    n = np.arange(-nbin, nbin)
    u0 = ea * ell * n
    u1 = ea * ell * (n + 1)
    j_left = np.floor(slope * n)
    j_right = np.floor(slope * (n + 1))
    flip = j_right > j_left
    ustar = np.clip(np.where(flip, eb * ell * j_right, u1), u0, u1)
    s_left = np.where(j_left % 2 == 0, 1.0, -1.0)
    s_right = np.where(j_right % 2 == 0, 1.0, -1.0)
    g0 = special.erf(u0)
    g1 = special.erf(u1)
    gs = special.erf(ustar)
    c_n = 0.5 * (s_left * (gs - g0) + np.where(flip, s_right * (g1 - gs), 0.0))
    outer = np.where(n % 2 == 0, 1.0, -1.0)
    value = math.fsum(outer * c_n)
    err = 2.0 * float(special.erfc(ea * nbin * ell)) + 1e-15 * float(np.abs(c_n).sum()) + 1e-16
    return float(value), float(err)


def correlator_zero_angle(
    r_a: float,
    r_b: float,
    spec,
    tol: ToleranceConfig = DEFAULT_TOL,
) -> CorrelatorResult:
    """Correlator for two states with both squeezing angles exactly zero.

    The pair kernel degenerates to a delta coupling mapping each bin of
    one coordinate linearly into the other, and the lattice sum reduces
    to a single alternating series of erf differences.  Exact for any
    (r_a, r_b); the series is evaluated with the smaller amplitude first
    (the correlator is exchange symmetric, and one orientation keeps at
    most one interior sign flip per bin).
    """
    r_a = float(r_a)
    r_b = float(r_b)
    if not (math.isfinite(r_a) and math.isfinite(r_b)) or r_a < 0.0 or r_b < 0.0:
        raise ValueError(f"squeezing amplitudes must be finite and >= 0, got {r_a!r}, {r_b!r}")
    ell = _ell_of(spec)
    if math.isinf(ell):
        raise ValueError("zero-angle series needs finite ell; the plateau value is 1")
    value, err = _zero_angle_value(r_a, r_b, ell, tol)
    return CorrelatorResult(value, err, "zero_angle_series")


# ---------------------------------------------------------------------------
# plateau (infinite bin width)


def _plateau_from_kernel(k: GaussKernel, tol: ToleranceConfig) -> tuple[float, float]:
    d = 4.0 * k.quad_a * k.quad_b - k.cross * k.cross
    sd = complex(np.sqrt(d))
    w = k.cross / sd
    # arctan cut: the imaginary axis with |Im| >= 1
    if abs(w.real) <= 1e-12 * (1.0 + abs(w)) and abs(w.imag) >= 1.0 - 1e-12:
        raise BranchAmbiguity(
            f"plateau argument {w:.6g} sits on the inverse-tangent branch cut"
        )
    amp = 4.0 * k.prefactor / sd
    val = complex(amp * np.arctan(w))
    one_minus = abs(1.0 - w * w)
    err = 1e-13 * (1.0 + abs(val) + abs(amp) * abs(w) / max(one_minus, 1e-12)) + 1e-16
    return float(val.real), float(err)


def correlator_plateau(
    a: SqueezeParams,
    b: SqueezeParams,
    channel: DecoherenceChannel = IDENTITY_CHANNEL,
    tol: ToleranceConfig = DEFAULT_TOL,
) -> CorrelatorResult:
    """Infinite-bin-width limit: the operator reduces to sign(Q).

    Closed form 4 * prefactor * arctan(cross/sqrt(D))/sqrt(D) with
    D = 4 quad_a quad_b - cross^2 on principal branches (equal to the
    inverse-hyperbolic-tangent form in the rotated variable; both square
    root sign choices give the same value).  D never touches the negative
    real axis for an integrable kernel, so the only ambiguity is the
    arctan cut, reported as BranchAmbiguity.
    """
    k = apply_decoherence(kernel_coefficients(a, b, tol), channel)
    value, err = _plateau_from_kernel(k, tol)
    return CorrelatorResult(value, err, "plateau")


# ---------------------------------------------------------------------------
# general series and dispatch


def correlator_general(
    a: SqueezeParams,
    b: SqueezeParams,
    spec,
    channel: DecoherenceChannel = IDENTITY_CHANNEL,
    tol: ToleranceConfig = DEFAULT_TOL,
) -> CorrelatorResult:
    """Direct evaluation of the alternating lattice sum at finite ell.

    Requires a non-singular configuration (raises SingularConfiguration
    otherwise; the dispatcher owns the nudge policy for the singular
    neighborhood).
    """
    ell = _ell_of(spec)
    if math.isinf(ell):
        raise ValueError("general series needs finite ell; use the plateau path")
    k = apply_decoherence(kernel_coefficients(a, b, tol), channel)
    value, err = _erf_column_value(k, ell, tol)
    return CorrelatorResult(value, err, "general_series")


def _nudged(a, b, ell, channel, tol, engine) -> CorrelatorResult:
    """Evaluate a singular configuration from nudged neighbors.

    The correlator approaches the singular manifold with a square-root
    cusp in the offset, so plain averaging of nearby points is biased by
    the cusp scale.  Two same-side evaluations at offsets delta and
    4*delta give the Richardson combination 2*C(delta) - C(4*delta),
    which cancels the sqrt term exactly; the cancelled magnitude is kept
    in the error estimate.  The offset is an angle nudge of phi_b when
    the second state carries any squeezing, otherwise (vacuum second
    state, where the angle is inert) an amplitude nudge along a diagonal
    angle.  The nudge distance escalates until both nudged pairs clear
    the singular threshold.
    """
    floor = 10.0 * tol.singular_threshold
    for mult in (1.0, 4.0, 16.0):
        delta = _NUDGE_DELTA * mult
        if b.r > 0.0:
            candidates = (
                (SqueezeParams(b.r, b.phi + delta), SqueezeParams(b.r, b.phi + 4.0 * delta)),
                (SqueezeParams(b.r, b.phi - delta), SqueezeParams(b.r, b.phi - 4.0 * delta)),
            )
        else:
            candidates = (
                (SqueezeParams(delta, math.pi / 4.0), SqueezeParams(4.0 * delta, math.pi / 4.0)),
            )
        for b1, b2 in candidates:
            if min(abs(pair_scale(a, b1)), abs(pair_scale(a, b2))) < floor:
                continue
            r1 = _evaluate(a, b1, ell, channel, tol, engine)
            r2 = _evaluate(a, b2, ell, channel, tol, engine)
            value = 2.0 * r1.value - r2.value
            err = abs(r1.value - r2.value) + r1.err_estimate + r2.err_estimate
            return CorrelatorResult(float(value), float(err), r1.method)
    raise ConvergenceFailure(
        f"could not move {a}, {b} off the singular manifold by nudging"
    )


def _evaluate(a, b, ell, channel, tol, engine) -> CorrelatorResult:
    """Non-singular finite/plateau evaluation with the given general engine."""
    k = apply_decoherence(kernel_coefficients(a, b, tol), channel)
    if math.isinf(ell):
        value, err = _plateau_from_kernel(k, tol)
        return CorrelatorResult(value, err, "plateau")
    value, err = engine(k, ell, tol)
    return CorrelatorResult(value, err, "general_series")


def _dispatch(a, b, ell, channel, tol, engine) -> CorrelatorResult:
    if a == b and channel.xi == 0.0:
        return CorrelatorResult(1.0, 0.0, "equal_time")
    if a.phi == 0.0 and b.phi == 0.0:
        if channel.xi > 0.0:
            raise UnsupportedCombination(
                "the zero-angle series has no dephasing variant; "
                "evaluate at a small nonzero angle instead"
            )
        if math.isinf(ell):
            # both sign patterns map through a positive linear stretch
            return CorrelatorResult(1.0, 1e-15, "plateau")
        value, err = _zero_angle_value(a.r, b.r, ell, tol)
        return CorrelatorResult(value, err, "zero_angle_series")
    if abs(pair_scale(a, b)) < tol.singular_threshold:
        return _nudged(a, b, ell, channel, tol, engine)
    return _evaluate(a, b, ell, channel, tol, engine)


def correlator(
    a: SqueezeParams,
    b: SqueezeParams,
    spec,
    channel: DecoherenceChannel = IDENTITY_CHANNEL,
    tol: ToleranceConfig = DEFAULT_TOL,
) -> CorrelatorResult:
    """Two-time sign correlator with automatic path dispatch.

    Routes: identical states with the identity channel -> exact 1;
    both angles zero -> erf series (dephasing unsupported there); bin
    width infinite -> plateau closed form; configurations inside the
    singular threshold -> nudged evaluation with inflated err_estimate;
    everything else -> general series.  ``spec`` is a MeasurementSpec or
    a plain bin width (math.inf for the plateau).
    """
    ell = _ell_of(spec)
    return _dispatch(a, b, ell, channel, tol, _erf_column_value)


def _scan_engine(k: GaussKernel, ell: float, tol: ToleranceConfig) -> tuple[float, float]:
    """Finite-ell engine tuned for throughput over parameter scans.

    Once the central bins swallow the whole decay envelope the finite-ell
    operator and the plain sign agree on all the remaining mass, so the
    plateau closed form is returned with the leaked mass added to the
    error.  Otherwise the spectral series runs under a term budget, and
    the column series takes over where that budget would be blown (slow
    decay near singular manifolds, wide bins with a fat envelope).
    """
    px, py, rc = -k.quad_a.real, -k.quad_b.real, k.cross.real
    det = 4.0 * px * py - rc * rc
    if px > 0.0 and py > 0.0 and det > 0.0:
        n_abs = abs(k.prefactor) * 2.0 * math.pi / math.sqrt(det)
        kap_x = px - rc * rc / (4.0 * py)
        kap_y = py - rc * rc / (4.0 * px)
        leak = 2.0 * n_abs * float(
            special.erfc(math.sqrt(kap_x) * ell) + special.erfc(math.sqrt(kap_y) * ell)
        )
        if leak < 1e-10:
            value, err = _plateau_from_kernel(k, tol)
            return value, err + leak
    try:
        return _spectral_value(k, ell, tol, term_budget=250_000)
    except ConvergenceFailure:
        return _erf_column_value(k, ell, tol)


def _fast_correlator(
    a: SqueezeParams,
    b: SqueezeParams,
    spec,
    channel: DecoherenceChannel = IDENTITY_CHANNEL,
    tol: ToleranceConfig = DEFAULT_TOL,
) -> CorrelatorResult:
    """Dispatcher wired to the scan engine; used by parameter scans."""
    ell = _ell_of(spec)
    return _dispatch(a, b, ell, channel, tol, _scan_engine)
