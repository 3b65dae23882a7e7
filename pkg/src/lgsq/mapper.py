"""Violation maps over squeezing-parameter space.

For a protocol family parameterized over a 2D grid, each node gets the
bin width maximized out: a log-spaced coarse profile of both strings,
golden-section refinement around every coarse local maximum, and the
infinite-width plateau as an explicit extra candidate.  Level-1 contours
of the resulting k_max surface (and of the plateau surface) mark the
violating regions.

Scans use the spectral correlator engine through the same dispatcher as
the production path, so special cases (equal states, zero angles, the
singular neighborhood) are handled identically.  Grids are evaluated
node-independently and assembled by index, so results are bitwise
identical for any thread count.
"""

from __future__ import annotations

import math
import os
from collections import defaultdict, deque
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, replace

import numpy as np

from .core import (
    DEFAULT_TOL,
    BranchAmbiguity,
    ConvergenceFailure,
    SingularConfiguration,
    SqueezeParams,
    ToleranceConfig,
    UnsupportedCombination,
)
from .correlator import _fast_correlator, correlator
from .kernel import IDENTITY_CHANNEL, DecoherenceChannel
from .lgi import Protocol3

_EVAL_ERRORS = (
    SingularConfiguration,
    ConvergenceFailure,
    BranchAmbiguity,
    UnsupportedCombination,
)

DEFAULT_ELL_RANGE = (0.05, 50.0)
DEFAULT_COARSE_POINTS = 64
DEFAULT_GRID = 101

_INVPHI = (math.sqrt(5.0) - 1.0) / 2.0
_REFINE_TOL = 1e-3  # in log bin width


def _resolve_threads(threads) -> int:
    if threads is not None:
        n = int(threads)
    else:
        env = os.environ.get("LGI_THREADS", "")
        n = int(env) if env.strip() else (os.cpu_count() or 1)
    if n < 1:
        raise ValueError(f"thread count must be >= 1, got {threads!r}")
    return n


def _run_indexed(worker, count: int, threads: int) -> None:
    """Run worker(i) for all i; by-index writes keep results deterministic."""
    if threads <= 1 or count <= 1:
        for i in range(count):
            worker(i)
        return
    with ThreadPoolExecutor(max_workers=threads) as pool:
        for f in [pool.submit(worker, i) for i in range(count)]:
            f.result()


@dataclass(frozen=True, eq=False)
class EllMaximum:
    """Bin-width maximization record for one protocol.

    ``ell_star`` is the maximizing width (math.inf when the plateau
    wins), ``k_max`` the larger string there, ``which`` names it.  The
    coarse profiles are kept so callers can see the whole landscape;
    k_max is never below any finite profile sample.
    """

    ell_star: float
    k_max: float
    err: float
    which: str
    plateau_k: float
    plateau_err: float
    ell_grid: np.ndarray
    k3_profile: np.ndarray
    k3_prime_profile: np.ndarray
    failures: tuple


@dataclass(frozen=True, eq=False)
class ViolationMap:
    """k_max surface over a 2D protocol family with contour lines."""

    axis1: np.ndarray
    axis2: np.ndarray
    axis_names: tuple
    fixed: dict
    k_max: np.ndarray
    ell_star: np.ndarray
    err: np.ndarray
    plateau_k: np.ndarray
    violation_contours: list
    plateau_contours: list
    failures: list
    success_fraction: float

    @property
    def violations(self) -> np.ndarray:
        """Nodes whose maximum clears the bound beyond numerical doubt."""
        with np.errstate(invalid="ignore"):
            return self.k_max > 1.0 + 3.0 * self.err


@dataclass(frozen=True, eq=False)
class DecoherenceSeries:
    xi: np.ndarray
    k3: np.ndarray
    k3_prime: np.ndarray
    err: np.ndarray


STRING_CHOICES = ("k3", "k3_prime", "max")


def _pick(k3, k3p, choice: str):
    if choice == "k3":
        return k3
    if choice == "k3_prime":
        return k3p
    return np.maximum(k3, k3p) if isinstance(k3, np.ndarray) else max(k3, k3p)


def _check_choice(choice: str) -> None:
    if choice not in STRING_CHOICES:
        raise ValueError(f"string_choice must be one of {STRING_CHOICES}, got {choice!r}")


def _triple_eval(a, b, c, ell, channel, tol):
    """Both strings at one bin width; scan engine. (k3, k3p, err_sum)."""
    r_ab = _fast_correlator(a, b, ell, channel, tol)
    r_bc = _fast_correlator(b, c, ell, channel, tol)
    r_ac = _fast_correlator(a, c, ell, channel, tol)
    k3 = r_ab.value + r_bc.value - r_ac.value
    k3p = -r_ab.value - r_bc.value - r_ac.value
    return k3, k3p, r_ab.err_estimate + r_bc.err_estimate + r_ac.err_estimate


def _golden_max(g, lo: float, hi: float):
    """Golden-section maximum of g over [lo, hi]; g(t) -> (value, err)."""
    c = hi - _INVPHI * (hi - lo)
    d = lo + _INVPHI * (hi - lo)
    fc, fd = g(c), g(d)
    while (hi - lo) > _REFINE_TOL:
        if fc[0] >= fd[0]:
            hi, d, fd = d, c, fc
            c = hi - _INVPHI * (hi - lo)
            fc = g(c)
        else:
            lo, c, fc = c, d, fd
            d = lo + _INVPHI * (hi - lo)
            fd = g(d)
    return (c, fc) if fc[0] >= fd[0] else (d, fd)


def _local_maxima(values: np.ndarray) -> list:
    v = np.where(np.isfinite(values), values, -np.inf)
    out = []
    for i in range(len(v)):
        if not np.isfinite(v[i]):
            continue
        left = v[i - 1] if i > 0 else -np.inf
        right = v[i + 1] if i + 1 < len(v) else -np.inf
        if v[i] >= left and v[i] >= right:
            out.append(i)
    return out


def _refine_best(a, b, c, channel, tol, t_grid, kk, errs, failures, choice="max"):
    """Refine every coarse local maximum; return (t_best, k_best, err_best)."""

    def g(t):
        try:
            k3, k3p, e = _triple_eval(a, b, c, math.exp(t), channel, tol)
        except _EVAL_ERRORS as exc:
            failures.append(f"refine ell={math.exp(t):.6g}: {exc}")
            return (-np.inf, np.inf)
        return (_pick(k3, k3p, choice), e)

    best = (-np.inf, np.inf, np.nan)  # (k, err, t)
    for idx in _local_maxima(kk):
        if np.isfinite(kk[idx]) and kk[idx] > best[0]:
            best = (float(kk[idx]), float(errs[idx]), float(t_grid[idx]))
        lo = t_grid[max(idx - 1, 0)]
        hi = t_grid[min(idx + 1, len(t_grid) - 1)]
        if hi - lo <= _REFINE_TOL:
            continue
        t_b, (k_b, e_b) = _golden_max(g, float(lo), float(hi))
        if np.isfinite(k_b) and k_b > best[0]:
            best = (float(k_b), float(e_b), float(t_b))
    return best[2], best[0], best[1]


def maximize_over_ell(
    a: SqueezeParams,
    b: SqueezeParams,
    c: SqueezeParams,
    channel: DecoherenceChannel = IDENTITY_CHANNEL,
    *,
    string_choice: str = "max",
    ell_range: tuple = DEFAULT_ELL_RANGE,
    coarse_points: int = DEFAULT_COARSE_POINTS,
    tol: ToleranceConfig = DEFAULT_TOL,
) -> EllMaximum:
    """Maximize one string (or the larger of both) over the bin width.

    Log-spaced coarse profile over ``ell_range`` plus the plateau as an
    explicit candidate, then golden-section refinement (to 1e-3 in log
    width) around each coarse local maximum.  Profile points that fail
    to evaluate are recorded and skipped.  ``string_choice`` is "k3",
    "k3_prime", or "max".
    """
    _check_choice(string_choice)
    lo, hi = float(ell_range[0]), float(ell_range[1])
    if not (0.0 < lo < hi) or not math.isfinite(hi):
        raise ValueError(f"need 0 < lo < hi finite, got {ell_range!r}")
    t_grid = np.linspace(math.log(lo), math.log(hi), int(coarse_points))
    failures: list = []
    k3_prof = np.full(t_grid.size, np.nan)
    k3p_prof = np.full(t_grid.size, np.nan)
    err_prof = np.full(t_grid.size, np.nan)
    for i, t in enumerate(t_grid):
        try:
            k3_prof[i], k3p_prof[i], err_prof[i] = _triple_eval(
                a, b, c, math.exp(t), channel, tol
            )
        except _EVAL_ERRORS as exc:
            failures.append(f"ell={math.exp(t):.6g}: {exc}")
    try:
        pk3, pk3p, perr = _triple_eval(a, b, c, math.inf, channel, tol)
        plateau_k, plateau_err = _pick(pk3, pk3p, string_choice), perr
    except _EVAL_ERRORS as exc:
        failures.append(f"plateau: {exc}")
        plateau_k, plateau_err = np.nan, np.nan

    kk = _pick(k3_prof, k3p_prof, string_choice)
    t_best, k_best, e_best = _refine_best(
        a, b, c, channel, tol, t_grid, kk, err_prof, failures, string_choice
    )
    if np.isfinite(plateau_k) and (not np.isfinite(k_best) or plateau_k > k_best):
        ell_star, k_max, err = math.inf, float(plateau_k), float(plateau_err)
    else:
        ell_star, k_max, err = math.exp(t_best), float(k_best), float(e_best)
    if not np.isfinite(k_max):
        raise ConvergenceFailure(
            f"no bin width could be evaluated for {a}, {b}, {c}: {failures!r}"
        )
    if string_choice == "max":
        # name the winning string at the maximizer
        k3_w, k3p_w, _ = _triple_eval(a, b, c, ell_star, channel, tol)
        which = "k3" if k3_w >= k3p_w else "k3_prime"
    else:
        which = string_choice
    return EllMaximum(
        ell_star=float(ell_star),
        k_max=float(k_max),
        err=float(err),
        which=which,
        plateau_k=float(plateau_k),
        plateau_err=float(plateau_err),
        ell_grid=np.exp(t_grid),
        k3_profile=k3_prof,
        k3_prime_profile=k3p_prof,
        failures=tuple(failures),
    )


# ---------------------------------------------------------------------------
# 2D scans


def amplitude_slice(r_a: float, phi: float):
    """Protocol family with a fixed first state and one shared angle.

    The two scan axes are the squeezing amplitudes of the second and
    third states.
    """

    def build(r_b, r_c):
        return (
            SqueezeParams(r_a, phi),
            SqueezeParams(float(r_b), phi),
            SqueezeParams(float(r_c), phi),
        )

    return build


def angle_slice(r: float, phi_a: float):
    """Protocol family with one shared amplitude and a fixed first angle.

    The two scan axes are the squeezing angles of the second and third
    states.
    """

    def build(phi_b, phi_c):
        return (
            SqueezeParams(r, phi_a),
            SqueezeParams(r, float(phi_b)),
            SqueezeParams(r, float(phi_c)),
        )

    return build


def _pair_key(u: SqueezeParams, v: SqueezeParams):
    ku, kv = (u.r, u.phi), (v.r, v.phi)
    return (ku, kv) if ku <= kv else (kv, ku)


def scan_2d(
    build,
    axis1,
    axis2,
    *,
    axis_names: tuple = ("axis1", "axis2"),
    fixed: dict | None = None,
    string_choice: str = "max",
    channel: DecoherenceChannel = IDENTITY_CHANNEL,
    ell_range: tuple = DEFAULT_ELL_RANGE,
    coarse_points: int = DEFAULT_COARSE_POINTS,
    tol: ToleranceConfig = DEFAULT_TOL,
    threads=None,
) -> ViolationMap:
    """Bin-width-maximized violation map over a 2D protocol family.

    ``build(v1, v2)`` returns the three states for one node.  Coarse
    correlator profiles are shared between nodes through a pair cache
    (the family usually moves only one state per axis), refinement is
    per node.  Nodes that fail evaluation everywhere become NaN and are
    listed in ``failures``; partial failures just lose profile points.
    """
    _check_choice(string_choice)
    axis1 = np.asarray(axis1, dtype=float)
    axis2 = np.asarray(axis2, dtype=float)
    if axis1.ndim != 1 or axis2.ndim != 1 or axis1.size < 2 or axis2.size < 2:
        raise ValueError("axes must be 1D with at least two points each")
    n1, n2 = axis1.size, axis2.size
    threads = _resolve_threads(threads)
    lo, hi = float(ell_range[0]), float(ell_range[1])
    t_grid = np.linspace(math.log(lo), math.log(hi), int(coarse_points))
    ells = np.exp(t_grid)

    protos = [[build(axis1[i], axis2[j]) for j in range(n2)] for i in range(n1)]

    # unique pair profiles over the coarse grid (+ plateau in the last slot)
    pair_states: dict = {}
    for i in range(n1):
        for j in range(n2):
            a, b, c = protos[i][j]
            for u, v in ((a, b), (b, c), (a, c)):
                pair_states.setdefault(_pair_key(u, v), (u, v))
    keys = list(pair_states)
    vals = {k: np.full(ells.size + 1, np.nan) for k in keys}
    errs = {k: np.full(ells.size + 1, np.nan) for k in keys}
    pair_failures: list = [[] for _ in keys]

    def pair_worker(pi: int) -> None:
        u, v = pair_states[keys[pi]]
        vrow, erow = vals[keys[pi]], errs[keys[pi]]
        for m, ell in enumerate([*ells, math.inf]):
            try:
                r = _fast_correlator(u, v, ell, channel, tol)
                vrow[m], erow[m] = r.value, r.err_estimate
            except _EVAL_ERRORS as exc:
                pair_failures[pi].append(f"pair {keys[pi]} ell={ell:.6g}: {exc}")

    _run_indexed(pair_worker, len(keys), threads)

    k_max = np.full((n1, n2), np.nan)
    ell_star = np.full((n1, n2), np.nan)
    err_grid = np.full((n1, n2), np.nan)
    plateau_grid = np.full((n1, n2), np.nan)
    node_failures: list = [[] for _ in range(n1 * n2)]

    def node_worker(flat: int) -> None:
        i, j = divmod(flat, n2)
        a, b, c = protos[i][j]
        vab, eab = vals[_pair_key(a, b)], errs[_pair_key(a, b)]
        vbc, ebc = vals[_pair_key(b, c)], errs[_pair_key(b, c)]
        vac, eac = vals[_pair_key(a, c)], errs[_pair_key(a, c)]
        k3 = vab + vbc - vac
        k3p = -vab - vbc - vac
        kk = _pick(k3, k3p, string_choice)
        esum = eab + ebc + eac
        plateau_k, plateau_err = kk[-1], esum[-1]
        plateau_grid[i, j] = plateau_k
        t_best, k_best, e_best = _refine_best(
            a,
            b,
            c,
            channel,
            tol,
            t_grid,
            kk[:-1],
            esum[:-1],
            node_failures[flat],
            string_choice,
        )
        if np.isfinite(plateau_k) and (not np.isfinite(k_best) or plateau_k > k_best):
            k_max[i, j], ell_star[i, j], err_grid[i, j] = plateau_k, np.inf, plateau_err
        elif np.isfinite(k_best):
            k_max[i, j], ell_star[i, j], err_grid[i, j] = (
                k_best,
                math.exp(t_best),
                e_best,
            )
        else:
            node_failures[flat].append("no bin width could be evaluated")

    _run_indexed(node_worker, n1 * n2, threads)

    failures: list = []
    for pi, msgs in enumerate(pair_failures):
        failures.extend(msgs)
    for flat, msgs in enumerate(node_failures):
        i, j = divmod(flat, n2)
        failures.extend(f"node ({i}, {j}): {m}" for m in msgs)

    vio = contour_lines(axis1, axis2, k_max, 1.0)
    plat = contour_lines(axis1, axis2, plateau_grid, 1.0)
    return ViolationMap(
        axis1=axis1,
        axis2=axis2,
        axis_names=tuple(axis_names),
        fixed=dict(fixed or {}),
        k_max=k_max,
        ell_star=ell_star,
        err=err_grid,
        plateau_k=plateau_grid,
        violation_contours=vio,
        plateau_contours=plat,
        failures=failures,
        success_fraction=float(np.isfinite(k_max).mean()),
    )


def alpha_shift(protocol: Protocol3, alpha: float) -> Protocol3:
    """Rotate every squeezing angle of a protocol by the same amount.

    Angles re-reduce to the canonical interval on construction; a
    zero-amplitude state stays angleless.
    """
    alpha = float(alpha)
    return replace(
        protocol,
        a=SqueezeParams(protocol.a.r, protocol.a.phi + alpha),
        b=SqueezeParams(protocol.b.r, protocol.b.phi + alpha),
        c=SqueezeParams(protocol.c.r, protocol.c.phi + alpha),
    )


def decoherence_scan(
    protocol: Protocol3,
    xi_grid,
    tol: ToleranceConfig = DEFAULT_TOL,
) -> DecoherenceSeries:
    """Both strings against an ascending grid of dephasing strengths.

    The protocol's bin width and cross-term convention are kept; only
    the strength varies.
    """
    xi = np.asarray(xi_grid, dtype=float)
    if xi.ndim != 1 or xi.size == 0:
        raise ValueError("xi grid must be a non-empty 1D array")
    if xi[0] < 0.0 or (xi.size > 1 and not np.all(np.diff(xi) > 0.0)):
        raise ValueError("xi grid must be ascending and non-negative")
    k3 = np.empty(xi.size)
    k3p = np.empty(xi.size)
    err = np.empty(xi.size)
    for m, x in enumerate(xi):
        ch = DecoherenceChannel(float(x), protocol.channel.cross_sign)
        k3[m], k3p[m], err[m] = _triple_eval(
            protocol.a,
            protocol.b,
            protocol.c,
            protocol.measurement.ell,
            ch,
            tol,
        )
    return DecoherenceSeries(xi=xi, k3=k3, k3_prime=k3p, err=err)


# ---------------------------------------------------------------------------
# contours: hand-rolled marching squares with saddle disambiguation


def _edge_point(axis1, axis2, z, key, level):
    kind, i, j = key
    if kind == "x":
        z0, z1 = z[i, j], z[i + 1, j]
        t = (level - z0) / (z1 - z0)
        return (axis1[i] + t * (axis1[i + 1] - axis1[i]), axis2[j])
    z0, z1 = z[i, j], z[i, j + 1]
    t = (level - z0) / (z1 - z0)
    return (axis1[i], axis2[j] + t * (axis2[j + 1] - axis2[j]))


_SEG_TABLE = {
    1: (("B", "L"),),
    2: (("B", "R"),),
    3: (("L", "R"),),
    4: (("R", "T"),),
    6: (("B", "T"),),
    7: (("L", "T"),),
    8: (("L", "T"),),
    9: (("B", "T"),),
    11: (("R", "T"),),
    12: (("L", "R"),),
    13: (("B", "R"),),
    14: (("B", "L"),),
}


def contour_lines(axis1, axis2, grid, level: float) -> list:
    """Level-set polylines of a grid function (closed loops and open arcs).

    Marching squares with linear edge interpolation; ambiguous saddle
    cells are resolved by the cell-center average.  Cells touching NaN
    values are skipped.  Closed polylines repeat their first point at
    the end.  Returns a list of (n, 2) arrays in axis coordinates.
    """
    axis1 = np.asarray(axis1, dtype=float)
    axis2 = np.asarray(axis2, dtype=float)
    z = np.asarray(grid, dtype=float)
    if z.shape != (axis1.size, axis2.size):
        raise ValueError(f"grid shape {z.shape} does not match axes")
    segments: list = []
    for i in range(axis1.size - 1):
        for j in range(axis2.size - 1):
            corners = (z[i, j], z[i + 1, j], z[i + 1, j + 1], z[i, j + 1])
            if any(map(math.isnan, corners)):
                continue
            idx = (
                (corners[0] > level)
                | (corners[1] > level) << 1
                | (corners[2] > level) << 2
                | (corners[3] > level) << 3
            )
            if idx in (0, 15):
                continue
            names = {
                "B": ("x", i, j),
                "R": ("y", i + 1, j),
                "T": ("x", i, j + 1),
                "L": ("y", i, j),
            }
            if idx in (5, 10):
                center_above = sum(corners) / 4.0 > level
                corner0_above = idx == 5
                if center_above == corner0_above:
                    pairs = (("B", "R"), ("L", "T")) if idx == 5 else (("B", "L"), ("R", "T"))
                else:
                    pairs = (("B", "L"), ("R", "T")) if idx == 5 else (("B", "R"), ("L", "T"))
            else:
                pairs = _SEG_TABLE[idx]
            for p, q in pairs:
                segments.append((names[p], names[q]))

    adj = defaultdict(list)
    for sid, (u, v) in enumerate(segments):
        adj[u].append(sid)
        adj[v].append(sid)
    used = [False] * len(segments)
    lines = []
    for sid in range(len(segments)):
        if used[sid]:
            continue
        used[sid] = True
        u, v = segments[sid]
        chain = deque([u, v])
        closed = False
        while True:
            end = chain[-1]
            nxt = next((k for k in adj[end] if not used[k]), None)
            if nxt is None:
                break
            used[nxt] = True
            s, t = segments[nxt]
            point = t if s == end else s
            chain.append(point)
            if point == chain[0]:
                closed = True
                break
        if not closed:
            while True:
                head = chain[0]
                nxt = next((k for k in adj[head] if not used[k]), None)
                if nxt is None:
                    break
                used[nxt] = True
                s, t = segments[nxt]
                chain.appendleft(t if s == head else s)
        pts = np.array([_edge_point(axis1, axis2, z, k, level) for k in chain])
        lines.append(pts)
    return lines
