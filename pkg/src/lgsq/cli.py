"""Command-line interface.

Subcommands: corr (one correlator as JSON), k3 (both strings as JSON),
scan-ell (bin-width profile as CSV), map (2D violation map as CSV plus a
contour sidecar JSON), decoherence (dephasing sweep as CSV), validate
(self-check suites against the independent oracle).

Every output starts with provenance (tool version, full parameters,
tolerances, seed where one applies) so a rerun of the same command is
byte-identical.  Data goes to stdout or --out; diagnostics go to stderr.
Exit codes: 0 ok, 2 bad usage or input, 3 evaluation failure, 4 scan
with under 99 percent node success, 5 validation failure.
"""

from __future__ import annotations

import argparse
import json
import math
import sys

import numpy as np

from . import __version__
from . import kernel as kernel_mod
from . import mapper as mapper_mod
from . import oracle as oracle_mod
from .core import (
    DEFAULT_TOL,
    BranchAmbiguity,
    ConvergenceFailure,
    SingularConfiguration,
    SqueezeParams,
    UnsupportedCombination,
)
from .correlator import (
    MeasurementSpec,
    correlator,
    correlator_general,
    correlator_plateau,
    correlator_zero_angle,
)
from .kernel import DecoherenceChannel, IDENTITY_CHANNEL
from .lgi import Protocol3, k3_protocol
from .mapper import amplitude_slice, angle_slice, decoherence_scan, scan_2d

_EVAL_ERRORS = (
    SingularConfiguration,
    ConvergenceFailure,
    BranchAmbiguity,
    UnsupportedCombination,
)

_XI_SIGN = {"paper": "subtract", "physical": "add"}


def _fmt(x) -> str:
    x = float(x)
    return "" if math.isnan(x) else repr(x)


def _pval(v) -> str:
    if isinstance(v, float):
        return repr(v)
    return str(v)


def _tol_text() -> str:
    t = DEFAULT_TOL
    return (
        f"series_tail_tol={t.series_tail_tol!r} "
        f"quadrature_rel_tol={t.quadrature_rel_tol!r} "
        f"singular_threshold={t.singular_threshold!r} "
        f"max_terms={t.max_terms}"
    )


def _provenance_lines(command: str, params: dict) -> list:
    items = " ".join(f"{k}={_pval(v)}" for k, v in sorted(params.items()))
    return [
        f"# tool: lgsq {__version__}",
        f"# command: {command}",
        f"# params: {items}",
        f"# tolerances: {_tol_text()}",
    ]


def _provenance_obj(command: str, params: dict) -> dict:
    return {
        "tool": "lgsq",
        "version": __version__,
        "command": command,
        "params": {k: params[k] for k in sorted(params)},
        "tolerances": {
            "series_tail_tol": DEFAULT_TOL.series_tail_tol,
            "quadrature_rel_tol": DEFAULT_TOL.quadrature_rel_tol,
            "singular_threshold": DEFAULT_TOL.singular_threshold,
            "max_terms": DEFAULT_TOL.max_terms,
        },
    }


def _emit(lines: list, out: str | None) -> None:
    text = "\n".join(lines) + "\n"
    if out:
        with open(out, "w", newline="") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _channel_from(args) -> DecoherenceChannel:
    xi = float(getattr(args, "xi", 0.0) or 0.0)
    if xi == 0.0:
        return IDENTITY_CHANNEL
    return DecoherenceChannel(xi, _XI_SIGN[getattr(args, "xi_sign", "paper")])


def _add_channel_args(p) -> None:
    p.add_argument("--xi", type=float, default=0.0, help="dephasing strength (default 0)")
    p.add_argument(
        "--xi-sign",
        choices=sorted(_XI_SIGN),
        default="paper",
        help="cross-coupling sign convention: 'paper' subtracts, 'physical' adds",
    )


def _add_triple_args(p) -> None:
    p.add_argument("--ra", type=float, required=True)
    p.add_argument("--phia", type=float, default=0.0)
    p.add_argument("--rb", type=float, required=True)
    p.add_argument("--phib", type=float, default=0.0)
    p.add_argument("--rc", type=float, required=True)
    p.add_argument("--phic", type=float, default=0.0)


def _params_of(args) -> dict:
    skip = {"func", "command", "config", "out"}
    return {k: v for k, v in vars(args).items() if k not in skip}


# ---------------------------------------------------------------------------
# subcommands


def _cmd_corr(args) -> int:
    a = SqueezeParams(args.ra, args.phia)
    b = SqueezeParams(args.rb, args.phib)
    r = correlator(a, b, MeasurementSpec(args.ell), _channel_from(args))
    doc = {
        "value": r.value,
        "err_estimate": r.err_estimate,
        "method": r.method,
        "provenance": _provenance_obj("corr", _params_of(args)),
    }
    _emit([json.dumps(doc, indent=2)], args.out)
    return 0


def _cmd_k3(args) -> int:
    protocol = Protocol3(
        SqueezeParams(args.ra, args.phia),
        SqueezeParams(args.rb, args.phib),
        SqueezeParams(args.rc, args.phic),
        MeasurementSpec(args.ell),
        _channel_from(args),
    )
    s = k3_protocol(protocol)
    doc = {
        "k3": s.k3,
        "k3_prime": s.k3_prime,
        "k3_class": s.k3_class,
        "k3_prime_class": s.k3_prime_class,
        "classification": s.k3_prime_class if args.prime else s.k3_class,
        "margin": s.margin,
        "provenance": _provenance_obj("k3", _params_of(args)),
    }
    _emit([json.dumps(doc, indent=2)], args.out)
    return 0


def _cmd_scan_ell(args) -> int:
    m = mapper_mod.maximize_over_ell(
        SqueezeParams(args.ra, args.phia),
        SqueezeParams(args.rb, args.phib),
        SqueezeParams(args.rc, args.phic),
        _channel_from(args),
        string_choice=args.string,
        ell_range=(args.ell_lo, args.ell_hi),
        coarse_points=args.coarse,
    )
    lines = _provenance_lines("scan-ell", _params_of(args))
    lines.append(
        f"# result: ell_star={_fmt(m.ell_star)} k_max={_fmt(m.k_max)} err={_fmt(m.err)} "
        f"which={m.which} plateau_k={_fmt(m.plateau_k)} plateau_err={_fmt(m.plateau_err)}"
    )
    for msg in m.failures:
        print(f"warning: {msg}", file=sys.stderr)
    lines.append("ell,k")
    if args.string == "k3":
        kk = m.k3_profile
    elif args.string == "k3_prime":
        kk = m.k3_prime_profile
    else:
        kk = np.maximum(m.k3_profile, m.k3_prime_profile)
    for ell, k in zip(m.ell_grid, kk):
        lines.append(f"{_fmt(ell)},{_fmt(k)}")
    lines.append(f"inf,{_fmt(m.plateau_k)}")
    _emit(lines, args.out)
    return 0


def _cmd_map(args) -> int:
    axis = np.linspace(args.b_lo, args.b_hi, args.points)
    axis2 = np.linspace(args.c_lo, args.c_hi, args.points)
    if args.slice == "angles":
        build = angle_slice(args.ra, args.phi)
        names = ("phi_b", "phi_c")
        fixed = {"r": args.ra, "phi_a": args.phi, "xi": args.xi}
    else:
        build = amplitude_slice(args.ra, args.phi)
        names = ("r_b", "r_c")
        fixed = {"r_a": args.ra, "phi": args.phi, "xi": args.xi}
    vmap = scan_2d(
        build,
        axis,
        axis2,
        axis_names=names,
        fixed=fixed,
        string_choice=args.string,
        channel=_channel_from(args),
        ell_range=(args.ell_lo, args.ell_hi),
        coarse_points=args.coarse,
        threads=args.threads,
    )
    lines = _provenance_lines("map", _params_of(args))
    lines.append(f"# success_fraction: {_fmt(vmap.success_fraction)}")
    lines.append("axis1,axis2,k_max,ell_star,plateau_k")
    for i, v1 in enumerate(vmap.axis1):
        for j, v2 in enumerate(vmap.axis2):
            lines.append(
                f"{_fmt(v1)},{_fmt(v2)},{_fmt(vmap.k_max[i, j])},"
                f"{_fmt(vmap.ell_star[i, j])},{_fmt(vmap.plateau_k[i, j])}"
            )
    _emit(lines, args.out)
    if args.out:
        sidecar = {
            "level": 1.0,
            "violation_contours": [p.tolist() for p in vmap.violation_contours],
            "plateau_contours": [p.tolist() for p in vmap.plateau_contours],
            "provenance": _provenance_obj("map", _params_of(args)),
        }
        with open(args.out + ".contours.json", "w", newline="") as fh:
            fh.write(json.dumps(sidecar, indent=2) + "\n")
    for msg in vmap.failures:
        print(f"warning: {msg}", file=sys.stderr)
    if vmap.success_fraction < 0.99:
        print(
            f"error: only {vmap.success_fraction:.1%} of nodes evaluated",
            file=sys.stderr,
        )
        return 4
    return 0


def _cmd_decoherence(args) -> int:
    protocol = Protocol3(
        SqueezeParams(args.ra, args.phia),
        SqueezeParams(args.rb, args.phib),
        SqueezeParams(args.rc, args.phic),
        MeasurementSpec(args.ell),
        DecoherenceChannel(0.0, _XI_SIGN[args.xi_sign]),
    )
    series = decoherence_scan(protocol, np.linspace(args.xi_lo, args.xi_hi, args.points))
    lines = _provenance_lines("decoherence", _params_of(args))
    lines.append("xi,k3")
    for x, k in zip(series.xi, series.k3):
        lines.append(f"{_fmt(x)},{_fmt(k)}")
    _emit(lines, args.out)
    return 0


# ---------------------------------------------------------------------------
# validate


def _suite_det(rng, cases: int):
    worst = 0.0
    for _ in range(cases):
        a = SqueezeParams(rng.uniform(0.0, 2.2), rng.uniform(-1.5, 1.5))
        b = SqueezeParams(rng.uniform(0.0, 2.2), rng.uniform(-1.5, 1.5))
        m = oracle_mod.coupling_matrix(a, b)
        closed = oracle_mod.coupling_det(a, b)
        numeric = np.linalg.det(m)
        worst = max(worst, abs(closed - numeric) / max(abs(numeric), 1e-30))
    return worst, 1e-10


def _suite_pointwise(rng, cases: int):
    worst = 0.0
    done = 0
    while done < cases:
        a = SqueezeParams(rng.uniform(0.0, 2.0), rng.uniform(-1.5, 1.5))
        b = SqueezeParams(rng.uniform(0.0, 2.0), rng.uniform(-1.5, 1.5))
        if abs(kernel_mod.pair_scale(a, b)) < 1e-6:
            continue
        k = kernel_mod.kernel_coefficients(a, b)
        x, y = rng.uniform(-3.0, 3.0, size=2)
        lhs = k(x, y)
        rhs = (
            np.conj(oracle_mod.wavefunction(a, x))
            * oracle_mod.wavefunction(b, y)
            * oracle_mod.matrix_element(a, b, x, y)
        )
        scale = max(abs(lhs), abs(rhs))
        if scale > 1e-250:
            worst = max(worst, abs(lhs - rhs) / scale)
        done += 1
    return worst, 1e-8


def _suite_dual(rng, cases: int):
    worst = 0.0
    done = 0
    while done < cases:
        a = SqueezeParams(rng.uniform(0.1, 1.5), rng.uniform(-1.5, 1.5))
        b = SqueezeParams(rng.uniform(0.1, 1.5), rng.uniform(-1.5, 1.5))
        if abs(kernel_mod.pair_scale(a, b)) < 1e-3:
            continue
        ell = math.exp(rng.uniform(math.log(0.2), math.log(5.0)))
        got = correlator_general(a, b, ell).value
        want = oracle_mod.oracle_correlator(a, b, ell)
        worst = max(worst, abs(got - want))
        done += 1
    return worst, 1e-6


def _suite_limits(rng, cases: int):
    worst = 0.0
    done = 0
    while done < cases:
        a = SqueezeParams(rng.uniform(0.2, 1.5), rng.uniform(-1.4, 1.4))
        b = SqueezeParams(rng.uniform(0.2, 1.5), rng.uniform(-1.4, 1.4))
        if abs(kernel_mod.pair_scale(a, b)) < 1e-3:
            continue
        plat = correlator_plateau(a, b).value
        wide = correlator_general(a, b, 30.0).value
        # plateau agreement is held ten times tighter than the zero-angle check
        worst = max(worst, 10.0 * abs(plat - wide))
        ra, rb = rng.uniform(0.2, 1.5, size=2)
        if abs(math.tanh(ra) - math.tanh(rb)) < 0.05:
            continue
        za = correlator_zero_angle(ra, rb, 1.5).value
        # the correlator picks up a sqrt(phi) cusp at zero angle, so a single
        # small-angle evaluation cannot meet a 1e-3 threshold; quartering the
        # angle halves the cusp term, and 2*C(phi/4) - C(phi) cancels it
        g1 = correlator_general(
            SqueezeParams(ra, 1e-4), SqueezeParams(rb, 1e-4), 1.5
        ).value
        g2 = correlator_general(
            SqueezeParams(ra, 2.5e-5), SqueezeParams(rb, 2.5e-5), 1.5
        ).value
        worst = max(worst, abs(za - (2.0 * g2 - g1)))
        done += 1
    return worst, 1e-3


def _cmd_validate(args) -> int:
    rng = np.random.default_rng(args.seed)
    base = args.cases
    suites = [
        ("det-closed-vs-numeric", _suite_det, base * 20),
        ("kernel-pointwise-vs-oracle", _suite_pointwise, base * 10),
        ("correlator-dual-path", _suite_dual, max(3, base // 15)),
        ("limit-consistency", _suite_limits, max(4, base // 12)),
    ]
    lines = _provenance_lines("validate", _params_of(args))
    lines.append(f"# seed: {args.seed}")
    header = f"{'suite':<28} {'cases':>6} {'worst':>12} {'threshold':>10} {'status':>8}"
    lines.append(header)
    any_fail = False
    for name, fn, cases in suites:
        try:
            worst, thresh = fn(rng, cases)
            ok = worst < thresh
        except _EVAL_ERRORS as exc:
            print(f"warning: {name}: {exc}", file=sys.stderr)
            worst, thresh, ok = math.inf, math.nan, False
        any_fail |= not ok
        lines.append(
            f"{name:<28} {cases:>6} {worst:>12.3e} {thresh:>10.0e} "
            f"{'pass' if ok else 'FAIL':>8}"
        )
    _emit(lines, args.out)
    return 5 if any_fail else 0


# ---------------------------------------------------------------------------
# parser


def _build_parser():
    parser = argparse.ArgumentParser(
        prog="lgsq",
        description="Temporal sign-correlators of squeezed states and their bounds.",
    )
    parser.add_argument("--version", action="version", version=f"lgsq {__version__}")
    subs = parser.add_subparsers(dest="command", required=True)
    registry = {}

    def sub(name, func, help_text):
        p = subs.add_parser(name, help=help_text)
        p.add_argument("--config", help="JSON file of defaults; explicit flags override")
        p.add_argument("--out", help="output file (default stdout)")
        p.set_defaults(func=func)
        registry[name] = p
        return p

    p = sub("corr", _cmd_corr, "one two-time correlator as JSON")
    p.add_argument("--ra", type=float, required=True)
    p.add_argument("--phia", type=float, default=0.0)
    p.add_argument("--rb", type=float, required=True)
    p.add_argument("--phib", type=float, default=0.0)
    p.add_argument("--ell", type=float, default=math.inf, help="bin width; inf = plateau")
    _add_channel_args(p)

    p = sub("k3", _cmd_k3, "both three-measurement strings as JSON")
    _add_triple_args(p)
    p.add_argument("--ell", type=float, default=math.inf)
    p.add_argument("--prime", action="store_true", help="report the primed string's class")
    _add_channel_args(p)

    p = sub("scan-ell", _cmd_scan_ell, "bin-width profile and maximum as CSV")
    _add_triple_args(p)
    p.add_argument("--string", choices=mapper_mod.STRING_CHOICES, default="max")
    p.add_argument("--ell-lo", type=float, default=mapper_mod.DEFAULT_ELL_RANGE[0])
    p.add_argument("--ell-hi", type=float, default=mapper_mod.DEFAULT_ELL_RANGE[1])
    p.add_argument("--coarse", type=int, default=mapper_mod.DEFAULT_COARSE_POINTS)
    p.add_argument("--threads", type=int, default=None)
    _add_channel_args(p)

    p = sub("map", _cmd_map, "2D violation map as CSV plus contour sidecar JSON")
    p.add_argument(
        "--slice",
        choices=("amplitudes", "angles"),
        default="amplitudes",
        help="scan (r_b, r_c) at a shared angle, or (phi_b, phi_c) at a shared amplitude",
    )
    p.add_argument("--ra", type=float, default=1.0, help="first amplitude (shared one for --slice angles)")
    p.add_argument("--phi", type=float, default=0.4, help="shared angle (first angle for --slice angles)")
    p.add_argument("--b-lo", type=float, default=0.0)
    p.add_argument("--b-hi", type=float, default=3.0)
    p.add_argument("--c-lo", type=float, default=0.0)
    p.add_argument("--c-hi", type=float, default=3.0)
    p.add_argument("--points", type=int, default=mapper_mod.DEFAULT_GRID)
    p.add_argument("--string", choices=mapper_mod.STRING_CHOICES, default="max")
    p.add_argument("--ell-lo", type=float, default=mapper_mod.DEFAULT_ELL_RANGE[0])
    p.add_argument("--ell-hi", type=float, default=mapper_mod.DEFAULT_ELL_RANGE[1])
    p.add_argument("--coarse", type=int, default=mapper_mod.DEFAULT_COARSE_POINTS)
    p.add_argument("--threads", type=int, default=None)
    _add_channel_args(p)

    p = sub("decoherence", _cmd_decoherence, "dephasing sweep of the first string as CSV")
    _add_triple_args(p)
    p.add_argument("--ell", type=float, default=math.inf)
    p.add_argument("--xi-lo", type=float, default=0.0)
    p.add_argument("--xi-hi", type=float, default=100.0)
    p.add_argument("--points", type=int, default=51)
    p.add_argument("--threads", type=int, default=None)
    p.add_argument(
        "--xi-sign",
        choices=sorted(_XI_SIGN),
        default="paper",
        help="cross-coupling sign convention: 'paper' subtracts, 'physical' adds",
    )

    p = sub("validate", _cmd_validate, "self-check suites against the oracle")
    p.add_argument("--seed", type=int, default=2024)
    p.add_argument("--cases", type=int, default=50, help="base case count per suite")

    return parser, registry


def main(argv=None) -> int:
    parser, registry = _build_parser()
    try:
        args = parser.parse_args(argv)
        if getattr(args, "config", None):
            with open(args.config) as fh:
                cfg = json.load(fh)
            known = set(vars(args))
            bad = sorted(set(cfg) - known)
            if bad:
                print(f"error: unknown config keys: {', '.join(bad)}", file=sys.stderr)
                return 2
            registry[args.command].set_defaults(**cfg)
            args = parser.parse_args(argv)
    except SystemExit as exc:
        code = exc.code
        return int(code) if isinstance(code, int) else (0 if code is None else 2)
    except (OSError, json.JSONDecodeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    try:
        return args.func(args)
    except _EVAL_ERRORS as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 3
    except (ValueError, OSError, json.JSONDecodeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
