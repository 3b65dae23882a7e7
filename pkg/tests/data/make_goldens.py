"""Regenerate the frozen reference values under tests/data/.

Run from the repository root:

    python3 tests/data/make_goldens.py

Everything here is produced by the independent oracle route or located
by deterministic search, never by the code paths the tests exercise.
The JSON files are committed; tests read them and must not regenerate.
"""

import json
import math
import os

import numpy as np

from lgsq.core import SqueezeParams
from lgsq.mapper import amplitude_slice, maximize_over_ell, scan_2d
from lgsq.oracle import (
    coupling_det,
    coupling_matrix,
    dump_matrix_elements,
    oracle_correlator,
)

HERE = os.path.dirname(os.path.abspath(__file__))

# states used by the scalar regressions
PAIR_A = {"r": 1.0, "phi": 0.4}
PAIR_B = {"r": 0.7, "phi": 0.1}


def matrix_element_fixture():
    rng = np.random.default_rng(11)
    entries = []
    for _ in range(24):
        entries.append(
            {
                "a": {"r": float(rng.uniform(0.0, 2.0)), "phi": float(rng.uniform(-1.5, 1.5))},
                "b": {"r": float(rng.uniform(0.0, 2.0)), "phi": float(rng.uniform(-1.5, 1.5))},
                "Qt": float(rng.uniform(-2.5, 2.5)),
                "Qb": float(rng.uniform(-2.5, 2.5)),
            }
        )
    dump_matrix_elements(os.path.join(HERE, "matrix_elements.json"), entries)


def slice_goldens():
    """Search the fixed-angle amplitude slice for reference protocols."""
    a_r, phi = 1.0, 0.4
    axis = np.linspace(0.0, 3.0, 21)
    vmap = scan_2d(
        amplitude_slice(a_r, phi),
        axis,
        axis,
        axis_names=("r_b", "r_c"),
        coarse_points=32,
    )
    k, e, p = vmap.k_max, vmap.err, vmap.plateau_k
    viol = np.argwhere(k > 1.0 + 3.0 * e)
    order = sorted(map(tuple, viol), key=lambda ij: -k[ij])
    best = order[0]
    finite_only = [ij for ij in order if p[ij] <= 1.0]
    plateau_viol = np.argwhere(p > 1.0)
    plateau_best = (
        max(map(tuple, plateau_viol), key=lambda ij: p[ij]) if len(plateau_viol) else None
    )
    # evenly spaced sample of ten violating nodes across the sorted list
    idx = np.unique(np.linspace(0, len(order) - 1, 10).astype(int))
    ten = [order[i] for i in idx]

    def node(ij):
        i, j = ij
        return {
            "r_a": a_r,
            "phi": phi,
            "r_b": float(axis[i]),
            "r_c": float(axis[j]),
            "k_max": float(k[i, j]),
            "err": float(e[i, j]),
            "ell_star": float(vmap.ell_star[i, j]),
            "plateau_k": float(p[i, j]),
        }

    out = {
        "best_violation": node(best),
        "finite_ell_only": node(finite_only[0]) if finite_only else None,
        "plateau_violation": node(plateau_best) if plateau_best else None,
        "ten_violations": [node(ij) for ij in ten],
        "n_violating": int(len(order)),
    }

    # a non-violating protocol that an angle shift pushes into violation
    nonv = None
    for ij in sorted(np.ndindex(k.shape), key=lambda ij: -k[ij]):
        if k[ij] <= 0.98 and axis[ij[0]] > 0.0 and axis[ij[1]] > 0.0:
            nonv = ij
            break
    i, j = nonv
    states = (
        SqueezeParams(a_r, phi),
        SqueezeParams(float(axis[i]), phi),
        SqueezeParams(float(axis[j]), phi),
    )
    best_alpha, best_k = 0.0, -np.inf
    for alpha in np.linspace(0.0, math.pi, 16, endpoint=False):
        shifted = [SqueezeParams(s.r, s.phi + alpha) for s in states]
        m = maximize_over_ell(*shifted, coarse_points=24)
        if m.k_max > best_k:
            best_alpha, best_k = float(alpha), float(m.k_max)
        print(f"  alpha={alpha:.3f} k={m.k_max:+.4f}", flush=True)
    out["alpha_search"] = {
        "r_a": a_r,
        "phi": phi,
        "r_b": float(axis[i]),
        "r_c": float(axis[j]),
        "k_max_unshifted": float(k[i, j]),
        "best_alpha": best_alpha,
        "k_max_at_best_alpha": best_k,
    }
    return out


def scalar_regressions():
    a = SqueezeParams(**PAIR_A)
    b = SqueezeParams(**PAIR_B)
    vals = {"pair_a": PAIR_A, "pair_b": PAIR_B, "oracle": {}}
    for ell in (0.3, 1.0, 3.0):
        vals["oracle"][str(ell)] = oracle_correlator(a, b, ell)
    m = coupling_matrix(a, b)
    vals["coupling_matrix_re"] = m.real.tolist()
    vals["coupling_matrix_im"] = m.imag.tolist()
    det = coupling_det(a, b)
    vals["coupling_det"] = [det.real, det.imag]
    return vals


def main():
    print("scalar regressions", flush=True)
    doc = scalar_regressions()
    print("slice search", flush=True)
    doc["slice"] = slice_goldens()
    with open(os.path.join(HERE, "goldens.json"), "w") as fh:
        json.dump(doc, fh, indent=1)
        fh.write("\n")
    matrix_element_fixture()
    print("wrote goldens.json and matrix_elements.json")


if __name__ == "__main__":
    main()
