"""Width-maximized string values over three parameter-plane slices.

For each slice the scanner maximizes a string over the bin width at
every node and extracts two contour families at level one: where the
maximized string crosses it (violation boundary) and where the
infinite-width plateau would cross it instead.  Three slices are
scanned: the two amplitudes at a shared angle, the two angles at a
shared amplitude, and a mixed amplitude-angle pair with the first two
states pinned.  Both strings get their own map.

The six scans take roughly ten minutes in total.  Writes
output/map_<slice>_<string>.csv with a .contours.json sidecar each.
"""

import csv
import json
import os
import time

import numpy as np

from lgsq import SqueezeParams, amplitude_slice, angle_slice, scan_2d

OUT = os.path.join(os.path.dirname(os.path.abspath(__file__)), "output")
POINTS = 17
COARSE = 12


def mixed_slice(r_a, phi_ab, r_b):
    """Third state free in both parameters, first two states pinned."""

    def build(r_c, phi_c):
        return (
            SqueezeParams(r_a, phi_ab),
            SqueezeParams(r_b, phi_ab),
            SqueezeParams(r_c, phi_c),
        )

    return build


SLICES = {
    "amplitudes": (amplitude_slice(1.0, 0.4), ("r_b", "r_c"),
                   np.linspace(0.0, 3.0, POINTS), np.linspace(0.0, 3.0, POINTS)),
    "angles": (angle_slice(1.0, 0.4), ("phi_b", "phi_c"),
               np.linspace(0.0, 1.5, POINTS), np.linspace(0.0, 1.5, POINTS)),
    "mixed": (mixed_slice(1.0, 0.4, 0.7), ("r_c", "phi_c"),
              np.linspace(0.0, 3.0, POINTS), np.linspace(-1.5, 1.5, POINTS)),
}


def run_one(name, string):
    build, names, ax1, ax2 = SLICES[name]
    t0 = time.perf_counter()
    vmap = scan_2d(build, ax1, ax2, axis_names=names, string_choice=string,
                   coarse_points=COARSE)
    n_viol = int(np.count_nonzero(vmap.violations))
    print(f"  {name}/{string}: {time.perf_counter() - t0:.0f}s, "
          f"{n_viol} violating nodes, success {vmap.success_fraction:.2f}", flush=True)

    path = os.path.join(OUT, f"map_{name}_{string}.csv")
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow([*names, "k_max", "ell_star", "plateau_k"])
        for i, v1 in enumerate(vmap.axis1):
            for j, v2 in enumerate(vmap.axis2):
                w.writerow([v1, v2, vmap.k_max[i, j], vmap.ell_star[i, j],
                            vmap.plateau_k[i, j]])
    sidecar = {
        "level": 1.0,
        "violation_contours": [p.tolist() for p in vmap.violation_contours],
        "plateau_contours": [p.tolist() for p in vmap.plateau_contours],
    }
    with open(path + ".contours.json", "w") as fh:
        json.dump(sidecar, fh, indent=1)
    print(f"  wrote {path}", flush=True)


def main():
    os.makedirs(OUT, exist_ok=True)
    for name in SLICES:
        for string in ("k3", "k3_prime"):
            run_one(name, string)


if __name__ == "__main__":
    main()
