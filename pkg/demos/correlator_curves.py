"""Two-time correlator against the second state's parameters.

Sweeps the second squeezed state's amplitude at a shared angle, then its
angle at a shared amplitude, for several bin widths plus the
infinite-width plateau.  The correlator equals one when the two states
coincide and decays toward zero as they separate.

Writes output/correlator_vs_amplitude.csv and
output/correlator_vs_angle.csv.
"""

import csv
import os

import numpy as np

from lgsq import MeasurementSpec, SqueezeParams, correlator, correlator_plateau

OUT = os.path.join(os.path.dirname(os.path.abspath(__file__)), "output")

A = SqueezeParams(1.0, 0.4)
WIDTHS = (0.5, 1.0, 2.0, 5.0)


def sweep(make_b, values):
    rows = []
    for v in values:
        b = make_b(float(v))
        row = [float(v)]
        for ell in WIDTHS:
            row.append(correlator(A, b, MeasurementSpec(ell)).value)
        row.append(correlator_plateau(A, b).value if (A.phi or b.phi) else 1.0)
        rows.append(row)
    return rows


def write(path, axis_name, rows):
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow([axis_name, *(f"ell_{ell}" for ell in WIDTHS), "plateau"])
        w.writerows(rows)
    print(f"wrote {path}")


def main():
    os.makedirs(OUT, exist_ok=True)
    print(f"first state: r={A.r} phi={A.phi}")

    print("amplitude sweep (shared angle, 41 points)")
    rows = sweep(lambda r: SqueezeParams(r, A.phi), np.linspace(0.0, 3.0, 41))
    write(os.path.join(OUT, "correlator_vs_amplitude.csv"), "r_b", rows)
    at_one = min(rows, key=lambda row: abs(row[0] - A.r))
    print(f"  plateau correlator at r_b={at_one[0]:.3f} (nearest the "
          f"coincident pair): {at_one[-1]:.4f}; narrow bins decorrelate "
          f"faster ({at_one[1]:.4f} at width {WIDTHS[0]})")

    print("angle sweep (shared amplitude, 41 points)")
    rows = sweep(lambda phi: SqueezeParams(A.r, phi), np.linspace(-1.5, 1.5, 41))
    write(os.path.join(OUT, "correlator_vs_angle.csv"), "phi_b", rows)


if __name__ == "__main__":
    main()
