"""Sweep the filter peak across a particle-in-a-box spectrum.

Scanning e_peak from 2 to 130 over the Dirichlet box produces a
staircase: wide plateaus where the scan returns the same eigenvalue,
separated by sharp seams. Each seam sits on a turning point, the peak
energy where the filter responds equally to two adjacent levels, and
iteration counts blow up right there because the contraction ratio
approaches 1.

Run:  python3 demos/02_box_staircase.py
Writes demos/box_staircase.png when matplotlib is available.
"""

from pathlib import Path

import numpy as np

from filtpower import IterationSettings, box_1d, scan_peak_energies

problem = box_1d()
result = scan_peak_energies(
    problem,
    np.arange(2.0, 131.0),
    IterationSettings(max_iter=5000),
)

print(f"box spectrum (first 5): {np.round(problem.discrete[:5], 6)}")
print(f"turning points:         {np.round(result.turning_points[:4], 6)}")
print()

rows = result.converged_rows()
print(f"{len(rows)}/{len(result.rows)} peaks converged; plateau edges:")
previous = None
for row in rows:
    level = round(row.eigenvalue, 6)
    if level != previous:
        print(f"  e_peak {row.e_p:6.1f}  ->  E = {level:<11g} "
              f"({row.iterations} iterations)")
        previous = level

slowest = max(rows, key=lambda r: r.iterations)
print()
print(f"slowest converged peak: e_peak = {slowest.e_p:g} with "
      f"{slowest.iterations} iterations, nearest turning point "
      f"{slowest.nearest_e_tp:.3f}")

try:
    import matplotlib
    matplotlib.use("Agg")
    import matplotlib.pyplot as plt
except ImportError:
    print("matplotlib not installed, skipping the figure")
else:
    e = [r.e_p for r in rows]
    fig, (top, bottom) = plt.subplots(2, 1, sharex=True, figsize=(7, 6))
    top.step(e, [r.eigenvalue for r in rows], where="mid")
    for tp in result.turning_points[:4]:
        top.axvline(tp, color="0.7", ls=":", lw=1)
        bottom.axvline(tp, color="0.7", ls=":", lw=1)
    top.set_ylabel("selected eigenvalue")
    bottom.semilogy(e, [r.iterations for r in rows], ".", ms=4)
    bottom.set_xlabel("filter peak energy")
    bottom.set_ylabel("iterations")
    fig.suptitle("eigenvalue staircase with seams at the turning points")
    out = Path(__file__).with_name("box_staircase.png")
    fig.savefig(out, dpi=120, bbox_inches="tight")
    print(f"wrote {out}")
