"""A periodic ring has a zero eigenvalue, and the filter cannot land on it.

The response E^alpha exp(-tau E) vanishes at E = 0, so the flat mode is
annihilated on every application no matter where the peak sits. The scan
below never returns 0 even though 0 is a genuine eigenvalue of the
operator.

Run:  python3 demos/03_ring_zero_mode.py
"""

import numpy as np

from filtpower import (
    FilterConfig,
    IterationSettings,
    filtered_power_solve,
    ring,
    scan_peak_energies,
)

problem = ring()
n = problem.operator.dim

flat = np.ones(n)
print(f"ring operator, {n} grid points")
print(f"|H @ ones| = {np.linalg.norm(problem.operator.apply(flat)):.3e}"
      "  (the flat mode really is a zero mode)")
print()

# doubly degenerate levels: clockwise and counterclockwise waves
print(f"{'level':>5}  {'found E':>12}  {'closed form':>12}  {'iters':>5}")
for k, idx in ((1, 1), (2, 3), (3, 5), (4, 7)):
    e_exact = float(problem.discrete[idx])
    cfg = FilterConfig.for_operator(float(problem.continuum[idx]), problem.operator)
    rep = filtered_power_solve(problem.operator, cfg)
    print(f"{k:5d}  {rep.eigenvalue:12.6f}  {e_exact:12.6f}  {rep.iterations:5d}")

result = scan_peak_energies(
    problem,
    np.arange(5.0, 346.0, 5.0),
    IterationSettings(max_iter=5000),
)
rows = result.converged_rows()
smallest = min(abs(r.eigenvalue) for r in rows)
print()
print(f"scan of {len(result.rows)} peaks in (0, 350]: {len(rows)} converged,")
print(f"smallest |E| found = {smallest:.6f}")
print("every converged run skipped the zero mode and landed on a")
print("traveling-wave level instead")
