"""Depth against repetitions: what a coherence budget costs.

The alpha schedule m = sigma^(-alpha) interpolates between statistical
sampling (alpha = 0, constant depth, ~1/eps^2 measurements) and full phase
estimation (alpha = 1, depth ~1/eps, ~log(1/eps) measurements).  This script
prints the predicted iteration counts across alpha, the largest alpha a
depth cap allows, and the resulting measurement floors with and without
restart amortization.
"""

import numpy as np

from alphavqe.schedules import alpha_max, n_min, n_min_restarts, predicted_iterations

EPS = 0.01

print(f"predicted iterations to sigma <= {EPS} (unit prior)")
for alpha in [0.0, 0.25, 0.5, 0.75, 0.9, 1.0]:
    print(f"  alpha={alpha:5.2f}  iterations ~ {predicted_iterations(EPS, alpha):12.1f}")

print("\nhow deep a circuit the budget allows: alpha_max(eps, d)")
for d in [2.0, 10.0, 32.0, 60.0, 100.0]:
    print(f"  d_max={d:8.1f}  alpha_max={alpha_max(EPS, d):.4f}")

print("\nmeasurement floors at eps = 0.01")
print(f"  {'d_max':>8}  {'single run':>12}  {'with restarts':>13}")
for d in [1.5, 5.0, 10.0, 50.0, 100.0]:
    print(f"  {d:8.1f}  {n_min(EPS, d):12.1f}  {n_min_restarts(EPS, d):13.4f}")

# the two floors agree exactly once the depth budget covers full QPE
d_star = 1.0 / EPS
print(f"\nat d_max = 1/eps = {d_star:.0f}:")
print(f"  n_min          = {n_min(EPS, d_star):.6f}")
print(f"  n_min_restarts = {n_min_restarts(EPS, d_star):.6f}")
print(f"  4 ln(1/eps)    = {4.0 * np.log(1.0 / EPS):.6f}")
