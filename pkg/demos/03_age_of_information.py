"""Freshness of status updates.

For one fixed geometry the time-average AoI equals N / P, where N is the
number of devices sharing the cell and P the per-attempt success
probability. Averaging over geometries gives E[N | N >= 1] * M_{-1}.
Fractional power control trades freshness against coverage.
"""

import math
import warnings

from scipy import optimize

from iotaoi import analytics, simulator
from iotaoi.model import NetworkParams

warnings.simplefilter("ignore")
window = 20 / math.sqrt(1e-4)

p = NetworkParams()
# pick a geometry whose update link succeeds often enough to watch
for seed in range(50):
    real = simulator.sample_network(p, window, seed=seed)
    if real.typical_cell_load >= 3 and 0.3 < (simulator.update_trials(real, p, 400, seed=seed) > p.beta_b).mean() < 0.9:
        break
run = simulator.run_slots(real, p, 50_000, seed=6, d2d_link=False)
print(f"one geometry: N = {run.n_cell}, success rate when scheduled {run.empirical_success():.3f}")
print(f"  time-average AoI {run.mean_aoi(10 * run.n_cell):.2f} slots vs N/P = "
      f"{analytics.conditional_mean_aoi(run.n_cell, run.empirical_success()):.2f}")

print("\nmean AoI across the network (slots)")
for eps in (0.0, 0.5, 1.0):
    q = p.with_(epsilon=eps)
    print(f"  eps={eps}: Delta_1 = {analytics.aoi_spatial_moment(1, q):10.2f}, "
          f"Delta_2 = {analytics.aoi_spatial_moment(2, q):.4g}")

print("\nlargest update coverage that keeps the mean AoI at 30 slots (threshold 0 dB)")
for eps in (0.3, 1.0):
    def gap(cov):
        J = math.sqrt(-math.log(1 - cov) / (math.pi * p.lambda_b))
        return analytics.aoi_spatial_moment(1, p.with_(beta_b=1.0, epsilon=eps, jm_radius=J)) - 30

    print(f"  eps={eps}: coverage {optimize.brentq(gap, 0.25, 0.95, xtol=1e-4):.1%}")

print("\nwith a tiny threshold the AoI is just the cell load")
tiny = p.with_(beta_b=1e-6)
samples = simulator.aoi_samples(tiny, 200, 1000, seed=7, window_side=window)
print(f"  analytic {analytics.aoi_spatial_moment(1, tiny):.3f}, simulated {samples.mean_aoi.mean():.3f}, "
      f"mean load {samples.n_cell.mean():.3f}")
