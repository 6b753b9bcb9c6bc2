"""Design trade-offs between update freshness and D2D throughput."""

import math
import warnings

from iotaoi import analytics
from iotaoi.model import NetworkParams, db_to_linear

warnings.simplefilter("ignore")
p = NetworkParams()

beta, t_d, t_n = analytics.achievable_throughput(p)
print(f"best D2D threshold {beta:.1f} ({10 * math.log10(beta):.2f} dB): "
      f"T_d* = {t_d:.0f} bit/s, T_N* = {t_n:.2f} bit/s/m^2")

print("\nupdate threshold: success moment and mean AoI")
for db in (-3, 0, 3, 6):
    r = analytics.analytic_report(p.with_(beta_b=db_to_linear(db)), with_achievable=False)
    print(f"  beta_b={db:+d} dB: M_1 = {r.m_b[1]:.4f}, Delta_1 = {r.delta_n[1]:10.2f}")

print("\ncell radius (eps = 1)")
for J in (25.0, 30.0, 40.0, 50.0, 60.0):
    q = p.with_(epsilon=1.0, jm_radius=J)
    print(f"  J={J:4.0f} m: Delta_1 = {analytics.aoi_spatial_moment(1, q):7.2f}, "
          f"T_N* = {analytics.achievable_throughput(q)[2]:7.2f}")

print("\ndevice density, co-channel vs orthogonal")
for k in (5, 10, 20, 40):
    q = p.with_(lambda_d=k * p.lambda_b)
    co = analytics.achievable_throughput(q)[2]
    orth = analytics.achievable_throughput(q.with_(access_mode="orthogonal"))[2]
    print(f"  lambda_d/lambda_b={k:2d}: T_N* co-channel {co:8.2f}, orthogonal {orth:8.2f}, "
          f"Delta_1 {analytics.aoi_spatial_moment(1, q):10.2f}")
