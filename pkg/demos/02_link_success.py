"""Link reliability: D2D messages and status updates sharing one channel.

Compares the closed-form D2D success probability and the moments of the
update link's conditional success probability with a slotted Monte Carlo
of the whole network.
"""

import math
import warnings

from iotaoi import analytics, simulator
from iotaoi.model import NetworkParams, db_to_linear

warnings.simplefilter("ignore")
window = 20 / math.sqrt(1e-4)  # 400 base stations on a torus

print("D2D success probability vs threshold")
thresholds = [db_to_linear(x) for x in (-10, 0, 10)]
for eps in (0.0, 1.0):
    p = NetworkParams(epsilon=eps)
    curve = simulator.d2d_success_curve(p, thresholds, 300, 100, seed=1, window_side=window)
    for t in thresholds:
        est = curve[t]
        ref = analytics.d2d_success(p.with_(beta_d=t))
        print(f"  eps={eps} beta_d={10 * math.log10(t):+4.0f} dB: analytic {ref:.4f}  sim {est.value:.4f} +- {est.ci_half_width:.4f}")

print("\nUpdate link: moments of the conditional success probability")
for eps in (0.0, 1.0):
    p = NetworkParams(epsilon=eps)
    sim = simulator.estimate_conditional_success_moments(p, [1, 2], 600, 200, seed=2, window_side=window)
    for b in (1, 2):
        ref = analytics.conditional_success_moment(b, p)
        print(f"  eps={eps} M_{b}: analytic {ref:.4f}  sim {sim[b].value:.4f} +- {sim[b].ci_half_width:.4f}")

print("\nOrthogonal access removes cross-interference")
for mode in ("co-channel", "orthogonal"):
    p = NetworkParams(access_mode=mode)
    print(f"  {mode:10s}: P_d = {analytics.d2d_success(p):.5f}, M_1 = {analytics.conditional_success_moment(1, p):.4f}")
