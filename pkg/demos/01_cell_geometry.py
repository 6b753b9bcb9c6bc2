"""Cell geometry: how big is a coverage-limited cell and how many devices does it hold?

A base station only serves devices that are both in its Voronoi cell and
within distance J of it. This script computes the area moments of such a
cell, fits the truncated-beta area law, derives the device-count pmf, and
checks all of it against Monte Carlo cells.
"""

import math

import numpy as np

from iotaoi import jm_cell, simulator
from iotaoi.model import NetworkParams

p = NetworkParams()
lb, J = p.lambda_b, p.jm_radius

print(f"coverage 1 - exp(-pi lambda_b J^2) = {jm_cell.coverage_probability(lb, J):.4f}")
print(f"mean area        {jm_cell.mean_area(lb, J):10.1f} m^2   (full disc {math.pi * J * J:.1f})")
print(f"second moment    {jm_cell.second_moment_area(lb, J):10.4g} m^4")
print(f"P[cell is the whole disc] = {jm_cell.atom_probability(lb, J):.4f}")

model = jm_cell.fit_area_model(lb, J)
print(f"area law: kappa1 = {model.kappa1:.4f}, kappa2 = {model.kappa2:.4f}")

pmf = jm_cell.load_pmf(lb, p.lambda_d, J, model)
print(f"P[empty cell] = {pmf.p_empty:.4f}, E[N | N>=1] = {jm_cell.load_moment_conditional(pmf, 1):.3f}")
print(f"scheduling probability zeta_b = E[1/N | N>=1] = {jm_cell.mean_inverse_load(pmf):.4f}")

# Monte Carlo: typical cells with neighbours drawn around the origin
cells = simulator.estimate_area_and_load(p, 4000, seed=1)
print("\nMonte Carlo over 4000 cells")
print(f"  mean area     {cells.areas.mean():10.1f}")
print(f"  second moment {np.mean(cells.areas**2):10.4g}")
print(f"  KS distance to the fitted law {jm_cell.ks_distance(model, cells.areas):.4f}")
hist = cells.load_histogram(pmf.n_max)
tv = 0.5 * np.abs(hist - np.append(pmf.probs, pmf.tail_mass)).sum()
print(f"  total variation of the load histogram {tv:.4f}")

# larger radii approach the unconstrained Voronoi cell
for radius in (20.0, 40.0, 80.0, 160.0, 1000.0):
    m2 = jm_cell.second_moment_area(lb, radius) * lb**2
    print(f"J = {radius:6.0f} m: E[|V|^2] lambda_b^2 = {m2:.4f}")
