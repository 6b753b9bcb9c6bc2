"""Statistics of the Johnson-Mehl (JM) cell of the typical BS.

The JM cell is the Poisson-Voronoi cell of a BS clipped to the disc of radius
``J`` around it. Its area is modelled as an atom at ``pi J^2`` (no other BS
within ``2J``) plus a beta law on ``[0, 2 pi J^2]`` truncated to
``[0, pi J^2]``, fitted by matching the first two conditional moments.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy import special

from .errors import NumericalError
from .numerics import NESTED, QuadratureSpec, integrate_1d, integrate_2d, solve_2d_root, triangle

# tail beyond n_max is bounded by the Poisson tail at the largest possible area
LOAD_TAIL_BOUND = 1e-13
_LOAD_QUAD = QuadratureSpec(rel_tol=1e-11, abs_tol=1e-15, max_subdivisions=400)


def coverage_probability(lambda_b, J):
    """P[nearest BS within J] = 1 - exp(-pi lambda_b J^2)."""
    return -math.expm1(-math.pi * lambda_b * J * J)


def mean_area(lambda_b, J):
    """Mean area of the typical JM cell."""
    if lambda_b <= 0 or J <= 0:
        raise ValueError("lambda_b and J must be positive")
    return coverage_probability(lambda_b, J) / lambda_b


def _area_integrand(u, v, a):
    """Integrand of the second-moment double integral; ``a = lambda_b J^2``."""
    su, sv = math.sin(u), math.sin(v)
    G = su * sv * math.sin(u + v)
    if G < 1e-14:
        return 0.0
    S = G + (math.pi - v) * su * su + (math.pi - u) * sv * sv
    s_max = max(su, sv)
    x = a * S / (s_max * s_max)
    # 1 - (1 + x) e^{-x} is the regularized lower gamma P(2, x)
    return G / (S * S) * special.gammainc(2.0, x)


def second_moment_area(lambda_b, J, spec: QuadratureSpec = NESTED):
    """Second moment of the typical JM cell area.

    ``2 pi / lambda_b^2`` times the integral of
    ``G/S^2 [1 - (1 + lambda_b J^2 S') exp(-lambda_b J^2 S')]`` over the
    triangle ``0 <= v <= pi - u``, where ``G = sin u sin v sin(u+v)``,
    ``S = G + (pi-v) sin^2 u + (pi-u) sin^2 v`` and
    ``S' = S / max(sin u, sin v)^2``.
    """
    if lambda_b <= 0 or J <= 0:
        raise ValueError("lambda_b and J must be positive")
    a = lambda_b * J * J
    val = integrate_2d(lambda u, v: _area_integrand(u, v, a), triangle(math.pi), spec)
    return 2.0 * math.pi / lambda_b**2 * val


def atom_probability(lambda_b, J):
    """Probability that the JM cell is the whole disc: exp(-4 pi lambda_b J^2)."""
    if lambda_b < 0 or J < 0:
        raise ValueError("lambda_b and J must be non-negative")
    return math.exp(-4.0 * math.pi * lambda_b * J * J)


def truncated_beta(a, b):
    """int_0^{1/2} t^(a-1) (1-t)^(b-1) dt."""
    return special.betainc(a, b, 0.5) * special.beta(a, b)


def _log_truncated_beta(a, b):
    return math.log(special.betainc(a, b, 0.5)) + special.betaln(a, b)


@dataclass(frozen=True)
class AreaModel:
    lambda_b: float
    J: float
    atom_prob: float
    kappa1: float
    kappa2: float
    mean_area: float
    second_moment_area: float

    @property
    def jm_area_max(self):
        return math.pi * self.J**2

    @property
    def support_scale(self):
        return 2.0 * math.pi * self.J**2

    @property
    def conditional_moments(self):
        """First two area moments given that the cell is not the full disc."""
        return _conditional_moments(
            self.mean_area, self.second_moment_area, self.atom_prob, self.jm_area_max
        )

    def model_moment(self, k):
        """k-th moment of the continuous part as implied by (kappa1, kappa2)."""
        return self.support_scale**k * math.exp(
            _log_truncated_beta(self.kappa1 + k, self.kappa2)
            - _log_truncated_beta(self.kappa1, self.kappa2)
        )


def _conditional_moments(m1, m2, atom, A):
    if atom >= 1.0:
        return A, A * A
    c1 = (m1 - A * atom) / (1.0 - atom)
    c2 = (m2 - A * A * atom) / (1.0 - atom)
    return c1, c2


def fit_area_model(lambda_b, J, spec: QuadratureSpec = NESTED, second_moment=None) -> AreaModel:
    """Moment-match the truncated beta law to the JM-cell area moments."""
    m1 = mean_area(lambda_b, J)
    m2 = second_moment_area(lambda_b, J, spec) if second_moment is None else second_moment
    atom = atom_probability(lambda_b, J)
    A = math.pi * J * J
    c1, c2 = _conditional_moments(m1, m2, atom, A)
    var = c2 - c1 * c1
    if not (var > 0 and 0 < c1 < A):
        raise NumericalError(
            f"conditional area variance {var:.3g} is not positive", code="DEGENERATE_MOMENTS"
        )
    mu = c1 / (2 * A)
    s2 = var / (2 * A) ** 2
    common = mu * (1 - mu) / s2 - 1
    k1_0, k2_0 = max(mu * common, 1e-2), max((1 - mu) * common, 1e-2)

    def residual(x, y):
        k1, k2 = math.exp(x), math.exp(y)
        lb = _log_truncated_beta(k1, k2)
        r1 = 2 * A * math.exp(_log_truncated_beta(k1 + 1, k2) - lb) / c1 - 1
        r2 = (2 * A) ** 2 * math.exp(_log_truncated_beta(k1 + 2, k2) - lb) / c2 - 1
        return r1, r2

    # betainc limits the attainable residual to ~1e-12 when kappa2 is large
    try:
        x, y = solve_2d_root(residual, (math.log(k1_0), math.log(k2_0)), tol=1e-10)
    except (NumericalError, ValueError, OverflowError) as exc:
        # small pi*lambda_b*J^2 pushes the conditional law against pi*J^2,
        # outside what positive shape parameters can represent
        raise NumericalError(
            f"no truncated-beta fit for pi*lambda_b*J^2 = {math.pi * lambda_b * J * J:.4g}"
            f" (conditional mean {c1:.6g}, variance {var:.6g})",
            code="NO_CONVERGENCE",
        ) from exc
    return AreaModel(lambda_b, J, atom, math.exp(x), math.exp(y), m1, m2)


def atom_only_model(lambda_b, J) -> AreaModel:
    """Degenerate model in which the cell is always the full disc."""
    A = math.pi * J * J
    return AreaModel(lambda_b, J, 1.0, 1.0, 1.0, A, A * A)


def area_pdf(model: AreaModel, v):
    """Continuous density at ``v`` and the atom mass located at ``v``.

    Returns ``(density, atom)``; ``atom`` is non-zero only at ``v = pi J^2``.
    """
    A = model.jm_area_max
    v_arr = np.asarray(v, dtype=float)
    if np.any(v_arr < 0) or np.any(v_arr > A * (1 + 1e-12)):
        raise ValueError(f"area outside [0, {A}]")
    if model.atom_prob >= 1.0:
        dens = np.zeros_like(v_arr)
    else:
        t = v_arr / model.support_scale
        with np.errstate(divide="ignore"):
            logd = (
                special.xlogy(model.kappa1 - 1, t)
                + special.xlog1py(model.kappa2 - 1, -t)
                - _log_truncated_beta(model.kappa1, model.kappa2)
                - math.log(model.support_scale)
            )
        dens = (1 - model.atom_prob) * np.exp(logd)
    atom = np.where(np.isclose(v_arr, A, rtol=1e-12, atol=0), model.atom_prob, 0.0)
    if dens.ndim == 0:
        return float(dens), float(atom)
    return dens, atom


def area_cdf(model: AreaModel, v):
    """P[|V_o| <= v] including the atom."""
    A = model.jm_area_max
    v_arr = np.clip(np.asarray(v, dtype=float), 0.0, None)
    if model.atom_prob >= 1.0:
        cont = np.zeros_like(v_arr)
    else:
        t = np.minimum(v_arr, A) / model.support_scale
        cont = special.betainc(model.kappa1, model.kappa2, t) / special.betainc(
            model.kappa1, model.kappa2, 0.5
        )
        cont = (1 - model.atom_prob) * cont
    out = cont + model.atom_prob * (v_arr >= A)
    return float(out) if out.ndim == 0 else out


def ks_distance(model: AreaModel, samples) -> float:
    """Kolmogorov distance between the empirical law of ``samples`` and the model.

    Accounts for the atom at ``pi J^2``: both distribution functions are
    compared at every sample value and at its left limit.
    """
    x, counts = np.unique(np.asarray(samples, dtype=float), return_counts=True)
    n = counts.sum()
    right = np.cumsum(counts) / n
    left = right - counts / n
    F = area_cdf(model, x)
    F_left = F - np.where(x >= model.jm_area_max, model.atom_prob, 0.0)
    return float(max(np.max(np.abs(right - F)), np.max(np.abs(left - F_left))))


def sample_areas(model: AreaModel, size, rng):
    """Draw areas from the model (inverse-CDF on the truncated beta part)."""
    u = rng.random(size)
    atom = rng.random(size) < model.atom_prob
    cap = special.betainc(model.kappa1, model.kappa2, 0.5)
    t = special.betaincinv(model.kappa1, model.kappa2, u * cap)
    return np.where(atom, model.jm_area_max, t * model.support_scale)


# -- cell load ---------------------------------------------------------------

@dataclass(frozen=True)
class CellLoadPmf:
    probs: np.ndarray
    n_max: int
    tail_mass: float

    @property
    def p_empty(self):
        return float(self.probs[0])

    @property
    def p_occupied(self):
        return float(np.sum(self.probs[1:]) + self.tail_mass)

    def mean(self):
        n = np.arange(self.n_max + 1)
        return float(np.dot(n, self.probs))


def _log_poisson(n, mu):
    return special.xlogy(n, mu) - mu - special.gammaln(n + 1)


def load_pmf(lambda_b, lambda_d, J, model: AreaModel | None = None) -> CellLoadPmf:
    """Distribution of the number of devices in the typical JM cell.

    Mixed Poisson with the fitted area law as mixing distribution. ``n_max``
    is the point where the Poisson tail at the largest possible area drops
    below 1e-13; the actual tail under the model is reported in
    ``tail_mass``.
    """
    if lambda_d < 0:
        raise ValueError("lambda_d must be non-negative")
    if model is None:
        model = fit_area_model(lambda_b, J)
    A = model.jm_area_max
    mu_max = lambda_d * A
    n_max = 0
    while special.pdtrc(n_max, mu_max) > LOAD_TAIL_BOUND:
        n_max += 1
    atom = model.atom_prob
    probs = np.empty(n_max + 1)
    k1, k2 = model.kappa1, model.kappa2
    lb = _log_truncated_beta(k1, k2) if atom < 1 else 0.0
    mu_scale = lambda_d * model.support_scale

    def cont_part(kernel):
        if atom >= 1:
            return 0.0

        def f(t):
            if t <= 0.0:
                return 0.0
            return math.exp(
                kernel(t) + (k1 - 1) * math.log(t) + (k2 - 1) * math.log1p(-t) - lb
            )

        return (1 - atom) * integrate_1d(f, 0.0, 0.5, _LOAD_QUAD)

    for n in range(n_max + 1):
        probs[n] = atom * math.exp(_log_poisson(n, mu_max)) + cont_part(
            lambda t, n=n: _log_poisson(n, mu_scale * t)
        )

    def log_sf(t):
        s = special.pdtrc(n_max, mu_scale * t)
        return math.log(s) if s > 0 else -math.inf

    tail = atom * special.pdtrc(n_max, mu_max) + cont_part(log_sf)
    return CellLoadPmf(probs, n_max, float(tail))


def _occupied(pmf):
    occ = 1.0 - pmf.probs[0]
    if occ < 1e-12:
        raise NumericalError("cell is almost surely empty", code="ZERO_OCCUPANCY")
    return occ


def load_moment_conditional(pmf: CellLoadPmf, n: int):
    """E[N^n | N >= 1]."""
    if n < 1:
        raise ValueError("n must be >= 1")
    occ = _occupied(pmf)
    m = np.arange(1, pmf.n_max + 1, dtype=float)
    return float(math.fsum(m**n * pmf.probs[1:]) / occ)


def mean_inverse_load(pmf: CellLoadPmf):
    """E[1/N | N >= 1], the mean update scheduling probability."""
    occ = _occupied(pmf)
    m = np.arange(1, pmf.n_max + 1, dtype=float)
    return float(math.fsum(pmf.probs[1:] / m) / occ)


def mean_inverse_area(model: AreaModel):
    """E[1/|V_o|] under the area model."""
    A = model.jm_area_max
    if model.atom_prob >= 1.0:
        return 1.0 / A
    if model.kappa1 <= 1 + 1e-6:
        raise NumericalError(
            f"kappa1={model.kappa1:.4g} <= 1: E[1/area] is not integrable under "
            "the fitted law; estimate it by Monte Carlo instead "
            "(iotaoi.simulator.estimate_area_and_load)",
            code="NONINTEGRABLE",
        )
    ratio = math.exp(
        _log_truncated_beta(model.kappa1 - 1, model.kappa2)
        - _log_truncated_beta(model.kappa1, model.kappa2)
    )
    return model.atom_prob / A + (1 - model.atom_prob) * ratio / model.support_scale


def interferer_intensity(r, model: AreaModel, inv_area=None):
    """Relative intensity D(r; J) = F(J) (1 - exp(-2 pi E[1/|V_o|] r^2)).

    Multiply by ``lambda_d`` for the intensity of co-channel update
    interferers seen from the typical BS.
    """
    if inv_area is None:
        inv_area = mean_inverse_area(model)
    F = coverage_probability(model.lambda_b, model.J)
    r = np.asarray(r, dtype=float)
    out = F * -np.expm1(-2.0 * math.pi * inv_area * r * r)
    return float(out) if out.ndim == 0 else out
