"""Closed-form performance metrics.

* D2D link success probability and throughput (achievable rate over the
  D2D threshold),
* moments ``M_b`` of the conditional success probability of an update link,
* spatial moments of the temporal mean AoI.

Geometry enters through :mod:`iotaoi.jm_cell`. Cell statistics are cached per
``(lambda_b, lambda_d, J)``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np

from . import jm_cell
from .errors import NumericalError
from .model import NetworkParams, check
from .numerics import (
    NESTED,
    QuadratureSpec,
    gauss_legendre,
    integrate_1d,
    lower_incomplete_gamma_unnormalized,
    series_C,
    sinc_delta,
)

# Distance from a BS to a uniform point of its PV cell is close to Rayleigh
# with density scaled by this factor.
C1 = 9.0 / 7.0


# -- cached geometry -----------------------------------------------------------

@dataclass(frozen=True)
class CellStats:
    model: jm_cell.AreaModel
    pmf: jm_cell.CellLoadPmf
    zeta_b: float
    inv_area: float


@lru_cache(maxsize=256)
def _area_model(lambda_b, J):
    return jm_cell.fit_area_model(lambda_b, J)


@lru_cache(maxsize=256)
def _cell_stats(lambda_b, lambda_d, J):
    model = _area_model(lambda_b, J)
    pmf = jm_cell.load_pmf(lambda_b, lambda_d, J, model)
    return CellStats(model, pmf, jm_cell.mean_inverse_load(pmf), jm_cell.mean_inverse_area(model))


def cell_stats(params: NetworkParams) -> CellStats:
    return _cell_stats(params.lambda_b, params.lambda_d, params.jm_radius)


# -- D2D link ------------------------------------------------------------------

def _d2d_exponents(params):
    d = params.delta
    sd = sinc_delta(d)
    own = math.pi * params.q_d * params.lambda_d_prime * params.beta_d**d * params.r_d**2 / sd
    lb, J, eps = params.lambda_b, params.jm_radius, params.epsilon
    x = math.pi * lb * J * J
    # E[D^(2 eps)] for the truncated Rayleigh serving distance
    dist_moment = lower_incomplete_gamma_unnormalized(1.0 + eps, x) / (
        (math.pi * lb) ** eps * jm_cell.coverage_probability(lb, J)
    )
    upd = (
        math.pi * lb * (params.beta_d * params.power_ratio) ** d * params.r_d**2 / sd
    ) * dist_moment
    return own, upd


def d2d_success(params: NetworkParams) -> float:
    """Success probability of the typical D2D link."""
    check(params)
    own, upd = _d2d_exponents(params)
    if params.orthogonal:
        return math.exp(-own)
    return math.exp(-own - upd)


def d2d_success_fixed_power(params: NetworkParams) -> float:
    """Same as :func:`d2d_success` written out for ``epsilon = 0``."""
    d = params.delta
    sd = sinc_delta(d)
    return math.exp(
        -math.pi * params.q_d * params.lambda_d_prime * params.beta_d**d * params.r_d**2 / sd
        - math.pi * params.lambda_b * (params.beta_d * params.power_ratio) ** d * params.r_d**2 / sd
    )


def zeta_d(params: NetworkParams, zeta_b: float, as_printed: bool = False) -> float:
    """Probability that a device transmits a D2D message in a slot.

    Devices outside every JM cell transmit with probability ``q_d``; devices
    inside one do so when not scheduled for an update. ``as_printed=True``
    swaps the coverage weights (``F`` and ``1-F``) for comparison with an
    alternative statement of the same quantity.
    """
    if not 0.0 < zeta_b <= 1.0:
        raise ValueError("zeta_b must lie in (0, 1]")
    F = params.coverage
    if as_printed:
        return params.q_d * F + params.q_d * (1.0 - zeta_b) * (1.0 - F)
    return params.q_d * (1.0 - F) + params.q_d * (1.0 - zeta_b) * F


def throughput(params: NetworkParams, p_d: float, zeta_d: float):
    """(link throughput in bit/s, network throughput in bit/s/m^2)."""
    t_d = params.bandwidth * zeta_d * math.log2(1.0 + params.beta_d) * p_d
    return t_d, params.lambda_d * t_d


def achievable_throughput(params: NetworkParams, zeta_d_value=None, lo_db=-30.0, hi_db=30.0, tol_db=0.01):
    """Maximise the D2D link throughput over the D2D threshold.

    Golden-section search on the threshold in dB. Returns
    ``(beta_star, T_d_star, T_N_star)`` with ``beta_star`` linear.
    """
    if zeta_d_value is None:
        zeta_d_value = zeta_d(params, cell_stats(params).zeta_b)

    def t_d(db):
        p = params.with_(beta_d=10 ** (db / 10))
        return throughput(p, d2d_success(p), zeta_d_value)[0]

    invphi = (math.sqrt(5) - 1) / 2
    a, b = lo_db, hi_db
    c = b - invphi * (b - a)
    d = a + invphi * (b - a)
    fc, fd = t_d(c), t_d(d)
    while b - a > tol_db:
        if fc >= fd:
            b, d, fd = d, c, fc
            c = b - invphi * (b - a)
            fc = t_d(c)
        else:
            a, c, fc = c, d, fd
            d = a + invphi * (b - a)
            fd = t_d(d)
    # the bracket ends are candidates too (monotone objective)
    best = max((t_d(x), x) for x in (a, b, 0.5 * (a + b)))
    beta_star = 10 ** (best[1] / 10)
    t_star = best[0]
    return beta_star, t_star, params.lambda_d * t_star


# -- update link: moments of the conditional success probability ---------------

@dataclass
class _Ingredients:
    params: NetworkParams
    b: float
    zeta_b: float
    zeta_d: float
    inv_area: float
    C: float
    F_J: float
    F_c1J: float


def _ingredients(params, b, eq15_as_printed=False):
    stats = cell_stats(params)
    zb = stats.zeta_b
    zd = zeta_d(params, zb, eq15_as_printed)
    if b < 0 and zb >= 1.0 - 1e-9:
        raise NumericalError(
            "mean scheduling probability is 1; negative moments diverge",
            code="SCHEDULER_SATURATED",
        )
    if params.orthogonal:
        C = 0.0
    else:
        if b < 0 and zd >= 1.0:
            raise NumericalError("zeta_d = 1 with b < 0", code="SCHEDULER_SATURATED")
        C = series_C(b, zd, params.delta, params.beta_b / params.power_ratio)
    lb, J = params.lambda_b, params.jm_radius
    return _Ingredients(
        params,
        b,
        zb,
        zd,
        stats.inv_area,
        C,
        jm_cell.coverage_probability(lb, J),
        -math.expm1(-math.pi * C1 * lb * J * J),
    )


def _kernel(b, zeta, x):
    """1 - (1 - zeta*x)^b, computed without cancellation."""
    return -np.expm1(b * np.log1p(-zeta * x))


def _D(v, ing):
    return ing.F_J * -np.expm1(-2.0 * math.pi * ing.inv_area * v * v)


def _G_grid(r, ing, n_v, n_u):
    """G(r, b) for an array of serving distances ``r`` on a fixed grid."""
    p = ing.params
    alpha, eps, lb, J = p.alpha, p.epsilon, p.lambda_b, p.jm_radius
    beta = p.beta_b
    cl = math.pi * C1 * lb

    # v in [0, J] and, via v = J t^(-2/(alpha-2)), v in [J, inf)
    v1, w1 = gauss_legendre(n_v, 0.0, J)
    t, wt = gauss_legendre(n_v, 0.0, 1.0)
    expo = 2.0 / (alpha - 2.0)
    v2 = J * t ** (-expo)
    w2 = wt * J * expo * t ** (-expo - 1.0)
    v = np.concatenate([v1, v2])
    wv = np.concatenate([w1, w2])
    m = np.minimum(v, J)

    s, ws = gauss_legendre(n_u, 0.0, 1.0)
    u = m[:, None] * s[None, :]  # (n_v, n_u)
    # truncated Rayleigh density of the interferer's serving distance, in s
    pdf = 2 * cl * m[:, None] ** 2 * s[None, :] * np.exp(-cl * u * u)
    pdf /= -np.expm1(-cl * m * m)[:, None]

    ra = np.asarray(r, dtype=float)[:, None, None] ** (alpha * (1 - eps))
    num = beta * ra * u[None] ** (alpha * eps)
    x = num / (num + v[None, :, None] ** alpha)
    K = _kernel(ing.b, ing.zeta_b, x)
    EK = np.einsum("rvu,vu,u->rv", K, pdf, ws)
    return 2.0 * (EK * (_D(v, ing) * v * wv)[None, :]).sum(axis=1)


def _moment_grid(ing, n_r, n_v, n_u):
    p = ing.params
    lb, J, eps = p.lambda_b, p.jm_radius, p.epsilon
    r, wr = gauss_legendre(n_r, 0.0, J)
    G = _G_grid(r, ing, n_v, n_u)
    expo = -math.pi * C1 * lb * r * r - math.pi * p.lambda_d * (G + r ** (2 * (1 - eps)) * ing.C)
    return 2 * math.pi * C1 * lb / ing.F_c1J * float(np.sum(wr * r * np.exp(expo)))


def conditional_success_moment(
    b: float,
    params: NetworkParams,
    spec: QuadratureSpec = NESTED,
    eq15_as_printed: bool = False,
    max_nodes: int = 512,
) -> float:
    """b-th moment M_b of the conditional success probability of an update.

    Nested Gauss-Legendre over the serving distance, the interferer distance
    and the interferer's own serving distance; the node count doubles until
    two successive estimates agree to ``spec.rel_tol``.
    """
    check(params)
    if b == 0:
        return 1.0
    ing = _ingredients(params, b, eq15_as_printed)
    n = 32
    prev = _moment_grid(ing, n, n, n)
    while True:
        n *= 2
        cur = _moment_grid(ing, n, n, n)
        if abs(cur - prev) <= max(spec.abs_tol, spec.rel_tol * abs(cur)):
            return cur
        if n >= max_nodes:
            raise NumericalError(
                f"M_{b}: grid refinement stalled at {abs(cur - prev):.3g}",
                code="TOLERANCE_NOT_MET",
                estimate=cur,
            )
        prev = cur


# Closed special cases, evaluated by adaptive quadrature. They share
# no quadrature code with conditional_success_moment and serve as its check.

def _v_integral(h, ing, spec):
    """2 * int_0^inf D(v) h(v) v dv."""
    J = ing.params.jm_radius
    f = lambda v: float(_D(v, ing)) * h(v) * v  # noqa: E731
    return 2.0 * (integrate_1d(f, 0.0, J, spec) + integrate_1d(f, J, math.inf, spec))


def moment_fixed_power(b, params: NetworkParams, spec: QuadratureSpec = QuadratureSpec(rel_tol=1e-9)):
    """M_b for ``epsilon = 0`` via one-dimensional adaptive quadratures."""
    if params.epsilon != 0:
        raise ValueError("moment_fixed_power needs epsilon = 0")
    if b == 0:
        return 1.0
    ing = _ingredients(params, b)
    p = params
    alpha, beta, lb, J = p.alpha, p.beta_b, p.lambda_b, p.jm_radius
    inner = QuadratureSpec(rel_tol=spec.rel_tol / 10)

    def G_hat(r):
        ra = beta * r**alpha
        return _v_integral(lambda v: float(_kernel(b, ing.zeta_b, ra / (ra + v**alpha))), ing, inner)

    def integrand(r):
        if r == 0.0:
            return 0.0
        e = -math.pi * C1 * lb * r * r - math.pi * p.lambda_d * (G_hat(r) + r * r * ing.C)
        return math.exp(e) * r

    return 2 * math.pi * C1 * lb / ing.F_c1J * integrate_1d(integrand, 0.0, J, spec)


def moment_full_power(b, params: NetworkParams, spec: QuadratureSpec = QuadratureSpec(rel_tol=1e-9)):
    """M_b for ``epsilon = 1``; the serving distance drops out."""
    if params.epsilon != 1:
        raise ValueError("moment_full_power needs epsilon = 1")
    if b == 0:
        return 1.0
    ing = _ingredients(params, b)
    p = params
    alpha, beta, lb, J = p.alpha, p.beta_b, p.lambda_b, p.jm_radius
    cl = math.pi * C1 * lb
    inner = QuadratureSpec(rel_tol=spec.rel_tol / 10)

    def EK(v):
        m = min(v, J)
        norm = -math.expm1(-cl * m * m)

        def f(u):
            num = beta * u**alpha
            return float(_kernel(b, ing.zeta_b, num / (num + v**alpha))) * 2 * cl * u * math.exp(-cl * u * u)

        return integrate_1d(f, 0.0, m, inner) / norm

    G_tilde = _v_integral(EK, ing, spec)
    return math.exp(-math.pi * p.lambda_d * (G_tilde + ing.C))


# -- AoI -------------------------------------------------------------------------

def aoi_interarrival_moments(n_cell: int, p_b: float):
    """First two moments of the slots between successful updates.

    Returns ``(E[X], E[X^2])`` for a device scheduled with probability
    ``1/n_cell`` that succeeds with probability ``p_b`` when scheduled.
    """
    if n_cell < 1:
        raise ValueError("n_cell must be >= 1")
    if p_b <= 0:
        return math.inf, math.inf
    q = p_b / n_cell  # per-slot success probability; X is geometric
    return 1.0 / q, (2.0 - q) / (q * q)


def conditional_mean_aoi(n_cell: int, p_b: float) -> float:
    """Long-run time-average AoI of one link with fixed geometry (slots).

    Equals ``n_cell / p_b``; infinite when ``p_b == 0``.
    """
    if not 0.0 <= p_b <= 1.0:
        raise ValueError("p_b must lie in [0, 1]")
    if n_cell < 1:
        raise ValueError("n_cell must be >= 1")
    if p_b == 0.0:
        return math.inf
    return n_cell / p_b


def aoi_spatial_moment(n: int, params: NetworkParams, m_neg=None, **kw) -> float:
    """n-th spatial moment of the temporal mean AoI.

    Product of ``E[N^n | N >= 1]`` for the typical cell load and
    ``M_{-n}``, treating the two as independent.
    """
    if n < 1:
        raise ValueError("n must be >= 1")
    if m_neg is None:
        m_neg = conditional_success_moment(-n, params, **kw)
    return jm_cell.load_moment_conditional(cell_stats(params).pmf, n) * m_neg


def mean_aoi_load_approx(params: NetworkParams, m_neg1=None, **kw) -> float:
    """Alternative mean AoI using ``(lambda_d/lambda_b)(1 - exp(-pi c1 lambda_b J^2))``
    as the load factor instead of ``E[N | N >= 1]``."""
    if m_neg1 is None:
        m_neg1 = conditional_success_moment(-1, params, **kw)
    lb, J = params.lambda_b, params.jm_radius
    return params.density_ratio * -math.expm1(-math.pi * C1 * lb * J * J) * m_neg1


# -- report ------------------------------------------------------------------------

@dataclass
class AnalyticReport:
    p_d: float
    zeta_d: float
    zeta_b: float
    C_1: float
    m_b: dict = field(default_factory=dict)
    t_d: float = 0.0
    t_n: float = 0.0
    beta_star: float = math.nan
    t_d_star: float = math.nan
    t_n_star: float = math.nan
    delta_n: dict = field(default_factory=dict)
    delta_1_load_approx: float = math.nan
    access_mode: str = "co-channel"

    def row(self):
        """Flat mapping used for CSV output."""
        out = {
            "P_d": self.p_d,
            "zeta_d": self.zeta_d,
            "zeta_b": self.zeta_b,
            "C_1": self.C_1,
        }
        for b in (1, 2, -1, -2):
            out[f"M_{b}"] = self.m_b.get(b, math.nan)
        out.update(
            T_d=self.t_d,
            T_N=self.t_n,
            beta_star=self.beta_star,
            T_N_star=self.t_n_star,
            Delta_1=self.delta_n.get(1, math.nan),
            Delta_2=self.delta_n.get(2, math.nan),
            Delta_1_load_approx=self.delta_1_load_approx,
        )
        return out


def analytic_report(
    params: NetworkParams,
    b_values=(1, 2, -1, -2),
    aoi_orders=(1, 2),
    eq15_as_printed: bool = False,
    with_achievable: bool = True,
) -> AnalyticReport:
    check(params)
    stats = cell_stats(params)
    zd = zeta_d(params, stats.zeta_b, eq15_as_printed)
    pd = d2d_success(params)
    t_d, t_n = throughput(params, pd, zd)
    C_1 = 0.0 if params.orthogonal else series_C(1, zd, params.delta, params.beta_b / params.power_ratio)
    rep = AnalyticReport(pd, zd, stats.zeta_b, C_1, t_d=t_d, t_n=t_n, access_mode=params.access_mode)
    for b in sorted(set(b_values) | {-n for n in aoi_orders}, key=abs):
        rep.m_b[b] = conditional_success_moment(b, params, eq15_as_printed=eq15_as_printed)
    for n in aoi_orders:
        rep.delta_n[n] = aoi_spatial_moment(n, params, m_neg=rep.m_b[-n])
    if -1 in rep.m_b:
        rep.delta_1_load_approx = mean_aoi_load_approx(params, m_neg1=rep.m_b[-1])
    if with_achievable:
        rep.beta_star, rep.t_d_star, rep.t_n_star = achievable_throughput(params, zd)
    return rep
