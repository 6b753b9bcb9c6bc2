import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy import integrate, optimize

from iotaoi import analytics as an
from iotaoi import jm_cell
from iotaoi.errors import NumericalError
from iotaoi.model import NetworkParams, db_to_linear
from iotaoi.numerics import NESTED

from conftest import rel


def _exponents_by_hand(p):
    """D2D exponents written out from scratch for eps = 0."""
    sinc = math.sin(math.pi * p.delta) / (math.pi * p.delta)
    own = math.pi * p.q_d * (p.lambda_d - p.lambda_b) * p.beta_d**p.delta * p.r_d**2 / sinc
    upd = math.pi * p.lambda_b * (p.beta_d * p.p_b / p.p_d) ** p.delta * p.r_d**2 / sinc
    return own, upd


# -- D2D link -------------------------------------------------------------------

def test_d2d_empty_field_orthogonal():
    p = NetworkParams(q_d=0.0, access_mode="orthogonal")
    assert an.d2d_success(p) == 1.0


def test_d2d_defaults_value(defaults):
    own, upd = _exponents_by_hand(defaults)
    assert own == pytest.approx(0.011252, abs=1e-6)
    assert upd == pytest.approx(0.001974, abs=1e-6)
    assert an.d2d_success(defaults) == pytest.approx(math.exp(-own - upd), rel=1e-12)
    assert an.d2d_success(defaults) == pytest.approx(0.9869, abs=5e-5)


def test_d2d_general_matches_fixed_power_form():
    for p in (NetworkParams(), NetworkParams(jm_radius=25.0, beta_d=10.0), NetworkParams(q_d=0.9, r_d=7.0)):
        assert rel(an.d2d_success(p), an.d2d_success_fixed_power(p)) < 1e-12


def test_d2d_orthogonal_drops_update_term():
    for eps in (0.0, 0.5, 1.0):
        p = NetworkParams(epsilon=eps, access_mode="orthogonal")
        own, _ = _exponents_by_hand(p)
        assert rel(an.d2d_success(p), math.exp(-own)) < 1e-12


@pytest.mark.parametrize("eps", [0.3, 0.5, 1.0])
def test_d2d_power_control_distance_moment(eps):
    # E[D^(2 eps) | D < J] by direct quadrature of the truncated Rayleigh law
    p = NetworkParams(epsilon=eps)
    lb, J = p.lambda_b, p.jm_radius
    pdf = lambda r: 2 * math.pi * lb * r * math.exp(-math.pi * lb * r * r)
    num, _ = integrate.quad(lambda r: r ** (2 * eps) * pdf(r), 0, J, epsabs=0, epsrel=1e-12)
    moment = num / (1 - math.exp(-math.pi * lb * J * J))
    own, upd0 = _exponents_by_hand(p)
    assert rel(an.d2d_success(p), math.exp(-own - upd0 * moment)) < 1e-10


@pytest.mark.parametrize(
    "name,grid",
    [
        ("q_d", [0.1, 0.3, 0.6, 0.9]),
        ("beta_d", [0.1, 1.0, 10.0, 100.0]),
        ("r_d", [1.0, 2.0, 5.0, 10.0]),
        ("lambda_d", [5e-4, 10e-4, 20e-4, 40e-4]),
    ],
)
@pytest.mark.parametrize("eps", [0.0, 1.0])
def test_d2d_monotone_decreasing(name, grid, eps):
    vals = [an.d2d_success(NetworkParams(epsilon=eps, **{name: g})) for g in grid]
    assert all(a > b for a, b in zip(vals, vals[1:]))


@pytest.mark.parametrize("eps", [0.0, 0.5, 1.0])
def test_d2d_orthogonal_not_worse(eps):
    p = NetworkParams(epsilon=eps)
    assert an.d2d_success(p.with_(access_mode="orthogonal")) >= an.d2d_success(p)


# -- scheduling probability -----------------------------------------------------------

def test_zeta_d_examples(defaults):
    assert an.zeta_d(defaults.with_(q_d=0.0), 0.3) == 0.0
    far = defaults.with_(jm_radius=1e4)
    assert an.zeta_d(far, 0.2) == pytest.approx(defaults.q_d * 0.8, rel=1e-12)


def test_zeta_d_defaults(defaults):
    F = 1 - math.exp(-math.pi * 1e-4 * 40**2)
    zb = an.cell_stats(defaults).zeta_b
    expect = 0.3 * (1 - F) + 0.3 * (1 - zb) * F
    assert an.zeta_d(defaults, zb) == pytest.approx(expect, rel=1e-14)
    printed = 0.3 * F + 0.3 * (1 - zb) * (1 - F)
    assert an.zeta_d(defaults, zb, as_printed=True) == pytest.approx(printed, rel=1e-14)


def test_zeta_d_rejects_bad_zeta_b(defaults):
    with pytest.raises(ValueError):
        an.zeta_d(defaults, 0.0)


# -- update-link moments -----------------------------------------------------------------

@pytest.mark.parametrize("eps", [0.0, 0.3, 1.0])
def test_moment_zero_is_one(eps):
    assert an.conditional_success_moment(0, NetworkParams(epsilon=eps)) == 1.0


def test_moment_vanishing_threshold():
    p = NetworkParams(beta_b=1e-6)
    assert abs(an.conditional_success_moment(1, p) - 1) < 1e-3


def test_inverse_moment_vanishing_threshold():
    p = NetworkParams(beta_b=1e-6)
    assert abs(an.conditional_success_moment(-1, p) - 1) < 5e-3


def test_moment_deficit_scales_with_root_threshold():
    # the interference loss is proportional to beta_b^delta for small beta_b
    ratios = []
    for b in (1e-6, 1e-8, 1e-10):
        p = NetworkParams(beta_b=b)
        m = an.conditional_success_moment(1, p)
        assert rel(m, an.moment_fixed_power(1, p)) < 1e-6
        ratios.append((1 - m) / b**p.delta)
    assert max(ratios) / min(ratios) < 1 + 1e-3


def test_moment_defaults_frozen(defaults):
    # agreed by the general grid route and the fixed-power quadrature route
    assert an.conditional_success_moment(1, defaults) == pytest.approx(0.1764147, rel=1e-6)
    assert an.conditional_success_moment(2, defaults) == pytest.approx(0.1004970, rel=1e-6)


@pytest.mark.parametrize("b", [1, 2, -1, -2])
@pytest.mark.parametrize("mode", ["co-channel", "orthogonal"])
def test_moment_matches_fixed_power_form(b, mode):
    p = NetworkParams(access_mode=mode)
    assert rel(an.conditional_success_moment(b, p), an.moment_fixed_power(b, p)) < 10 * NESTED.rel_tol


@pytest.mark.parametrize("b", [1, 2, -1])
@pytest.mark.parametrize("mode", ["co-channel", "orthogonal"])
def test_moment_matches_full_power_form(b, mode):
    p = NetworkParams(epsilon=1.0, access_mode=mode)
    assert rel(an.conditional_success_moment(b, p), an.moment_full_power(b, p)) < 10 * NESTED.rel_tol


@pytest.mark.parametrize("eps", [0.0, 0.3, 1.0])
@pytest.mark.parametrize("beta_b", [1.0, 2.0, 4.0])
def test_moment_ordering_and_jensen(eps, beta_b):
    p = NetworkParams(epsilon=eps, beta_b=beta_b)
    m = [an.conditional_success_moment(b, p) for b in (0, 1, 2, 3)]
    assert all(a > c for a, c in zip(m, m[1:]))
    assert all(0 < x <= 1 for x in m)
    m_1 = an.conditional_success_moment(-1, p)
    assert m_1 * m[1] >= 1
    assert m[2] >= m[1] ** 2


@pytest.mark.parametrize("eps", [0.0, 1.0])
def test_orthogonal_moment_not_worse(eps):
    p = NetworkParams(epsilon=eps)
    assert an.conditional_success_moment(1, p.with_(access_mode="orthogonal")) >= an.conditional_success_moment(1, p)


def test_moment_eq15_switch_changes_value(defaults):
    a = an.conditional_success_moment(1, defaults)
    b = an.conditional_success_moment(1, defaults, eq15_as_printed=True)
    assert a != b and 0 < b < 1


def test_scheduler_saturated(monkeypatch, defaults):
    stats = an.cell_stats(defaults)
    sat = an.CellStats(stats.model, stats.pmf, 1.0 - 1e-12, stats.inv_area)
    monkeypatch.setattr(an, "cell_stats", lambda params: sat)
    with pytest.raises(NumericalError) as exc:
        an.conditional_success_moment(-1, defaults)
    assert exc.value.code == "SCHEDULER_SATURATED"
    # positive orders stay computable
    assert 0 < an.conditional_success_moment(1, defaults) < 1


# -- throughput --------------------------------------------------------------------------

def test_throughput_examples(defaults):
    assert an.throughput(defaults, 0.9869, 0.0) == (0.0, 0.0)
    t_d, t_n = an.throughput(defaults, 0.9869, 0.2)
    assert t_d == pytest.approx(39476.0, rel=1e-12)
    assert t_n / t_d == pytest.approx(defaults.lambda_d, rel=1e-14)


@given(
    beta=st.floats(1e-3, 1e3),
    p_d=st.floats(0.0, 1.0),
    z=st.floats(0.0, 1.0),
    lam=st.floats(1.5e-4, 1e-2),
)
def test_throughput_ratio_property(beta, p_d, z, lam):
    p = NetworkParams(beta_d=beta, lambda_d=lam)
    t_d, t_n = an.throughput(p, p_d, z)
    assert t_n == pytest.approx(lam * t_d, rel=1e-14, abs=0)


def test_achievable_local_optimum(defaults):
    beta, t_d, t_n = an.achievable_throughput(defaults)
    z = an.zeta_d(defaults, an.cell_stats(defaults).zeta_b)

    def t_at(db):
        p = defaults.with_(beta_d=10 ** (db / 10))
        return an.throughput(p, an.d2d_success(p), z)[0]

    db = 10 * math.log10(beta)
    assert t_d >= t_at(db + 0.5) and t_d >= t_at(db - 0.5)
    assert t_n == pytest.approx(defaults.lambda_d * t_d, rel=1e-14)


def test_achievable_degenerate_upper_bracket():
    p = NetworkParams(q_d=1e-9, access_mode="orthogonal")
    beta, _, _ = an.achievable_throughput(p)
    assert 10 * math.log10(beta) > 30 - 0.05


def test_achievable_network_throughput_grows_with_density():
    vals = [an.achievable_throughput(NetworkParams(lambda_d=k * 1e-4))[2] for k in (5, 10, 20, 40)]
    assert all(a < b for a, b in zip(vals, vals[1:]))


@pytest.mark.parametrize("k", [5, 10, 20, 40])
def test_orthogonal_throughput_higher(k):
    p = NetworkParams(lambda_d=k * 1e-4)
    assert an.achievable_throughput(p.with_(access_mode="orthogonal"))[2] > an.achievable_throughput(p)[2]


# -- AoI -----------------------------------------------------------------------------------

def test_conditional_mean_aoi_examples():
    assert an.conditional_mean_aoi(1, 1.0) == 1.0
    assert an.conditional_mean_aoi(2, 0.5) == 4.0
    assert an.conditional_mean_aoi(3, 0.0) == math.inf
    with pytest.raises(ValueError):
        an.conditional_mean_aoi(0, 0.5)


@given(n=st.integers(1, 200), p=st.floats(1e-4, 1.0))
def test_interarrival_moments_give_mean_aoi(n, p):
    # renewal-reward: time-average age = E[X^2] / (2 E[X]) + 1/2
    ex, ex2 = an.aoi_interarrival_moments(n, p)
    assert ex == pytest.approx(n / p, rel=1e-12)
    assert ex2 / (2 * ex) + 0.5 == pytest.approx(an.conditional_mean_aoi(n, p), rel=1e-12)


def test_interarrival_moments_by_summation():
    n, p = 3, 0.4
    q = p / n
    k = np.arange(1, 5000)
    pmf = q * (1 - q) ** (k - 1)
    ex, ex2 = an.aoi_interarrival_moments(n, p)
    assert ex == pytest.approx(float(np.sum(k * pmf)), rel=1e-10)
    assert ex2 == pytest.approx(float(np.sum(k * k * pmf)), rel=1e-10)


def test_aoi_small_threshold_equals_mean_load():
    p = NetworkParams(beta_b=1e-6)
    e_n = jm_cell.load_moment_conditional(an.cell_stats(p).pmf, 1)
    assert rel(an.aoi_spatial_moment(1, p), e_n) < 5e-3


@pytest.mark.parametrize("eps", [0.0, 0.3, 1.0])
def test_aoi_bounds(eps):
    p = NetworkParams(epsilon=eps)
    d1, d2 = an.aoi_spatial_moment(1, p), an.aoi_spatial_moment(2, p)
    assert d2 >= d1**2
    assert d1 >= jm_cell.load_moment_conditional(an.cell_stats(p).pmf, 1) >= 1


@pytest.mark.parametrize("eps", [0.0, 0.3, 1.0])
def test_aoi_increasing_in_threshold(eps):
    vals = [an.aoi_spatial_moment(1, NetworkParams(epsilon=eps, beta_b=db_to_linear(x))) for x in (-3, 0, 3, 6)]
    assert all(a < b for a, b in zip(vals, vals[1:]))


@pytest.mark.parametrize("eps", [0.0, 1.0])
def test_aoi_increasing_in_density(eps):
    vals = [an.aoi_spatial_moment(1, NetworkParams(epsilon=eps, lambda_d=k * 1e-4)) for k in (5, 10, 20, 40)]
    assert all(a < b for a, b in zip(vals, vals[1:]))


@pytest.mark.parametrize("eps", [0.5, 1.0])
def test_aoi_and_throughput_degrade_with_radius(eps):
    grid = (25.0, 30.0, 40.0, 50.0, 60.0)
    aoi = [an.aoi_spatial_moment(1, NetworkParams(epsilon=eps, jm_radius=J)) for J in grid]
    tn = [an.achievable_throughput(NetworkParams(epsilon=eps, jm_radius=J))[2] for J in grid]
    assert all(a < b for a, b in zip(aoi, aoi[1:]))
    assert all(a > b for a, b in zip(tn, tn[1:]))


def test_radius_trend_fixed_power():
    # without power control the radius acts on throughput only via zeta_d
    grid = (40.0, 50.0, 60.0)
    aoi = [an.aoi_spatial_moment(1, NetworkParams(jm_radius=J)) for J in grid]
    tn = [an.achievable_throughput(NetworkParams(jm_radius=J))[2] for J in grid]
    assert all(a < b for a, b in zip(aoi, aoi[1:]))
    assert all(a > b for a, b in zip(tn, tn[1:]))


def test_load_approx_formula(defaults):
    m = an.conditional_success_moment(-1, defaults)
    expect = 20.0 * (1 - math.exp(-math.pi * 9 / 7 * 1e-4 * 1600)) * m
    assert an.mean_aoi_load_approx(defaults) == pytest.approx(expect, rel=1e-12)


@pytest.mark.parametrize("eps,coverage", [(0.3, 0.55), (1.0, 0.80)])
def test_coverage_supported_at_aoi_target(eps, coverage):
    # mean AoI target 30 slots, update threshold 0 dB
    def gap(c):
        J = math.sqrt(-math.log(1 - c) / (math.pi * 1e-4))
        return an.aoi_spatial_moment(1, NetworkParams(beta_b=1.0, epsilon=eps, jm_radius=J)) - 30.0

    c = optimize.brentq(gap, 0.25, 0.95, xtol=1e-4)
    assert abs(c - coverage) < 0.05


# -- report ---------------------------------------------------------------------------------

@pytest.mark.parametrize("mode", ["co-channel", "orthogonal"])
@pytest.mark.parametrize("eps", [0.0, 1.0])
def test_report_invariants(mode, eps):
    rep = an.analytic_report(NetworkParams(epsilon=eps, access_mode=mode))
    for v in (rep.p_d, rep.zeta_d, rep.zeta_b):
        assert 0 <= v <= 1
    for b, m in rep.m_b.items():
        assert (m <= 1) if b > 0 else (m >= 1)
    assert all(d >= 1 for d in rep.delta_n.values())
    if mode == "orthogonal":
        assert rep.C_1 == 0.0
    row = rep.row()
    assert row["M_1"] == rep.m_b[1]


@settings(max_examples=15, deadline=None)
@given(
    q_d=st.floats(0.05, 0.9),
    beta_b=st.floats(0.3, 6.0),
    eps=st.sampled_from([0.0, 0.5, 1.0]),
)
def test_moment_property_ranges(q_d, beta_b, eps):
    p = NetworkParams(q_d=q_d, beta_b=beta_b, epsilon=eps)
    m1 = an.conditional_success_moment(1, p)
    m2 = an.conditional_success_moment(2, p)
    assert 0 < m2 <= m1 <= 1
    assert m2 >= m1 * m1 * (1 - 1e-9)
