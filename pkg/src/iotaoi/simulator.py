"""Slot-level Monte Carlo of the network on a torus.

A realization fixes positions: BSs, devices, the association of devices to
their nearest BS within the coverage radius, a typical BS (re-centred at the
window centre) with one typical device, and a typical D2D pair whose receiver
sits at a uniform location. :func:`run_slots` then draws scheduling, D2D
activity and Rayleigh fading slot by slot.

Every realization ``i`` gets its own stream derived from
``SeedSequence(master_seed, spawn_key=(i,))``, so estimates do not depend on
the number of worker processes.
"""

from __future__ import annotations

import math
import warnings
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from typing import Iterator, Optional

import numpy as np
from scipy import stats
from scipy.spatial import cKDTree

from .errors import ParameterError, SimulationError
from .model import NetworkParams, validate

MIN_BS_PER_WINDOW = 200.0
DEFAULT_WINDOW_FACTOR = 50.0  # window side in units of 1/sqrt(lambda_b)
MAX_CELL_RETRIES = 100
# elements per random matrix drawn in one slot chunk
_CHUNK_ELEMS = 2_000_000


def default_window(params: NetworkParams) -> float:
    return DEFAULT_WINDOW_FACTOR / math.sqrt(params.lambda_b)


def _rng(seed):
    if isinstance(seed, np.random.Generator):
        return seed
    return np.random.default_rng(seed)


def _torus_delta(a, b, w):
    d = a - b
    return d - w * np.round(d / w)


def _torus_dist(a, b, w):
    return np.hypot(*_torus_delta(a, b, w).T)


@dataclass
class Realization:
    """Node positions and association for one network draw."""

    window_side: float
    bs_points: np.ndarray  # (n_b, 2)
    device_points: np.ndarray  # (n_dev, 2)
    d2d_rx_offsets: np.ndarray  # (n_dev, 2), length r_d
    serving_bs: np.ndarray  # (n_dev,), -1 when outside every JM cell
    serving_dist: np.ndarray  # (n_dev,), nan when unassigned
    typical_bs: int
    typical_device: int
    typical_d2d_rx: np.ndarray  # (2,)
    typical_d2d_tx: np.ndarray  # (2,)
    # derived
    cell_ids: np.ndarray = field(repr=False, default=None)  # non-empty BSs
    cell_members: np.ndarray = field(repr=False, default=None)  # devices sorted by cell
    cell_starts: np.ndarray = field(repr=False, default=None)
    cell_counts: np.ndarray = field(repr=False, default=None)

    def __post_init__(self):
        if self.cell_ids is None:
            assigned = np.flatnonzero(self.serving_bs >= 0)
            order = assigned[np.argsort(self.serving_bs[assigned], kind="stable")]
            counts = np.bincount(self.serving_bs[assigned], minlength=len(self.bs_points))
            self.cell_ids = np.flatnonzero(counts)
            self.cell_counts = counts[self.cell_ids]
            starts = np.concatenate([[0], np.cumsum(counts)[:-1]])
            self.cell_starts = starts[self.cell_ids]
            self.cell_members = order

    @property
    def n_devices(self) -> int:
        return len(self.device_points)

    @property
    def typical_cell_load(self) -> int:
        return int(np.count_nonzero(self.serving_bs == self.typical_bs))

    @property
    def typical_column(self) -> int:
        return int(np.searchsorted(self.cell_ids, self.typical_bs))

    def assigned_fraction(self) -> float:
        return float(np.mean(self.serving_bs >= 0)) if self.n_devices else math.nan


def _sample_once(params, w, rng):
    area = w * w
    n_b = rng.poisson(params.lambda_b * area)
    n_d = rng.poisson(params.lambda_d * area)
    bs = rng.random((n_b, 2)) * w
    dev = rng.random((n_d, 2)) * w
    theta = rng.random(n_d) * 2 * math.pi
    offsets = params.r_d * np.column_stack([np.cos(theta), np.sin(theta)])
    if n_b == 0 or n_d == 0:
        return None
    dist, idx = cKDTree(bs, boxsize=w).query(dev)
    inside = dist <= params.jm_radius
    serving = np.where(inside, idx, -1)
    sdist = np.where(inside, dist, np.nan)
    counts = np.bincount(serving[inside], minlength=n_b)
    nonempty = np.flatnonzero(counts)
    if len(nonempty) == 0:
        return None
    tb = int(rng.choice(nonempty))
    members = np.flatnonzero(serving == tb)
    td = int(rng.choice(members))
    # re-centre the typical BS
    shift = np.array([w / 2, w / 2]) - bs[tb]
    bs = np.mod(bs + shift, w)
    dev = np.mod(dev + shift, w)
    rx = rng.random(2) * w
    phi = rng.random() * 2 * math.pi
    tx = np.mod(rx + params.r_d * np.array([math.cos(phi), math.sin(phi)]), w)
    return Realization(w, bs, dev, offsets, serving, sdist, tb, td, rx, tx)


def sample_network(params: NetworkParams, window_side: Optional[float] = None, seed=None) -> Realization:
    """Draw one network with a typical BS whose JM cell is non-empty."""
    errors = [
        i
        for i in validate(params)
        if i.severity == "error"
        and not (params.lambda_d == 0 and i.code in ("DENSITY_NONPOSITIVE", "DENSITY_ORDER"))
    ]
    if errors:
        raise ParameterError(errors)
    w = default_window(params) if window_side is None else float(window_side)
    if params.lambda_b * w * w < MIN_BS_PER_WINDOW:
        raise SimulationError(
            f"window side {w:g} holds {params.lambda_b * w * w:.1f} BSs on average; "
            f"need at least {MIN_BS_PER_WINDOW:g}",
            code="WINDOW_TOO_SMALL",
        )
    rng = _rng(seed)
    for _ in range(MAX_CELL_RETRIES):
        real = _sample_once(params, w, rng)
        if real is not None:
            return real
    raise SimulationError(
        f"no BS with a non-empty JM cell in {MAX_CELL_RETRIES} draws",
        code="EMPTY_TYPICAL_CELL",
    )


# -- slots -------------------------------------------------------------------------

@dataclass
class SlotOutcome:
    scheduled_device: np.ndarray  # per BS, -1 for empty cells
    d2d_active: np.ndarray  # per device, plus the typical D2D transmitter last
    sir_at_typical_bs: float
    sir_at_typical_d2d_rx: float
    update_success: bool
    d2d_success: bool


@dataclass
class SlotRun:
    """Per-slot traces of one realization.

    ``update_success[k]`` is true when the typical device was scheduled in
    slot ``k`` and decoded; ``aoi`` holds ``A(0..n_slots)`` with ``A(0) = 1``.
    """

    sir_bs: np.ndarray
    sir_d2d: np.ndarray
    typical_scheduled: np.ndarray
    typical_d2d_active: np.ndarray
    update_success: np.ndarray
    d2d_success: np.ndarray
    aoi: np.ndarray
    n_cell: int
    schedule: Optional[np.ndarray] = None  # (n_slots, n_nonempty) device indices
    d2d_active: Optional[np.ndarray] = None  # (n_slots, n_dev + 1)
    cell_ids: Optional[np.ndarray] = None
    n_bs: int = 0

    @property
    def n_slots(self) -> int:
        return len(self.sir_bs)

    def empirical_success(self) -> float:
        k = int(self.typical_scheduled.sum())
        return self.update_success.sum() / k if k else math.nan

    def mean_aoi(self, burn_in: int = 0) -> float:
        return float(np.mean(self.aoi[burn_in + 1 :]))

    def outcomes(self) -> Iterator[SlotOutcome]:
        if self.schedule is None:
            raise ValueError("run_slots(..., keep_outcomes=True) is required")
        for k in range(self.n_slots):
            sched = np.full(self.n_bs, -1)
            sched[self.cell_ids] = self.schedule[k]
            yield SlotOutcome(
                sched,
                self.d2d_active[k],
                float(self.sir_bs[k]),
                float(self.sir_d2d[k]),
                bool(self.update_success[k]),
                bool(self.d2d_success[k]),
            )


class _Geometry:
    """Path gains and transmit powers shared by every slot of a realization."""

    def __init__(self, real: Realization, params: NetworkParams):
        w = real.window_side
        a = params.alpha
        pts = np.vstack([real.device_points, real.typical_d2d_tx[None]])
        centre = real.bs_points[real.typical_bs]
        with np.errstate(divide="ignore"):
            self.g_bs = _torus_dist(pts, centre, w) ** -a
            self.g_rx = _torus_dist(pts, real.typical_d2d_rx, w) ** -a
        self.g_rx[-1] = 0.0  # own partner is the signal, not interference
        sd = np.append(real.serving_dist, np.nan)
        self.p_upd = params.p_b * np.where(np.isnan(sd), 0.0, sd) ** (a * params.epsilon)
        # D2D terms enter through float32 matrix-vector products
        self.w_bs = (params.p_d * self.g_bs).astype(np.float32)
        self.w_rx = (params.p_d * self.g_rx).astype(np.float32)
        self.signal_d2d = params.p_d * params.r_d**-a
        self.n_tx = len(pts)
        self.tx_index = len(pts) - 1


def _slots(real, geo, params, n, rng, force_scheduled=False, force_d2d=False, keep=False, at=("bs", "rx")):
    """SIRs at the receivers in ``at`` for ``n`` independent slots."""
    counts = real.cell_counts
    col = real.typical_column
    pick = real.cell_starts + (rng.random((n, len(counts))) * counts).astype(np.int64)
    sched = real.cell_members[pick]
    if force_scheduled:
        sched[:, col] = real.typical_device
    rows = np.arange(n)[:, None]
    orth = params.orthogonal
    out = dict(typ_sched=sched[:, col] == real.typical_device)

    # One uniform u per device and slot gives both the ALOHA decision
    # (u < q_d) and, given activity, an Exp(1) fade -log(u / q_d).
    if params.q_d > 0:
        h = rng.random((n, geo.n_tx), dtype=np.float32)
        np.subtract(np.float32(1), h, out=h)  # (0, 1]
        h *= np.float32(1.0 / params.q_d)
        np.log(h, out=h)
        np.minimum(h, 0, out=h)
        np.negative(h, out=h)
        h[rows, sched] = 0.0  # scheduled devices do not send D2D
        if force_d2d:
            h[:, geo.tx_index] = rng.standard_exponential(n, dtype=np.float32)
        active = h > 0
    else:
        h = None
        active = np.zeros((n, geo.n_tx), dtype=bool)
        if force_d2d:
            active[:, geo.tx_index] = True
    out["typ_active"] = active[:, geo.tx_index].copy()

    pw = geo.p_upd[sched]
    if "bs" in at:
        upd = rng.standard_exponential(sched.shape) * pw * geo.g_bs[sched]
        signal = upd[:, col].copy()
        upd[:, col] = 0.0
        i_bs = upd.sum(axis=1)
        if not orth:
            if h is not None:
                i_bs += h @ geo.w_bs
            elif force_d2d:
                i_bs += rng.standard_exponential(n) * geo.w_bs[geo.tx_index]
        with np.errstate(divide="ignore", invalid="ignore"):
            out["sir_bs"] = np.where(i_bs > 0, signal / i_bs, np.inf)
    if "rx" in at:
        i_rx = np.zeros(n)
        if not orth:
            i_rx += (rng.standard_exponential(sched.shape) * pw * geo.g_rx[sched]).sum(axis=1)
        if h is not None:
            # fading towards this receiver is independent of the one above
            h2 = rng.standard_exponential((n, geo.n_tx), dtype=np.float32) if "bs" in at else h
            if h2 is not h:
                h2 *= active
            i_rx += h2 @ geo.w_rx
        signal = rng.standard_exponential(n) * geo.signal_d2d
        with np.errstate(divide="ignore", invalid="ignore"):
            out["sir_d2d"] = np.where(i_rx > 0, signal / i_rx, np.inf)
    if keep:
        out["schedule"] = sched
        out["active"] = active
    return out


def _chunked(real, geo, params, n, rng, **kw):
    size = max(1, _CHUNK_ELEMS // max(geo.n_tx, len(real.cell_counts), 1))
    parts = []
    done = 0
    while done < n:
        m = min(size, n - done)
        parts.append(_slots(real, geo, params, m, rng, **kw))
        done += m
    return {k: np.concatenate([p[k] for p in parts]) for k in parts[0]}


def aoi_path(success: np.ndarray) -> np.ndarray:
    """AoI sample path ``A(0..n)`` from per-slot success indicators.

    ``A(0) = 1``; ``A(k+1) = 1`` on success in slot ``k`` else ``A(k) + 1``.
    """
    success = np.asarray(success, dtype=bool)
    k = np.arange(len(success))
    last = np.maximum.accumulate(np.where(success, k, -1)) if len(k) else k
    return np.concatenate([[1], k - last + 1])


def run_slots(
    real: Realization,
    params: NetworkParams,
    n_slots: int,
    seed=None,
    force_typical_d2d: bool = False,
    keep_outcomes: bool = False,
    d2d_link: bool = True,
) -> SlotRun:
    """Simulate ``n_slots`` slots of a fixed realization.

    ``d2d_link=False`` skips the typical D2D receiver (its SIR is reported
    as nan), which roughly halves the cost when only the AoI is wanted.
    """
    if n_slots < 1:
        raise ValueError("n_slots must be >= 1")
    rng = _rng(seed)
    geo = _Geometry(real, params)
    at = ("bs", "rx") if d2d_link else ("bs",)
    o = _chunked(real, geo, params, n_slots, rng, force_d2d=force_typical_d2d, keep=keep_outcomes, at=at)
    sir_d = o.get("sir_d2d", np.full(n_slots, np.nan))
    upd = o["typ_sched"] & (o["sir_bs"] > params.beta_b)
    d2d = o["typ_active"] & (sir_d > params.beta_d)
    run = SlotRun(
        o["sir_bs"],
        sir_d,
        o["typ_sched"],
        o["typ_active"],
        upd,
        d2d,
        aoi_path(upd),
        real.typical_cell_load,
        n_bs=len(real.bs_points),
        cell_ids=real.cell_ids,
    )
    if keep_outcomes:
        run.schedule = o["schedule"]
        run.d2d_active = o["active"]
    return run


def update_trials(real: Realization, params: NetworkParams, n_trials: int, seed=None) -> np.ndarray:
    """SIR at the typical BS over ``n_trials`` slots in which the typical device is scheduled.

    Slots are independent given the realization, so this has the law of the
    scheduled subsequence of :func:`run_slots` without simulating idle slots.
    """
    rng = _rng(seed)
    if n_trials == 0:
        return np.empty(0)
    geo = _Geometry(real, params)
    return _chunked(real, geo, params, n_trials, rng, force_scheduled=True, at=("bs",))["sir_bs"]


def d2d_trials(real: Realization, params: NetworkParams, n_trials: int, seed=None) -> np.ndarray:
    """SIR at the typical D2D receiver over slots in which its transmitter is active."""
    rng = _rng(seed)
    geo = _Geometry(real, params)
    return _chunked(real, geo, params, n_trials, rng, force_d2d=True, at=("rx",))["sir_d2d"]


# -- estimators ------------------------------------------------------------------

@dataclass(frozen=True)
class SimEstimate:
    value: float
    n_samples: int
    ci_half_width: float
    seed_record: tuple

    @property
    def ci(self):
        return self.value - self.ci_half_width, self.value + self.ci_half_width

    def contains(self, x: float) -> bool:
        lo, hi = self.ci
        return lo <= x <= hi


def _estimate(samples, seed_record) -> SimEstimate:
    x = np.asarray(samples, dtype=float)
    n = len(x)
    if n == 0:
        return SimEstimate(math.nan, 0, math.nan, seed_record)
    mean = math.fsum(x) / n
    hw = 1.959963984540054 * float(np.std(x, ddof=1)) / math.sqrt(n) if n > 1 else math.inf
    return SimEstimate(mean, n, hw, seed_record)


def realization_seed(master_seed: int, index: int) -> np.random.SeedSequence:
    return np.random.SeedSequence(master_seed, spawn_key=(index,))


def _map(fn, args, workers):
    if workers and workers > 1:
        with ProcessPoolExecutor(workers) as ex:
            return list(ex.map(fn, args, chunksize=max(1, len(args) // (4 * workers))))
    return [fn(a) for a in args]


def _d2d_job(a):
    params, w, n_slots, master, i, thresholds = a
    net, slots = realization_seed(master, i).spawn(2)
    real = sample_network(params, w, net)
    sir = d2d_trials(real, params, n_slots, slots)
    return [np.count_nonzero(sir > t) / n_slots for t in thresholds]


def d2d_success_curve(
    params: NetworkParams,
    thresholds,
    n_realizations: int,
    n_slots: int,
    seed: int = 0,
    window_side: Optional[float] = None,
    workers: int = 1,
) -> dict:
    """D2D success estimates for several thresholds from one set of SIR samples.

    The threshold does not influence the dynamics, so every point reuses the
    same realizations and slots. The typical transmitter is forced active;
    activity is independent across devices, so this is the law of the
    active slots.
    """
    if n_realizations < 100:
        raise ValueError("n_realizations must be >= 100")
    thresholds = list(thresholds)
    args = [(params, window_side, n_slots, seed, i, thresholds) for i in range(n_realizations)]
    res = np.array(_map(_d2d_job, args, workers)).reshape(-1, len(thresholds))
    rec = (seed, n_realizations, n_slots)
    return {t: _estimate(res[:, j], rec) for j, t in enumerate(thresholds)}


def estimate_d2d_success(
    params: NetworkParams,
    n_realizations: int,
    n_slots: int,
    seed: int = 0,
    window_side: Optional[float] = None,
    workers: int = 1,
) -> SimEstimate:
    """Success probability of the typical D2D link over slots where it transmits."""
    b = params.beta_d
    return d2d_success_curve(params, [b], n_realizations, n_slots, seed, window_side, workers)[b]


def _update_job(a):
    params, w, n_slots, master, i, thresholds = a
    net, slots = realization_seed(master, i).spawn(2)
    real = sample_network(params, w, net)
    rng = np.random.default_rng(slots)
    k = int(rng.binomial(n_slots, 1.0 / real.typical_cell_load))
    sir = update_trials(real, params, k, rng)
    return [k] + [int(np.count_nonzero(sir > t)) for t in thresholds]


def success_rates(params, n_realizations, n_slots, seed=0, window_side=None, workers=1, thresholds=None):
    """Per-realization counts of the typical update link.

    Returns an integer array whose first column is the number of slots in
    which the typical device was scheduled and whose remaining columns count
    successes for each threshold (default: ``params.beta_b``). The number of
    scheduled slots is drawn as Binomial(n_slots, 1/N), then only those slots
    are simulated.
    """
    thresholds = [params.beta_b] if thresholds is None else list(thresholds)
    args = [(params, window_side, n_slots, seed, i, thresholds) for i in range(n_realizations)]
    return np.array(_map(_update_job, args, workers), dtype=np.int64).reshape(-1, 1 + len(thresholds))


def estimate_conditional_success_moments(
    params: NetworkParams,
    b_list,
    n_realizations: int,
    n_slots: int,
    seed: int = 0,
    window_side: Optional[float] = None,
    workers: int = 1,
    rates=None,
    column: int = 1,
) -> dict:
    """Empirical moments of the per-realization update success rate.

    Realizations whose typical device was never scheduled carry no rate and
    are dropped. For negative ``b``, realizations with zero successes are
    dropped too; more than 5% of them raises ``DEGENERATE_SAMPLES``.
    Precomputed ``rates`` from :func:`success_rates` may be passed, with
    ``column`` selecting the threshold.
    """
    if rates is None:
        rates = success_rates(params, n_realizations, n_slots, seed, window_side, workers)
    k, s = rates[:, 0], rates[:, column]
    ok = k > 0
    p_hat = s[ok] / k[ok]
    zero = int(np.count_nonzero(p_hat == 0))
    rec = (seed, n_realizations, n_slots)
    out = {}
    for b in b_list:
        if b == 0:
            out[b] = SimEstimate(1.0, len(p_hat), 0.0, rec)
            continue
        if b < 0:
            if zero > 0.05 * len(p_hat):
                raise SimulationError(
                    f"{zero} of {len(p_hat)} realizations had no successful update; "
                    "negative moments need more slots",
                    code="DEGENERATE_SAMPLES",
                    zero_count=zero,
                )
            out[b] = _estimate(p_hat[p_hat > 0] ** b, rec)
        else:
            out[b] = _estimate(p_hat**b, rec)
    return out


@dataclass
class AoiDiagnostic:
    """Joint versus independently paired samples of ``N / P_hat``."""

    joint: np.ndarray
    independent: np.ndarray
    ks_distance: float


@dataclass
class AoiSamples:
    mean_aoi: np.ndarray  # temporal mean AoI per realization
    n_cell: np.ndarray
    n_scheduled: np.ndarray
    n_success: np.ndarray

    @property
    def p_hat(self):
        with np.errstate(invalid="ignore", divide="ignore"):
            return self.n_success / self.n_scheduled


def _aoi_job(a):
    params, w, n_slots, master, i = a
    net, slots = realization_seed(master, i).spawn(2)
    real = sample_network(params, w, net)
    run = run_slots(real, params, n_slots, slots, d2d_link=False)
    burn = min(10 * run.n_cell, n_slots - 1)
    return (
        run.mean_aoi(burn),
        run.n_cell,
        int(run.typical_scheduled.sum()),
        int(run.update_success.sum()),
    )


def aoi_samples(params, n_realizations, n_slots, seed=0, window_side=None, workers=1) -> AoiSamples:
    args = [(params, window_side, n_slots, seed, i) for i in range(n_realizations)]
    res = _map(_aoi_job, args, workers)
    a, n, k, s = (np.array(x) for x in zip(*res))
    low = int(np.count_nonzero(k < 20))
    if low:
        warnings.warn(
            f"{low} of {n_realizations} typical devices were scheduled fewer than 20 times",
            stacklevel=2,
        )
    return AoiSamples(a.astype(float), n.astype(int), k.astype(int), s.astype(int))


def assumption_diagnostic(samples: AoiSamples, seed: int = 0) -> AoiDiagnostic:
    """KS distance between ``N/P_hat`` for joint and for shuffled pairs."""
    ok = samples.n_scheduled > 0
    n = samples.n_cell[ok].astype(float)
    p = samples.p_hat[ok]
    rng = np.random.default_rng(np.random.SeedSequence(seed, spawn_key=(2**31,)))
    with np.errstate(divide="ignore"):
        joint = n / p
        indep = n / rng.permutation(p)
    ks = stats.ks_2samp(joint, indep).statistic
    return AoiDiagnostic(joint, indep, float(ks))


def estimate_aoi_moments(
    params: NetworkParams,
    n_list,
    n_realizations: int,
    n_slots: int,
    seed: int = 0,
    window_side: Optional[float] = None,
    workers: int = 1,
    samples: Optional[AoiSamples] = None,
):
    """Spatial moments of the temporal mean AoI, plus the pairing diagnostic.

    Each realization averages ``A(k)`` after a burn-in of ``10 N`` slots.
    Returns ``(moments, diagnostic)``.
    """
    if samples is None:
        samples = aoi_samples(params, n_realizations, n_slots, seed, window_side, workers)
    rec = (seed, n_realizations, n_slots)
    moments = {n: _estimate(samples.mean_aoi**n, rec) for n in n_list}
    return moments, assumption_diagnostic(samples, seed)


# -- cell geometry -----------------------------------------------------------------

def sunflower_disc(n: int, radius: float) -> np.ndarray:
    """``n`` quasi-uniform points covering a disc (Vogel spiral)."""
    k = np.arange(n) + 0.5
    r = radius * np.sqrt(k / n)
    th = k * math.pi * (3.0 - math.sqrt(5.0))
    return np.column_stack([r * np.cos(th), r * np.sin(th)])


@dataclass
class CellSamples:
    areas: np.ndarray
    loads: np.ndarray
    full_disc: np.ndarray  # bool: no neighbour within 2J

    def load_histogram(self, n_max: int) -> np.ndarray:
        h = np.bincount(np.minimum(self.loads, n_max + 1), minlength=n_max + 2)
        return h / len(self.loads)


def estimate_area_and_load(
    params: NetworkParams, n_realizations: int, seed: int = 0, n_points: int = 10_000
) -> CellSamples:
    """Area and device count of typical JM cells.

    The typical BS sits at the origin; only BSs within ``2J`` can cut its
    disc. Areas come from point counting on a spiral lattice; devices are
    drawn as a PPP on the disc and counted exactly.
    """
    if n_realizations < 1000:
        raise ValueError("n_realizations must be >= 1000")
    J = params.jm_radius
    lat = sunflower_disc(n_points, J)
    areas = np.empty(n_realizations)
    loads = np.empty(n_realizations, dtype=np.int64)
    full = np.empty(n_realizations, dtype=bool)
    for i in range(n_realizations):
        rng = np.random.default_rng(realization_seed(seed, i))
        m = rng.poisson(params.lambda_b * math.pi * 4 * J * J)
        rad = 2 * J * np.sqrt(rng.random(m))
        th = 2 * math.pi * rng.random(m)
        nb = np.column_stack([rad * np.cos(th), rad * np.sin(th)])
        nd = rng.poisson(params.lambda_d * math.pi * J * J)
        rd = J * np.sqrt(rng.random(nd))
        td = 2 * math.pi * rng.random(nd)
        dev = np.column_stack([rd * np.cos(td), rd * np.sin(td)])
        full[i] = m == 0
        if m == 0:
            areas[i] = math.pi * J * J
            loads[i] = nd
            continue
        # x is closer to the origin than to y  <=>  2 x.y < |y|^2
        y2 = (nb**2).sum(axis=1)
        in_lat = np.all(2 * lat @ nb.T < y2, axis=1)
        areas[i] = math.pi * J * J * np.count_nonzero(in_lat) / n_points
        loads[i] = np.count_nonzero(np.all(2 * dev @ nb.T < y2, axis=1))
    return CellSamples(areas, loads, full)


def pv_area_samples(lambda_b: float, n_realizations: int, seed: int = 0, n_points: int = 10_000) -> np.ndarray:
    """Areas of typical Poisson-Voronoi cells (no coverage limit).

    Uses a disc of radius ``R`` large enough that a cell reaching beyond it
    has negligible probability, and point counting as above.
    """
    R = 4.0 / math.sqrt(lambda_b)
    lat = sunflower_disc(n_points, R)
    out = np.empty(n_realizations)
    for i in range(n_realizations):
        rng = np.random.default_rng(realization_seed(seed, i))
        m = rng.poisson(lambda_b * math.pi * 4 * R * R)
        rad = 2 * R * np.sqrt(rng.random(m))
        th = 2 * math.pi * rng.random(m)
        nb = np.column_stack([rad * np.cos(th), rad * np.sin(th)])
        y2 = (nb**2).sum(axis=1)
        out[i] = math.pi * R * R * np.count_nonzero(np.all(2 * lat @ nb.T < y2, axis=1)) / n_points
    return out
