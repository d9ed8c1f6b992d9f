"""First-principles Monte Carlo for sectored-beam charging networks.

Each trial draws a fresh beacon and sensor field, applies the beam-allocation
rule exactly (including the sensor-sharing correlations the closed forms
idealize away), and records the power collected at the origin sensor.

Reproducibility contract: every random draw comes from a counter-based
stream keyed by (master_seed, trial_index, substream), so a run is
bit-identical no matter how trials are scheduled across workers. Network
geometry lives on substream 0 and allocation tie-breaks on a per-scheme
substream, which makes runs that differ only in the allocation scheme see
identical networks (paired comparisons come out of the seeding for free).

Window policy: with an explicit window_radius the field is truncated there
and the truncation bias is the caller's concern. In AUTO mode the field is
effectively unbounded: beacons inside an exact-simulation radius are drawn
jointly with their sensors, and the expected power of the remaining far tail
(whose per-beacon gain toward the origin averages 1 for every scheme, by
rotation symmetry) is added as a constant. That leaves zero mean bias and a
relative variance deficit around 1e-5, far inside the AUTO bias budget
2*pi*lam_p*P*sigma*R^(2-a)/(a-2) <= tail_epsilon * mean_power_omni.
"""

from __future__ import annotations

import concurrent.futures
import enum
import json
import math
import os
from dataclasses import dataclass, field

import numpy as np

from . import analytic
from .scenario import ConfigError, ScenarioParams, params_to_mapping, validate

__all__ = [
    "AUTO_WINDOW",
    "Allocation",
    "SimConfig",
    "NetworkSample",
    "TrialSummary",
    "trial_stream",
    "sample_disk_ppp",
    "draw_network",
    "sector_of",
    "pb_beam_state",
    "received_power_origin",
    "auto_window_radius",
    "run_trials",
    "empirical_ccdf",
    "samples_to_csv",
    "summary_to_json",
]

#: Sentinel for SimConfig.window_radius: size the window automatically.
AUTO_WINDOW = "auto"

_TWO_PI = 2.0 * math.pi

#: Exact-zone sizing in AUTO mode: beacons beyond the exact zone are replaced
#: by their mean power, forfeiting this fraction of the received-power
#: variance at worst.
_VARIANCE_SLIP = 1e-5
_EXACT_ZONE_MIN = 20.0
_EXACT_ZONE_MAX = 300.0

class Allocation(enum.Enum):
    """Per-sector power splitting rule applied by every beacon."""

    UNIFORM = "uniform"
    GREEDY = "greedy"
    ROBUST = "robust"
    FORCED_OMNI = "forced_omni"


@dataclass(frozen=True)
class SimConfig:
    """Monte Carlo run settings; window_radius is meters or AUTO_WINDOW."""

    trials: int
    master_seed: int
    window_radius: float | str = AUTO_WINDOW
    allocation: Allocation = Allocation.UNIFORM
    tail_epsilon: float = 1e-3


@dataclass(frozen=True)
class NetworkSample:
    """One realization: beacon field, sensor field (origin included), marks."""

    pb_points: np.ndarray
    sn_points: np.ndarray
    pb_orientations: np.ndarray
    pb_window_radius: float
    sn_window_radius: float


@dataclass(frozen=True)
class TrialSummary:
    """Aggregated run output; samples[i] is the power of trial i in watts."""

    samples: np.ndarray
    mean: float
    variance: float
    mean_ci95: float
    ccdf: tuple[tuple[float, float], ...] = field(repr=False)


def _check_config(params: ScenarioParams, config: SimConfig) -> None:
    if not isinstance(config.trials, int) or config.trials < 1:
        raise ConfigError(f"trials must be a positive integer, got {config.trials!r}")
    if not isinstance(config.master_seed, int) or not (
        0 <= config.master_seed < 1 << 64
    ):
        raise ConfigError(
            f"master_seed must be a 64-bit unsigned integer, got {config.master_seed!r}"
        )
    if not isinstance(config.allocation, Allocation):
        raise ConfigError(f"unknown allocation scheme {config.allocation!r}")
    if not (config.tail_epsilon > 0.0):
        raise ConfigError(f"tail_epsilon must be positive, got {config.tail_epsilon!r}")
    if config.window_radius != AUTO_WINDOW:
        w = config.window_radius
        if not isinstance(w, (int, float)) or not math.isfinite(w) or w <= 0:
            raise ConfigError(f"window_radius must be positive or AUTO, got {w!r}")
        if w < params.charging_radius:
            raise ConfigError(
                f"window_radius {w!r} is smaller than the charging radius "
                f"{params.charging_radius!r}; near beacons would be lost"
            )


def trial_stream(master_seed: int, trial_index: int, substream: int = 0) -> np.random.Generator:
    """Counter-based RNG stream for one trial, independent of scheduling."""
    key = np.array([master_seed, trial_index], dtype=np.uint64)
    counter = np.array([0, 0, 0, substream], dtype=np.uint64)
    return np.random.Generator(np.random.Philox(key=key, counter=counter))


#: Allocation tie-break streams sit on per-scheme substreams so schemes never
#: perturb each other's geometry (substream 0 is the network).
_ALLOC_SUBSTREAM = {
    Allocation.UNIFORM: 1,
    Allocation.GREEDY: 2,
    Allocation.ROBUST: 3,
    Allocation.FORCED_OMNI: 4,
}


def _disk_uniform(density: float, radius: float, stream: np.random.Generator) -> np.ndarray:
    """Raw draws behind sample_disk_ppp: one Poisson count, then an (n, 2)
    uniform block (radius variate, angle variate). The batched trial engine
    consumes the identical sequence, so its networks match draw_network's."""
    count = int(stream.poisson(density * math.pi * radius * radius))
    return stream.random((count, 2))


def _disk_points(u_block: np.ndarray, radius: float) -> np.ndarray:
    r = radius * np.sqrt(u_block[:, 0])
    theta = _TWO_PI * u_block[:, 1]
    return np.column_stack((r * np.cos(theta), r * np.sin(theta)))


def sample_disk_ppp(density: float, radius: float, stream: np.random.Generator) -> np.ndarray:
    """Homogeneous Poisson field on a disk around the origin; (n, 2) array.

    Draw order (count, then a uniform block) is part of the reproducibility
    contract; positions are uniform via the sqrt-radius map.
    """
    if density < 0:
        raise ValueError(f"density must be nonnegative, got {density!r}")
    if not (radius > 0):
        raise ValueError(f"radius must be positive, got {radius!r}")
    return _disk_points(_disk_uniform(density, radius, stream), radius)


def draw_network(
    params: ScenarioParams, pb_window_radius: float, stream: np.random.Generator
) -> NetworkSample:
    """Sample one network: beacons in the window, sensors in window + rho.

    The sensor window extends past the beacon window by the charging radius
    so every beacon sees its complete charging disk; the origin sensor is
    prepended exactly once.
    """
    validate(params)
    if not (pb_window_radius > 0):
        raise ValueError(f"window radius must be positive, got {pb_window_radius!r}")
    sn_window = pb_window_radius + params.charging_radius
    pb = sample_disk_ppp(params.pb_density, pb_window_radius, stream)
    orientations = stream.random(len(pb)) * (_TWO_PI / params.sectors)
    sn = sample_disk_ppp(params.sn_density, sn_window, stream)
    sn = np.vstack((np.zeros((1, 2)), sn))
    return NetworkSample(
        pb_points=pb,
        sn_points=sn,
        pb_orientations=orientations,
        pb_window_radius=float(pb_window_radius),
        sn_window_radius=float(sn_window),
    )


def sector_of(pb, target, orientation: float, sectors: int) -> int:
    """Index of the beacon's sector containing the direction to target.

    Sectors are half-open arcs [k*2pi/N, (k+1)*2pi/N) measured from the
    beacon's orientation.
    """
    dx = float(target[0]) - float(pb[0])
    dy = float(target[1]) - float(pb[1])
    if dx == 0.0 and dy == 0.0:
        raise ValueError("target coincides with the beacon; direction undefined")
    rel = math.fmod(math.atan2(dy, dx) - orientation, _TWO_PI)
    if rel < 0.0:
        rel += _TWO_PI
    # adding 2pi can round up to exactly 2pi; the modulus folds that to 0
    return int(rel // (_TWO_PI / sectors)) % sectors


def _sectors_toward(
    pb: np.ndarray, targets_dx: np.ndarray, targets_dy: np.ndarray,
    orientations: np.ndarray, sectors: int,
) -> np.ndarray:
    rel = np.mod(np.arctan2(targets_dy, targets_dx) - orientations, _TWO_PI)
    idx = (rel // (_TWO_PI / sectors)).astype(np.int64)
    return idx % sectors


def _sector_counts(sample: NetworkSample, params: ScenarioParams) -> np.ndarray:
    """Sensor count per (beacon, sector), (n_pb, N) ints."""
    pb = sample.pb_points
    sn = sample.sn_points
    n_pb = len(pb)
    n_sec = params.sectors
    rho = params.charging_radius
    if n_pb == 0:
        return np.zeros((0, n_sec), dtype=np.int64)
    trial_pb = np.zeros(n_pb, dtype=np.int64)
    trial_sn = np.zeros(len(sn), dtype=np.int64)
    i_pb, j_sn = _pairs_bucketed(pb, trial_pb, sn, trial_sn, rho)
    dxp = sn[j_sn, 0] - pb[i_pb, 0]
    dyp = sn[j_sn, 1] - pb[i_pb, 1]
    sec = _sectors_toward(pb, dxp, dyp, sample.pb_orientations[i_pb], n_sec)
    flat = np.bincount(i_pb * n_sec + sec, minlength=n_pb * n_sec)
    return flat.reshape(n_pb, n_sec)


def _pairs_bucketed(
    pb: np.ndarray, trial_pb: np.ndarray, sn: np.ndarray, trial_sn: np.ndarray, rho: float
):
    """(beacon, sensor) index pairs within rho and in the same trial.

    Uniform grid with cell size rho; the cell key carries the trial label so
    batches of concatenated trials join without cross-talk. Only the pair
    *set* matters downstream (integer sector counts), so join order carries
    no floating-point sensitivity.
    """
    cell_pb = np.floor(pb / rho).astype(np.int64)
    cell_sn = np.floor(sn / rho).astype(np.int64)
    lo = np.minimum(cell_pb.min(axis=0), cell_sn.min(axis=0)) - 1
    hi = np.maximum(cell_pb.max(axis=0), cell_sn.max(axis=0))
    span = int(hi[1] - lo[1] + 3)
    cols = int(hi[0] - lo[0] + 3)
    per_trial = span * cols
    key_sn = trial_sn * per_trial + (cell_sn[:, 0] - lo[0]) * span + (cell_sn[:, 1] - lo[1])
    order = np.argsort(key_sn, kind="stable")
    key_sorted = key_sn[order]
    base_pb = trial_pb * per_trial + (cell_pb[:, 0] - lo[0]) * span + (cell_pb[:, 1] - lo[1])
    out_i = []
    out_j = []
    rho2 = rho * rho
    pb_index = np.arange(len(pb))
    for ox in (-1, 0, 1):
        for oy in (-1, 0, 1):
            want = base_pb + ox * span + oy
            left = np.searchsorted(key_sorted, want, side="left")
            right = np.searchsorted(key_sorted, want, side="right")
            n_hit = right - left
            if not n_hit.any():
                continue
            i_rep = np.repeat(pb_index, n_hit)
            # offsets within each [left, right) run
            csum = np.concatenate(([0], np.cumsum(n_hit)))
            ramp = np.arange(csum[-1]) - np.repeat(csum[:-1], n_hit)
            j_cand = order[np.repeat(left, n_hit) + ramp]
            dx = sn[j_cand, 0] - pb[i_rep, 0]
            dy = sn[j_cand, 1] - pb[i_rep, 1]
            keep = dx * dx + dy * dy <= rho2
            out_i.append(i_rep[keep])
            out_j.append(j_cand[keep])
    if not out_i:
        return np.empty(0, dtype=np.int64), np.empty(0, dtype=np.int64)
    return np.concatenate(out_i), np.concatenate(out_j)


def pb_beam_state(
    counts, scheme: Allocation, sectors: int, rng: np.random.Generator | None = None
) -> np.ndarray:
    """Per-sector intensity gains of one beacon given its sensor counts.

    Gains always sum to N (power conservation). Greedy needs an RNG stream
    for its uniform tie-break among maximal sectors.
    """
    counts = np.asarray(counts, dtype=np.int64)
    if counts.shape != (sectors,):
        raise ValueError(f"expected {sectors} sector counts, got shape {counts.shape}")
    if (counts < 0).any():
        raise ValueError("sector counts must be nonnegative")
    occupied = int(np.count_nonzero(counts))
    if occupied == 0 or scheme is Allocation.FORCED_OMNI:
        return np.ones(sectors, dtype=np.float64)
    gains = np.zeros(sectors, dtype=np.float64)
    if scheme is Allocation.UNIFORM:
        gains[counts > 0] = sectors / occupied
    elif scheme is Allocation.ROBUST:
        gains = sectors * counts / counts.sum()
    elif scheme is Allocation.GREEDY:
        top = np.nonzero(counts == counts.max())[0]
        if len(top) == 1:
            pick = top[0]
        else:
            if rng is None:
                raise ValueError("greedy tie-break needs an RNG stream")
            pick = top[int(rng.random() * len(top)) % len(top)]
        gains[pick] = float(sectors)
    else:
        raise ValueError(f"unknown allocation scheme {scheme!r}")
    return gains


def _gains_toward_origin(
    sample: NetworkSample,
    counts: np.ndarray,
    scheme: Allocation,
    sectors: int,
    rng: np.random.Generator | None,
) -> np.ndarray:
    """Gain each beacon radiates toward the origin, all beacons at once."""
    pb = sample.pb_points
    n_pb = len(pb)
    if scheme is Allocation.FORCED_OMNI:
        return np.ones(n_pb, dtype=np.float64)
    k = _sectors_toward(pb, -pb[:, 0], -pb[:, 1], sample.pb_orientations, sectors)
    occupied = np.count_nonzero(counts, axis=1)
    hit = counts[np.arange(n_pb), k]
    idle = occupied == 0
    if scheme is Allocation.UNIFORM:
        gains = np.where(hit > 0, sectors / np.maximum(occupied, 1), 0.0)
    elif scheme is Allocation.ROBUST:
        totals = counts.sum(axis=1)
        gains = sectors * hit / np.maximum(totals, 1)
    elif scheme is Allocation.GREEDY:
        if rng is None:
            raise ValueError("greedy tie-break needs an RNG stream")
        # one draw per beacon regardless of ties keeps the stream layout fixed
        u = rng.random(n_pb)
        top = counts.max(axis=1)
        ties = counts == top[:, np.newaxis]
        n_ties = ties.sum(axis=1)
        pick_rank = np.minimum((u * n_ties).astype(np.int64), n_ties - 1)
        rank_of_k = np.cumsum(ties, axis=1)[np.arange(n_pb), k] - 1
        chosen = ties[np.arange(n_pb), k] & (rank_of_k == pick_rank)
        gains = np.where(chosen, float(sectors), 0.0)
    else:
        raise ValueError(f"unknown allocation scheme {scheme!r}")
    return np.where(idle, 1.0, gains)


def received_power_origin(
    sample: NetworkSample,
    params: ScenarioParams,
    scheme: Allocation = Allocation.UNIFORM,
    rng: np.random.Generator | None = None,
) -> float:
    """Power at the origin sensor for one realization, watts.

    Sums P * sigma * gain * max(distance, 1)^(-alpha) over all beacons; the
    origin sensor itself occupies sectors like any other sensor.
    """
    validate(params)
    if len(sample.pb_points) == 0:
        return 0.0
    if scheme is Allocation.FORCED_OMNI:
        gains = np.ones(len(sample.pb_points), dtype=np.float64)
    else:
        counts = _sector_counts(sample, params)
        gains = _gains_toward_origin(sample, counts, scheme, params.sectors, rng)
    dist = np.hypot(sample.pb_points[:, 0], sample.pb_points[:, 1])
    atten = np.maximum(dist, 1.0) ** -params.path_loss_exp
    return float(params.pb_power * params.attenuation * np.sum(gains * atten))


def auto_window_radius(params: ScenarioParams, tail_epsilon: float = 1e-3) -> float:
    """Window radius whose truncated far-field mean is below the bias budget.

    Solves 2 pi lam_p P sigma R^(2-a)/(a-2) = tail_epsilon * mean_power_omni,
    which reduces to R = (2/(tail_epsilon * alpha))^(1/(alpha-2)).
    """
    validate(params)
    if not (tail_epsilon > 0):
        raise ValueError(f"tail_epsilon must be positive, got {tail_epsilon!r}")
    alpha = params.path_loss_exp
    r = (2.0 / (tail_epsilon * alpha)) ** (1.0 / (alpha - 2.0))
    return max(r, params.charging_radius, 1.0)


def _exact_zone_radius(params: ScenarioParams) -> float:
    """AUTO-mode exact simulation radius; the tail beyond it is folded in
    as its mean, costing at most _VARIANCE_SLIP of the variance."""
    n = params.sectors
    alpha = params.path_loss_exp
    r_var = ((n + 1) / (alpha * _VARIANCE_SLIP)) ** (1.0 / (2.0 * alpha - 2.0))
    r_var = min(max(r_var, _EXACT_ZONE_MIN), _EXACT_ZONE_MAX)
    return max(3.0 * params.charging_radius, r_var)


def _tail_mean(params: ScenarioParams, radius: float) -> float:
    """Expected power from all beacons beyond radius (>= 1); exact for every
    scheme because the average gain toward any fixed direction is 1."""
    alpha = params.path_loss_exp
    return (
        _TWO_PI
        * params.pb_density
        * params.pb_power
        * params.attenuation
        * radius ** (2.0 - alpha)
        / (alpha - 2.0)
    )


def _batch_size(params: ScenarioParams, window: float) -> int:
    """Trials fused per vectorized pass, sized to bound working-set memory."""
    expect_pb = params.pb_density * math.pi * window * window
    expect_sn = params.sn_density * math.pi * (window + params.charging_radius) ** 2
    expect_pairs = expect_pb * 9.0 * params.sn_density * params.charging_radius**2
    rows = max(expect_pb, expect_sn, expect_pairs, 1.0)
    return int(min(256, max(1, 4.0e5 / rows)))


def _batch_powers(
    params: ScenarioParams,
    scheme: Allocation,
    master_seed: int,
    start: int,
    stop: int,
    window: float,
) -> np.ndarray:
    """Powers for trials [start, stop) in one vectorized pass.

    Every random draw still comes from the owning trial's keyed stream in
    draw_network's order, so results are independent of how trials are
    grouped into batches or spread over workers.
    """
    n_trials = stop - start
    n_sec = params.sectors
    rho = params.charging_radius
    sn_window = window + rho
    orient_width = _TWO_PI / n_sec
    omni = scheme is Allocation.FORCED_OMNI
    pb_blocks: list[np.ndarray] = []
    orient_blocks: list[np.ndarray] = []
    sn_blocks: list[np.ndarray] = []
    tie_blocks: list[np.ndarray] = []
    n_pb = np.empty(n_trials, dtype=np.int64)
    n_sn = np.empty(n_trials, dtype=np.int64)
    for i in range(start, stop):
        g = trial_stream(master_seed, i, substream=0)
        u_pb = _disk_uniform(params.pb_density, window, g)
        n_pb[i - start] = len(u_pb)
        pb_blocks.append(u_pb)
        if not omni:
            orient_blocks.append(g.random(len(u_pb)))
            u_sn = _disk_uniform(params.sn_density, sn_window, g)
            n_sn[i - start] = len(u_sn)
            sn_blocks.append(u_sn)
            if scheme is Allocation.GREEDY:
                tie_blocks.append(
                    trial_stream(
                        master_seed, i, substream=_ALLOC_SUBSTREAM[scheme]
                    ).random(len(u_pb))
                )
    pb = _disk_points(np.concatenate(pb_blocks).reshape(-1, 2), window)
    t_pb = np.repeat(np.arange(n_trials), n_pb)
    dist = np.hypot(pb[:, 0], pb[:, 1])
    atten = np.maximum(dist, 1.0) ** -params.path_loss_exp
    if omni:
        contrib = atten
    else:
        orientations = np.concatenate(orient_blocks) * orient_width
        sn_raw = _disk_points(np.concatenate(sn_blocks).reshape(-1, 2), sn_window)
        # one origin sensor per trial, prepended as in draw_network
        sn = np.empty((len(sn_raw) + n_trials, 2), dtype=np.float64)
        t_sn = np.repeat(np.arange(n_trials), n_sn + 1)
        origin_rows = np.concatenate(([0], np.cumsum(n_sn + 1)[:-1]))
        sn[origin_rows] = 0.0
        body = np.ones(len(sn), dtype=bool)
        body[origin_rows] = False
        sn[body] = sn_raw
        if len(pb):
            i_pair, j_pair = _pairs_bucketed(pb, t_pb, sn, t_sn, rho)
            sec = _sectors_toward(
                pb,
                sn[j_pair, 0] - pb[i_pair, 0],
                sn[j_pair, 1] - pb[i_pair, 1],
                orientations[i_pair],
                n_sec,
            )
            counts = np.bincount(
                i_pair * n_sec + sec, minlength=len(pb) * n_sec
            ).reshape(len(pb), n_sec)
        else:
            counts = np.zeros((0, n_sec), dtype=np.int64)
        k = _sectors_toward(pb, -pb[:, 0], -pb[:, 1], orientations, n_sec)
        rows = np.arange(len(pb))
        occupied = np.count_nonzero(counts, axis=1)
        hit = counts[rows, k]
        if scheme is Allocation.UNIFORM:
            gains = np.where(hit > 0, n_sec / np.maximum(occupied, 1), 0.0)
        elif scheme is Allocation.ROBUST:
            gains = n_sec * hit / np.maximum(counts.sum(axis=1), 1)
        elif scheme is Allocation.GREEDY:
            u = np.concatenate(tie_blocks) if tie_blocks else np.empty(0)
            top = counts.max(axis=1) if len(pb) else np.empty(0, dtype=np.int64)
            ties = counts == top[:, np.newaxis]
            n_ties = ties.sum(axis=1)
            pick_rank = np.minimum((u * n_ties).astype(np.int64), n_ties - 1)
            rank_of_k = np.cumsum(ties, axis=1)[rows, k] - 1
            chosen = ties[rows, k] & (rank_of_k == pick_rank)
            gains = np.where(chosen, float(n_sec), 0.0)
        else:
            raise ConfigError(f"unknown allocation scheme {scheme!r}")
        contrib = np.where(occupied == 0, 1.0, gains) * atten
    powers = np.bincount(t_pb, weights=contrib, minlength=n_trials)
    return params.pb_power * params.attenuation * powers


def _run_chunk(
    params: ScenarioParams, config: SimConfig, start: int, stop: int
) -> np.ndarray:
    if config.window_radius == AUTO_WINDOW:
        window = _exact_zone_radius(params)
        tail = _tail_mean(params, window)
    else:
        window = float(config.window_radius)
        tail = 0.0
    out = np.empty(stop - start, dtype=np.float64)
    step = _batch_size(params, window)
    for lo in range(start, stop, step):
        hi = min(lo + step, stop)
        out[lo - start : hi - start] = _batch_powers(
            params, config.allocation, config.master_seed, lo, hi, window
        )
    return out + tail


def _default_thresholds(samples: np.ndarray) -> np.ndarray:
    positive = samples[samples > 0]
    if len(positive) == 0:
        return np.array([0.0])
    lo = float(positive.min())
    hi = float(samples.max())
    if not hi > lo:
        return np.array([lo])
    return np.geomspace(lo, hi, 50)


def run_trials(
    params: ScenarioParams, config: SimConfig, workers: int = 1
) -> TrialSummary:
    """Simulate config.trials independent networks and aggregate.

    Output is a pure function of (params, config); workers only split the
    trial range across processes and results merge by trial index.
    """
    validate(params)
    _check_config(params, config)
    n = config.trials
    if workers is None or workers < 1:
        workers = 1
    workers = min(workers, n)
    if workers == 1:
        samples = _run_chunk(params, config, 0, n)
    else:
        bounds = np.linspace(0, n, workers + 1).astype(int)
        parts: list[np.ndarray | None] = [None] * workers
        with concurrent.futures.ProcessPoolExecutor(max_workers=workers) as pool:
            futures = {
                pool.submit(_run_chunk, params, config, int(bounds[w]), int(bounds[w + 1])): w
                for w in range(workers)
                if bounds[w] < bounds[w + 1]
            }
            for fut in concurrent.futures.as_completed(futures):
                parts[futures[fut]] = fut.result()
        samples = np.concatenate([p for p in parts if p is not None])
    mean = float(np.mean(samples))
    variance = float(np.var(samples, ddof=1)) if n > 1 else 0.0
    ci = 1.96 * math.sqrt(variance / n) if n > 1 else 0.0
    ccdf = empirical_ccdf(samples, _default_thresholds(samples))
    return TrialSummary(
        samples=samples,
        mean=mean,
        variance=variance,
        mean_ci95=ci,
        ccdf=tuple(ccdf),
    )


def empirical_ccdf(samples, thresholds) -> list[tuple[float, float]]:
    """Fraction of samples at or above each threshold."""
    samples = np.asarray(samples, dtype=np.float64)
    if samples.size == 0:
        raise ValueError("empirical_ccdf needs at least one sample")
    ordered = np.sort(samples)
    out = []
    for t in np.asarray(thresholds, dtype=np.float64).ravel():
        idx = np.searchsorted(ordered, t, side="left")
        out.append((float(t), float((len(ordered) - idx) / len(ordered))))
    return out


def samples_to_csv(summary: TrialSummary, path) -> None:
    """Write per-trial powers as CSV with columns trial_index, power_w.

    Floats are rendered with repr (shortest round-trip), so identical runs
    produce byte-identical files.
    """
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write("trial_index,power_w\n")
        for i, value in enumerate(summary.samples):
            fh.write(f"{i},{float(value)!r}\n")


def summary_to_json(
    summary: TrialSummary, params: ScenarioParams, config: SimConfig
) -> str:
    """Structured run report: statistics, CCDF table, config echo."""
    window = (
        AUTO_WINDOW
        if config.window_radius == AUTO_WINDOW
        else float(config.window_radius)
    )
    doc = {
        "mean_w": summary.mean,
        "variance_w2": summary.variance,
        "mean_ci95_w": summary.mean_ci95,
        "trials": config.trials,
        "master_seed": config.master_seed,
        "allocation": config.allocation.value,
        "window_radius": window,
        "tail_epsilon": config.tail_epsilon,
        "params": params_to_mapping(params),
        "ccdf": [[t, p] for t, p in summary.ccdf],
    }
    return json.dumps(doc, sort_keys=True, indent=2)
