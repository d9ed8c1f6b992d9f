"""Monte Carlo engine: reproducibility contract, geometry, allocation rules."""

import json
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from beamharvest import analytic, mcsim
from beamharvest.mcsim import (
    AUTO_WINDOW,
    Allocation,
    NetworkSample,
    SimConfig,
    auto_window_radius,
    draw_network,
    empirical_ccdf,
    pb_beam_state,
    received_power_origin,
    run_trials,
    samples_to_csv,
    sector_of,
    summary_to_json,
    trial_stream,
)
from beamharvest.scenario import ConfigError, ScenarioParams

SIGMA = 6.332573977646111e-05


def params_for(**overrides):
    base = dict(
        pb_power=10.0,
        pb_density=0.1,
        sn_density=0.2,
        sectors=4,
        charging_radius=1.0,
        path_loss_exp=3.0,
        wavelength=0.1,
    )
    base.update(overrides)
    return ScenarioParams(**base)


def one_beacon_sample(pb_xy, orientation, extra_sensors=()):
    """Hand-built realization: one beacon, origin sensor, optional extras."""
    sensors = np.vstack([np.zeros((1, 2))] + [np.array([s]) for s in extra_sensors])
    return NetworkSample(
        pb_points=np.array([pb_xy], dtype=np.float64),
        sn_points=sensors.astype(np.float64),
        pb_orientations=np.array([orientation], dtype=np.float64),
        pb_window_radius=50.0,
        sn_window_radius=55.0,
    )


# --- streams ---


def test_trial_stream_is_reproducible_and_keyed():
    a = trial_stream(7, 3).random(5)
    b = trial_stream(7, 3).random(5)
    assert np.array_equal(a, b)
    assert not np.array_equal(a, trial_stream(7, 4).random(5))
    assert not np.array_equal(a, trial_stream(8, 3).random(5))
    assert not np.array_equal(a, trial_stream(7, 3, substream=1).random(5))


# --- geometry ---


def test_sector_of_quadrants():
    pb = (0.0, 0.0)
    assert sector_of(pb, (1.0, 0.0), 0.0, 4) == 0
    assert sector_of(pb, (0.0, 1.0), 0.0, 4) == 1
    assert sector_of(pb, (-1.0, 0.0), 0.0, 4) == 2
    assert sector_of(pb, (1.0, -1e-12), 0.0, 4) == 3
    # rotating the beacon rotates the partition
    assert sector_of(pb, (0.0, 1.0), math.pi / 2.0, 4) == 0
    assert sector_of(pb, (1.0, 0.0), math.pi / 2.0, 4) == 3
    assert sector_of(pb, (1.0, 1.0), 0.0, 1) == 0


def test_sector_of_rejects_coincident_points():
    with pytest.raises(ValueError):
        sector_of((2.0, 3.0), (2.0, 3.0), 0.0, 4)


def test_sector_of_matches_vectorized_form():
    rng = np.random.default_rng(5)
    pb = rng.normal(size=(40, 2))
    target = rng.normal(size=(40, 2))
    orient = rng.random(40) * (2.0 * math.pi / 6)
    got = mcsim._sectors_toward(
        pb, target[:, 0] - pb[:, 0], target[:, 1] - pb[:, 1], orient, 6
    )
    want = [sector_of(pb[i], target[i], orient[i], 6) for i in range(40)]
    assert got.tolist() == want


def test_draw_network_shapes():
    pr = params_for(charging_radius=2.0)
    sample = draw_network(pr, 10.0, trial_stream(1, 0))
    assert sample.pb_points.shape[1] == 2
    assert sample.sn_window_radius == 12.0
    # origin sensor is always row zero
    assert np.array_equal(sample.sn_points[0], np.zeros(2))
    assert np.hypot(sample.pb_points[:, 0], sample.pb_points[:, 1]).max() <= 10.0
    assert (sample.pb_orientations >= 0).all()
    assert (sample.pb_orientations < 2.0 * math.pi / pr.sectors).all()


# --- allocation rules ---


def test_pb_beam_state_idle_and_forced():
    assert np.array_equal(pb_beam_state([0, 0, 0, 0], Allocation.UNIFORM, 4), np.ones(4))
    assert np.array_equal(
        pb_beam_state([3, 0, 2, 0], Allocation.FORCED_OMNI, 4), np.ones(4)
    )


def test_pb_beam_state_uniform_and_robust():
    np.testing.assert_allclose(
        pb_beam_state([2, 0, 1, 0], Allocation.UNIFORM, 4), [2.0, 0.0, 2.0, 0.0]
    )
    np.testing.assert_allclose(
        pb_beam_state([2, 0, 1, 0], Allocation.ROBUST, 4),
        [8.0 / 3.0, 0.0, 4.0 / 3.0, 0.0],
    )


def test_pb_beam_state_greedy():
    np.testing.assert_allclose(
        pb_beam_state([3, 1, 0, 0], Allocation.GREEDY, 4), [4.0, 0.0, 0.0, 0.0]
    )
    with pytest.raises(ValueError, match="tie-break"):
        pb_beam_state([1, 0, 1, 0], Allocation.GREEDY, 4)
    rng = np.random.default_rng(0)
    picks = set()
    for _ in range(40):
        g = pb_beam_state([1, 0, 1, 0], Allocation.GREEDY, 4, rng)
        assert g.sum() == 4.0
        picks.add(int(np.argmax(g)))
    assert picks == {0, 2}


def test_pb_beam_state_input_guards():
    with pytest.raises(ValueError):
        pb_beam_state([1, 2, 3], Allocation.UNIFORM, 4)
    with pytest.raises(ValueError):
        pb_beam_state([1, -1, 0, 0], Allocation.UNIFORM, 4)


@settings(max_examples=150, deadline=None)
@given(
    counts=st.lists(st.integers(0, 6), min_size=5, max_size=5),
    scheme=st.sampled_from(
        [Allocation.UNIFORM, Allocation.ROBUST, Allocation.GREEDY, Allocation.FORCED_OMNI]
    ),
)
def test_beam_gains_conserve_power(counts, scheme):
    gains = pb_beam_state(counts, scheme, 5, np.random.default_rng(3))
    assert gains.sum() == pytest.approx(5.0, rel=1e-12)
    assert (gains >= 0).all()


# --- single-realization power ---


def test_power_single_near_beacon():
    pr = params_for(charging_radius=2.0)
    sample = one_beacon_sample((0.5, 0.0), 0.0)
    # only the origin sensor: the beacon spends all four sectors' power on it
    want = 10.0 * SIGMA * 4.0
    assert received_power_origin(sample, pr) == pytest.approx(want, rel=1e-12)
    far = one_beacon_sample((1.5, 0.0), 0.0)
    assert received_power_origin(far, pr) == pytest.approx(
        want * 1.5**-3.0, rel=1e-12
    )


def test_power_far_beacon_idles_to_omni():
    pr = params_for(charging_radius=2.0)
    sample = one_beacon_sample((3.0, 0.0), 0.0)
    # origin is outside the charging disk and no other sensor exists
    want = 10.0 * SIGMA * 1.0 * 3.0**-3.0
    assert received_power_origin(sample, pr) == pytest.approx(want, rel=1e-12)
    assert received_power_origin(
        sample, pr, Allocation.FORCED_OMNI
    ) == pytest.approx(want, rel=1e-12)


def test_power_robust_splits_by_counts():
    pr = params_for(charging_radius=2.0)
    # second sensor sits in a different sector of the same beacon
    sample = one_beacon_sample((0.5, 0.0), 0.0, extra_sensors=[(1.3, 0.0)])
    got = received_power_origin(sample, pr, Allocation.ROBUST)
    assert got == pytest.approx(10.0 * SIGMA * 2.0, rel=1e-12)
    greedy = [
        received_power_origin(
            sample, pr, Allocation.GREEDY, trial_stream(1, i, substream=2)
        )
        for i in range(30)
    ]
    values = sorted(set(round(v, 18) for v in greedy))
    assert values == pytest.approx([0.0, 10.0 * SIGMA * 4.0], rel=1e-12)


def test_power_empty_network():
    sample = NetworkSample(
        pb_points=np.empty((0, 2)),
        sn_points=np.zeros((1, 2)),
        pb_orientations=np.empty(0),
        pb_window_radius=5.0,
        sn_window_radius=6.0,
    )
    assert received_power_origin(sample, params_for()) == 0.0


# --- engine consistency ---


def test_batched_engine_matches_composed_ops():
    pr = params_for(charging_radius=2.0, sn_density=0.4)
    window = 8.0
    seed = 99
    for scheme in (Allocation.UNIFORM, Allocation.ROBUST, Allocation.GREEDY):
        batched = mcsim._batch_powers(pr, scheme, seed, 0, 12, window)
        for i in range(12):
            sample = draw_network(pr, window, trial_stream(seed, i))
            rng = trial_stream(seed, i, substream=mcsim._ALLOC_SUBSTREAM[scheme])
            want = received_power_origin(sample, pr, scheme, rng)
            assert batched[i] == pytest.approx(want, rel=1e-13)


def test_batch_grouping_does_not_change_results():
    pr = params_for()
    whole = mcsim._batch_powers(pr, Allocation.UNIFORM, 4, 0, 9, 10.0)
    pieces = np.concatenate(
        [mcsim._batch_powers(pr, Allocation.UNIFORM, 4, a, b, 10.0)
         for a, b in ((0, 2), (2, 3), (3, 9))]
    )
    assert np.array_equal(whole, pieces)


def test_run_trials_deterministic_and_worker_invariant():
    pr = params_for()
    config = SimConfig(trials=60, master_seed=12, window_radius=8.0)
    first = run_trials(pr, config)
    again = run_trials(pr, config)
    assert np.array_equal(first.samples, again.samples)
    spread = run_trials(pr, config, workers=3)
    assert np.array_equal(first.samples, spread.samples)
    assert first.mean == pytest.approx(np.mean(first.samples), rel=1e-15)
    assert first.variance == pytest.approx(
        np.var(first.samples, ddof=1), rel=1e-12
    )
    assert first.mean_ci95 == pytest.approx(
        1.96 * math.sqrt(first.variance / 60.0), rel=1e-12
    )


def test_auto_window_adds_exact_tail_constant():
    pr = params_for()
    zone = mcsim._exact_zone_radius(pr)
    tail = mcsim._tail_mean(pr, zone)
    auto = run_trials(pr, SimConfig(trials=40, master_seed=5))
    exact = run_trials(pr, SimConfig(trials=40, master_seed=5, window_radius=zone))
    np.testing.assert_allclose(auto.samples - exact.samples, tail, rtol=1e-12)
    assert tail > 0.0


def test_single_sector_uniform_equals_forced_omni():
    pr = params_for(sectors=1)
    a = run_trials(pr, SimConfig(trials=50, master_seed=2, window_radius=9.0))
    b = run_trials(
        pr,
        SimConfig(
            trials=50, master_seed=2, window_radius=9.0,
            allocation=Allocation.FORCED_OMNI,
        ),
    )
    assert np.array_equal(a.samples, b.samples)


def test_lone_origin_sensor_makes_all_schemes_agree():
    # with (almost surely) no other sensors, every scheme pours all power
    # at the origin, so the paired-network seeding gives identical samples
    pr = params_for(sn_density=1e-12, charging_radius=2.0)
    runs = [
        run_trials(
            pr,
            SimConfig(trials=40, master_seed=8, window_radius=10.0, allocation=scheme),
        ).samples
        for scheme in (Allocation.UNIFORM, Allocation.ROBUST, Allocation.GREEDY)
    ]
    assert np.array_equal(runs[0], runs[1])
    assert np.array_equal(runs[0], runs[2])


def test_auto_mean_tracks_closed_form():
    pr = params_for()
    got = run_trials(pr, SimConfig(trials=2000, master_seed=11))
    want = analytic.mean_power(pr)
    assert abs(got.mean - want) <= 3.0 * math.sqrt(got.variance / 2000.0)


# --- window policy ---


def test_auto_window_radius_formula():
    pr = params_for(path_loss_exp=3.0, charging_radius=2.0)
    assert auto_window_radius(pr) == pytest.approx(2000.0 / 3.0, rel=1e-12)
    assert auto_window_radius(pr, 0.1) == pytest.approx(20.0 / 3.0, rel=1e-12)
    steep = params_for(path_loss_exp=4.0)
    assert auto_window_radius(steep, 1e-3) == pytest.approx(
        math.sqrt(500.0), rel=1e-12
    )
    assert auto_window_radius(params_for(charging_radius=19.0), 0.5) == 19.0
    with pytest.raises(ValueError):
        auto_window_radius(pr, 0.0)


def test_exact_zone_radius_bounds():
    assert mcsim._exact_zone_radius(params_for()) >= 20.0
    assert mcsim._exact_zone_radius(params_for(charging_radius=90.0)) == 270.0
    assert mcsim._exact_zone_radius(params_for(path_loss_exp=2.05)) <= 300.0


def test_config_guards():
    pr = params_for(charging_radius=3.0)
    with pytest.raises(ConfigError, match="smaller than the charging radius"):
        run_trials(pr, SimConfig(trials=5, master_seed=1, window_radius=2.0))
    with pytest.raises(ConfigError, match="trials"):
        run_trials(pr, SimConfig(trials=0, master_seed=1))
    with pytest.raises(ConfigError, match="master_seed"):
        run_trials(pr, SimConfig(trials=5, master_seed=-3))
    with pytest.raises(ConfigError, match="tail_epsilon"):
        run_trials(pr, SimConfig(trials=5, master_seed=1, tail_epsilon=0.0))
    with pytest.raises(ConfigError, match="window_radius"):
        run_trials(pr, SimConfig(trials=5, master_seed=1, window_radius=-1.0))


# --- aggregation and output formats ---


def test_empirical_ccdf_counts_at_or_above():
    table = empirical_ccdf([1.0, 2.0, 3.0, 4.0], [0.0, 2.0, 2.5, 4.0, 5.0])
    assert table == [(0.0, 1.0), (2.0, 0.75), (2.5, 0.5), (4.0, 0.25), (5.0, 0.0)]
    with pytest.raises(ValueError):
        empirical_ccdf([], [1.0])


def test_samples_csv_format(tmp_path):
    pr = params_for()
    summary = run_trials(pr, SimConfig(trials=5, master_seed=3, window_radius=6.0))
    path = tmp_path / "samples.csv"
    samples_to_csv(summary, path)
    lines = path.read_text().splitlines()
    assert lines[0] == "trial_index,power_w"
    assert len(lines) == 6
    idx, val = lines[3].split(",")
    assert idx == "2"
    assert float(val) == summary.samples[2]


def test_summary_json_round_trip():
    pr = params_for()
    config = SimConfig(trials=8, master_seed=21)
    summary = run_trials(pr, config)
    doc = json.loads(summary_to_json(summary, pr, config))
    assert doc["trials"] == 8
    assert doc["master_seed"] == 21
    assert doc["allocation"] == "uniform"
    assert doc["window_radius"] == AUTO_WINDOW
    assert doc["mean_w"] == summary.mean
    assert doc["params"]["sectors"] == 4
    assert len(doc["ccdf"]) >= 1
