"""Config loading, figure harness determinism, scheme comparison, CLI."""

import json

import numpy as np
import pytest

from beamharvest import benchcli
from beamharvest.benchcli import (
    ExperimentSpec,
    FigureId,
    active_prob_grid,
    compare_schemes,
    load_config,
    load_config_from_defaults,
    main,
    run_figure,
)
from beamharvest.mcsim import AUTO_WINDOW, Allocation, SimConfig
from beamharvest.scenario import ConfigError


# --- config resolution ---


def test_load_config_file(tmp_path):
    cfg = tmp_path / "run.cfg"
    cfg.write_text(
        "# scenario\n"
        "pb_power_w = 3.0\n"
        "sectors = 6\n"
        "charging_radius_m = 1.5\n"
        "\n"
        "trials = 1234\n"
        "seed = 42\n"
        "allocation = robust\n"
        "window_radius = 25.0\n"
    )
    params, config = load_config(cfg)
    assert params.pb_power == 3.0
    assert params.sectors == 6
    assert params.charging_radius == 1.5
    assert params.sn_density == 0.2  # default fills the rest
    assert config == SimConfig(
        trials=1234,
        master_seed=42,
        window_radius=25.0,
        allocation=Allocation.ROBUST,
        tail_epsilon=1e-3,
    )


def test_load_config_defaults():
    params, config = load_config_from_defaults()
    assert params.pb_power == 5.0
    assert params.sectors == 4
    assert config.trials == 20_000
    assert config.master_seed == 20260819
    assert config.window_radius == AUTO_WINDOW
    assert config.allocation is Allocation.UNIFORM


def test_overrides_win_over_file(tmp_path):
    cfg = tmp_path / "run.cfg"
    cfg.write_text("pb_power_w = 3.0\ntrials = 10\n")
    params, config = load_config(
        cfg, overrides=("pb_power_w=7.5", "trials=99", "window_radius=auto")
    )
    assert params.pb_power == 7.5
    assert config.trials == 99
    assert config.window_radius == AUTO_WINDOW


def test_load_config_errors(tmp_path):
    bad = tmp_path / "bad.cfg"
    bad.write_text("pb_power_w = 1\nwhatever = 2\n")
    with pytest.raises(ConfigError, match=r"bad\.cfg:2.*whatever"):
        load_config(bad)
    dup = tmp_path / "dup.cfg"
    dup.write_text("trials = 5\ntrials = 6\n")
    with pytest.raises(ConfigError, match="duplicate"):
        load_config(dup)
    noval = tmp_path / "noval.cfg"
    noval.write_text("pb_power_w\n")
    with pytest.raises(ConfigError, match="key=value"):
        load_config(noval)
    badval = tmp_path / "badval.cfg"
    badval.write_text("trials = soon\n")
    with pytest.raises(ConfigError, match="invalid value"):
        load_config(badval)
    with pytest.raises(ConfigError, match="allocation"):
        load_config_from_defaults(("allocation=fastest",))
    with pytest.raises(ConfigError, match="key=value"):
        load_config_from_defaults(("trials",))


def test_derive_seed_is_stable():
    a = benchcli._derive_seed(1, "fig3", 0.2, 1.0)
    assert a == benchcli._derive_seed(1, "fig3", 0.2, 1.0)
    assert a != benchcli._derive_seed(1, "fig3", 0.2, 2.0)
    assert a != benchcli._derive_seed(2, "fig3", 0.2, 1.0)
    assert 0 <= a < 1 << 64


# --- figure harness ---


def test_run_figure_fig5_outputs(tmp_path):
    spec = ExperimentSpec(
        figure_id=FigureId.FIG5, output_dir=str(tmp_path / "a"), seed=3
    )
    manifest = run_figure(spec)
    out = tmp_path / "a"
    assert (out / "manifest.json").exists()
    assert manifest["figure"] == "Fig5"
    assert manifest["seed"] == 3
    for name, digest in manifest["files"].items():
        body = (out / name).read_text()
        import hashlib

        assert hashlib.sha256(body.encode()).hexdigest() == digest
    head = (out / "fig5a_rho_star.csv").read_text().splitlines()[0]
    assert head == "sectors,rho_star_m"
    # radii grow with the sector count
    radii = [
        float(line.split(",")[1])
        for line in (out / "fig5a_rho_star.csv").read_text().splitlines()[1:]
    ]
    assert radii == sorted(radii)


def test_run_figure_is_byte_stable(tmp_path):
    for d in ("x", "y"):
        run_figure(
            ExperimentSpec(
                figure_id=FigureId.FIG5, output_dir=str(tmp_path / d), seed=9
            )
        )
    for name in (tmp_path / "x").iterdir():
        twin = tmp_path / "y" / name.name
        assert twin.read_bytes() == name.read_bytes()


def test_run_figure_worker_invariant(tmp_path):
    for d, workers in (("w1", 1), ("w2", 2)):
        run_figure(
            ExperimentSpec(
                figure_id=FigureId.FIG3,
                output_dir=str(tmp_path / d),
                seed=5,
                trials=60,
            ),
            workers=workers,
        )
    names = sorted(p.name for p in (tmp_path / "w1").iterdir())
    assert "fig3_mc_ls0.2.csv" in names
    for name in names:
        assert (tmp_path / "w1" / name).read_bytes() == (
            tmp_path / "w2" / name
        ).read_bytes()


def test_run_figure_rejects_unknown_override(tmp_path):
    spec = ExperimentSpec(
        figure_id=FigureId.FIG5,
        overrides=("sectors=six",),
        output_dir=str(tmp_path),
    )
    with pytest.raises(ConfigError):
        run_figure(spec)


def test_figure_base_tables_cover_all_ids():
    for fid in FigureId:
        values = benchcli._figure_base(fid)
        assert benchcli._params_from_values(values) is not None


# --- scheme comparison ---


def test_compare_schemes_report_shape():
    params, _ = load_config_from_defaults(
        ("charging_radius_m=1.3", "power_threshold_w=1e-4")
    )
    config = SimConfig(trials=300, master_seed=17, window_radius=12.0)
    report = compare_schemes(params, (2.0, 6.0), config)
    assert report["pb_power_w"] == [2.0, 6.0]
    assert len(report["entries"]) == 2
    entry = report["entries"][0]
    assert set(entry["schemes"]) == {"uniform", "greedy", "robust"}
    stats = entry["schemes"]["greedy"]
    assert set(stats) == {"mean_w", "mean_ci95_w", "active_prob", "active_ci95"}
    assert 0.0 <= stats["active_prob"] <= 1.0
    labels = [(v["expected_ge"], v["other"]) for v in entry["mean_ordering"]]
    assert labels == [("greedy", "robust"), ("robust", "uniform")]
    labels = [(v["expected_ge"], v["other"]) for v in entry["active_ordering"]]
    assert labels == [("robust", "uniform"), ("uniform", "greedy")]
    verdicts = {
        v["verdict"]
        for v in entry["mean_ordering"] + entry["active_ordering"]
    }
    assert verdicts <= {"confirmed", "violated", "within_ci", "tie"}


def test_compare_schemes_single_sector_ties():
    # one sector: every scheme is the same policy on the same networks
    params, _ = load_config_from_defaults(
        ("sectors=1", "power_threshold_w=1e-4")
    )
    config = SimConfig(trials=200, master_seed=4, window_radius=10.0)
    report = compare_schemes(params, (5.0,), config)
    entry = report["entries"][0]
    for verdict in entry["mean_ordering"] + entry["active_ordering"]:
        assert verdict["verdict"] == "tie"
        assert verdict["delta"] == 0.0


def test_active_prob_grid_rows():
    params, _ = load_config_from_defaults(("power_threshold_w=1e-4",))
    config = SimConfig(trials=150, master_seed=6, window_radius=10.0)
    rows = active_prob_grid(params, (0.5, 1.0), 1e-4, config)
    assert [r[0] for r in rows] == [0.5, 1.0]
    for _, frac, ci in rows:
        assert 0.0 <= frac <= 1.0
        assert ci >= 0.0
    with pytest.raises(ValueError, match="threshold"):
        active_prob_grid(params, (1.0,), 0.0, config)


# --- command line ---


def test_cli_analytic(capsys):
    assert main(["analytic", "--set", "power_threshold_w=1e-4"]) == 0
    doc = json.loads(capsys.readouterr().out)
    assert doc["mean_power_w"] > doc["mean_power_omni_w"]
    assert 0.0 <= doc["active_prob"] <= 1.0
    assert doc["params"]["sectors"] == 4


def test_cli_simulate_stdout(capsys):
    code = main(
        ["simulate", "--trials", "50", "--seed", "3", "--set", "window_radius=8"]
    )
    assert code == 0
    doc = json.loads(capsys.readouterr().out)
    assert doc["trials"] == 50
    assert doc["master_seed"] == 3
    assert doc["mean_w"] > 0.0


def test_cli_simulate_out_dir(tmp_path, capsys):
    out = tmp_path / "runs"
    code = main(
        [
            "simulate", "--trials", "20", "--seed", "1",
            "--set", "window_radius=8", "--out", str(out),
        ]
    )
    assert code == 0
    assert (out / "samples.csv").read_text().startswith("trial_index,power_w")
    doc = json.loads((out / "summary.json").read_text())
    assert doc["trials"] == 20


def test_cli_simulate_allocation_flag(capsys):
    code = main(
        [
            "simulate", "--trials", "30", "--seed", "2", "--allocation", "robust",
            "--set", "window_radius=8",
        ]
    )
    assert code == 0
    assert json.loads(capsys.readouterr().out)["allocation"] == "robust"


def test_cli_optimize_mean(capsys):
    assert main(["optimize-mean", "--set", "pb_power_w=10"]) == 0
    doc = json.loads(capsys.readouterr().out)
    assert doc["case"] == "LowDensity"
    assert doc["rho_star_m"] == pytest.approx(1.3283482424554336, rel=1e-9)
    assert doc["derivative_residual"] <= 1e-8


def test_cli_optimize_active(capsys):
    assert main(["optimize-active", "--threshold", "1e-4"]) == 0
    doc = json.loads(capsys.readouterr().out)
    assert doc["case"] in {"Case1", "Case2", "Case3Boundary"}
    assert doc["rho_star_m"] > 0


def test_cli_optimize_active_needs_threshold(capsys):
    # default config carries a threshold; zeroing it must be rejected
    assert main(["optimize-active", "--set", "power_threshold_w=0"]) == 2
    assert "threshold" in capsys.readouterr().err


def test_cli_figure_unknown_id(capsys):
    assert main(["figure", "fig99"]) == 2
    assert "unknown figure" in capsys.readouterr().err


def test_cli_figure_fig5(tmp_path, capsys):
    out = tmp_path / "f5"
    assert main(["figure", "fig5", "--out", str(out), "--seed", "2"]) == 0
    doc = json.loads(capsys.readouterr().out)
    assert doc["figure"] == "Fig5"
    assert (out / "manifest.json").exists()


def test_cli_missing_config_file(capsys):
    assert main(["analytic", "--config", "/nonexistent/place.cfg"]) == 2
    assert "missing file" in capsys.readouterr().err


def test_cli_bad_config_key(tmp_path, capsys):
    cfg = tmp_path / "b.cfg"
    cfg.write_text("nope = 1\n")
    assert main(["analytic", "--config", str(cfg)]) == 2
    assert "config error" in capsys.readouterr().err


def test_cli_bad_scenario_value(capsys):
    assert main(["analytic", "--set", "path_loss_exp=1.5"]) == 1
    assert "invalid scenario" in capsys.readouterr().err


def test_cli_validate(capsys):
    assert main(["validate"]) == 0
    out = capsys.readouterr().out
    assert "PASS" in out
    assert "FAIL" not in out
