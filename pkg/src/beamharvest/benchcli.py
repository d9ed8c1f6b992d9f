"""Experiment harness and command line.

Reproduces the reference experiment set (Fig2 through Fig8) as CSV files
plus a JSON manifest, runs one-off analytic or Monte Carlo evaluations, and
compares power-allocation schemes with paired confidence intervals.

Determinism contract: a figure run is a pure function of (figure id,
overrides, seed, trials). Per-point seeds are derived from the master seed
by hashing the curve name and point index, so curves are independent yet
reproducible, and worker count never changes any emitted byte.
"""

from __future__ import annotations

import argparse
import dataclasses
import enum
import hashlib
import json
import math
import sys
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from . import __version__, analytic, mcsim, radopt, scenario
from .mcsim import Allocation, SimConfig
from .scenario import ConfigError, ParameterError, ScenarioParams

__all__ = [
    "FigureId",
    "ExperimentSpec",
    "run_figure",
    "compare_schemes",
    "active_prob_grid",
    "load_config",
    "main",
]

#: Default wavelength: 0.1 m, i.e. sigma = (0.1 / 4 pi)^2.
_DEFAULT_WAVELENGTH = 0.1

_CCDF_TRIALS = 50_000
_CURVE_TRIALS = 20_000

#: Config keys consumed by SimConfig rather than ScenarioParams.
SIM_KEYS = ("trials", "seed", "window_radius", "allocation", "tail_epsilon")


class FigureId(enum.Enum):
    """Reference experiments, named for the figures they reproduce."""

    FIG2 = "Fig2"
    FIG3 = "Fig3"
    FIG4 = "Fig4"
    FIG5 = "Fig5"
    FIG6 = "Fig6"
    FIG7 = "Fig7"
    FIG8 = "Fig8"


@dataclass(frozen=True)
class ExperimentSpec:
    """One figure run: id, key=value overrides, output dir, seed, trials.

    trials=0 keeps each figure's default budget (50k for CCDF figures,
    20k per Monte Carlo curve point).
    """

    figure_id: FigureId
    overrides: tuple = ()
    output_dir: str = "."
    seed: int = 20260819
    trials: int = 0


def _sigma() -> float:
    return scenario.sigma_from_wavelength(_DEFAULT_WAVELENGTH)


def _figure_base(figure_id: FigureId) -> dict:
    """Scenario defaults mirroring each reference figure's caption."""
    common = {
        "pb_density_per_m2": 0.1,
        "sn_density_per_m2": 0.2,
        "sectors": 4,
        "path_loss_exp": 3.0,
        "wavelength_m": _DEFAULT_WAVELENGTH,
    }
    per_figure = {
        FigureId.FIG2: {"pb_power_w": 5.0, "charging_radius_m": 2.0},
        FigureId.FIG3: {"pb_power_w": 10.0, "charging_radius_m": 1.0},
        FigureId.FIG4: {
            "pb_power_w": 1.0,
            "charging_radius_m": 1.0,
            "power_threshold_w": 1e-4,
        },
        FigureId.FIG5: {"pb_power_w": 2.0, "charging_radius_m": 1.0},
        FigureId.FIG6: {"pb_power_w": 2.0, "charging_radius_m": 1.0},
        FigureId.FIG7: {
            "pb_power_w": 2.0,
            "charging_radius_m": 1.0,
            "power_threshold_w": 1e-4,
        },
        FigureId.FIG8: {
            "pb_power_w": 2.0,
            "charging_radius_m": 1.0,
            "power_threshold_w": 1e-4,
        },
    }
    return {**common, **per_figure[figure_id]}


def _derive_seed(master_seed: int, *parts) -> int:
    """Stable per-point master seed: avoids stream overlap between curve
    points while keeping every byte reproducible from the experiment seed."""
    text = ":".join([str(master_seed)] + [repr(p) for p in parts])
    digest = hashlib.sha256(text.encode()).digest()
    return int.from_bytes(digest[:8], "big")


def _apply_overrides(base: dict, overrides) -> dict:
    values = dict(base)
    for item in overrides:
        if "=" not in item:
            raise ConfigError(f"override {item!r} is not key=value")
        key, _, val = item.partition("=")
        key = key.strip()
        val = val.strip()
        if key in scenario.CONFIG_KEYS:
            try:
                values[key] = int(val) if key == "sectors" else float(val)
            except ValueError:
                raise ConfigError(f"invalid value {val!r} for {key!r}") from None
        else:
            raise ConfigError(f"unknown key {key!r}")
    return values


def _params_from_values(values: dict) -> ScenarioParams:
    return scenario.validate(scenario.params_from_mapping(values))


class _CsvSink:
    """Collects named CSV bodies, then writes them with content hashes."""

    def __init__(self) -> None:
        self.files: dict[str, str] = {}

    def add(self, name: str, header: str, rows) -> None:
        lines = [header]
        for row in rows:
            lines.append(",".join(repr(float(v)) for v in row))
        self.files[name] = "\n".join(lines) + "\n"

    def write(self, out_dir: Path) -> dict:
        out_dir.mkdir(parents=True, exist_ok=True)
        listing = {}
        for name in sorted(self.files):
            body = self.files[name]
            path = out_dir / name
            path.write_text(body)
            listing[name] = hashlib.sha256(body.encode()).hexdigest()
        return listing


def _progress(msg: str) -> None:
    print(msg, file=sys.stderr, flush=True)


def _mc_summary(params, trials, seed, allocation=Allocation.UNIFORM, workers=1):
    cfg = SimConfig(trials=trials, master_seed=seed, allocation=allocation)
    return mcsim.run_trials(params, cfg, workers=workers)


def _fig2_curves(values, seed, trials, sink, workers):
    params = _params_from_values(values)
    thresholds = np.linspace(1e-5, 1e-3, 50)
    gamma = [analytic.gamma_ccdf(t, params) for t in thresholds]
    sink.add(
        "fig2_gamma_ccdf.csv",
        "threshold_w,ccdf",
        zip(thresholds, gamma),
    )
    n = trials or _CCDF_TRIALS
    _progress(f"fig2: simulating {n} trials")
    summary = _mc_summary(params, n, _derive_seed(seed, "fig2"), workers=workers)
    emp = mcsim.empirical_ccdf(summary.samples, thresholds)
    rows = [
        (t, p, 1.96 * math.sqrt(max(p * (1 - p), 0.0) / n)) for t, p in emp
    ]
    sink.add("fig2_empirical_ccdf.csv", "threshold_w,ccdf,ci95", rows)


def _fig3_curves(values, seed, trials, sink, workers):
    rho_grid = np.linspace(0.1, 4.0, 40)
    mc_rhos = (0.5, 1.0, 2.0, 4.0)
    n = trials or _CURVE_TRIALS
    omni = None
    for ls in (0.2, 0.8, 1.6):
        params = _params_from_values({**values, "sn_density_per_m2": ls})
        rows = []
        for rho in rho_grid:
            p = params.with_(charging_radius=float(rho))
            rows.append((rho, analytic.mean_power(p)))
        sink.add(f"fig3_mean_ls{ls}.csv", "rho_m,mean_power_w", rows)
        omni = analytic.mean_power_omni(params)
        mc_rows = []
        for i, rho in enumerate(mc_rhos):
            _progress(f"fig3 ls={ls}: mc point {i + 1}/{len(mc_rhos)}")
            p = params.with_(charging_radius=rho)
            s = _mc_summary(p, n, _derive_seed(seed, "fig3", ls, rho), workers=workers)
            mc_rows.append((rho, s.mean, s.mean_ci95))
        sink.add(
            f"fig3_mc_ls{ls}.csv", "rho_m,mean_power_w,ci95_w", mc_rows
        )
    sink.add(
        "fig3_mean_omni.csv",
        "rho_m,mean_power_w",
        [(r, omni) for r in rho_grid],
    )


def _fig4_curves(values, seed, trials, sink, workers):
    rho_grid = np.linspace(0.25, 5.0, 40)
    mc_rhos = (0.5, 1.0, 2.0, 4.0)
    n = trials or _CURVE_TRIALS
    threshold = values["power_threshold_w"]
    for pp in (1.0, 3.0, 10.0):
        params = _params_from_values({**values, "pb_power_w": pp})
        rows = [
            (rho, analytic.gamma_ccdf(threshold, params.with_(charging_radius=float(rho))))
            for rho in rho_grid
        ]
        sink.add(f"fig4_gamma_pp{pp}.csv", "rho_m,active_prob", rows)
        omni = analytic.gamma_ccdf_omni(threshold, params)
        sink.add(
            f"fig4_omni_pp{pp}.csv",
            "rho_m,active_prob",
            [(r, omni) for r in rho_grid],
        )
        mc_rows = []
        for i, rho in enumerate(mc_rhos):
            _progress(f"fig4 pp={pp}: mc point {i + 1}/{len(mc_rhos)}")
            p = params.with_(charging_radius=rho)
            s = _mc_summary(p, n, _derive_seed(seed, "fig4", pp, rho), workers=workers)
            frac = float(np.mean(s.samples >= threshold))
            ci = 1.96 * math.sqrt(max(frac * (1 - frac), 0.0) / n)
            mc_rows.append((rho, frac, ci))
        sink.add(f"fig4_mc_pp{pp}.csv", "rho_m,active_prob,ci95", mc_rows)


def _fig5_curves(values, seed, trials, sink, workers):
    sectors = range(2, 9)
    rows_a = []
    for n_sec in sectors:
        params = _params_from_values({**values, "sectors": n_sec})
        opt = radopt.optimal_radius_mean(params)
        rows_a.append((n_sec, opt.radius))
    sink.add("fig5a_rho_star.csv", "sectors,rho_star_m", rows_a)
    for pp in (2.0, 4.0, 6.0, 8.0):
        rows_b = []
        for n_sec in sectors:
            params = _params_from_values(
                {**values, "sectors": n_sec, "pb_power_w": pp}
            )
            opt = radopt.optimal_radius_mean(params)
            rows_b.append((n_sec, opt.objective))
        sink.add(f"fig5b_estar_pp{pp}.csv", "sectors,mean_power_w", rows_b)


def _fig6_curves(values, seed, trials, sink, workers):
    densities = (0.1, 0.2, 0.4, 0.8, 1.2, 1.6)
    rows_a = []
    for ls in densities:
        params = _params_from_values({**values, "sn_density_per_m2": ls})
        opt = radopt.optimal_radius_mean(params)
        rows_a.append((ls, opt.radius))
    sink.add("fig6a_rho_star.csv", "sn_density_per_m2,rho_star_m", rows_a)
    for pp in (2.0, 4.0, 6.0, 8.0):
        rows_b = []
        for ls in densities:
            params = _params_from_values(
                {**values, "sn_density_per_m2": ls, "pb_power_w": pp}
            )
            opt = radopt.optimal_radius_mean(params)
            rows_b.append((ls, opt.objective))
        sink.add(f"fig6b_estar_pp{pp}.csv", "sn_density_per_m2,mean_power_w", rows_b)


def _fig7_curves(values, seed, trials, sink, workers):
    threshold = values["power_threshold_w"]
    for pp in (2.0, 8.0):
        rows = []
        for n_sec in range(2, 9):
            params = _params_from_values(
                {**values, "sectors": n_sec, "pb_power_w": pp}
            )
            opt = radopt.optimal_radius_active(params, threshold)
            rows.append((n_sec, opt.objective))
        sink.add(f"fig7a_fstar_pp{pp}.csv", "sectors,active_prob", rows)
        rows = []
        for ls in (0.1, 0.2, 0.4, 0.8, 1.2, 1.6):
            params = _params_from_values(
                {**values, "sn_density_per_m2": ls, "pb_power_w": pp}
            )
            opt = radopt.optimal_radius_active(params, threshold)
            rows.append((ls, opt.objective))
        sink.add(f"fig7b_fstar_pp{pp}.csv", "sn_density_per_m2,active_prob", rows)


def _fig8_curves(values, seed, trials, sink, workers):
    powers = (2.0, 4.0, 6.0, 8.0, 10.0)
    threshold = values["power_threshold_w"]
    n = trials or _CURVE_TRIALS
    schemes = (Allocation.GREEDY, Allocation.ROBUST, Allocation.UNIFORM)
    mean_rows = {s: [] for s in schemes}
    active_rows = {s: [] for s in schemes}
    rho_grid = (0.5, 1.0, 1.5, 2.0, 2.5, 3.0)
    for pp in powers:
        params = _params_from_values({**values, "pb_power_w": pp})
        rho_star = radopt.optimal_radius_mean(params).radius
        at_star = params.with_(charging_radius=rho_star)
        for s in schemes:
            _progress(f"fig8 pp={pp}: mean run, {s.value}")
            summ = _mc_summary(
                at_star, n, _derive_seed(seed, "fig8", pp), allocation=s,
                workers=workers,
            )
            mean_rows[s].append((pp, summ.mean, summ.mean_ci95))
            _progress(f"fig8 pp={pp}: active grid, {s.value}")
            grid = active_prob_grid(
                params, rho_grid, threshold,
                SimConfig(trials=n, master_seed=_derive_seed(seed, "fig8", pp),
                          allocation=s),
                workers=workers,
            )
            best = max(grid, key=lambda row: row[1])
            active_rows[s].append((pp, best[1], best[2]))
    for s in schemes:
        sink.add(
            f"fig8a_mean_{s.value}.csv", "pb_power_w,mean_power_w,ci95_w",
            mean_rows[s],
        )
        sink.add(
            f"fig8b_active_{s.value}.csv", "pb_power_w,active_prob,ci95",
            active_rows[s],
        )


def active_prob_grid(params, rho_values, threshold, config, workers=1):
    """Monte Carlo reach probability over a radius grid: the brute-force
    answer to "which radius maximizes the simulated active fraction".

    Returns (rho, prob, ci95) rows; every radius reuses the same master
    seed so the comparison across radii is as paired as the geometry
    allows.
    """
    if not (threshold > 0):
        raise ValueError(f"threshold must be positive, got {threshold!r}")
    rows = []
    for rho in rho_values:
        p = params.with_(charging_radius=float(rho))
        s = mcsim.run_trials(p, config, workers=workers)
        frac = float(np.mean(s.samples >= threshold))
        ci = 1.96 * math.sqrt(max(frac * (1 - frac), 0.0) / config.trials)
        rows.append((float(rho), frac, ci))
    return rows


_FIGURE_BUILDERS = {
    FigureId.FIG2: _fig2_curves,
    FigureId.FIG3: _fig3_curves,
    FigureId.FIG4: _fig4_curves,
    FigureId.FIG5: _fig5_curves,
    FigureId.FIG6: _fig6_curves,
    FigureId.FIG7: _fig7_curves,
    FigureId.FIG8: _fig8_curves,
}


def run_figure(spec: ExperimentSpec, workers: int = 1) -> dict:
    """Produce one figure's CSV set plus manifest.json in spec.output_dir.

    Returns the manifest mapping. Reruns with an identical spec produce
    byte-identical files regardless of worker count.
    """
    values = _apply_overrides(_figure_base(spec.figure_id), spec.overrides)
    _params_from_values(values)  # fail fast on bad overrides
    sink = _CsvSink()
    _FIGURE_BUILDERS[spec.figure_id](
        values, spec.seed, spec.trials, sink, workers
    )
    out_dir = Path(spec.output_dir)
    listing = sink.write(out_dir)
    inputs = {
        "figure": spec.figure_id.value,
        "values": values,
        "seed": spec.seed,
        "trials": spec.trials,
    }
    manifest = {
        "figure": spec.figure_id.value,
        "params": values,
        "seed": spec.seed,
        "trials": spec.trials
        or (_CCDF_TRIALS if spec.figure_id == FigureId.FIG2 else _CURVE_TRIALS),
        "content_hash": hashlib.sha256(
            json.dumps(inputs, sort_keys=True).encode()
        ).hexdigest(),
        "files": listing,
        "versions": {"beamharvest": __version__, "numpy": np.__version__},
    }
    (out_dir / "manifest.json").write_text(
        json.dumps(manifest, sort_keys=True, indent=2) + "\n"
    )
    return manifest


def _paired_verdict(delta: float, se: float, labels: tuple) -> dict:
    hi, lo = labels
    if se == 0.0:
        verdict = "tie" if delta == 0.0 else ("confirmed" if delta > 0 else "violated")
    elif delta > 1.96 * se:
        verdict = "confirmed"
    elif delta < -1.96 * se:
        verdict = "violated"
    else:
        verdict = "within_ci"
    return {
        "expected_ge": hi,
        "other": lo,
        "delta": delta,
        "ci95": 1.96 * se,
        "verdict": verdict,
    }


def compare_schemes(params, sweep, config, workers: int = 1) -> dict:
    """Scheme shoot-out at each transmit power in sweep.

    Networks are shared across schemes trial for trial (only the allocation
    stream differs), so pairwise differences cancel the geometry noise and
    the confidence intervals come from the per-trial deltas. The expected
    orderings checked are mean: greedy >= robust >= uniform, and active
    probability: robust >= uniform >= greedy.
    """
    threshold = params.power_threshold
    report = {"pb_power_w": list(map(float, sweep)), "entries": []}
    for pp in sweep:
        p = params.with_(pb_power=float(pp))
        samples = {}
        entry = {"pb_power_w": float(pp), "schemes": {}}
        for alloc in (Allocation.UNIFORM, Allocation.GREEDY, Allocation.ROBUST):
            cfg = SimConfig(
                trials=config.trials,
                master_seed=config.master_seed,
                window_radius=config.window_radius,
                allocation=alloc,
                tail_epsilon=config.tail_epsilon,
            )
            s = mcsim.run_trials(p, cfg, workers=workers)
            samples[alloc] = s.samples
            stats = {
                "mean_w": s.mean,
                "mean_ci95_w": s.mean_ci95,
            }
            if threshold > 0:
                frac = float(np.mean(s.samples >= threshold))
                stats["active_prob"] = frac
                stats["active_ci95"] = 1.96 * math.sqrt(
                    max(frac * (1 - frac), 0.0) / config.trials
                )
            entry["schemes"][alloc.value] = stats
        n = config.trials
        mean_pairs = (
            (Allocation.GREEDY, Allocation.ROBUST),
            (Allocation.ROBUST, Allocation.UNIFORM),
        )
        entry["mean_ordering"] = []
        for hi, lo in mean_pairs:
            d = samples[hi] - samples[lo]
            entry["mean_ordering"].append(
                _paired_verdict(
                    float(d.mean()),
                    float(d.std(ddof=1)) / math.sqrt(n),
                    (hi.value, lo.value),
                )
            )
        if threshold > 0:
            active_pairs = (
                (Allocation.ROBUST, Allocation.UNIFORM),
                (Allocation.UNIFORM, Allocation.GREEDY),
            )
            entry["active_ordering"] = []
            for hi, lo in active_pairs:
                d = (samples[hi] >= threshold).astype(float) - (
                    samples[lo] >= threshold
                ).astype(float)
                entry["active_ordering"].append(
                    _paired_verdict(
                        float(d.mean()),
                        float(d.std(ddof=1)) / math.sqrt(n),
                        (hi.value, lo.value),
                    )
                )
        report["entries"].append(entry)
    return report


def _route_key(scen_values: dict, sim_values: dict, key: str, val: str, where: str):
    """Parse one key=value pair into the scenario or simulation bucket."""
    try:
        if key in scenario.CONFIG_KEYS:
            scen_values[key] = int(val) if key == "sectors" else float(val)
        elif key in ("trials", "seed"):
            sim_values[key] = int(val)
        elif key == "window_radius":
            sim_values[key] = (
                mcsim.AUTO_WINDOW if val == mcsim.AUTO_WINDOW else float(val)
            )
        elif key == "tail_epsilon":
            sim_values[key] = float(val)
        elif key == "allocation":
            sim_values[key] = Allocation(val)
        else:
            raise ConfigError(f"{where}: unknown key {key!r}")
    except ConfigError:
        raise
    except ValueError:
        raise ConfigError(f"{where}: invalid value {val!r} for {key!r}") from None


def _build(scen_values: dict, sim_values: dict) -> tuple:
    params = scenario.validate(scenario.params_from_mapping(scen_values))
    config = SimConfig(
        trials=sim_values.get("trials", _CURVE_TRIALS),
        master_seed=sim_values.get("seed", 20260819),
        window_radius=sim_values.get("window_radius", mcsim.AUTO_WINDOW),
        allocation=sim_values.get("allocation", Allocation.UNIFORM),
        tail_epsilon=sim_values.get("tail_epsilon", 1e-3),
    )
    return params, config


def _apply_override_items(scen_values: dict, sim_values: dict, overrides):
    for item in overrides:
        if "=" not in item:
            raise ConfigError(f"override {item!r} is not key=value")
        key, _, val = item.partition("=")
        _route_key(scen_values, sim_values, key.strip(), val.strip(), "override")


def load_config(path, overrides=()) -> tuple:
    """Read a key=value config file into (ScenarioParams, SimConfig).

    Scenario keys follow the scenario module's table; simulation keys are
    trials, seed, window_radius, allocation, tail_epsilon. CLI overrides
    are applied after file values.
    """
    text = Path(path).read_text()
    scen_values: dict = {}
    sim_values: dict = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"{path}:{lineno}: expected key=value, got {raw!r}")
        key, _, val = line.partition("=")
        key = key.strip()
        if key in scen_values or key in sim_values:
            raise ConfigError(f"{path}:{lineno}: duplicate key {key!r}")
        _route_key(scen_values, sim_values, key, val.strip(), f"{path}:{lineno}")
    _apply_override_items(scen_values, sim_values, overrides)
    return _build(scen_values, sim_values)


def load_config_from_defaults(overrides=()) -> tuple:
    """Defaults-only variant of load_config for runs without a file."""
    scen_values: dict = {}
    sim_values: dict = {}
    _apply_override_items(scen_values, sim_values, overrides)
    return _build(scen_values, sim_values)


def _gather(args) -> tuple:
    """Resolve (params, config) from --config plus --set/--seed/--trials."""
    overrides = list(args.set or [])
    if args.config:
        params, config = load_config(args.config, overrides)
    else:
        params, config = load_config_from_defaults(overrides)
    if getattr(args, "seed", None) is not None:
        config = dataclasses.replace(config, master_seed=args.seed)
    if getattr(args, "trials", None) is not None:
        config = dataclasses.replace(config, trials=args.trials)
    if getattr(args, "allocation", None) is not None:
        config = dataclasses.replace(config, allocation=Allocation(args.allocation))
    return params, config


def _cmd_analytic(args) -> int:
    params, _ = _gather(args)
    doc = {
        "mean_power_w": analytic.mean_power(params),
        "variance_power_w2": analytic.variance_power(params),
        "mean_power_omni_w": analytic.mean_power_omni(params),
        "variance_power_omni_w2": analytic.variance_omni(params),
        "params": scenario.params_to_mapping(params),
    }
    ga = analytic.gamma_approx(params)
    doc["gamma_shape"] = ga.shape
    doc["gamma_scale_w"] = ga.scale
    if params.power_threshold > 0:
        doc["active_prob"] = analytic.gamma_ccdf(params.power_threshold, params)
        doc["active_prob_omni"] = analytic.gamma_ccdf_omni(
            params.power_threshold, params
        )
    print(json.dumps(doc, sort_keys=True, indent=2))
    return 0


def _cmd_simulate(args) -> int:
    params, config = _gather(args)
    summary = mcsim.run_trials(params, config, workers=args.workers)
    text = mcsim.summary_to_json(summary, params, config)
    if args.out:
        out = Path(args.out)
        out.mkdir(parents=True, exist_ok=True)
        mcsim.samples_to_csv(summary, out / "samples.csv")
        (out / "summary.json").write_text(text + "\n")
        _progress(f"wrote {out / 'samples.csv'} and {out / 'summary.json'}")
    else:
        print(text)
    return 0


def _cmd_optimize_mean(args) -> int:
    params, _ = _gather(args)
    opt = radopt.optimal_radius_mean(params)
    print(
        json.dumps(
            {
                "rho_star_m": opt.radius,
                "mean_power_w": opt.objective,
                "case": opt.case_label.value,
                "derivative_residual": opt.derivative_residual,
                "evaluations": opt.evaluations,
            },
            sort_keys=True,
            indent=2,
        )
    )
    return 0


def _cmd_optimize_active(args) -> int:
    params, _ = _gather(args)
    threshold = args.threshold if args.threshold else params.power_threshold
    if not threshold or threshold <= 0:
        print(
            "optimize-active needs a positive threshold "
            "(--threshold or power_threshold_w)",
            file=sys.stderr,
        )
        return 2
    opt = radopt.optimal_radius_active(params, threshold)
    residual = opt.derivative_residual
    print(
        json.dumps(
            {
                "rho_star_m": opt.radius,
                "active_prob": opt.objective,
                "case": opt.case_label.value,
                "derivative_residual": None if math.isnan(residual) else residual,
                "evaluations": opt.evaluations,
            },
            sort_keys=True,
            indent=2,
        )
    )
    return 0


def _cmd_figure(args) -> int:
    try:
        fid = FigureId(args.id.capitalize())
    except ValueError:
        print(f"unknown figure id {args.id!r}", file=sys.stderr)
        return 2
    spec = ExperimentSpec(
        figure_id=fid,
        overrides=tuple(args.set or []),
        output_dir=args.out or fid.value.lower(),
        seed=args.seed if args.seed is not None else 20260819,
        trials=args.trials or 0,
    )
    manifest = run_figure(spec, workers=args.workers)
    _progress(f"wrote {len(manifest['files'])} files to {spec.output_dir}")
    print(json.dumps(manifest, sort_keys=True, indent=2))
    return 0


def _cmd_validate(args) -> int:
    failures = []

    def check(name, ok):
        line = f"{'PASS' if ok else 'FAIL'} {name}"
        print(line)
        if not ok:
            failures.append(name)

    params, _ = load_config_from_defaults(())
    etas_n = [analytic.reception_prob_near(m, params) for m in range(1, params.sectors + 1)]
    check("near occupancy distribution sums to 1", abs(sum(etas_n) - 1.0) < 1e-12)
    gains = sum(
        analytic.reception_prob_far(m, params) * analytic.gain(m, params.sectors)
        for m in range(0, params.sectors + 1)
    )
    check("far gain mass sums to 1", abs(gains - 1.0) < 1e-12)
    lo = analytic.mean_power(params.with_(charging_radius=1.0 - 1e-12))
    hi = analytic.mean_power(params.with_(charging_radius=1.0 + 1e-12))
    check("mean continuous across branch seam", abs(hi / lo - 1.0) < 1e-9)
    one = params.with_(sectors=1)
    check(
        "single sector reduces to omni",
        abs(analytic.mean_power(one) - analytic.mean_power_omni(one)) < 1e-18,
    )
    cfg = SimConfig(trials=200, master_seed=args.seed or 7)
    s1 = mcsim.run_trials(params, cfg, workers=1)
    s2 = mcsim.run_trials(params, cfg, workers=2)
    check("trial streams worker-count invariant", np.array_equal(s1.samples, s2.samples))
    growing = analytic.mean_power(params) > analytic.mean_power_omni(params)
    check("directional beats omni mean", growing)
    if failures:
        print(f"{len(failures)} validation failure(s)", file=sys.stderr)
        return 1
    return 0


def _add_common(sub, trials=True):
    sub.add_argument("--config", help="key=value config file")
    sub.add_argument(
        "--set", action="append", metavar="KEY=VALUE",
        help="override a config key (repeatable)",
    )
    sub.add_argument("--seed", type=int, help="master seed (64-bit)")
    if trials:
        sub.add_argument("--trials", type=int, help="Monte Carlo trial count")
    sub.add_argument("--out", help="output directory")
    sub.add_argument(
        "--workers", type=int, default=1, help="worker processes (default 1)"
    )


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="beamharvest",
        description="Directional wireless power transfer: analysis, "
        "simulation, optimization, figure reproduction.",
    )
    subs = parser.add_subparsers(dest="command", required=True)

    p_analytic = subs.add_parser("analytic", help="closed-form metrics")
    _add_common(p_analytic, trials=False)

    p_sim = subs.add_parser("simulate", help="Monte Carlo run")
    _add_common(p_sim)
    p_sim.add_argument(
        "--allocation",
        choices=[a.value for a in Allocation],
        help="power allocation scheme",
    )

    p_om = subs.add_parser("optimize-mean", help="mean-power optimal radius")
    _add_common(p_om, trials=False)

    p_oa = subs.add_parser(
        "optimize-active", help="reach-probability optimal radius"
    )
    _add_common(p_oa, trials=False)
    p_oa.add_argument("--threshold", type=float, help="power threshold (W)")

    p_fig = subs.add_parser("figure", help="reproduce a reference figure")
    p_fig.add_argument("id", help="Fig2 .. Fig8")
    _add_common(p_fig)

    p_val = subs.add_parser("validate", help="run invariant self-checks")
    p_val.add_argument("--seed", type=int, help="seed for the MC smoke check")

    args = parser.parse_args(argv)
    handlers = {
        "analytic": _cmd_analytic,
        "simulate": _cmd_simulate,
        "optimize-mean": _cmd_optimize_mean,
        "optimize-active": _cmd_optimize_active,
        "figure": _cmd_figure,
        "validate": _cmd_validate,
    }
    try:
        return handlers[args.command](args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    except ParameterError as exc:
        print(f"invalid scenario: {exc}", file=sys.stderr)
        return 1
    except (radopt.BracketError, radopt.ClassificationError) as exc:
        print(f"optimizer failure: {exc}", file=sys.stderr)
        return 1
    except FileNotFoundError as exc:
        print(f"missing file: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
