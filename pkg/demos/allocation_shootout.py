"""Pit the three per-sector power allocation rules against each other.

Uniform splits a beacon's power evenly over its active sectors, greedy dumps
everything into the most crowded one, robust splits proportionally to the
sensor counts. Same networks for every rule, so the differences below are
allocation and nothing else. Expect greedy to win on raw average power and
lose badly on wake-up probability.
"""

from beamharvest import benchcli, radopt
from beamharvest.mcsim import SimConfig
from beamharvest.scenario import ScenarioParams

THRESHOLD = 1e-4

base = ScenarioParams(
    pb_power=2.0,
    pb_density=0.1,
    sn_density=0.2,
    sectors=4,
    charging_radius=1.0,
    path_loss_exp=3.0,
    wavelength=0.1,
    power_threshold=THRESHOLD,
)

# run the tournament where the mean-power design would put the radius
rho = radopt.optimal_radius_mean(base).radius
params = base.with_(charging_radius=rho)
print(f"charging radius {rho:.4f} m, threshold {THRESHOLD * 1e3:.1f} mW")

report = benchcli.compare_schemes(
    params, (2.0, 6.0), SimConfig(trials=4000, master_seed=3)
)

for entry in report["entries"]:
    print(f"\ntransmit power {entry['pb_power_w']:.0f} W")
    for name, stats in entry["schemes"].items():
        print(
            f"  {name:8s} mean {stats['mean_w']:.4e} W   "
            f"wake-up {stats['active_prob']:.3f}"
        )
    for check in entry["mean_ordering"]:
        print(
            f"  mean    {check['expected_ge']:>7} >= {check['other']:<8} {check['verdict']}"
        )
    for check in entry["active_ordering"]:
        print(
            f"  wake-up {check['expected_ge']:>7} >= {check['other']:<8} {check['verdict']}"
        )
