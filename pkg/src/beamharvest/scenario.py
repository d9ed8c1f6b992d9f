"""Physical scenario parameters shared by every other module.

A scenario is one deployment: beacon transmit power and density, sensor
density, the sectored-antenna count, the charging radius, and the path-loss
law. All units are SI (watts, meters); decibels only ever appear in display
code. Instances are immutable and safe to share across threads once
validated.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace

__all__ = [
    "ScenarioParams",
    "ParameterError",
    "ConfigError",
    "sigma_from_wavelength",
    "validation_errors",
    "validate",
    "CONFIG_KEYS",
    "CONFIG_DEFAULTS",
    "params_from_mapping",
    "params_to_mapping",
    "parse_config_text",
]

#: Fixed close-in reference distance of the bounded path-loss law, meters.
#: Hard-coded: the closed forms clamp attenuation at 1 m and are written
#: with that constant folded in.
REF_DISTANCE = 1.0

# Relative tolerance for agreement between a directly-given attenuation and
# one derived from the wavelength.
_SIGMA_AGREEMENT_RTOL = 1.0e-9


class ParameterError(ValueError):
    """Raised by validate(); carries the list of violated invariants."""

    def __init__(self, errors: list[str]):
        self.errors = list(errors)
        super().__init__("; ".join(errors))


class ConfigError(ValueError):
    """Malformed or inconsistent config file content."""


def sigma_from_wavelength(wavelength: float) -> float:
    """Linear free-space attenuation at the 1 m reference: (wavelength/4pi)^2.

    The dB value is 20*log10(wavelength/4pi); e.g. 0.1 m gives -41.98 dB.
    """
    if not (isinstance(wavelength, (int, float)) and math.isfinite(wavelength)):
        raise ParameterError(["wavelength must be a finite number"])
    if wavelength <= 0:
        raise ParameterError(["wavelength must be positive"])
    return (wavelength / (4.0 * math.pi * REF_DISTANCE)) ** 2


@dataclass(frozen=True)
class ScenarioParams:
    """All physical and network constants of one deployment scenario.

    attenuation may be given directly or derived from wavelength; when both
    are present they must agree to 1e-9 relative. power_threshold is the
    sensor's activation threshold used by the CCDF objective.
    """

    pb_power: float
    pb_density: float
    sn_density: float
    sectors: int
    charging_radius: float
    path_loss_exp: float
    attenuation: float | None = None
    wavelength: float | None = None
    power_threshold: float = 0.0
    ref_distance: float = field(default=REF_DISTANCE)

    def __post_init__(self) -> None:
        if self.attenuation is None and self.wavelength is not None:
            if isinstance(self.wavelength, (int, float)) and self.wavelength > 0:
                object.__setattr__(
                    self, "attenuation", sigma_from_wavelength(self.wavelength)
                )

    def with_(self, **changes) -> "ScenarioParams":
        """Copy with fields replaced (attenuation re-derived if wavelength moves)."""
        if "wavelength" in changes and "attenuation" not in changes:
            changes["attenuation"] = None
        return replace(self, **changes)


def _finite_positive(value, name: str, errors: list[str]) -> None:
    if not isinstance(value, (int, float)) or isinstance(value, bool):
        errors.append(f"{name} must be a number")
    elif not math.isfinite(value):
        errors.append(f"{name} must be finite")
    elif value <= 0:
        errors.append(f"{name} must be positive")


def validation_errors(params: ScenarioParams) -> list[str]:
    """Names of every violated invariant; empty list when valid."""
    errors: list[str] = []
    _finite_positive(params.pb_power, "pb_power", errors)
    _finite_positive(params.pb_density, "pb_density", errors)
    _finite_positive(params.sn_density, "sn_density", errors)
    _finite_positive(params.charging_radius, "charging_radius", errors)

    if not isinstance(params.sectors, int) or isinstance(params.sectors, bool):
        errors.append("invalid sector count: sectors must be an integer")
    elif params.sectors < 1:
        errors.append("invalid sector count")

    if not isinstance(params.path_loss_exp, (int, float)):
        errors.append("path_loss_exp must be a number")
    elif not math.isfinite(params.path_loss_exp):
        errors.append("path_loss_exp must be finite")
    elif params.path_loss_exp <= 2:
        errors.append("mean diverges")  # closed forms divide by alpha - 2

    if params.ref_distance != REF_DISTANCE:
        errors.append("ref_distance is fixed at 1.0 m")

    if not isinstance(params.power_threshold, (int, float)) or isinstance(
        params.power_threshold, bool
    ):
        errors.append("power_threshold must be a number")
    elif not math.isfinite(params.power_threshold) or params.power_threshold < 0:
        errors.append("power_threshold must be nonnegative and finite")

    if params.attenuation is None:
        errors.append("attenuation unspecified (give attenuation or wavelength)")
    else:
        _finite_positive(params.attenuation, "attenuation", errors)

    if params.wavelength is not None:
        _finite_positive(params.wavelength, "wavelength", errors)
        if (
            not errors
            and params.attenuation is not None
            and params.wavelength > 0
        ):
            derived = sigma_from_wavelength(params.wavelength)
            if abs(params.attenuation - derived) > _SIGMA_AGREEMENT_RTOL * derived:
                errors.append(
                    "attenuation inconsistent with wavelength "
                    f"(given {params.attenuation!r}, derived {derived!r})"
                )
    return errors


def validate(params: ScenarioParams) -> ScenarioParams:
    """Return params unchanged if every invariant holds, else ParameterError.

    Idempotent: a valid instance passes through untouched.
    """
    errors = validation_errors(params)
    if errors:
        raise ParameterError(errors)
    return params


# ---------------------------------------------------------------------------
# Plain-text key=value configuration interface
# ---------------------------------------------------------------------------

#: Exactly the recognized config keys. Anything else is an error.
CONFIG_KEYS = (
    "pb_power_w",
    "pb_density_per_m2",
    "sn_density_per_m2",
    "sectors",
    "charging_radius_m",
    "path_loss_exp",
    "wavelength_m",
    "sigma_linear",
    "power_threshold_w",
)

#: Baseline scenario used when a config omits keys: 5 W beacons at 0.1 /m^2,
#: sensors at 0.2 /m^2, four sectors, 2 m charging radius, alpha = 3,
#: 0.1 m wavelength, 0.1 mW activation threshold.
CONFIG_DEFAULTS: dict[str, float | int] = {
    "pb_power_w": 5.0,
    "pb_density_per_m2": 0.1,
    "sn_density_per_m2": 0.2,
    "sectors": 4,
    "charging_radius_m": 2.0,
    "path_loss_exp": 3.0,
    "wavelength_m": 0.1,
    "power_threshold_w": 1.0e-4,
}


def parse_config_text(text: str, source: str = "<config>") -> dict[str, float | int]:
    """Parse key=value lines into a mapping; '#' starts a comment.

    Errors carry the offending line number. Unknown and duplicate keys are
    rejected.
    """
    values: dict[str, float | int] = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"{source}:{lineno}: expected key=value, got {raw!r}")
        key, _, val = line.partition("=")
        key = key.strip()
        val = val.strip()
        if key not in CONFIG_KEYS:
            raise ConfigError(f"{source}:{lineno}: unknown key {key!r}")
        if key in values:
            raise ConfigError(f"{source}:{lineno}: duplicate key {key!r}")
        try:
            values[key] = int(val) if key == "sectors" else float(val)
        except ValueError:
            raise ConfigError(
                f"{source}:{lineno}: invalid value {val!r} for {key!r}"
            ) from None
    return values


def params_from_mapping(values: dict[str, float | int]) -> ScenarioParams:
    """Build validated ScenarioParams from config-key values plus defaults.

    sigma_linear, when present, takes the attenuation slot; wavelength_m may
    accompany it only if consistent (validate enforces the 1e-9 agreement).
    A config giving sigma_linear alone suppresses the default wavelength.
    """
    unknown = sorted(set(values) - set(CONFIG_KEYS))
    if unknown:
        raise ConfigError(f"unknown keys: {', '.join(unknown)}")
    merged = dict(CONFIG_DEFAULTS)
    if "sigma_linear" in values and "wavelength_m" not in values:
        merged.pop("wavelength_m", None)
    merged.update(values)
    params = ScenarioParams(
        pb_power=float(merged["pb_power_w"]),
        pb_density=float(merged["pb_density_per_m2"]),
        sn_density=float(merged["sn_density_per_m2"]),
        sectors=int(merged["sectors"]),
        charging_radius=float(merged["charging_radius_m"]),
        path_loss_exp=float(merged["path_loss_exp"]),
        attenuation=float(merged["sigma_linear"]) if "sigma_linear" in merged else None,
        wavelength=float(merged["wavelength_m"]) if "wavelength_m" in merged else None,
        power_threshold=float(merged["power_threshold_w"]),
    )
    return validate(params)


def params_to_mapping(params: ScenarioParams) -> dict[str, float | int]:
    """Config-key view of a scenario (for manifests and config echo)."""
    out: dict[str, float | int] = {
        "pb_power_w": params.pb_power,
        "pb_density_per_m2": params.pb_density,
        "sn_density_per_m2": params.sn_density,
        "sectors": params.sectors,
        "charging_radius_m": params.charging_radius,
        "path_loss_exp": params.path_loss_exp,
        "power_threshold_w": params.power_threshold,
        "sigma_linear": params.attenuation,
    }
    if params.wavelength is not None:
        out["wavelength_m"] = params.wavelength
    return out
