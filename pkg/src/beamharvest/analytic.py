"""Closed-form received-power statistics at the typical sensor.

Beacons within the charging radius ("near") always aim a beam at the sensor;
beacons beyond it ("far") only hit it when one of their active sectors happens
to point the right way. Thinning the beacon field by the number of active
sectors M gives a family of homogeneous fields with antenna gain N/M, and
every quantity here (reception probabilities, Laplace transforms, mean,
variance, Gamma-matched CCDF, radius derivative of the mean) is the exact
closed form of that decomposition under the bounded path loss
[max(d, 1)]^(-alpha).

All formulas split at charging_radius = 1 (the path-loss clamp distance); the
two branches agree at the seam. Functions are pure and thread-safe.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass

from . import specfun
from .scenario import ScenarioParams, validate

__all__ = [
    "MAX_SECTORS",
    "BranchTag",
    "GammaApprox",
    "branch_of",
    "sector_empty_prob",
    "gain",
    "reception_prob_near",
    "reception_prob_far",
    "laplace_near",
    "laplace_far",
    "laplace_total",
    "laplace_omni",
    "log_laplace_total",
    "log_laplace_omni",
    "mean_power",
    "mean_power_omni",
    "variance_power",
    "variance_omni",
    "near_far_mean_ratios",
    "gamma_approx",
    "gamma_approx_omni",
    "gamma_ccdf",
    "gamma_ccdf_omni",
    "d_mean_d_rho",
]

#: Sector counts above this are rejected: the binomial sums would need more
#: than double precision to keep the identity tolerances.
MAX_SECTORS = 64

#: Laplace argument cap: s * pb_power * attenuation * gain must stay within
#: the special-function kernel's x range.
LAPLACE_ARG_MAX = 1.0e6


class BranchTag(enum.Enum):
    """Which side of the path-loss clamp the charging radius falls on."""

    RHO_AT_MOST_ONE = "RhoAtMostOne"
    RHO_ABOVE_ONE = "RhoAboveOne"


@dataclass(frozen=True)
class GammaApprox:
    """Moment-matched Gamma law: shape k = E^2/V, scale theta = V/E (watts)."""

    shape: float
    scale: float

    @property
    def mean(self) -> float:
        return self.shape * self.scale

    @property
    def variance(self) -> float:
        return self.shape * self.scale * self.scale


def _checked(params: ScenarioParams) -> ScenarioParams:
    validate(params)
    if params.sectors > MAX_SECTORS:
        raise ValueError(
            f"sectors={params.sectors} exceeds the supported maximum {MAX_SECTORS}"
        )
    return params


def branch_of(params: ScenarioParams) -> BranchTag:
    if params.charging_radius <= 1.0:
        return BranchTag.RHO_AT_MOST_ONE
    return BranchTag.RHO_ABOVE_ONE


def _log_binom(n: int, k: int) -> float:
    return math.lgamma(n + 1) - math.lgamma(k + 1) - math.lgamma(n - k + 1)


def _binom(n: int, k: int) -> float:
    if k < 0 or k > n:
        return 0.0
    return math.exp(_log_binom(n, k))


def _occupancy(params: ScenarioParams) -> tuple[float, float, float]:
    """(p, q, p^N): sector-empty probability, complement, all-empty probability.

    p^N is evaluated as exp(-lambda_s pi rho^2) directly so it stays accurate
    when p itself underflows.
    """
    x = params.sn_density * math.pi * params.charging_radius**2 / params.sectors
    p = math.exp(-x)
    q = -math.expm1(-x)
    p_all = math.exp(-params.sn_density * math.pi * params.charging_radius**2)
    return p, q, p_all


def _geo_from_zero(p: float, n_terms: int) -> float:
    """sum of p^j for j in [0, n_terms): the stable form of (1-p^N)/(1-p)."""
    acc = 1.0
    term = 1.0
    for _ in range(n_terms - 1):
        term *= p
        acc += term
    return acc


def _geo_from_one(p: float, n_terms: int) -> float:
    """sum of p^j for j in [1, n_terms): the stable form of (p-p^N)/(1-p)."""
    acc = 0.0
    term = 1.0
    for _ in range(n_terms - 1):
        term *= p
        acc += term
    return acc


def sector_empty_prob(params: ScenarioParams) -> float:
    """Probability that one sector of a beacon's charging disk holds no sensor.

    Sensor counts in the N equal sectors are independent Poissons, so this is
    exp(-sn_density * pi * rho^2 / N).
    """
    _checked(params)
    p, _, _ = _occupancy(params)
    return p


def gain(active_sectors: int, sectors: int) -> float:
    """Antenna gain toward a served direction: 1 when idle-omni, else N/M."""
    if not isinstance(active_sectors, int) or isinstance(active_sectors, bool):
        raise ValueError("active_sectors must be an integer")
    if active_sectors < 0 or active_sectors > sectors:
        raise ValueError(
            f"active_sectors={active_sectors} outside [0, {sectors}]"
        )
    if active_sectors == 0:
        return 1.0
    return sectors / active_sectors


def reception_prob_near(active_sectors: int, params: ScenarioParams) -> float:
    """Probability a near beacon serves the sensor with exactly M beams.

    The sensor itself occupies one sector, so M-1 of the remaining N-1
    sectors must be occupied: C(N-1, M-1) p^(N-M) q^(M-1).
    """
    _checked(params)
    n = params.sectors
    m = active_sectors
    if not isinstance(m, int) or isinstance(m, bool):
        raise ValueError("active_sectors must be an integer")
    if m < 1 or m > n:
        raise ValueError(
            f"near beacons always beam at the sensor; need 1 <= M <= {n}, got {m}"
        )
    p, q, _ = _occupancy(params)
    return _binom(n - 1, m - 1) * p ** (n - m) * q ** (m - 1)


def reception_prob_far(active_sectors: int, params: ScenarioParams) -> float:
    """Probability a far beacon radiates toward the sensor with M beams.

    M = 0 is the all-sectors-empty omni fallback (probability p^N); for
    M >= 1 the aimed-sector chance M/N folds into C(N,M) p^(N-M) q^M giving
    C(N-1, M-1) p^(N-M) q^M.
    """
    _checked(params)
    n = params.sectors
    m = active_sectors
    if not isinstance(m, int) or isinstance(m, bool):
        raise ValueError("active_sectors must be an integer")
    if m < 0 or m > n:
        raise ValueError(f"need 0 <= M <= {n}, got {m}")
    p, q, p_all = _occupancy(params)
    if m == 0:
        return p_all
    return _binom(n - 1, m - 1) * p ** (n - m) * q**m


def _laplace_a(s: float, gain_value: float, params: ScenarioParams) -> float:
    a = s * params.pb_power * params.attenuation * gain_value
    if a > LAPLACE_ARG_MAX:
        raise specfun.RangeError(
            f"s*P*sigma*G = {a!r} exceeds supported maximum {LAPLACE_ARG_MAX!r}"
        )
    return a


def _near_exponent(s: float, m: int, params: ScenarioParams) -> float:
    """Log of the near-field Laplace factor for gain N/M."""
    a = _laplace_a(s, gain(m, params.sectors), params)
    eta = reception_prob_near(m, params)
    rho = params.charging_radius
    lam = params.pb_density
    alpha = params.path_loss_exp
    if rho <= 1.0:
        bracket = rho * rho * -math.expm1(-a)
    else:
        u = 1.0 - 2.0 / alpha
        a_out = a * rho**-alpha
        bracket = rho * rho * -math.expm1(-a_out) + a ** (2.0 / alpha) * (
            specfun.lower_incomplete_gamma(u, a)
            - specfun.lower_incomplete_gamma(u, a_out)
        )
    return -lam * math.pi * eta * bracket


def _far_exponent(s: float, m: int, params: ScenarioParams) -> float:
    """Log of the far-field Laplace factor for gain N/M (or omni when M=0)."""
    a = _laplace_a(s, gain(m, params.sectors), params)
    eta = reception_prob_far(m, params)
    rho = params.charging_radius
    lam = params.pb_density
    alpha = params.path_loss_exp
    u = 1.0 - 2.0 / alpha
    if rho <= 1.0:
        bracket = rho * rho * -math.expm1(-a) - a ** (2.0 / alpha) * (
            specfun.lower_incomplete_gamma(u, a)
        )
    else:
        a_out = a * rho**-alpha
        bracket = rho * rho * -math.expm1(-a_out) - a ** (2.0 / alpha) * (
            specfun.lower_incomplete_gamma(u, a_out)
        )
    return lam * math.pi * eta * bracket


def _check_s(s: float) -> None:
    if not (isinstance(s, (int, float)) and math.isfinite(s)):
        raise ValueError("laplace argument must be a finite number")
    if s < 0:
        raise ValueError(f"laplace argument must be nonnegative, got {s!r}")


def laplace_near(s: float, active_sectors: int, params: ScenarioParams) -> float:
    """Laplace transform of aggregate power from near beacons with M beams."""
    _checked(params)
    _check_s(s)
    if s == 0:
        reception_prob_near(active_sectors, params)  # still enforce the M domain
        return 1.0
    return math.exp(_near_exponent(s, active_sectors, params))


def laplace_far(s: float, active_sectors: int, params: ScenarioParams) -> float:
    """Laplace transform of aggregate power from far beacons with M beams."""
    _checked(params)
    _check_s(s)
    if s == 0:
        reception_prob_far(active_sectors, params)
        return 1.0
    return math.exp(_far_exponent(s, active_sectors, params))


def log_laplace_total(s: float, params: ScenarioParams) -> float:
    """Log of the full Laplace transform; exact sum of the factor exponents.

    Exposed separately because log(laplace_total) loses precision near s = 0,
    where the transform is 1 - O(s); derivative checks difference this form.
    """
    _checked(params)
    _check_s(s)
    if s == 0:
        return 0.0
    n = params.sectors
    total = 0.0
    for m in range(1, n + 1):
        total += _near_exponent(s, m, params)
    for m in range(0, n + 1):
        total += _far_exponent(s, m, params)
    return total


def laplace_total(s: float, params: ScenarioParams) -> float:
    """Laplace transform of the total received power (all beacons)."""
    return math.exp(log_laplace_total(s, params))


def log_laplace_omni(s: float, params: ScenarioParams) -> float:
    """Log Laplace transform when every beacon radiates omnidirectionally."""
    _checked(params)
    _check_s(s)
    if s == 0:
        return 0.0
    a = _laplace_a(s, 1.0, params)
    u = 1.0 - 2.0 / params.path_loss_exp
    return (
        -params.pb_density
        * math.pi
        * a ** (2.0 / params.path_loss_exp)
        * specfun.lower_incomplete_gamma(u, a)
    )


def laplace_omni(s: float, params: ScenarioParams) -> float:
    """Laplace transform of total received power under omni transmission."""
    return math.exp(log_laplace_omni(s, params))


def mean_power(params: ScenarioParams) -> float:
    """Mean received power at the typical sensor, watts.

    Both radius branches use the geometric-sum form of (1 - p^N)/(1 - p), so
    the p -> 1 limit needs no special casing and the seam at rho = 1 is exact.
    """
    _checked(params)
    p, _, _ = _occupancy(params)
    rho = params.charging_radius
    alpha = params.path_loss_exp
    n = params.sectors
    scale = params.pb_power * params.pb_density * params.attenuation * math.pi
    if rho <= 1.0:
        return scale * (rho * rho * _geo_from_one(p, n) + alpha / (alpha - 2.0))
    r_pow = rho ** (2.0 - alpha)
    return scale * (
        (alpha - 2.0 * r_pow) * _geo_from_zero(p, n) / (alpha - 2.0)
        + 2.0 * r_pow / (alpha - 2.0)
    )


def mean_power_omni(params: ScenarioParams) -> float:
    """Mean received power under omni transmission: P lam sigma pi a/(a-2)."""
    _checked(params)
    alpha = params.path_loss_exp
    return (
        params.pb_power
        * params.pb_density
        * params.attenuation
        * math.pi
        * alpha
        / (alpha - 2.0)
    )


def _gain_square_sum(p: float, q: float, n: int) -> float:
    """sum over M of (N/M)^2 C(N-1,M-1) p^(N-M) q^(M-1).

    One q is deliberately left out of each term (the parent expressions carry
    prefactors with 1/q poles; pairing them with this sum keeps everything
    finite as q -> 0, where the sum tends to N^2).
    """
    acc = 0.0
    for m in range(1, n + 1):
        g = n / m
        acc += g * g * _binom(n - 1, m - 1) * p ** (n - m) * q ** (m - 1)
    return acc


def variance_power(params: ScenarioParams) -> float:
    """Variance of received power at the typical sensor, watts^2."""
    _checked(params)
    p, q, p_all = _occupancy(params)
    rho = params.charging_radius
    alpha = params.path_loss_exp
    n = params.sectors
    t_sum = _gain_square_sum(p, q, n)
    scale = (
        params.pb_density
        * params.pb_power**2
        * params.attenuation**2
        * math.pi
    )
    if rho <= 1.0:
        iso = alpha / (alpha - 1.0)
        return scale * (
            (iso - rho * rho) * p_all + rho * rho * p * t_sum + iso * q * t_sum
        )
    r_pow = rho ** (2.0 - 2.0 * alpha)
    return scale * (
        r_pow * p_all / (alpha - 1.0)
        + (alpha - r_pow) * t_sum / (alpha - 1.0)
        + r_pow * q * t_sum / (alpha - 1.0)
    )


def variance_omni(params: ScenarioParams) -> float:
    """Variance under omni transmission: lam P^2 sigma^2 pi a/(a-1)."""
    _checked(params)
    alpha = params.path_loss_exp
    return (
        params.pb_density
        * params.pb_power**2
        * params.attenuation**2
        * math.pi
        * alpha
        / (alpha - 1.0)
    )


def near_far_mean_ratios(params: ScenarioParams) -> tuple[float, float]:
    """Mean-power gain of beam steering over omni, split by beacon distance.

    Near beacons deliver (1 - p^N)/(1 - p) >= 1 times their omni-mode mean
    (geometric-sum form, so p -> 1 gives N exactly); for far beacons the
    higher intensity and lower alignment odds cancel exactly, ratio 1.
    """
    _checked(params)
    p, _, _ = _occupancy(params)
    return _geo_from_zero(p, params.sectors), 1.0


def gamma_approx(params: ScenarioParams) -> GammaApprox:
    """Second-order moment match of the received-power law to a Gamma law."""
    _checked(params)
    mean = mean_power(params)
    var = variance_power(params)
    if not (mean > 0.0) or not (var > 0.0):
        raise ValueError("moment matching needs strictly positive mean and variance")
    return GammaApprox(shape=mean * mean / var, scale=var / mean)


def gamma_approx_omni(params: ScenarioParams) -> GammaApprox:
    """Gamma moment match of the omni-transmission power law."""
    _checked(params)
    mean = mean_power_omni(params)
    var = variance_omni(params)
    if not (mean > 0.0) or not (var > 0.0):
        raise ValueError("moment matching needs strictly positive mean and variance")
    return GammaApprox(shape=mean * mean / var, scale=var / mean)


def _gamma_ccdf_value(approx: GammaApprox, threshold: float) -> float:
    if not (isinstance(threshold, (int, float)) and math.isfinite(threshold)):
        raise ValueError("threshold must be a finite number")
    if threshold < 0:
        raise ValueError(f"threshold must be nonnegative, got {threshold!r}")
    if threshold == 0:
        return 1.0
    # complement computed on its own branch; 1 - P would round to 0 early
    return specfun.regularized_gamma_q(approx.shape, threshold / approx.scale)


def gamma_ccdf(threshold: float, params: ScenarioParams) -> float:
    """Gamma-approximated probability that received power reaches threshold."""
    return _gamma_ccdf_value(gamma_approx(params), threshold)


def gamma_ccdf_omni(threshold: float, params: ScenarioParams) -> float:
    """Same approximation for omni transmission (radius-independent)."""
    return _gamma_ccdf_value(gamma_approx_omni(params), threshold)


# --- radius derivative of the mean ---------------------------------------
#
# Writing q = 1 - p, both branch derivatives contain the factor
#   W / (N q^2)
# with W a polynomial in p that vanishes to second order at q = 0:
#   inner branch:  W  = p^N + N q p^(N-1) - 1
#   outer branch:  W2 = N q p^N - p + p^(N+1)  (= p * W, equal at rho = 1)
# Expanded in q these are alternating sums with ratio < N q / m between
# consecutive terms, so for N q < 1/2 the series is evaluated directly and
# the cancellation of the direct form never surfaces.

_SERIES_SWITCH = 0.5


def _w_inner_over_nq2(p: float, q: float, n: int) -> float:
    if n * q < _SERIES_SWITCH:
        acc = 0.0
        for m in range(2, n + 1):
            sign = 1.0 if m % 2 == 0 else -1.0
            acc += sign * (m - 1) * _binom(n, m) * q ** (m - 2)
        return -acc / n
    return (p**n + n * q * p ** (n - 1) - 1.0) / (n * q * q)


def _w_outer_over_nq2(p: float, q: float, n: int) -> float:
    if n * q < _SERIES_SWITCH:
        acc = 0.0
        for m in range(2, n + 2):
            sign = 1.0 if m % 2 == 0 else -1.0
            acc += sign * _binom(n, m - 1) * (n + 1.0 - n * m) / m * q ** (m - 2)
        return acc / n
    return (n * q * p**n - p + p ** (n + 1)) / (n * q * q)


def d_mean_d_rho(params: ScenarioParams) -> float:
    """Derivative of mean_power with respect to the charging radius, W/m.

    Evaluates the branch matching branch_of(params); the two branch formulas
    take the same value at rho = 1.
    """
    _checked(params)
    p, q, _ = _occupancy(params)
    rho = params.charging_radius
    alpha = params.path_loss_exp
    n = params.sectors
    lam_s_pi = params.sn_density * math.pi
    scale = (
        2.0
        * params.pb_power
        * params.pb_density
        * math.pi
        * params.attenuation
    )
    geo1 = _geo_from_one(p, n)
    if rho <= 1.0:
        w = _w_inner_over_nq2(p, q, n)
        return scale * (rho * geo1 + lam_s_pi * rho**3 * p * w)
    w2 = _w_outer_over_nq2(p, q, n)
    r_pow = rho ** (2.0 - alpha)
    return scale * (
        rho ** (1.0 - alpha) * geo1
        + lam_s_pi * rho * (alpha - 2.0 * r_pow) / (alpha - 2.0) * w2
    )
