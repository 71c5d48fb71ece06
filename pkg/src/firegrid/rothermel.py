"""Surface fire spread-rate kernel.

Computes the base rate of spread from reaction intensity, propagating flux
ratio, bulk density, effective heating number, and preignition heat, then
amplifies it with wind and slope factors:

    r_base = i_r * xi / (rho_b * epsilon * q_ig)
    r_eff  = max(0, r_base * (1 + phi_w + phi_s))

The sub-equations are the standard published semi-empirical forms for a
single fine dead fuel class. Everything here is a pure function of its
inputs; units are imperial (ft, lb, BTU, minutes).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .errors import DomainError
from .fuels import FuelModel

# Total and effective mineral content of the fuel (standard constants).
MINERAL_TOTAL = 0.0555
MINERAL_EFFECTIVE = 0.010

# Mineral damping 0.174 * S_e^-0.19 with S_e = 0.010.
ETA_S = 0.174 * MINERAL_EFFECTIVE ** -0.19


@dataclass(frozen=True)
class SpreadInputs:
    """One direction-resolved kernel query.

    wind_speed is midflame wind in ft/min; wind_dir and spread_dir are
    radians, 0 = east, counterclockwise; wind_dir is the direction the
    wind blows toward. slope_tan is rise/run along spread_dir (negative
    for downslope spread).
    """

    fuel: FuelModel
    moisture: float
    wind_speed: float = 0.0
    wind_dir: float = 0.0
    slope_tan: float = 0.0
    spread_dir: float = 0.0

    def validate(self) -> None:
        if not 0.0 <= self.moisture <= 1.0:
            raise DomainError(f"moisture must be in [0, 1], got {self.moisture!r}")
        if not self.wind_speed >= 0.0:
            raise DomainError(f"wind_speed must be >= 0, got {self.wind_speed!r}")


@dataclass(frozen=True)
class SpreadComponents:
    """Every intermediate the kernel produces for one query."""

    i_r: float      # reaction intensity, BTU/ft^2/min
    xi: float       # propagating flux ratio
    rho_b: float    # bulk density, lb/ft^3
    epsilon: float  # effective heating number
    q_ig: float     # heat of preignition, BTU/lb
    r_base: float   # base rate of spread, ft/min
    phi_w: float    # wind factor along spread_dir
    phi_s: float    # slope factor along spread_dir (signed)
    r_eff: float    # effective rate of spread, ft/min


@dataclass(frozen=True)
class FuelTerms:
    """Direction-independent pieces for a (fuel, moisture) pair.

    The grid engine precomputes one of these per fuel code and resolves
    wind/slope per neighbor direction, so the heavy transcendentals run
    once per fuel instead of once per cell pair.
    """

    i_r: float
    xi: float
    rho_b: float
    epsilon: float
    q_ig: float
    r_base: float
    wind_b: float        # exponent on wind speed
    wind_coeff: float    # C * (beta/beta_op)^-E
    slope_coeff: float   # 5.275 * beta^-0.3


def base_rate(i_r: float, xi: float, rho_b: float, epsilon: float,
              q_ig: float) -> float:
    """Base rate of spread, ft/min. All denominator terms must be > 0."""
    for name, value in (("rho_b", rho_b), ("epsilon", epsilon), ("q_ig", q_ig)):
        if not value > 0.0:
            raise DomainError(f"{name} must be > 0, got {value!r}")
    if i_r < 0.0 or xi < 0.0:
        raise DomainError("i_r and xi must be >= 0")
    return i_r * xi / (rho_b * epsilon * q_ig)


def effective_rate(r_base: float, phi_w: float, phi_s: float) -> float:
    """Wind/slope-amplified rate, clamped below at zero."""
    if r_base < 0.0:
        raise DomainError(f"r_base must be >= 0, got {r_base!r}")
    return max(0.0, r_base * (1.0 + phi_w + phi_s))


def moisture_damping(moisture: float, mx: float) -> float:
    """Cubic damping coefficient; exactly zero at or above extinction."""
    if moisture >= mx:
        return 0.0
    r = moisture / mx
    return max(0.0, 1.0 - 2.59 * r + 5.11 * r * r - 3.52 * r * r * r)


def fuel_terms(fuel: FuelModel, moisture: float) -> FuelTerms:
    """Resolve every direction-independent sub-equation for one fuel."""
    if not 0.0 <= moisture <= 1.0:
        raise DomainError(f"moisture must be in [0, 1], got {moisture!r}")
    fuel.validate()
    sigma = fuel.sigma

    rho_b = fuel.w0 / fuel.delta
    beta = rho_b / fuel.rho_p
    beta_op = 3.348 * sigma ** -0.8189
    beta_ratio = beta / beta_op

    epsilon = math.exp(-138.0 / sigma)
    q_ig = 250.0 + 1116.0 * moisture
    xi = math.exp((0.792 + 0.681 * math.sqrt(sigma)) * (beta + 0.1)) \
        / (192.0 + 0.2595 * sigma)

    gamma_max = sigma ** 1.5 / (495.0 + 0.0594 * sigma ** 1.5)
    a = 133.0 * sigma ** -0.7913
    gamma = gamma_max * beta_ratio ** a * math.exp(a * (1.0 - beta_ratio))

    eta_m = moisture_damping(moisture, fuel.mx)
    w_n = fuel.w0 * (1.0 - MINERAL_TOTAL)
    i_r = gamma * w_n * fuel.heat_content * eta_m * ETA_S

    r = base_rate(i_r, xi, rho_b, epsilon, q_ig)

    wind_c = 7.47 * math.exp(-0.133 * sigma ** 0.55)
    wind_b = 0.02526 * sigma ** 0.54
    wind_e = 0.715 * math.exp(-3.59e-4 * sigma)

    return FuelTerms(
        i_r=i_r, xi=xi, rho_b=rho_b, epsilon=epsilon, q_ig=q_ig, r_base=r,
        wind_b=wind_b,
        wind_coeff=wind_c * beta_ratio ** -wind_e,
        slope_coeff=5.275 * beta ** -0.3,
    )


def wind_factor(terms: FuelTerms, wind_speed: float, wind_dir: float,
                spread_dir: float) -> float:
    """Wind amplification projected onto the spread direction.

    The full factor applies when spreading straight downwind and falls off
    as the cosine of the misalignment; upwind directions get zero.
    """
    if wind_speed <= 0.0:
        return 0.0
    alignment = max(0.0, math.cos(spread_dir - wind_dir))
    return terms.wind_coeff * wind_speed ** terms.wind_b * alignment


def slope_factor(terms: FuelTerms, slope_tan: float) -> float:
    """Signed slope amplification: positive upslope, negative downslope."""
    return math.copysign(terms.slope_coeff * slope_tan * slope_tan, slope_tan) \
        if slope_tan != 0.0 else 0.0


def spread_components(inputs: SpreadInputs) -> SpreadComponents:
    """Full kernel evaluation for one (fuel, moisture, wind, slope, direction)."""
    inputs.validate()
    terms = fuel_terms(inputs.fuel, inputs.moisture)
    phi_w = wind_factor(terms, inputs.wind_speed, inputs.wind_dir,
                        inputs.spread_dir)
    phi_s = slope_factor(terms, inputs.slope_tan)
    return SpreadComponents(
        i_r=terms.i_r, xi=terms.xi, rho_b=terms.rho_b,
        epsilon=terms.epsilon, q_ig=terms.q_ig, r_base=terms.r_base,
        phi_w=phi_w, phi_s=phi_s,
        r_eff=effective_rate(terms.r_base, phi_w, phi_s),
    )
