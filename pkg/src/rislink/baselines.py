"""Reference technologies: half-duplex DF relay, co-located transmit array, sizing."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .propagation import (
    LinkBudget,
    far_field_amplitude_sum,
    freespace_gain,
    noise_power,
    to_db,
)
from .scene import CarrierSpec
from .surface import LinkMetrics

MAX_SIZING_AREA_M2 = 1e4


@dataclass(frozen=True)
class RelaySpec:
    """Multi-antenna relay deployed in the surface's place."""

    num_antennas: int
    relay_tx_power_w: float
    relay_gain_dbi: float
    antenna_spacing_fraction: float = 0.5

    def __post_init__(self):
        if self.num_antennas < 1:
            raise ValueError("relay needs at least one antenna")
        if self.antenna_spacing_fraction <= 0:
            raise ValueError("antenna spacing fraction must be positive")


def relay_from_area(
    area_m2: float,
    budget: LinkBudget,
    carrier: CarrierSpec,
    antenna_spacing_fraction: float = 0.5,
) -> RelaySpec:
    """Fit half-wavelength-spaced antennas into the given aperture area."""
    aperture = (antenna_spacing_fraction * carrier.wavelength_m) ** 2
    m = int(np.floor(area_m2 / aperture + 1e-9))
    if m < 1:
        raise ValueError(
            f"area {area_m2} m2 too small for one antenna ({aperture} m2)"
        )
    return RelaySpec(
        num_antennas=m,
        relay_tx_power_w=budget.relay_tx_power_w,
        relay_gain_dbi=budget.relay_gain_dbi,
        antenna_spacing_fraction=antenna_spacing_fraction,
    )


def df_relay_hop_snrs(
    area_m2: float,
    d1_m: float,
    d2_m: float,
    budget: LinkBudget,
    carrier: CarrierSpec,
) -> tuple[float, float, int]:
    """Per-hop SNRs (and antenna count) of the repetition-coded DF relay.

    Hop 1 collects with combining gain M, hop 2 beamforms with gain M; the
    penetration loss follows budget.penetration_on so the comparison stays
    like-for-like with the surface link. Both hops reuse the same noise
    figure.
    """
    spec = relay_from_area(area_m2, budget, carrier)
    m = spec.num_antennas
    sigma2 = noise_power(budget)
    snr1 = (
        budget.tx_power_w
        * budget.tx_hop_penetration
        * freespace_gain(d1_m, budget.tx_gain, budget.relay_gain, carrier.wavelength_m)
        * m
        / sigma2
    )
    snr2 = (
        budget.relay_tx_power_w
        * budget.rx_hop_penetration
        * freespace_gain(d2_m, budget.relay_gain, budget.rx_gain, carrier.wavelength_m)
        * m
        / sigma2
    )
    return float(snr1), float(snr2), m


def df_relay_se(
    area_m2: float,
    d1_m: float,
    d2_m: float,
    budget: LinkBudget,
    carrier: CarrierSpec,
) -> LinkMetrics:
    """Spectral efficiency of a repetition-coded decode-and-forward relay.

    SE = 0.5 * log2(1 + min(SNR1, SNR2)); the 1/2 encodes the half-duplex
    protocol, and there is no direct path. end_to_end_gain_db reports the
    equivalent one-hop gain min-SNR * sigma^2 / P_tx.
    """
    snr1, snr2, _ = df_relay_hop_snrs(area_m2, d1_m, d2_m, budget, carrier)
    snr = min(snr1, snr2)
    gain_db = to_db(snr * noise_power(budget) / budget.tx_power_w)
    return LinkMetrics(
        snr_linear=snr,
        se_bits_per_hz=float(0.5 * np.log2(1.0 + snr)),
        end_to_end_gain_db=float(gain_db),
    )


def tx_array_snr(
    area_m2: float,
    d2: float,
    budget: LinkBudget,
    carrier: CarrierSpec,
    element_side_fraction: float = 0.2,
) -> LinkMetrics:
    """Equal-sized transmit array in the surface's place, same total power.

    N elements of area A share the power; coherent combining gives
    SNR = P * N * A * G_r / (4 pi d2^2 sigma^2). Only the surface-to-rx hop
    penetration applies (the array replaces the surface, so there is no
    feeder hop).
    """
    elem_area = (element_side_fraction * carrier.wavelength_m) ** 2
    n = int(np.floor(area_m2 / elem_area + 1e-9))
    if n < 1:
        raise ValueError(f"area {area_m2} m2 fits no element of {elem_area} m2")
    sigma2 = noise_power(budget)
    snr = (
        budget.tx_power_w
        * budget.rx_hop_penetration
        * n
        * elem_area
        * budget.rx_gain
        / (4.0 * np.pi * d2**2 * sigma2)
    )
    return LinkMetrics(
        snr_linear=float(snr),
        se_bits_per_hz=float(np.log2(1.0 + snr)),
        end_to_end_gain_db=float(to_db(snr * sigma2 / budget.tx_power_w)),
    )


def _closed_form_se(area_m2: float, technology: str, scenario) -> float:
    """Far-field closed-form SE, continuous in area (no element/antenna floors)."""
    budget = scenario.budget
    carrier = scenario.carrier
    d1 = scenario.placement.d1_m
    d2 = scenario.placement.d2_m
    sigma2 = noise_power(budget)
    if technology == "ris":
        amp = far_field_amplitude_sum(area_m2, d1, d2, budget, carrier)
        snr = budget.tx_power_w * amp**2 / sigma2
        return float(np.log2(1.0 + snr))
    if technology == "df_relay":
        m = area_m2 / (0.5 * carrier.wavelength_m) ** 2
        snr1 = (
            budget.tx_power_w
            * budget.tx_hop_penetration
            * freespace_gain(d1, budget.tx_gain, budget.relay_gain, carrier.wavelength_m)
            * m
            / sigma2
        )
        snr2 = (
            budget.relay_tx_power_w
            * budget.rx_hop_penetration
            * freespace_gain(d2, budget.relay_gain, budget.rx_gain, carrier.wavelength_m)
            * m
            / sigma2
        )
        return float(0.5 * np.log2(1.0 + min(snr1, snr2)))
    raise ValueError(f"unknown technology {technology!r}")


def required_area(target_se: float, technology: str, scenario) -> float:
    """Smallest aperture area achieving the target SE, far-field closed form.

    Bisection to 1e-4 relative on the area. scenario must provide placement,
    budget and carrier attributes (the runner's Scenario does). Raises when
    the target is unreachable below 1e4 m^2.
    """
    if target_se <= 0:
        raise ValueError("target_se must be positive")
    if _closed_form_se(MAX_SIZING_AREA_M2, technology, scenario) < target_se:
        raise ValueError(
            f"target {target_se} bit/s/Hz unreachable below {MAX_SIZING_AREA_M2} m2"
        )
    lo, hi = 0.0, MAX_SIZING_AREA_M2
    while hi - lo > 1e-4 * hi:
        mid = 0.5 * (lo + hi)
        if _closed_form_se(mid, technology, scenario) >= target_se:
            hi = mid
        else:
            lo = mid
    return hi


def required_area_crossover(
    scenario, se_lo: float = 1.0, se_hi: float = 15.0
) -> float:
    """SE at which both technologies need the same area.

    Below the returned SE the relay needs less area, above it the surface
    does. Scans for a sign change of the area difference, then bisects.
    """

    def diff(se: float) -> float:
        return required_area(se, "df_relay", scenario) - required_area(se, "ris", scenario)

    grid = np.linspace(se_lo, se_hi, 29)
    values = [diff(se) for se in grid]
    bracket = None
    for a, b, va, vb in zip(grid, grid[1:], values, values[1:]):
        if va <= 0 <= vb or vb <= 0 <= va:
            bracket = (a, b, va)
            break
    if bracket is None:
        raise ValueError("no required-area crossover in the scanned SE range")
    lo, hi, lo_val = bracket
    for _ in range(60):
        mid = 0.5 * (lo + hi)
        mid_val = diff(mid)
        if (lo_val <= 0) == (mid_val <= 0):
            lo, lo_val = mid, mid_val
        else:
            hi = mid
    return 0.5 * (lo + hi)
