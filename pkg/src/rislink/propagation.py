"""Link budgets, free-space and cascaded per-element channels, noise power.

Sign convention: propagation over distance d contributes phase exp(-j*2*pi*d/lambda).
All powers are watts internally; dB and dBm appear only at I/O boundaries.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .scene import CarrierSpec, Placement, RisArray

FOUR_PI = 4.0 * np.pi


def to_db(linear) -> float | np.ndarray:
    return 10.0 * np.log10(linear)


def from_db(db) -> float | np.ndarray:
    return 10.0 ** (np.asarray(db, dtype=float) / 10.0)


@dataclass(frozen=True)
class LinkBudget:
    """Transmit powers, antenna gains, penetration loss and noise inputs.

    penetration_on picks which hop the penetration loss multiplies:
    "tx_side" (default, transmitter-to-surface), "rx_side", or "both"
    (applied once per hop).
    """

    tx_power_w: float
    relay_tx_power_w: float
    bandwidth_hz: float
    noise_figure_db: float
    tx_gain_dbi: float = 0.0
    rx_gain_dbi: float = 0.0
    relay_gain_dbi: float = 0.0
    penetration_loss_db: float = 0.0
    penetration_on: str = "tx_side"

    def __post_init__(self):
        if self.tx_power_w <= 0 or self.relay_tx_power_w <= 0:
            raise ValueError("transmit powers must be positive")
        if self.bandwidth_hz <= 0:
            raise ValueError("bandwidth must be positive")
        if self.noise_figure_db < 0:
            raise ValueError("noise figure must be >= 0 dB")
        if self.penetration_loss_db > 0:
            raise ValueError("penetration_loss_db must be <= 0")
        if self.penetration_on not in ("tx_side", "rx_side", "both"):
            raise ValueError("penetration_on must be tx_side, rx_side or both")

    @property
    def tx_gain(self) -> float:
        return float(from_db(self.tx_gain_dbi))

    @property
    def rx_gain(self) -> float:
        return float(from_db(self.rx_gain_dbi))

    @property
    def relay_gain(self) -> float:
        return float(from_db(self.relay_gain_dbi))

    @property
    def penetration_loss(self) -> float:
        return float(from_db(self.penetration_loss_db))

    @property
    def tx_hop_penetration(self) -> float:
        """Linear penetration factor on the tx-to-surface (or tx-to-relay) hop."""
        if self.penetration_on in ("tx_side", "both"):
            return self.penetration_loss
        return 1.0

    @property
    def rx_hop_penetration(self) -> float:
        """Linear penetration factor on the surface-to-rx (or relay-to-rx) hop."""
        if self.penetration_on in ("rx_side", "both"):
            return self.penetration_loss
        return 1.0


@dataclass(frozen=True)
class CascadedChannel:
    """Per-element complex end-to-end coefficients with the element distances."""

    coefficients: np.ndarray
    d1_m: np.ndarray
    d2_m: np.ndarray

    def __post_init__(self):
        g = np.asarray(self.coefficients, dtype=complex)
        d1 = np.asarray(self.d1_m, dtype=float)
        d2 = np.asarray(self.d2_m, dtype=float)
        if not (g.shape == d1.shape == d2.shape) or g.ndim != 1:
            raise ValueError("coefficients, d1_m, d2_m must be 1-d and equal length")
        for arr, name in ((g, "coefficients"), (d1, "d1_m"), (d2, "d2_m")):
            arr = arr.copy()
            arr.flags.writeable = False
            object.__setattr__(self, name, arr)

    @property
    def num_elements(self) -> int:
        return self.coefficients.shape[0]


def freespace_gain(
    distance_m: float,
    gain_tx_linear: float,
    gain_rx_linear: float,
    wavelength_m: float,
) -> float:
    """Free-space power gain G_t * G_r * (lambda / (4 pi d))^2."""
    if distance_m <= 0:
        raise ValueError("distance must be positive")
    return (
        gain_tx_linear
        * gain_rx_linear
        * (wavelength_m / (FOUR_PI * distance_m)) ** 2
    )


def noise_power(budget: LinkBudget) -> float:
    """Thermal noise power in watts: -174 dBm/Hz plus bandwidth and noise figure."""
    dbm = -174.0 + 10.0 * np.log10(budget.bandwidth_hz) + budget.noise_figure_db
    return float(10.0 ** ((dbm - 30.0) / 10.0))


def mirror_end_to_end_gain(
    d1: float, d2: float, budget: LinkBudget, carrier: CarrierSpec
) -> float:
    """Power gain of an infinitely large ideal mirror in the surface plane.

    The mirror image of the transmitter sits d1 + d2 from the receiver, so the
    gain is the free-space gain over the summed distance (times antenna gains
    and penetration loss).
    """
    if d1 < 0 or d2 <= 0:
        raise ValueError("distances must be positive (d1 may be zero)")
    pen = budget.tx_hop_penetration * budget.rx_hop_penetration
    return pen * freespace_gain(
        d1 + d2, budget.tx_gain, budget.rx_gain, carrier.wavelength_m
    )


def cascaded_channel(
    array: RisArray,
    placement: Placement,
    budget: LinkBudget,
    carrier: CarrierSpec,
    cosine_factors: bool = False,
) -> CascadedChannel:
    """Point-source superposition coefficients for every surface element.

    g_n = sqrt(G_t G_r L_pen) * (A / (4 pi d1_n d2_n)) * exp(-j 2 pi (d1_n + d2_n) / lambda)

    with d1_n, d2_n the element-to-terminal distances. With cosine_factors the
    effective element area shrinks by sqrt(cos(theta1_n) * cos(theta2_n)),
    the projected-aperture factors toward each terminal.

    Point-source validity requires every element distance to exceed 10x the
    element side; violating elements raise with their index.
    """
    centers = array.element_centers
    to_tx = placement.tx_position[None, :] - centers
    to_rx = placement.rx_position[None, :] - centers
    d1 = np.linalg.norm(to_tx, axis=1)
    d2 = np.linalg.norm(to_rx, axis=1)
    limit = 10.0 * array.element_side_m
    bad = np.where((d1 <= limit) | (d2 <= limit))[0]
    if bad.size:
        raise ValueError(
            f"element {bad[0]} violates the point-source distance limit "
            f"({limit} m): d1={d1[bad[0]]!r}, d2={d2[bad[0]]!r}"
        )
    area = np.full(d1.shape, array.element_area_m2)
    if cosine_factors:
        cos1 = (to_tx @ placement.surface_normal) / d1
        cos2 = (to_rx @ placement.surface_normal) / d2
        area = area * np.sqrt(cos1 * cos2)
    pen = budget.tx_hop_penetration * budget.rx_hop_penetration
    amplitude = np.sqrt(budget.tx_gain * budget.rx_gain * pen) * area / (
        FOUR_PI * d1 * d2
    )
    if array.element_amplitudes is not None:
        amplitude = amplitude * array.element_amplitudes
    phase = -2.0 * np.pi * (d1 + d2) / carrier.wavelength_m
    coefficients = amplitude * np.exp(1j * phase)
    return CascadedChannel(coefficients=coefficients, d1_m=d1, d2_m=d2)


def far_field_amplitude_sum(
    total_area_m2: float,
    d1: float,
    d2: float,
    budget: LinkBudget,
    carrier: CarrierSpec,
) -> float:
    """Closed-form sum of |g_n| when both terminals are far from the surface.

    Equals N * sqrt(G_t G_r L_pen) * A / (4 pi d1 d2) written in terms of the
    total area N * A. Used as a cross-check oracle and in sizing bisections.
    """
    pen = budget.tx_hop_penetration * budget.rx_hop_penetration
    return (
        np.sqrt(budget.tx_gain * budget.rx_gain * pen)
        * total_area_m2
        / (FOUR_PI * d1 * d2)
    )
