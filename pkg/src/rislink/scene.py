"""Scene geometry: carrier, terminal placement, planar surface layout."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

SPEED_OF_LIGHT_M_S = 299792458.0


def _as_vec3(value, name: str) -> np.ndarray:
    v = np.asarray(value, dtype=float)
    if v.shape != (3,):
        raise ValueError(f"{name} must be a 3-vector, got shape {v.shape}")
    if not np.all(np.isfinite(v)):
        raise ValueError(f"{name} must be finite")
    v = v.copy()
    v.flags.writeable = False
    return v


@dataclass(frozen=True)
class CarrierSpec:
    """Carrier description; frequency and wavelength are kept consistent.

    Scenario files may pin the wavelength directly so that round numbers
    (0.1 m at nominally 3 GHz) survive bit-exactly.
    """

    frequency_hz: float
    wavelength_m: float

    def __post_init__(self):
        if self.frequency_hz <= 0 or self.wavelength_m <= 0:
            raise ValueError("carrier frequency and wavelength must be positive")
        rel = abs(self.frequency_hz * self.wavelength_m / SPEED_OF_LIGHT_M_S - 1.0)
        if rel > 1e-12:
            raise ValueError(
                f"frequency and wavelength disagree with c (relative error {rel:.3g})"
            )

    @classmethod
    def from_frequency(cls, frequency_hz: float) -> "CarrierSpec":
        if not frequency_hz > 0.0:
            raise ValueError("frequency_hz must be positive")
        return cls(float(frequency_hz), SPEED_OF_LIGHT_M_S / float(frequency_hz))

    @classmethod
    def from_wavelength(cls, wavelength_m: float) -> "CarrierSpec":
        if not wavelength_m > 0.0:
            raise ValueError("wavelength_m must be positive")
        return cls(SPEED_OF_LIGHT_M_S / float(wavelength_m), float(wavelength_m))


@dataclass(frozen=True)
class Placement:
    """Transmitter, receiver and surface frame (center, normal, in-plane x axis).

    Both terminals must sit strictly on the illuminated side of the surface,
    i.e. have a positive component along the normal.
    """

    tx_position: np.ndarray
    rx_position: np.ndarray
    surface_center: np.ndarray
    surface_normal: np.ndarray
    surface_x_axis: np.ndarray

    def __post_init__(self):
        for name in (
            "tx_position",
            "rx_position",
            "surface_center",
            "surface_normal",
            "surface_x_axis",
        ):
            object.__setattr__(self, name, _as_vec3(getattr(self, name), name))
        for name in ("surface_normal", "surface_x_axis"):
            norm = float(np.linalg.norm(getattr(self, name)))
            if abs(norm - 1.0) > 1e-9:
                raise ValueError(f"{name} must be unit length, got norm {norm!r}")
        if abs(float(np.dot(self.surface_normal, self.surface_x_axis))) > 1e-9:
            raise ValueError("surface_x_axis must be orthogonal to surface_normal")
        for name in ("tx_position", "rx_position"):
            offset = getattr(self, name) - self.surface_center
            if float(np.dot(offset, self.surface_normal)) <= 0.0:
                raise ValueError(f"{name} must be strictly on the illuminated side")

    @property
    def surface_y_axis(self) -> np.ndarray:
        return np.cross(self.surface_normal, self.surface_x_axis)

    @property
    def d1_m(self) -> float:
        """Center distance from the transmitter to the surface."""
        return float(np.linalg.norm(self.tx_position - self.surface_center))

    @property
    def d2_m(self) -> float:
        """Center distance from the receiver to the surface."""
        return float(np.linalg.norm(self.rx_position - self.surface_center))


@dataclass(frozen=True)
class RisArray:
    """Planar grid of square elements, gap-free, centered on the surface center.

    element_centers is an (N, 3) array in row-major grid order: index
    n = iy * elements_per_row + ix, with ix running along surface_x_axis.
    element_amplitudes optionally scales each element's reflection amplitude
    (lossless unit scatterers by default).
    """

    element_centers: np.ndarray
    element_area_m2: float
    elements_per_row: int
    elements_per_col: int
    element_amplitudes: np.ndarray | None = None

    def __post_init__(self):
        centers = np.asarray(self.element_centers, dtype=float)
        if centers.ndim != 2 or centers.shape[1] != 3:
            raise ValueError("element_centers must have shape (N, 3)")
        if self.element_area_m2 <= 0:
            raise ValueError("element_area_m2 must be positive")
        n = self.elements_per_row * self.elements_per_col
        if centers.shape[0] != n:
            raise ValueError(
                f"element_centers has {centers.shape[0]} rows, grid says {n}"
            )
        centers = centers.copy()
        centers.flags.writeable = False
        object.__setattr__(self, "element_centers", centers)
        if self.element_amplitudes is not None:
            amps = np.asarray(self.element_amplitudes, dtype=float)
            if amps.shape != (n,):
                raise ValueError("element_amplitudes must have shape (N,)")
            if np.any(amps <= 0) or np.any(amps > 1):
                raise ValueError("element amplitudes must lie in (0, 1]")
            amps = amps.copy()
            amps.flags.writeable = False
            object.__setattr__(self, "element_amplitudes", amps)

    @property
    def num_elements(self) -> int:
        return self.elements_per_row * self.elements_per_col

    @property
    def element_side_m(self) -> float:
        return float(np.sqrt(self.element_area_m2))


def build_planar_ris(
    placement: Placement,
    carrier: CarrierSpec,
    side_x_m: float,
    side_y_m: float,
    element_side_fraction: float = 0.2,
) -> RisArray:
    """Tile a side_x by side_y rectangle with square elements.

    Element side = element_side_fraction * wavelength. Counts are floored per
    axis, the grid is centered on placement.surface_center, and element
    positions follow the placement's in-plane axes.
    """
    if side_x_m <= 0 or side_y_m <= 0:
        raise ValueError("surface sides must be positive")
    if not 0 < element_side_fraction <= 1:
        raise ValueError("element_side_fraction must be in (0, 1]")
    elem_side = element_side_fraction * carrier.wavelength_m
    # 1e-9 slack so sides that are exact multiples of the element side do not
    # lose a row to float dust (0.3 / 0.02 -> 14.999...)
    nx = int(np.floor(side_x_m / elem_side + 1e-9))
    ny = int(np.floor(side_y_m / elem_side + 1e-9))
    if nx < 1 or ny < 1:
        raise ValueError(
            f"surface smaller than one element ({side_x_m} x {side_y_m} m "
            f"vs element side {elem_side} m)"
        )
    xs = (np.arange(nx) - (nx - 1) / 2.0) * elem_side
    ys = (np.arange(ny) - (ny - 1) / 2.0) * elem_side
    gx, gy = np.meshgrid(xs, ys)  # row-major: y varies slowest
    centers = (
        placement.surface_center[None, :]
        + gx.reshape(-1, 1) * placement.surface_x_axis[None, :]
        + gy.reshape(-1, 1) * placement.surface_y_axis[None, :]
    )
    return RisArray(
        element_centers=centers,
        element_area_m2=elem_side * elem_side,
        elements_per_row=nx,
        elements_per_col=ny,
    )


def surface_area(array: RisArray) -> float:
    """Total aperture area in m^2 (element count times element area)."""
    return array.num_elements * array.element_area_m2
