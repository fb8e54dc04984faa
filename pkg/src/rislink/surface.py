"""Phase configurations, link evaluation, and far-field beam patterns."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .propagation import CascadedChannel, LinkBudget, noise_power
from .scene import CarrierSpec, Placement, RisArray

TWO_PI = 2.0 * np.pi


@dataclass(frozen=True)
class PhaseConfig:
    """Per-element applied phases in [0, 2 pi).

    quantization_bits records that phases sit on a 2^bits uniform grid;
    group_rows/group_cols record tile dimensions when phases are shared
    within rectangular element groups.
    """

    phases_rad: np.ndarray
    quantization_bits: int | None = None
    group_rows: int | None = None
    group_cols: int | None = None

    def __post_init__(self):
        phases = np.asarray(self.phases_rad, dtype=float)
        if phases.ndim != 1:
            raise ValueError("phases_rad must be 1-d")
        if phases.size and (phases.min() < 0.0 or phases.max() >= TWO_PI):
            raise ValueError("phases must lie in [0, 2*pi)")
        for name in ("quantization_bits", "group_rows", "group_cols"):
            value = getattr(self, name)
            if value is not None and (not isinstance(value, int) or value < 1):
                raise ValueError(f"{name} must be a positive integer")
        phases = phases.copy()
        phases.flags.writeable = False
        object.__setattr__(self, "phases_rad", phases)

    @property
    def num_elements(self) -> int:
        return self.phases_rad.shape[0]


@dataclass(frozen=True)
class LinkMetrics:
    """SNR (linear), spectral efficiency (bit/s/Hz), end-to-end gain (dB)."""

    snr_linear: float
    se_bits_per_hz: float
    end_to_end_gain_db: float


def _wrap_phase(phases: np.ndarray) -> np.ndarray:
    wrapped = np.mod(phases, TWO_PI)
    # mod can return exactly 2*pi for tiny negative inputs
    wrapped[wrapped >= TWO_PI] = 0.0
    return wrapped


def config_optimal(channel: CascadedChannel) -> PhaseConfig:
    """Conjugate phases: every term g_n * exp(j phi_n) becomes real positive."""
    if channel.num_elements < 1:
        raise ValueError("channel must have at least one element")
    return PhaseConfig(phases_rad=_wrap_phase(-np.angle(channel.coefficients)))


def config_mirror_mimicking(
    array: RisArray, placement: Placement, carrier: CarrierSpec
) -> PhaseConfig:
    """Linear phase gradient steering the specular frame onto tx/rx directions.

    phi_n = -(2 pi / lambda) * dot(u_i + u_r, r_n) mod 2 pi, with r_n the
    element offset from the surface center and u_i, u_r the unit directions
    from the center toward tx and rx. In the far field this cancels the
    element-dependent channel phase exactly (plane wave in, plane wave out);
    the phase at the surface center is 0. When rx sits in the specular
    direction of tx the tangential components cancel and the configuration is
    uniform.
    """
    r = array.element_centers - placement.surface_center[None, :]
    u_i = placement.tx_position - placement.surface_center
    u_i = u_i / np.linalg.norm(u_i)
    u_r = placement.rx_position - placement.surface_center
    u_r = u_r / np.linalg.norm(u_r)
    k = TWO_PI / carrier.wavelength_m
    phases = -k * (r @ (u_i + u_r))
    return PhaseConfig(phases_rad=_wrap_phase(phases))


def quantize_config(config: PhaseConfig, bits: int) -> PhaseConfig:
    """Snap each phase to the nearest of 2^bits uniform levels, ties down."""
    if bits < 1:
        raise ValueError("bits must be >= 1")
    levels = 2**bits
    step = TWO_PI / levels
    t = config.phases_rad / step + 0.5
    k = np.floor(t)
    k[t == k] -= 1.0  # exact midpoint rounds to the lower level
    k = np.mod(k, levels)
    return PhaseConfig(
        phases_rad=_wrap_phase(k * step),
        quantization_bits=bits,
        group_rows=config.group_rows,
        group_cols=config.group_cols,
    )


def group_index_map(array: RisArray, group_rows: int, group_cols: int) -> np.ndarray:
    """Element index -> group index for a group_rows x group_cols tiling.

    Groups are numbered row-major over the group grid, matching the
    row-major element ordering of RisArray.
    """
    nx, ny = array.elements_per_row, array.elements_per_col
    if group_rows < 1 or group_cols < 1:
        raise ValueError("group dimensions must be positive")
    if ny % group_rows or nx % group_cols:
        raise ValueError(
            f"group tile {group_rows}x{group_cols} does not divide the "
            f"{ny}x{nx} element grid"
        )
    iy, ix = np.divmod(np.arange(nx * ny), nx)
    return (iy // group_rows) * (nx // group_cols) + ix // group_cols


def group_config(
    channel: CascadedChannel, array: RisArray, group_rows: int, group_cols: int
) -> PhaseConfig:
    """Shared phase per element group: the conjugate of the group coefficient sum."""
    if channel.num_elements != array.num_elements:
        raise ValueError("channel and array sizes differ")
    idx = group_index_map(array, group_rows, group_cols)
    n_groups = idx.max() + 1
    sums = np.zeros(n_groups, dtype=complex)
    np.add.at(sums, idx, channel.coefficients)
    group_phases = _wrap_phase(-np.angle(sums))
    return PhaseConfig(
        phases_rad=group_phases[idx], group_rows=group_rows, group_cols=group_cols
    )


def evaluate(
    channel: CascadedChannel, config: PhaseConfig, budget: LinkBudget
) -> LinkMetrics:
    """SNR, SE and end-to-end gain of a configured surface.

    snr = P * |sum_n g_n exp(j phi_n)|^2 / sigma^2, summed in fixed element
    order so results are bit-reproducible across runs and thread counts.
    """
    if channel.num_elements != config.num_elements:
        raise ValueError(
            f"channel has {channel.num_elements} elements, "
            f"config has {config.num_elements}"
        )
    total = complex(np.sum(channel.coefficients * np.exp(1j * config.phases_rad)))
    gain = abs(total) ** 2
    snr = budget.tx_power_w * gain / noise_power(budget)
    gain_db = 10.0 * np.log10(gain) if gain > 0 else float("-inf")
    return LinkMetrics(
        snr_linear=float(snr),
        se_bits_per_hz=float(np.log2(1.0 + snr)),
        end_to_end_gain_db=float(gain_db),
    )


def _surface_frame(array: RisArray):
    """Recover center and unit axes from the element grid itself."""
    nx, ny = array.elements_per_row, array.elements_per_col
    if nx < 2 or ny < 2:
        raise ValueError("beam pattern needs at least a 2x2 element grid")
    centers = array.element_centers
    center = centers.mean(axis=0)
    x_dir = centers[1] - centers[0]
    x_dir = x_dir / np.linalg.norm(x_dir)
    y_dir = centers[nx] - centers[0]
    y_dir = y_dir / np.linalg.norm(y_dir)
    normal = np.cross(x_dir, y_dir)
    return center, x_dir, y_dir, normal


def beam_pattern(
    array: RisArray,
    config: PhaseConfig,
    incident_direction: np.ndarray,
    observation_azimuths: np.ndarray,
    carrier: CarrierSpec,
) -> np.ndarray:
    """Far-field array-factor power over an azimuth cut, normalized to max 1.

    incident_direction points from the surface center toward the source.
    observation_azimuths are degrees in (-90, 90) measured from the surface
    normal within the plane spanned by the grid x axis and the normal; the
    per-element phase toward an observation direction u_obs (pointing away
    from the surface) is phi_n + (2 pi / lambda) * dot(u_i + u_obs, r_n).
    """
    if config.num_elements != array.num_elements:
        raise ValueError("config and array sizes differ")
    u_i = np.asarray(incident_direction, dtype=float)
    norm = np.linalg.norm(u_i)
    if abs(norm - 1.0) > 1e-6:
        raise ValueError("incident_direction must be a unit vector")
    u_i = u_i / norm
    az = np.asarray(observation_azimuths, dtype=float)
    if az.size and (az.min() <= -90.0 or az.max() >= 90.0):
        raise ValueError("observation azimuths must lie within (-90, 90) degrees")
    center, x_dir, _, normal = _surface_frame(array)
    r = array.element_centers - center[None, :]
    k = TWO_PI / carrier.wavelength_m
    rad = np.deg2rad(az)
    u_obs = np.outer(np.sin(rad), x_dir) + np.outer(np.cos(rad), normal)
    base = config.phases_rad + k * (r @ u_i)
    field = np.empty(az.size, dtype=complex)
    chunk = 256  # bound the (angles x elements) phase matrix
    for lo in range(0, az.size, chunk):
        phases = base[None, :] + k * (u_obs[lo : lo + chunk] @ r.T)
        field[lo : lo + chunk] = np.exp(1j * phases).sum(axis=1)
    power = np.abs(field) ** 2
    peak = power.max()
    if peak <= 0:
        raise ValueError("degenerate pattern with zero power")
    return power / peak


def hpbw(pattern: np.ndarray, angles: np.ndarray) -> float:
    """Half-power beamwidth in degrees from a sampled pattern.

    The pattern must have a unique global maximum strictly inside the angle
    range; the two -3 dB crossings bracketing the peak are located by linear
    interpolation between samples.
    """
    p = np.asarray(pattern, dtype=float)
    a = np.asarray(angles, dtype=float)
    if p.shape != a.shape or p.ndim != 1 or p.size < 3:
        raise ValueError("pattern and angles must be equal-length 1-d, size >= 3")
    peak_val = p.max()
    peaks = np.where(p == peak_val)[0]
    if peaks.size != 1 or peaks[0] == 0 or peaks[0] == p.size - 1:
        raise ValueError("pattern needs a unique interior global maximum")
    k0 = int(peaks[0])
    half = peak_val / 2.0

    def cross(i: int, j: int) -> float:
        # linear interpolation on the segment from sample i to sample j
        return a[i] + (half - p[i]) * (a[j] - a[i]) / (p[j] - p[i])

    left = None
    for i in range(k0 - 1, -1, -1):
        if p[i] < half:
            left = cross(i, i + 1)
            break
    right = None
    for i in range(k0 + 1, p.size):
        if p[i] < half:
            right = cross(i, i - 1)
            break
    if left is None or right is None:
        raise ValueError("no -3 dB crossing inside the sampled range")
    return float(right - left)
