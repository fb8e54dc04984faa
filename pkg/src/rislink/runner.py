"""Scenario orchestration: JSON scenarios in, CSV tables and a manifest out.

Determinism contract: every experiment is a pure function of (scenario, seed);
repeated runs produce byte-identical CSV regardless of --threads, because
sweep rows are computed independently, buffered, and written in sweep order,
and Monte-Carlo noise uses one counter-derived sub-stream per pilot slot.

Decimation note: sweeps that grow the surface to very large areas support
`decimation_cell_m`, which tiles the surface with coarser square cells (at
most one wavelength) instead of the physical fifth-wavelength elements, each
cell acting as one element with the cell's area. Under the conjugate-phase
configuration the SNR depends on the element amplitude sum, which the coarser
tiling approximates to well under a percent, while element counts (and
runtime) drop by orders of magnitude. Decimated surfaces are only used for
amplitude-sum metrics; per-element phase effects (quantization, estimation)
always use the physical grid.
"""

from __future__ import annotations

import dataclasses
import hashlib
import json
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .baselines import df_relay_se
from .estimation import (
    effective_se,
    grouped_dft_sweep,
    ls_estimate,
    select_and_score,
    simulate_sweep,
)
from .propagation import (
    LinkBudget,
    cascaded_channel,
    mirror_end_to_end_gain,
    noise_power,
    to_db,
)
from .scene import CarrierSpec, Placement, RisArray, build_planar_ris
from .surface import (
    PhaseConfig,
    beam_pattern,
    config_mirror_mimicking,
    config_optimal,
    evaluate,
)

TOOL_NAME = "rislink"
TOOL_VERSION = "0.1.0"


class ScenarioError(ValueError):
    """Scenario file or parameter validation failure (CLI exit code 2)."""


def _strictly_increasing(values, name: str) -> tuple:
    out = tuple(float(v) for v in values)
    if not out:
        raise ScenarioError(f"{name} must be non-empty")
    if any(b <= a for a, b in zip(out, out[1:])):
        raise ScenarioError(f"{name} must be strictly increasing")
    return out


@dataclass(frozen=True)
class BeamSweep:
    """Azimuth-cut settings for the beam-pattern experiment."""

    aperture_wavelengths: float = 10.0
    azimuth_min_deg: float = -80.0
    azimuth_max_deg: float = 80.0
    num_points: int = 1601

    def __post_init__(self):
        if self.aperture_wavelengths <= 0:
            raise ScenarioError("beam aperture must be positive")
        if not -90.0 < self.azimuth_min_deg < self.azimuth_max_deg < 90.0:
            raise ScenarioError("beam azimuth range must be inside (-90, 90)")
        if self.num_points < 3:
            raise ScenarioError("beam sweep needs at least 3 points")


@dataclass(frozen=True)
class EstimationSweep:
    """Monte-Carlo grid for the pilot-sweep estimation experiment.

    The surface side is reduced relative to the main scenario so that the
    ungrouped (grouping 1) plan matrix stays tractable.
    """

    surface_side_m: float = 0.8
    groupings: tuple = (1, 2, 4)
    oversampling: tuple = (1, 2)
    pilot_power_w: float = 1.0
    pilot_symbols_per_config: int = 1
    num_seeds: int = 10
    coherence_block_symbols: int = 10000
    noiseless: bool = False

    def __post_init__(self):
        object.__setattr__(self, "groupings", tuple(int(g) for g in self.groupings))
        object.__setattr__(
            self, "oversampling", tuple(int(o) for o in self.oversampling)
        )
        if self.surface_side_m <= 0:
            raise ScenarioError("estimation surface side must be positive")
        for name, seq in (("groupings", self.groupings), ("oversampling", self.oversampling)):
            if not seq or any(v < 1 for v in seq):
                raise ScenarioError(f"estimation {name} must be positive integers")
            if any(b <= a for a, b in zip(seq, seq[1:])):
                raise ScenarioError(f"estimation {name} must be strictly increasing")
        if self.pilot_power_w <= 0:
            raise ScenarioError("pilot power must be positive")
        if self.pilot_symbols_per_config < 1 or self.num_seeds < 1:
            raise ScenarioError("pilot symbols and seed count must be >= 1")
        if self.coherence_block_symbols < 1:
            raise ScenarioError("coherence block must be >= 1 symbol")


@dataclass(frozen=True)
class Scenario:
    """Everything the experiments need, validated once at load time."""

    carrier: CarrierSpec
    placement: Placement
    budget: LinkBudget
    side_x_m: float
    side_y_m: float
    area_sweep_m2: tuple
    distance_sweep_m: tuple
    se_targets: tuple
    element_side_fraction: float = 0.2
    cosine_factors: bool = False
    seed: int = 1
    beam: BeamSweep = BeamSweep()
    estimation: EstimationSweep = EstimationSweep()
    decimation_cell_m: float | None = None
    output_dir: str = "out"
    source_sha256: str = ""

    def __post_init__(self):
        if self.side_x_m <= 0 or self.side_y_m <= 0:
            raise ScenarioError("surface sides must be positive")
        if not 0 < self.element_side_fraction <= 1:
            raise ScenarioError("element_side_fraction must be in (0, 1]")
        object.__setattr__(
            self, "area_sweep_m2", _strictly_increasing(self.area_sweep_m2, "area_sweep_m2")
        )
        object.__setattr__(
            self,
            "distance_sweep_m",
            _strictly_increasing(self.distance_sweep_m, "distance_sweep_m"),
        )
        object.__setattr__(
            self, "se_targets", _strictly_increasing(self.se_targets, "se_targets")
        )
        if self.seed < 0 or self.seed > 2**64 - 1:
            raise ScenarioError("seed must fit in an unsigned 64-bit integer")
        if self.decimation_cell_m is not None:
            cell = self.decimation_cell_m
            physical = self.element_side_fraction * self.carrier.wavelength_m
            if cell < physical - 1e-12 or cell > self.carrier.wavelength_m + 1e-12:
                raise ScenarioError(
                    "decimation cell must lie between the physical element side "
                    "and one wavelength"
                )

    @property
    def element_area_m2(self) -> float:
        return (self.element_side_fraction * self.carrier.wavelength_m) ** 2


_BUDGET_KEYS = {
    "tx_power_w",
    "relay_tx_power_w",
    "bandwidth_hz",
    "noise_figure_db",
    "tx_gain_dbi",
    "rx_gain_dbi",
    "relay_gain_dbi",
    "penetration_loss_db",
    "penetration_on",
}
_TOP_KEYS = {
    "frequency_hz",
    "wavelength_m",
    "tx_position",
    "rx_position",
    "surface_center",
    "surface_normal",
    "surface_x_axis",
    "side_x_m",
    "side_y_m",
    "element_side_fraction",
    "cosine_factors",
    "seed",
    "budget",
    "area_sweep_m2",
    "distance_sweep_m",
    "se_targets",
    "beam",
    "estimation",
    "decimation_cell_m",
    "output_dir",
}


def scenario_from_dict(data: dict, source_sha256: str = "") -> Scenario:
    """Validate a parsed scenario dictionary; raises ScenarioError."""
    if not isinstance(data, dict):
        raise ScenarioError("scenario root must be a JSON object")
    unknown = set(data) - _TOP_KEYS
    if unknown:
        raise ScenarioError(f"unknown scenario keys: {sorted(unknown)}")
    try:
        if "frequency_hz" in data and "wavelength_m" in data:
            carrier = CarrierSpec(data["frequency_hz"], data["wavelength_m"])
        elif "wavelength_m" in data:
            carrier = CarrierSpec.from_wavelength(data["wavelength_m"])
        elif "frequency_hz" in data:
            carrier = CarrierSpec.from_frequency(data["frequency_hz"])
        else:
            raise ScenarioError("scenario needs frequency_hz or wavelength_m")
        for key in ("tx_position", "rx_position", "surface_center",
                    "surface_normal", "surface_x_axis", "side_x_m", "side_y_m",
                    "budget", "area_sweep_m2", "distance_sweep_m", "se_targets"):
            if key not in data:
                raise ScenarioError(f"scenario is missing required key {key!r}")
        placement = Placement(
            tx_position=data["tx_position"],
            rx_position=data["rx_position"],
            surface_center=data["surface_center"],
            surface_normal=data["surface_normal"],
            surface_x_axis=data["surface_x_axis"],
        )
        budget_data = data["budget"]
        if not isinstance(budget_data, dict):
            raise ScenarioError("budget must be an object")
        unknown = set(budget_data) - _BUDGET_KEYS
        if unknown:
            raise ScenarioError(f"unknown budget keys: {sorted(unknown)}")
        budget = LinkBudget(**budget_data)
        beam = BeamSweep(**data.get("beam", {}))
        estimation = EstimationSweep(**data.get("estimation", {}))
        return Scenario(
            carrier=carrier,
            placement=placement,
            budget=budget,
            side_x_m=float(data["side_x_m"]),
            side_y_m=float(data["side_y_m"]),
            area_sweep_m2=data["area_sweep_m2"],
            distance_sweep_m=data["distance_sweep_m"],
            se_targets=data["se_targets"],
            element_side_fraction=float(data.get("element_side_fraction", 0.2)),
            cosine_factors=bool(data.get("cosine_factors", False)),
            seed=int(data.get("seed", 1)),
            beam=beam,
            estimation=estimation,
            decimation_cell_m=(
                float(data["decimation_cell_m"])
                if data.get("decimation_cell_m") is not None
                else None
            ),
            output_dir=str(data.get("output_dir", "out")),
            source_sha256=source_sha256,
        )
    except ScenarioError:
        raise
    except (TypeError, ValueError) as exc:
        raise ScenarioError(str(exc)) from exc


def load_scenario(path) -> Scenario:
    """Load and validate a scenario JSON file."""
    try:
        raw = Path(path).read_bytes()
    except OSError as exc:
        raise ScenarioError(f"cannot read scenario {path}: {exc}") from exc
    try:
        data = json.loads(raw.decode("utf-8"))
    except (UnicodeDecodeError, json.JSONDecodeError) as exc:
        raise ScenarioError(f"scenario {path} is not valid JSON: {exc}") from exc
    return scenario_from_dict(data, hashlib.sha256(raw).hexdigest())


def _map_ordered(fn, items, threads: int):
    """Apply fn over items, optionally in a thread pool, preserving order."""
    if threads <= 1:
        return [fn(item) for item in items]
    with ThreadPoolExecutor(max_workers=threads) as pool:
        return list(pool.map(fn, items))


def _effective_fraction(scenario: Scenario) -> float:
    if scenario.decimation_cell_m is not None:
        return scenario.decimation_cell_m / scenario.carrier.wavelength_m
    return scenario.element_side_fraction


def _square_surface(scenario: Scenario, area_m2: float) -> RisArray:
    side = math.sqrt(area_m2)
    return build_planar_ris(
        scenario.placement,
        scenario.carrier,
        side,
        side,
        _effective_fraction(scenario),
    )


def _optimal_metrics(scenario: Scenario, array: RisArray):
    channel = cascaded_channel(
        array,
        scenario.placement,
        scenario.budget,
        scenario.carrier,
        scenario.cosine_factors,
    )
    return evaluate(channel, config_optimal(channel), scenario.budget)


def experiment_area_vs_se(scenario: Scenario, threads: int = 1) -> list[dict]:
    """SE of the optimally configured surface and of the DF relay per area."""

    def point(area: float) -> dict:
        ris = _optimal_metrics(scenario, _square_surface(scenario, area))
        df = df_relay_se(
            area,
            scenario.placement.d1_m,
            scenario.placement.d2_m,
            scenario.budget,
            scenario.carrier,
        )
        return {
            "area_m2": area,
            "se_ris": ris.se_bits_per_hz,
            "se_df": df.se_bits_per_hz,
        }

    return _map_ordered(point, scenario.area_sweep_m2, threads)


def experiment_snr_vs_area(scenario: Scenario, threads: int = 1) -> list[dict]:
    """End-to-end SNR (dB) of surface and relay per swept area."""

    def point(area: float) -> dict:
        ris = _optimal_metrics(scenario, _square_surface(scenario, area))
        df = df_relay_se(
            area,
            scenario.placement.d1_m,
            scenario.placement.d2_m,
            scenario.budget,
            scenario.carrier,
        )
        return {
            "area_m2": area,
            "snr_ris_db": float(to_db(ris.snr_linear)),
            "snr_df_db": float(to_db(df.snr_linear)),
        }

    return _map_ordered(point, scenario.area_sweep_m2, threads)


def experiment_pathloss_vs_distance(scenario: Scenario, threads: int = 1) -> list[dict]:
    """End-to-end gain vs rx distance: optimal, mirror-mimicking, ideal mirror.

    The receiver slides along its original ray from the surface center; the
    mirror-mimicking configuration is recomputed for each placement (for a
    boresight receiver it is the same gradient at every distance).
    """
    placement = scenario.placement
    array = build_planar_ris(
        placement,
        scenario.carrier,
        scenario.side_x_m,
        scenario.side_y_m,
        _effective_fraction(scenario),
    )
    ray = placement.rx_position - placement.surface_center
    ray = ray / np.linalg.norm(ray)

    def point(d2: float) -> dict:
        moved = dataclasses.replace(
            placement, rx_position=placement.surface_center + d2 * ray
        )
        channel = cascaded_channel(
            array, moved, scenario.budget, scenario.carrier, scenario.cosine_factors
        )
        best = evaluate(channel, config_optimal(channel), scenario.budget)
        mimic = evaluate(
            channel,
            config_mirror_mimicking(array, moved, scenario.carrier),
            scenario.budget,
        )
        mirror = mirror_end_to_end_gain(
            placement.d1_m, d2, scenario.budget, scenario.carrier
        )
        return {
            "d2_m": d2,
            "gain_optimal_db": best.end_to_end_gain_db,
            "gain_mirror_mimicking_db": mimic.end_to_end_gain_db,
            "gain_ideal_mirror_db": float(to_db(mirror)),
        }

    return _map_ordered(point, scenario.distance_sweep_m, threads)


def experiment_beampattern(scenario: Scenario, threads: int = 1) -> list[dict]:
    """Azimuth cut of a uniform-phase boresight beam for the configured aperture."""
    beam = scenario.beam
    side = beam.aperture_wavelengths * scenario.carrier.wavelength_m
    array = build_planar_ris(
        scenario.placement,
        scenario.carrier,
        side,
        side,
        scenario.element_side_fraction,
    )
    config = PhaseConfig(phases_rad=np.zeros(array.num_elements))
    azimuths = np.linspace(
        beam.azimuth_min_deg, beam.azimuth_max_deg, beam.num_points
    )
    pattern = beam_pattern(
        array,
        config,
        scenario.placement.surface_normal,
        azimuths,
        scenario.carrier,
    )
    return [
        {
            "azimuth_deg": float(az),
            "power_norm": float(p),
            "power_db": float(to_db(max(p, 1e-30))),
        }
        for az, p in zip(azimuths, pattern)
    ]


def experiment_estimation(scenario: Scenario, threads: int = 1) -> list[dict]:
    """Mean estimation loss and net SE over the grouping/oversampling grid.

    Each row averages num_seeds Monte-Carlo trials; the trial seed is derived
    from (scenario.seed, row index, trial index) so rows are independent of
    execution order and thread count.
    """
    est = scenario.estimation
    array = build_planar_ris(
        scenario.placement,
        scenario.carrier,
        est.surface_side_m,
        est.surface_side_m,
        scenario.element_side_fraction,
    )
    channel = cascaded_channel(
        array,
        scenario.placement,
        scenario.budget,
        scenario.carrier,
        scenario.cosine_factors,
    )
    sigma2 = 0.0 if est.noiseless else noise_power(scenario.budget)
    grid = [
        (row, g, os)
        for row, (g, os) in enumerate(
            (g, os) for g in est.groupings for os in est.oversampling
        )
    ]

    def point(item) -> dict:
        row, grouping, oversampling = item
        plan = grouped_dft_sweep(
            array,
            grouping,
            grouping,
            oversampling,
            pilot_power_w=est.pilot_power_w,
            pilot_symbols_per_config=est.pilot_symbols_per_config,
        )
        losses = np.empty(est.num_seeds)
        net_se = np.empty(est.num_seeds)
        for trial in range(est.num_seeds):
            seq = np.random.SeedSequence(
                entropy=scenario.seed, spawn_key=(row, trial)
            )
            trial_seed = int(seq.generate_state(1, np.uint64)[0])
            samples = simulate_sweep(channel, plan, sigma2, seed=trial_seed)
            result = select_and_score(
                channel, ls_estimate(samples, plan), scenario.budget, plan=plan
            )
            losses[trial] = result.snr_loss_vs_perfect_csi_db
            selected_se = math.log2(1.0 + 10.0 ** (result.post_config_snr_db / 10.0))
            net_se[trial] = effective_se(
                selected_se, result.pilot_slots_used, est.coherence_block_symbols
            )
        return {
            "grouping": grouping,
            "oversampling": oversampling,
            "pilot_slots": plan.num_slots * plan.pilot_symbols_per_config,
            "snr_loss_db": float(losses.mean()),
            "effective_se": float(net_se.mean()),
        }

    return _map_ordered(point, grid, threads)


EXPERIMENTS = {
    "area_vs_se": (
        "area_vs_se.csv",
        ("area_m2", "se_ris", "se_df"),
        experiment_area_vs_se,
    ),
    "snr_vs_area": (
        "snr_vs_area.csv",
        ("area_m2", "snr_ris_db", "snr_df_db"),
        experiment_snr_vs_area,
    ),
    "pathloss_vs_distance": (
        "pathloss_vs_distance.csv",
        ("d2_m", "gain_optimal_db", "gain_mirror_mimicking_db", "gain_ideal_mirror_db"),
        experiment_pathloss_vs_distance,
    ),
    "beam_pattern": (
        "beam_pattern.csv",
        ("azimuth_deg", "power_norm", "power_db"),
        experiment_beampattern,
    ),
    "estimation": (
        "estimation_sweep.csv",
        ("grouping", "oversampling", "pilot_slots", "snr_loss_db", "effective_se"),
        experiment_estimation,
    ),
}


def _format_value(value) -> str:
    if isinstance(value, (int, np.integer)) and not isinstance(value, bool):
        return str(int(value))
    # repr gives the shortest float string that round-trips exactly
    return repr(float(value))


def write_csv(path, header, rows) -> None:
    """UTF-8 CSV with '.' decimals, '\\n' line ends, repr-exact floats."""
    with open(path, "w", encoding="utf-8", newline="") as handle:
        handle.write(",".join(header) + "\n")
        for row in rows:
            handle.write(",".join(_format_value(row[key]) for key in header) + "\n")


def _manifest_body(scenario: Scenario, outputs: dict) -> dict:
    return {
        "tool": TOOL_NAME,
        "version": TOOL_VERSION,
        "seed": scenario.seed,
        "scenario_sha256": scenario.source_sha256,
        "cosine_factors": scenario.cosine_factors,
        "outputs": dict(sorted(outputs.items())),
    }


def write_manifest(out_dir, scenario: Scenario, outputs: dict) -> Path:
    """Write manifest.json, merging output entries from a previous run.

    No timestamps: the manifest must be byte-reproducible like the CSVs.
    """
    path = Path(out_dir) / "manifest.json"
    merged = dict(outputs)
    if path.exists():
        try:
            previous = json.loads(path.read_text(encoding="utf-8"))
            merged = {**previous.get("outputs", {}), **outputs}
        except (json.JSONDecodeError, UnicodeDecodeError, AttributeError):
            pass  # unreadable manifest is replaced outright
    body = _manifest_body(scenario, merged)
    path.write_text(json.dumps(body, indent=2, sort_keys=True) + "\n", encoding="utf-8")
    return path


def run_experiment(name: str, scenario: Scenario, out_dir, threads: int = 1) -> Path:
    """Run one experiment, write its CSV, update the manifest."""
    filename, header, fn = EXPERIMENTS[name]
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    rows = fn(scenario, threads=threads)
    path = out / filename
    write_csv(path, header, rows)
    write_manifest(out, scenario, {name: filename})
    return path


def run_all(scenario: Scenario, out_dir, threads: int = 1) -> dict:
    """Run every experiment; returns {experiment: csv filename}."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    outputs = {}
    for name, (filename, header, fn) in EXPERIMENTS.items():
        rows = fn(scenario, threads=threads)
        write_csv(out / filename, header, rows)
        outputs[name] = filename
    write_manifest(out, scenario, outputs)
    return outputs
