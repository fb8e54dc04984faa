"""CSV-to-figure rendering for the simulator's experiment tables.

Consumes only the delimited files and manifest the simulator writes; nothing
is recomputed here. Every experiment has a default figure recipe, and custom
recipes can be loaded from FigureSpec JSON. Each figure is written as a PNG
and an SVG sibling.
"""

from __future__ import annotations

import csv
import json
import warnings
from dataclasses import dataclass
from pathlib import Path

import matplotlib

matplotlib.use("Agg")  # file output only; must run before pyplot loads

import matplotlib.pyplot as plt
import numpy as np

_SCALES = ("linear", "log")


@dataclass(frozen=True)
class FigureSpec:
    """One CSV in, one figure out: columns, scales, annotations, destination.

    output_path is an extension-free base; render_figure writes .png and .svg.
    slope_guides are power-law exponents drawn through the first point of the
    first series: a pure power law on a log y axis, 10*slope dB per x decade
    on a linear y axis holding decibel data. crossing names two y columns
    whose first intersection gets a marker and a text callout.
    """

    input_csv: str | Path
    x_column: str
    y_columns: tuple
    output_path: str | Path
    x_scale: str = "linear"
    y_scale: str = "linear"
    slope_guides: tuple = ()
    crossing: tuple | None = None
    sort_by_x: bool = False
    title: str = ""
    x_label: str = ""
    y_label: str = ""

    def __post_init__(self):
        if isinstance(self.y_columns, str):
            raise ValueError("y_columns must be a sequence of column names")
        object.__setattr__(self, "y_columns", tuple(self.y_columns))
        object.__setattr__(
            self, "slope_guides", tuple(float(s) for s in self.slope_guides)
        )
        if not self.y_columns:
            raise ValueError("y_columns must name at least one column")
        for scale in (self.x_scale, self.y_scale):
            if scale not in _SCALES:
                raise ValueError(f"axis scale must be one of {_SCALES}, got {scale!r}")
        if self.crossing is not None:
            pair = tuple(self.crossing)
            if len(pair) != 2:
                raise ValueError("crossing needs exactly two column names")
            object.__setattr__(self, "crossing", pair)


def read_table(path) -> dict:
    """Parse a simulator CSV into named float columns.

    Raises ValueError for an empty file, fewer than two data rows, or a
    malformed line, naming the offending line number.
    """
    path = Path(path)
    with open(path, encoding="utf-8", newline="") as handle:
        reader = csv.reader(handle)
        try:
            header = next(reader)
        except StopIteration:
            raise ValueError(f"{path.name} is empty") from None
        rows = []
        for number, row in enumerate(reader, start=2):
            if len(row) != len(header):
                raise ValueError(
                    f"{path.name} line {number}: expected {len(header)} cells, "
                    f"got {len(row)}"
                )
            try:
                rows.append([float(cell) for cell in row])
            except ValueError:
                raise ValueError(
                    f"{path.name} line {number}: non-numeric cell in {row!r}"
                ) from None
    if len(rows) < 2:
        raise ValueError(f"{path.name} needs at least 2 data rows, found {len(rows)}")
    data = np.asarray(rows)
    return {name: data[:, i] for i, name in enumerate(header)}


def _column(table: dict, name: str, path) -> np.ndarray:
    if name not in table:
        raise ValueError(
            f"column {name!r} not in {Path(path).name} (has {sorted(table)})"
        )
    return table[name]


def _slope_guide(ax, x: np.ndarray, y: np.ndarray, slope: float, y_scale: str):
    x0, y0 = x[0], y[0]
    if x0 <= 0 or np.any(x <= 0):
        raise ValueError("slope guides need strictly positive x data")
    if y_scale == "log":
        guide = y0 * (x / x0) ** slope
    else:
        guide = y0 + 10.0 * slope * np.log10(x / x0)
    ax.plot(
        x, guide, linestyle="--", linewidth=1.0, color="gray",
        label=f"slope {slope:g} guide",
    )


def _mark_crossing(ax, x: np.ndarray, a: np.ndarray, b: np.ndarray):
    diff = a - b
    flips = np.flatnonzero(np.sign(diff[:-1]) != np.sign(diff[1:]))
    if flips.size == 0:
        warnings.warn("crossing columns never intersect; annotation skipped")
        return
    i = int(flips[0])
    t = diff[i] / (diff[i] - diff[i + 1])
    cx = x[i] + t * (x[i + 1] - x[i])
    cy = a[i] + t * (a[i + 1] - a[i])
    ax.plot([cx], [cy], marker="o", color="black", markersize=6, zorder=5)
    ax.annotate(
        f"crossing at {cx:.3g}", (cx, cy),
        textcoords="offset points", xytext=(8, 8),
    )


def build_figure(spec: FigureSpec):
    """Assemble the matplotlib figure for a spec without writing files."""
    table = read_table(spec.input_csv)
    x = _column(table, spec.x_column, spec.input_csv)
    series = {name: _column(table, name, spec.input_csv) for name in spec.y_columns}
    order = np.argsort(x, kind="stable") if spec.sort_by_x else slice(None)
    x = x[order]

    fig, ax = plt.subplots(figsize=(6.0, 4.0), constrained_layout=True)
    for name, values in series.items():
        ax.plot(x, values[order], marker="o", markersize=3, label=name)
    ax.set_xscale(spec.x_scale)
    ax.set_yscale(spec.y_scale)
    ax.margins(0.05)  # axis ranges pad the data extents by 5%
    for slope in spec.slope_guides:
        _slope_guide(ax, x, series[spec.y_columns[0]][order], slope, spec.y_scale)
    if spec.crossing is not None:
        first = _column(table, spec.crossing[0], spec.input_csv)[order]
        second = _column(table, spec.crossing[1], spec.input_csv)[order]
        _mark_crossing(ax, x, first, second)
    ax.set_title(spec.title or Path(spec.input_csv).stem.replace("_", " "))
    ax.set_xlabel(spec.x_label or spec.x_column)
    ax.set_ylabel(
        spec.y_label or (spec.y_columns[0] if len(spec.y_columns) == 1 else "")
    )
    ax.grid(True, which="both", alpha=0.3)
    ax.legend(loc="best")
    return fig


def render_figure(spec: FigureSpec) -> tuple:
    """Write the figure as PNG and SVG; returns the written paths."""
    fig = build_figure(spec)
    base = Path(spec.output_path)
    base.parent.mkdir(parents=True, exist_ok=True)
    written = []
    try:
        for suffix in (".png", ".svg"):
            target = base.with_suffix(suffix)
            fig.savefig(target)
            written.append(target)
    finally:
        plt.close(fig)
    return tuple(written)


def spec_from_dict(data: dict) -> FigureSpec:
    """Validate a parsed FigureSpec dictionary."""
    if not isinstance(data, dict):
        raise ValueError("figure spec must be a JSON object")
    known = set(FigureSpec.__dataclass_fields__)
    unknown = set(data) - known
    if unknown:
        raise ValueError(f"unknown figure spec keys: {sorted(unknown)}")
    missing = {"input_csv", "x_column", "y_columns", "output_path"} - set(data)
    if missing:
        raise ValueError(f"figure spec missing keys: {sorted(missing)}")
    return FigureSpec(**data)


def load_spec(path) -> FigureSpec:
    """Load a FigureSpec from a JSON file."""
    path = Path(path)
    try:
        data = json.loads(path.read_text(encoding="utf-8"))
    except (OSError, UnicodeDecodeError, json.JSONDecodeError) as exc:
        raise ValueError(f"cannot read figure spec {path}: {exc}") from exc
    return spec_from_dict(data)


# default recipe per experiment name found in a simulator manifest
DEFAULT_FIGURES = {
    "area_vs_se": dict(
        x_column="area_m2",
        y_columns=("se_ris", "se_df"),
        x_scale="log",
        x_label="surface area (m$^2$)",
        y_label="spectral efficiency (bit/s/Hz)",
        title="Spectral efficiency vs surface area",
    ),
    "snr_vs_area": dict(
        x_column="area_m2",
        y_columns=("snr_ris_db", "snr_df_db"),
        x_scale="log",
        slope_guides=(2.0, 1.0),
        x_label="surface area (m$^2$)",
        y_label="SNR (dB)",
        title="SNR vs surface area",
    ),
    "pathloss_vs_distance": dict(
        x_column="d2_m",
        y_columns=(
            "gain_optimal_db",
            "gain_mirror_mimicking_db",
            "gain_ideal_mirror_db",
        ),
        x_scale="log",
        crossing=("gain_optimal_db", "gain_ideal_mirror_db"),
        x_label="surface-to-receiver distance (m)",
        y_label="end-to-end gain (dB)",
        title="End-to-end gain vs distance",
    ),
    "beam_pattern": dict(
        x_column="azimuth_deg",
        y_columns=("power_db",),
        x_label="azimuth (deg)",
        y_label="normalized power (dB)",
        title="Boresight beam pattern",
    ),
    "estimation": dict(
        x_column="pilot_slots",
        y_columns=("effective_se",),
        x_scale="log",
        sort_by_x=True,
        x_label="pilot slots",
        y_label="overhead-adjusted SE (bit/s/Hz)",
        title="Net spectral efficiency vs pilot budget",
    ),
}


def default_spec(experiment: str, csv_path, out_dir) -> FigureSpec:
    """The built-in FigureSpec for one experiment's CSV."""
    recipe = DEFAULT_FIGURES[experiment]
    return FigureSpec(
        input_csv=csv_path, output_path=Path(out_dir) / experiment, **recipe
    )


def render_all(manifest_path, out_dir=None) -> list:
    """Render the default figure for every experiment a manifest lists.

    Missing CSVs and experiments without a default recipe are skipped with a
    warning; an unreadable manifest raises. Returns all written paths (a PNG
    and an SVG per figure).
    """
    manifest_path = Path(manifest_path)
    try:
        manifest = json.loads(manifest_path.read_text(encoding="utf-8"))
    except (OSError, UnicodeDecodeError, json.JSONDecodeError) as exc:
        raise ValueError(f"cannot read manifest {manifest_path}: {exc}") from exc
    outputs = manifest.get("outputs") if isinstance(manifest, dict) else None
    if not isinstance(outputs, dict):
        raise ValueError(f"manifest {manifest_path} has no outputs object")
    target = Path(out_dir) if out_dir is not None else manifest_path.parent
    if not outputs:
        warnings.warn("manifest lists no experiment outputs; nothing to render")
    written = []
    for experiment in sorted(outputs):
        if experiment not in DEFAULT_FIGURES:
            warnings.warn(f"no default figure for experiment {experiment!r}; skipped")
            continue
        csv_path = manifest_path.parent / outputs[experiment]
        if not csv_path.exists():
            warnings.warn(f"{csv_path.name} listed in manifest but missing; skipped")
            continue
        written.extend(render_figure(default_spec(experiment, csv_path, target)))
    return written
