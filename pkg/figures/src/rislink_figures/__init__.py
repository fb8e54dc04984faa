"""Figure rendering for simulator experiment CSV outputs."""

from .rendering import (
    DEFAULT_FIGURES,
    FigureSpec,
    build_figure,
    default_spec,
    load_spec,
    read_table,
    render_all,
    render_figure,
    spec_from_dict,
)

__all__ = [
    "DEFAULT_FIGURES",
    "FigureSpec",
    "build_figure",
    "default_spec",
    "load_spec",
    "read_table",
    "render_all",
    "render_figure",
    "spec_from_dict",
]
