"""Figure specification and dispatcher."""

from __future__ import annotations

from dataclasses import dataclass, field

from . import (
    fig_bath_signals,
    fig_polarization_series,
    fig_single_quadratures,
    fig_spectra,
    fig_sweep_maps,
)
from .io import SchemaError

FIGURE_IDS = ("1cd", "spectra", "3a", "3b", "3cd")


@dataclass(frozen=True)
class FigureSpec:
    figure_id: str
    inputs: tuple[str, ...]
    output: str
    summary: str | None = None   # used by the polarization series only


def render(spec: FigureSpec) -> None:
    """Render one figure; raises SchemaError on malformed inputs."""
    if spec.figure_id == "1cd":
        fig_single_quadratures.draw(list(spec.inputs), spec.output)
    elif spec.figure_id == "spectra":
        fig_spectra.draw(list(spec.inputs), spec.output)
    elif spec.figure_id == "3a":
        fig_bath_signals.draw(list(spec.inputs), spec.output)
    elif spec.figure_id == "3b":
        if spec.summary is None:
            raise SchemaError("figure 3b needs a summary CSV")
        fig_polarization_series.draw(list(spec.inputs), spec.summary, spec.output)
    elif spec.figure_id == "3cd":
        fig_sweep_maps.draw(list(spec.inputs), spec.output)
    else:
        raise SchemaError(f"unknown figure id {spec.figure_id!r}; options: {FIGURE_IDS}")
