"""Figure specs and the render dispatcher (PNG + SVG per render)."""

from __future__ import annotations

import os
from dataclasses import dataclass, field

from . import panels
from .io import (read_campaign, read_matrix_json, read_spectrum,
                 read_trajectory)

FIGURE_IDS = ("coeffs", "rod_traces", "trunc_panels", "spectra", "diag_scatter")


@dataclass(frozen=True)
class FigureSpec:
    """One figure to render.

    ``inputs`` are campaign/trajectory/spectrum CSVs (or a matrix JSON for
    the diagonal scatter); ``output`` is the image path, written both as
    PNG and SVG.  ``options`` passes family-specific knobs such as the
    x-axis parameter or log-axis flags.
    """

    figure_id: str
    inputs: tuple
    output: str
    options: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.figure_id not in FIGURE_IDS:
            raise ValueError(f"unknown figure id {self.figure_id!r}")
        if not self.inputs:
            raise ValueError("at least one input file is required")
        for path in self.inputs:
            if not os.path.exists(path):
                raise FileNotFoundError(path)


def build(spec: FigureSpec):
    opts = spec.options
    if spec.figure_id == "coeffs":
        rows = read_campaign(spec.inputs[0])
        return panels.build_coeffs(rows, x_param=opts.get("x_param", "alpha"),
                                   col_param=opts.get("col_param", "dim"),
                                   log_y=opts.get("log_y", False))
    if spec.figure_id == "rod_traces":
        trajs = {os.path.splitext(os.path.basename(p))[0]: read_trajectory(p)
                 for p in spec.inputs}
        return panels.build_rod_traces(trajs,
                                       x_axis=opts.get("x_axis", "t_wall"),
                                       log_x=opts.get("log_x", False))
    if spec.figure_id == "trunc_panels":
        rows = []
        for p in spec.inputs:
            rows.extend(read_campaign(p))
        return panels.build_trunc_panels(rows,
                                         x_param=opts.get("x_param", "alpha"))
    if spec.figure_id == "spectra":
        spectra = {os.path.splitext(os.path.basename(p))[0]: read_spectrum(p)
                   for p in spec.inputs}
        scales = opts.get("scales")
        return panels.build_spectra(spectra, scales=scales)
    matrix = read_matrix_json(spec.inputs[0])
    spectrum = read_spectrum(spec.inputs[1]) if len(spec.inputs) > 1 else None
    if spectrum is None:
        raise ValueError("diag_scatter needs a matrix JSON and a spectrum CSV")
    return panels.build_diag_scatter(matrix, spectrum)


def render(spec: FigureSpec) -> list[str]:
    """Render the figure; returns the written file paths (PNG and SVG)."""
    fig = build(spec)
    root, ext = os.path.splitext(spec.output)
    png = root + ".png" if ext.lower() != ".png" else spec.output
    svg = root + ".svg"
    out_dir = os.path.dirname(os.path.abspath(png))
    os.makedirs(out_dir, exist_ok=True)
    fig.savefig(png, dpi=150)
    fig.savefig(svg)
    import matplotlib.pyplot as plt

    plt.close(fig)
    return [png, svg]
