"""Figure builders, one per figure family.

Each ``build_*`` returns a matplotlib Figure whose panel layout mirrors the
benchmark presentation: coefficient grids carry the flow-parameter row on
top and the wall-time row below, truncation panels are laid out one column
per truncation order, spectra stack the compared ensembles vertically.
"""

from __future__ import annotations

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np

from .io import numeric

_SCHEME_ORDER = ("gpc", "r1", "r2", "r3")


def _scheme_sort_key(name: str):
    try:
        return (0, _SCHEME_ORDER.index(name))
    except ValueError:
        return (1, name)


def _group_mean(rows, x_param, y_col):
    """Mean of y over seeds at each x value; NaNs (failed rows) are dropped."""
    xs = sorted({float(r[x_param]) for r in rows})
    ys = []
    for x in xs:
        sub = [r for r in rows if float(r[x_param]) == x]
        vals = numeric(sub, y_col)
        vals = vals[~np.isnan(vals)]
        ys.append(vals.mean() if vals.size else np.nan)
    return np.array(xs), np.array(ys)


def build_coeffs(rows: list[dict], x_param: str = "alpha",
                 col_param: str = "dim", log_y: bool = False):
    """Convergence-coefficient grid: columns by dimension, coefficient in
    flow parameter on the first row and in wall time on the second."""
    cols = sorted({r[col_param] for r in rows}, key=float) if col_param else [None]
    fig, axes = plt.subplots(2, len(cols), figsize=(3.2 * len(cols), 5.4),
                             squeeze=False, sharex=True)
    schemes = sorted({r["scheme"] for r in rows}, key=_scheme_sort_key)
    for ci, col in enumerate(cols):
        sub_col = rows if col is None else [r for r in rows if r[col_param] == col]
        for ri, ycol in enumerate(("c_conv_l", "c_conv_t")):
            ax = axes[ri][ci]
            for scheme in schemes:
                sub = [r for r in sub_col if r["scheme"] == scheme]
                xs, ys = _group_mean(sub, x_param, ycol)
                ax.plot(xs, ys, marker="o", label=scheme)
            if log_y:
                ax.set_yscale("log")
            if ri == 0 and col is not None:
                ax.set_title(f"{col_param} = {col}")
            if ri == 1:
                ax.set_xlabel(x_param)
            if ci == 0:
                ax.set_ylabel("$C^{(\\ell)}$" if ycol == "c_conv_l"
                              else "$C^{(t)}$")
    axes[0][0].legend(fontsize=8)
    fig.tight_layout()
    return fig


def build_rod_traces(trajectories: dict[str, dict], x_axis: str = "t_wall",
                     log_x: bool = False):
    """ROD against wall time (or flow parameter), one line per trajectory."""
    fig, ax = plt.subplots(figsize=(6.4, 4.2))
    for label, traj in trajectories.items():
        ax.plot(traj[x_axis], traj["rod"], label=label)
    ax.set_yscale("log")
    if log_x:
        ax.set_xscale("log")
    ax.set_xlabel("t [s]" if x_axis == "t_wall" else "flow parameter")
    ax.set_ylabel("ROD")
    ax.legend(fontsize=8)
    fig.tight_layout()
    return fig


def build_trunc_panels(rows: list[dict], x_param: str = "alpha"):
    """Truncation error, one panel per truncation order, log-scaled."""
    orders = sorted({int(float(r["n_max"])) for r in rows if r.get("n_max")})
    if not orders:
        raise ValueError("no truncation orders in the input table")
    fig, axes = plt.subplots(1, len(orders), figsize=(3.4 * len(orders), 3.6),
                             squeeze=False, sharey=True)
    schemes = sorted({r["scheme"] for r in rows}, key=_scheme_sort_key)
    for oi, order in enumerate(orders):
        ax = axes[0][oi]
        sub_order = [r for r in rows if r.get("n_max")
                     and int(float(r["n_max"])) == order]
        for scheme in schemes:
            sub = [r for r in sub_order if r["scheme"] == scheme]
            xs, ys = _group_mean(sub, x_param, "delta_trunc")
            ax.plot(xs, ys, marker="s", label=scheme)
        ax.set_yscale("log")
        ax.set_title(f"o{order}")
        ax.set_xlabel(x_param)
    axes[0][0].set_ylabel(r"$\Delta_\mathrm{trunc}$")
    axes[0][0].legend(fontsize=8)
    fig.tight_layout()
    return fig


def build_spectra(spectra: dict[str, np.ndarray], scales=None):
    """Stacked complex-plane scatter panels, one per spectrum file."""
    n = len(spectra)
    fig, axes = plt.subplots(n, 1, figsize=(5.4, 3.2 * n), squeeze=False)
    for ax, (label, vals) in zip(axes[:, 0], spectra.items()):
        scale = 1.0 if not scales else scales.get(label, 1.0)
        ax.scatter(vals.real / scale, vals.imag / scale, s=6, alpha=0.6)
        ax.set_title(label)
        ax.set_xlabel(r"Re $\lambda$")
        ax.set_ylabel(r"Im $\lambda$")
        ax.axhline(0.0, color="gray", lw=0.5)
        ax.axvline(0.0, color="gray", lw=0.5)
    fig.tight_layout()
    return fig


def build_diag_scatter(matrix: np.ndarray, spectrum: np.ndarray):
    """Diagonal elements (left) next to the eigenvalue cloud (right)."""
    fig, axes = plt.subplots(1, 2, figsize=(8.4, 3.6))
    d = np.diagonal(matrix)
    axes[0].scatter(d.real, d.imag, s=10)
    axes[0].set_title("diagonal elements")
    axes[1].scatter(spectrum.real, spectrum.imag, s=10, color="C1")
    axes[1].set_title("spectrum")
    for ax in axes:
        ax.set_xlabel("Re")
        ax.set_ylabel("Im")
    fig.tight_layout()
    return fig
