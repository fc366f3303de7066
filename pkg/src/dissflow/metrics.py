"""Convergence coefficients, the truncation-error protocol, and campaigns.

The convergence coefficient measures the exponential decay of the ROD,
ROD ~ exp(-C l).  The window is placed where ROD(l_max) = 1e-6 J and
ROD(l_min) = 2e-6 J, late enough to ignore the initial transient; both
points are placed exactly by log-linear interpolation between recorded
samples (the last downward crossing of 2e-6 J before the first downward
crossing of 1e-6 J).  A flow that never reaches the window reports
coefficient 0 with valid=False: non-convergence is data.
"""

from __future__ import annotations

import hashlib
import json
import math
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, replace

import numpy as np

from . import models
from .flow import (DivergenceError, FlowConfig, FlowTrajectory, StiffnessError,
                   integrate_flow, trajectory_to_csv)
from .generators import GeneratorScheme
from .linalg import BandMask, eigenvalues, spectral_distance
from .lindblad import LindbladSpec

__all__ = [
    "ConvergenceReport",
    "TruncationReport",
    "convergence_coefficient",
    "truncation_benchmark",
    "run_campaign",
    "CAMPAIGN_BASE_COLUMNS",
]


@dataclass(frozen=True)
class ConvergenceReport:
    c_conv_l: float
    c_conv_t: float
    l_min: float
    l_max: float
    t_min: float
    t_max: float
    valid: bool


@dataclass(frozen=True)
class TruncationReport:
    delta_trunc: float
    order: int
    lam: float
    scheme: str
    converged: bool
    seed: int | None = None
    error: str = ""


def _cross_down(x: np.ndarray, y: np.ndarray, i: int, target: float) -> float:
    """Log-linear position of the downward crossing of ``target`` in (i-1, i]."""
    if i == 0 or y[i - 1] <= target:
        return float(x[i])
    frac = math.log(y[i - 1] / target) / math.log(y[i - 1] / y[i])
    return float(x[i - 1] + frac * (x[i] - x[i - 1]))


def convergence_coefficient(traj: FlowTrajectory, j_scale: float = 1.0) -> ConvergenceReport:
    """Extract C_conv in flow parameter and in wall time from a trajectory."""
    invalid = ConvergenceReport(0.0, 0.0, 0.0, 0.0, 0.0, 0.0, False)
    if len(traj.samples) < 2:
        return invalid
    l = traj.l_values
    t = traj.t_values
    r = traj.rod_values
    target_hi = 1e-6 * j_scale
    target_lo = 2.0 * target_hi

    below = np.nonzero(r <= target_hi)[0]
    if below.size == 0:
        return invalid
    i_max = int(below[0])
    if i_max == 0:
        return invalid  # already below threshold at l=0, no window exists
    l_max = _cross_down(l, r, i_max, target_hi)
    t_max = _cross_down(t, r, i_max, target_hi)

    # last downward crossing of 2e-6 J at or before the max-point
    i_min = None
    for idx in range(i_max, 0, -1):
        if r[idx] < target_lo and r[idx - 1] >= target_lo:
            i_min = idx
            break
    if i_min is None:
        return invalid
    l_min = _cross_down(l, r, i_min, target_lo)
    t_min = _cross_down(t, r, i_min, target_lo)

    if l_max <= l_min:
        return invalid
    c_l = math.log(2.0) / (l_max - l_min)
    c_t = math.log(2.0) / (t_max - t_min) if t_max > t_min else 0.0
    return ConvergenceReport(c_l, c_t, l_min, l_max, t_min, t_max, True)


def truncation_benchmark(model_spec, scheme: GeneratorScheme, n_max: int,
                         lam: float, cfg: FlowConfig) -> TruncationReport:
    """Run the truncation-error protocol for one model instance.

    Builds M_prep by scaling with lam and truncating to order n_max, flows
    it with the band mask active throughout, takes the final diagonal as
    the truncated spectrum, and compares against exact diagonalization of
    M_prep itself.  Flow failures (stiffness, divergence) are recorded on
    the report, not raised.
    """
    m = models.build_matrix(model_spec)
    m_prep = models.prepare_truncated(m, lam, n_max)
    exact = eigenvalues(m_prep)

    run_cfg = replace(cfg, scheme=scheme,
                      truncation=BandMask(order=n_max, dim=m_prep.shape[0]))
    error = ""
    try:
        traj = integrate_flow(m_prep, [], run_cfg)
        converged = traj.converged
    except (StiffnessError, DivergenceError) as exc:
        traj = exc.trajectory
        converged = False
        error = type(exc).__name__

    trunc_spectrum = np.diag(traj.final_matrix)
    delta = spectral_distance(trunc_spectrum, exact)
    seed = getattr(model_spec, "seed", None)
    return TruncationReport(delta_trunc=float(delta), order=n_max, lam=lam,
                            scheme=scheme.label, converged=converged,
                            seed=seed, error=error)


# ---------------------------------------------------------------------------
# Campaign runner
# ---------------------------------------------------------------------------

CAMPAIGN_BASE_COLUMNS = ["scheme", "seed", "converged", "c_conv_l", "c_conv_t",
                         "delta_trunc", "n_max", "lambda", "trajectory_file"]

_MODEL_KINDS = {
    "single_mode", "ordered_scattering", "disordered_scattering",
    "random_crossover", "ordered_random", "random_lindbladian",
}


def model_spec_from_dict(cfg: dict, seed: int | None = None):
    """Instantiate a model spec from a config mapping with a ``kind`` key."""
    kind = cfg.get("kind")
    if kind not in _MODEL_KINDS:
        raise ValueError(f"unknown model kind {kind!r}")
    params = {k: v for k, v in cfg.items() if k != "kind"}
    if kind == "single_mode":
        return models.SingleModeSpec(**params)
    if kind == "ordered_scattering":
        return models.OrderedScatteringSpec(**params)
    if kind == "disordered_scattering":
        if seed is not None:
            params["seed"] = seed
        return models.DisorderedScatteringSpec(**params)
    if kind == "random_crossover":
        if seed is not None:
            params["seed"] = seed
        return models.RandomCrossoverSpec(**params)
    if kind == "ordered_random":
        if seed is not None:
            params["seed"] = seed
        params.setdefault("ordered_diagonal", True)
        return models.RandomCrossoverSpec(**params)
    if seed is not None:
        params["seed"] = seed
    return LindbladSpec(**params)


def scheme_from_config(entry) -> GeneratorScheme:
    if isinstance(entry, str):
        return GeneratorScheme.from_name(entry)
    if isinstance(entry, dict):
        params = {k: v for k, v in entry.items() if k != "kind"}
        return GeneratorScheme.from_name(entry["kind"], **params)
    if isinstance(entry, GeneratorScheme):
        return entry
    raise ValueError(f"cannot interpret scheme config {entry!r}")


def flow_config_from_dict(cfg: dict, scheme: GeneratorScheme) -> FlowConfig:
    known = {"abs_tol", "rel_tol", "rod_stop", "energy_scale_J", "l_max_cap",
             "record_stride", "initial_step"}
    params = {k: v for k, v in (cfg or {}).items() if k in known}
    unknown = set(cfg or {}) - known
    if unknown:
        raise ValueError(f"unknown flow config keys: {sorted(unknown)}")
    return FlowConfig(scheme=scheme, **params)


def _expand_model_grid(model_cfg: dict) -> list[dict]:
    """Expand list-valued parameters into a cartesian grid of model configs."""
    grid_keys = [k for k, v in model_cfg.items() if k != "kind" and isinstance(v, list)]
    instances = [dict(model_cfg)]
    for key in grid_keys:
        expanded = []
        for inst in instances:
            for value in model_cfg[key]:
                nxt = dict(inst)
                nxt[key] = value
                expanded.append(nxt)
        instances = expanded
    return instances


def _campaign_rows(config: dict, seed_override: int | None) -> list[dict]:
    seeds_cfg = config.get("seeds", 1)
    if isinstance(seeds_cfg, int):
        base = seed_override if seed_override is not None else int(config.get("base_seed", 0))
        seeds = [base + i for i in range(seeds_cfg)]
    else:
        seeds = [int(s) for s in seeds_cfg]
        if seed_override is not None:
            seeds = [seed_override + s for s in seeds]

    model_cfgs = []
    for model_cfg in config.get("models", []):
        model_cfgs.extend(_expand_model_grid(model_cfg))
    if not model_cfgs:
        raise ValueError("campaign defines no models")
    schemes = [s if isinstance(s, dict) else {"kind": s} for s in config.get("schemes", [])]
    if not schemes:
        raise ValueError("campaign defines no schemes")

    # list-valued n_max / lambda expand the truncation protocol into a grid
    trunc_cfg = config.get("truncation")
    if trunc_cfg:
        orders = trunc_cfg.get("n_max", 1)
        lams = trunc_cfg.get("lambda", 1.0)
        orders = orders if isinstance(orders, list) else [orders]
        lams = lams if isinstance(lams, list) else [lams]
        truncations = [{"n_max": o, "lambda": lam} for o in orders for lam in lams]
    else:
        truncations = [None]

    rows = []
    for mi, model_cfg in enumerate(model_cfgs):
        for scheme_cfg in schemes:
            for trunc in truncations:
                for seed in seeds:
                    rows.append({
                        "model_index": mi,
                        "model_cfg": model_cfg,
                        "scheme_cfg": scheme_cfg,
                        "seed": seed,
                        "flow_cfg": config.get("flow", {}),
                        "truncation": trunc,
                    })
    return rows


def _run_campaign_row(job: dict) -> dict:
    model_cfg = job["model_cfg"]
    scheme = scheme_from_config(job["scheme_cfg"])
    seed = job["seed"]
    spec = model_spec_from_dict(model_cfg, seed=seed)
    cfg = flow_config_from_dict(job["flow_cfg"], scheme)
    j_scale = cfg.energy_scale_J

    row = {"model": model_cfg["kind"], "scheme": scheme.label, "seed": seed,
           "converged": "", "c_conv_l": "", "c_conv_t": "", "delta_trunc": "",
           "n_max": "", "lambda": "", "trajectory_file": "", "error": ""}
    for key, value in model_cfg.items():
        if key != "kind":
            row[key] = value

    trunc = job["truncation"]
    try:
        if trunc:
            n_max = int(trunc["n_max"])
            lam = float(trunc.get("lambda", 1.0))
            m_prep = models.prepare_truncated(models.build_matrix(spec), lam, n_max)
            exact = eigenvalues(m_prep)
            run_cfg = replace(cfg, scheme=scheme,
                              truncation=BandMask(order=n_max, dim=m_prep.shape[0]))
            m0 = m_prep
            row["n_max"] = n_max
            row["lambda"] = lam
        else:
            m0 = models.build_matrix(spec)
            run_cfg = cfg
            exact = None
        try:
            traj = integrate_flow(m0, [], run_cfg)
        except (StiffnessError, DivergenceError) as exc:
            traj = exc.trajectory
            row["error"] = type(exc).__name__
        report = convergence_coefficient(traj, j_scale)
        row["converged"] = traj.converged
        row["c_conv_l"] = report.c_conv_l
        row["c_conv_t"] = report.c_conv_t
        if exact is not None:
            row["delta_trunc"] = float(
                spectral_distance(np.diag(traj.final_matrix), exact))
        row["_trajectory"] = traj
    except Exception as exc:  # per-row failures are data, campaign completes
        row["error"] = f"{type(exc).__name__}: {exc}"
        row["_trajectory"] = None
    return row


def run_campaign(config: dict, out_dir, *, seed_override: int | None = None,
                 max_workers: int | None = None) -> list[dict]:
    """Run a (model grid x scheme grid x seeds) campaign.

    Writes ``campaign.csv``, one trajectory CSV per row, and a JSON
    manifest carrying the config hash and artifact list; returns the rows.
    Rows are deterministic given the seeds (the same matrices are shared
    across schemes because builders are keyed on (model, seed) only).
    """
    os.makedirs(out_dir, exist_ok=True)
    jobs = _campaign_rows(config, seed_override)

    if max_workers is None:
        max_workers = _default_workers()
    if max_workers > 1 and len(jobs) > 1:
        with ProcessPoolExecutor(max_workers=max_workers) as pool:
            rows = list(pool.map(_run_campaign_row, jobs, chunksize=1))
    else:
        rows = [_run_campaign_row(job) for job in jobs]

    param_cols = sorted({k for row in rows for k in row
                         if k not in CAMPAIGN_BASE_COLUMNS
                         and k not in ("model", "error", "_trajectory")})
    columns = ["model"] + param_cols + CAMPAIGN_BASE_COLUMNS + ["error"]

    artifacts = []
    for job, row in zip(jobs, rows):
        traj = row.pop("_trajectory")
        order = f"_o{row['n_max']}" if row.get("n_max") != "" else ""
        name = (f"traj_m{job['model_index']}_{row['scheme']}{order}"
                f"_s{row['seed']}.csv")
        name = name.replace("(", "_").replace(")", "").replace(" ", "")
        if traj is not None:
            trajectory_to_csv(traj, os.path.join(out_dir, name))
            row["trajectory_file"] = name
            artifacts.append(name)

    csv_path = os.path.join(out_dir, "campaign.csv")
    with open(csv_path, "w") as fh:
        fh.write(",".join(columns) + "\n")
        for row in rows:
            fh.write(",".join(_csv_cell(row.get(c, "")) for c in columns) + "\n")

    manifest = {
        "config_sha256": hashlib.sha256(
            json.dumps(config, sort_keys=True, default=str).encode()).hexdigest(),
        "rows": len(rows),
        "campaign_csv": "campaign.csv",
        "artifacts": artifacts,
    }
    with open(os.path.join(out_dir, "manifest.json"), "w") as fh:
        json.dump(manifest, fh, indent=2)
    return rows


def _csv_cell(value) -> str:
    if isinstance(value, (bool, np.bool_)):
        return "true" if value else "false"
    if isinstance(value, float):
        return repr(float(value))
    return str(value)


def _default_workers() -> int:
    try:
        import psutil

        physical = psutil.cpu_count(logical=False)
        if physical:
            return physical
    except ImportError:  # pragma: no cover
        pass
    return os.cpu_count() or 1
