"""Command-line interface.

Subcommands: ``flow`` (single trajectory), ``campaign`` (model x scheme x
seed sweeps), ``lindblad-sample``, ``spectrum`` and ``truncation``.  Every
command reads a YAML config and writes its artifacts into --out.

Exit codes distinguish outcomes: 0 success/converged, 2 ran but did not
converge (data still written -- non-convergence is a result), 1 error.
Errors are also emitted as a JSON object on stderr.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from dataclasses import replace

import numpy as np
import yaml

from . import models
from .flow import (DivergenceError, StiffnessError, integrate_flow,
                   trajectory_to_csv)
from .linalg import (BandMask, eigenvalues, load_matrix_binary,
                     load_matrix_json, save_matrix_binary, save_matrix_json)
from .lindblad import LindbladSpec
from .metrics import (flow_config_from_dict, model_spec_from_dict,
                      run_campaign, scheme_from_config, truncation_benchmark)

__all__ = ["main"]


def _fail(message: str) -> int:
    print(json.dumps({"error": message}), file=sys.stderr)
    return 1


def _load_config(path: str) -> dict:
    with open(path) as fh:
        cfg = yaml.safe_load(fh)
    if not isinstance(cfg, dict):
        raise ValueError("config file must hold a mapping")
    return cfg


def _load_matrix_file(path: str) -> np.ndarray:
    if path.endswith(".json"):
        return load_matrix_json(path)
    return load_matrix_binary(path)


def _spectrum_csv(path: str, values: np.ndarray) -> None:
    with open(path, "w") as fh:
        fh.write("re,im\n")
        for v in values:
            fh.write(f"{float(v.real)!r},{float(v.imag)!r}\n")


def cmd_flow(cfg: dict, out_dir: str, seed: int | None, quiet: bool) -> int:
    scheme = scheme_from_config(cfg.get("scheme", "gpc"))
    flow_cfg = flow_config_from_dict(cfg.get("flow", {}), scheme)

    if "matrix_file" in cfg:
        m0 = _load_matrix_file(cfg["matrix_file"])
    else:
        spec = model_spec_from_dict(cfg["model"], seed=seed)
        m0 = models.build_matrix(spec)

    observables = [_load_matrix_file(p) for p in cfg.get("observables", [])]

    if cfg.get("truncation"):
        n_max = int(cfg["truncation"]["n_max"])
        lam = float(cfg["truncation"].get("lambda", 1.0))
        m0 = models.prepare_truncated(m0, lam, n_max)
        flow_cfg = replace(flow_cfg, truncation=BandMask(n_max, m0.shape[0]))

    exit_code = 0
    try:
        traj = integrate_flow(m0, observables, flow_cfg)
    except (StiffnessError, DivergenceError) as exc:
        traj = exc.trajectory
        exit_code = 2
        if not quiet:
            print(f"flow aborted: {exc}")
    if not traj.converged and exit_code == 0:
        exit_code = 2

    trajectory_to_csv(traj, os.path.join(out_dir, "trajectory.csv"))
    save_matrix_json(traj.final_matrix, os.path.join(out_dir, "final_matrix.json"))
    for i, obs in enumerate(traj.final_observables):
        save_matrix_json(obs, os.path.join(out_dir, f"final_observable_{i}.json"))
    if not quiet:
        last = traj.samples[-1]
        print(f"flow: scheme={scheme.label} l={last.l:.6g} rod={last.rod:.3e} "
              f"converged={traj.converged} steps={traj.steps_taken}")
    return exit_code


def cmd_campaign(cfg: dict, out_dir: str, seed: int | None, threads: int | None,
                 quiet: bool) -> int:
    rows = run_campaign(cfg.get("campaign", cfg), out_dir,
                        seed_override=seed, max_workers=threads)
    failed = sum(1 for r in rows if r.get("error"))
    if not quiet:
        print(f"campaign: {len(rows)} rows, {failed} with errors -> "
              f"{os.path.join(out_dir, 'campaign.csv')}")
    return 0


def cmd_lindblad_sample(cfg: dict, out_dir: str, seed: int | None, quiet: bool) -> int:
    params = dict(cfg.get("lindblad", {}))
    if seed is not None:
        params["seed"] = seed
    spec = LindbladSpec(**params)
    sup = models.build_matrix(spec)
    save_matrix_binary(sup, os.path.join(out_dir, "superoperator.bin"))
    if cfg.get("write_json", False):
        save_matrix_json(sup, os.path.join(out_dir, "superoperator.json"))
    _spectrum_csv(os.path.join(out_dir, "spectrum.csv"), eigenvalues(sup))
    if not quiet:
        print(f"lindblad-sample: N={spec.n} D={spec.dim} seed={spec.seed}")
    return 0


def cmd_spectrum(cfg: dict, out_dir: str, seed: int | None, quiet: bool) -> int:
    if "matrix_file" in cfg:
        m = _load_matrix_file(cfg["matrix_file"])
    else:
        m = models.build_matrix(model_spec_from_dict(cfg["model"], seed=seed))
    vals = eigenvalues(m)
    _spectrum_csv(os.path.join(out_dir, "spectrum.csv"), vals)
    if not quiet:
        print(f"spectrum: {vals.size} eigenvalues")
    return 0


def cmd_truncation(cfg: dict, out_dir: str, seed: int | None, quiet: bool) -> int:
    trunc = cfg["truncation"]
    n_max = int(trunc["n_max"])
    lam = float(trunc.get("lambda", 1.0))
    scheme_entries = cfg.get("schemes") or [cfg.get("scheme", "gpc")]
    seeds_cfg = cfg.get("seeds", 1)
    base = seed if seed is not None else 0
    seeds = ([base + i for i in range(seeds_cfg)] if isinstance(seeds_cfg, int)
             else [int(s) for s in seeds_cfg])

    reports = []
    for entry in scheme_entries:
        scheme = scheme_from_config(entry)
        flow_cfg = flow_config_from_dict(cfg.get("flow", {}), scheme)
        for s in seeds:
            spec = model_spec_from_dict(cfg["model"], seed=s)
            reports.append(truncation_benchmark(spec, scheme, n_max, lam, flow_cfg))

    path = os.path.join(out_dir, "truncation.csv")
    with open(path, "w") as fh:
        fh.write("scheme,seed,n_max,lambda,converged,delta_trunc,error\n")
        for rep in reports:
            fh.write(f"{rep.scheme},{rep.seed},{rep.order},{rep.lam!r},"
                     f"{'true' if rep.converged else 'false'},"
                     f"{rep.delta_trunc!r},{rep.error}\n")
    if not quiet:
        print(f"truncation: {len(reports)} rows -> {path}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="dissflow",
        description="Dissipative flow equations for non-Hermitian matrices")
    sub = parser.add_subparsers(dest="command", required=True)
    for name in ("flow", "campaign", "lindblad-sample", "spectrum", "truncation"):
        p = sub.add_parser(name)
        p.add_argument("--config", required=True, help="YAML config file")
        p.add_argument("--out", required=True, help="output directory")
        p.add_argument("--seed", type=int, default=None, help="seed override")
        p.add_argument("--threads", type=int, default=None,
                       help="worker pool size (campaign only)")
        p.add_argument("--quiet", action="store_true")
    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        cfg = _load_config(args.config)
        os.makedirs(args.out, exist_ok=True)
        if args.command == "flow":
            return cmd_flow(cfg, args.out, args.seed, args.quiet)
        if args.command == "campaign":
            return cmd_campaign(cfg, args.out, args.seed, args.threads, args.quiet)
        if args.command == "lindblad-sample":
            return cmd_lindblad_sample(cfg, args.out, args.seed, args.quiet)
        if args.command == "spectrum":
            return cmd_spectrum(cfg, args.out, args.seed, args.quiet)
        return cmd_truncation(cfg, args.out, args.seed, args.quiet)
    except Exception as exc:
        return _fail(f"{type(exc).__name__}: {exc}")


if __name__ == "__main__":
    sys.exit(main())
