"""One entry point per figure family: --input file(s), --output image."""

from __future__ import annotations

import argparse
import sys

from .render import FigureSpec, render


def _parser(figure_id: str, multi_input: bool) -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog=f"dissflow-fig-{figure_id.replace('_', '-')}")
    p.add_argument("--input", required=True, nargs="+" if multi_input else 1,
                   help="input CSV file(s)")
    p.add_argument("--output", required=True, help="output image path (.png)")
    return p


def _run(figure_id: str, args, options: dict) -> int:
    try:
        spec = FigureSpec(figure_id=figure_id, inputs=tuple(args.input),
                          output=args.output, options=options)
        paths = render(spec)
    except Exception as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    print("\n".join(paths))
    return 0


def main_coeffs(argv=None) -> int:
    p = _parser("coeffs", multi_input=False)
    p.add_argument("--x-param", default="alpha")
    p.add_argument("--col-param", default="dim")
    p.add_argument("--log-y", action="store_true")
    args = p.parse_args(argv)
    return _run("coeffs", args, {"x_param": args.x_param,
                                 "col_param": args.col_param,
                                 "log_y": args.log_y})


def main_rod_traces(argv=None) -> int:
    p = _parser("rod_traces", multi_input=True)
    p.add_argument("--x-axis", default="t_wall", choices=("t_wall", "l"))
    p.add_argument("--log-x", action="store_true")
    args = p.parse_args(argv)
    return _run("rod_traces", args, {"x_axis": args.x_axis,
                                     "log_x": args.log_x})


def main_trunc_panels(argv=None) -> int:
    p = _parser("trunc_panels", multi_input=True)
    p.add_argument("--x-param", default="alpha")
    args = p.parse_args(argv)
    return _run("trunc_panels", args, {"x_param": args.x_param})


def main_spectra(argv=None) -> int:
    p = _parser("spectra", multi_input=True)
    args = p.parse_args(argv)
    return _run("spectra", args, {})


def main_diag_scatter(argv=None) -> int:
    p = argparse.ArgumentParser(prog="dissflow-fig-diag-scatter")
    p.add_argument("--input", required=True, nargs=2,
                   metavar=("MATRIX_JSON", "SPECTRUM_CSV"))
    p.add_argument("--output", required=True)
    args = p.parse_args(argv)
    return _run("diag_scatter", args, {})
