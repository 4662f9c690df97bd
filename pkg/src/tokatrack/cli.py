"""Command-line driver: scenario runs and bit-stable CSV emission.

Three subcommands:

* ``simulate``    closed-loop run, full diagnostic time series
* ``fbs``         open-loop forward-backward sweep at one penalty weight
* ``sweep-alpha`` penalty calibration over a grid of weights

Outputs are plain CSV with a fixed column order and floats printed in
scientific notation with 17 significant digits, so identical configs
produce byte-identical files. No plotting is built in; see the README
for plot recipes against the long-format files.
"""

from __future__ import annotations

import argparse
import os
import sys
from pathlib import Path

import numpy as np

from .config import (
    ScenarioConfig,
    build_controller,
    build_fbs,
    build_grid,
    build_reference,
    build_timestep,
    build_transport,
    load_config,
    write_effective_config,
)
from .control import calibrate_alpha, fbs_evaluator, forward_backward_sweep, run_rhc
from .errors import CalibrationError, NumericalError, SimulationError
from .reference import reference_at

__all__ = ["main", "cmd_simulate", "cmd_fbs", "cmd_sweep_alpha"]

OUT_DIR_ENV = "RHC_OUT_DIR"


def _fmt(v) -> str:
    return f"{float(v):.16e}"


def _write_csv(path: Path, header, rows):
    with open(path, "w", newline="") as fh:
        fh.write(",".join(header) + "\n")
        for row in rows:
            fh.write(",".join(row) + "\n")


def _write_long_profile(path: Path, times, nodes, values):
    """Space-time field in long format (t, x, value), one row per sample."""
    rows = (
        [_fmt(t), _fmt(x), _fmt(values[i, j])]
        for i, t in enumerate(times)
        for j, x in enumerate(nodes)
    )
    _write_csv(path, ["t", "x", "value"], rows)


def _write_final_profile(path: Path, nodes, T_end, Tbar):
    rows = (
        [_fmt(x), _fmt(T_end[j]), _fmt(Tbar[j]), _fmt(abs(T_end[j] - Tbar[j]))]
        for j, x in enumerate(nodes)
    )
    _write_csv(path, ["x", "T", "Tbar", "abs_err"], rows)


def _flush_simulation(out: Path, res, g, ref):
    rows = (
        [
            _fmt(res.times[k]),
            _fmt(res.J[k]),
            _fmt(res.J1[k]),
            _fmt(res.J2[k]),
            _fmt(res.u_l2x[k]),
            _fmt(res.bound_lhs[k]),
            _fmt(res.bound_rhs[k]),
            _fmt(res.alpha_history[k]),
            str(int(res.beta_history[k])),
        ]
        for k in range(len(res.times))
    )
    _write_csv(
        out / "timeseries.csv",
        ["t", "J", "J1", "J2", "u_l2x", "bound_lhs", "bound_rhs", "alpha", "beta"],
        rows,
    )
    _write_long_profile(out / "state.csv", res.times, g.nodes, res.T_history)
    _write_long_profile(out / "control.csv", res.times, g.nodes, res.u_history)
    _write_long_profile(out / "adjoint.csv", res.times, g.nodes, res.p_history)
    that = np.array([reference_at(ref, t) for t in res.times])
    _write_long_profile(out / "reference.csv", res.times, g.nodes, that)
    if len(res.times):
        _write_final_profile(out / "final_profile.csv", g.nodes, res.T_history[-1], ref.Tbar)


def cmd_simulate(cfg: ScenarioConfig, out: Path) -> int:
    g = build_grid(cfg)
    _, coeffs = build_transport(cfg, g)
    ref = build_reference(cfg, g)
    ctrl = build_controller(cfg)
    write_effective_config(cfg, out / "effective_config.txt")
    try:
        res = run_rhc(g, coeffs, ref, ctrl, cfg.chi_floor, theta=cfg.theta)
    except SimulationError as exc:
        if exc.partial_result is not None:
            _flush_simulation(out, exc.partial_result, g, ref)
        print(f"simulate: {exc}", file=sys.stderr)
        return 1
    _flush_simulation(out, res, g, ref)
    return 0


def cmd_fbs(cfg: ScenarioConfig, out: Path, alpha=None) -> int:
    g = build_grid(cfg)
    _, coeffs = build_transport(cfg, g)
    ref = build_reference(cfg, g)
    fbs_cfg = build_fbs(cfg, alpha)
    ts = build_timestep(cfg)
    write_effective_config(cfg, out / "effective_config.txt")
    try:
        res = forward_backward_sweep(g, coeffs, ref, fbs_cfg, ts, cfg.chi_floor)
    except NumericalError as exc:
        print(f"fbs: {exc}", file=sys.stderr)
        return 1
    rows = (
        [
            str(i + 1),
            _fmt(res.iterate_diffs[i]),
            _fmt(res.terminal_J[i]),
            "1" if (res.converged and i + 1 == res.iterations) else "0",
        ]
        for i in range(res.iterations)
    )
    _write_csv(out / "fbs_convergence.csv", ["iteration", "iterate_diff_norm", "terminal_J", "converged"], rows)
    _write_long_profile(out / "state.csv", res.times, g.nodes, res.T_history)
    _write_long_profile(out / "control.csv", res.times[:-1], g.nodes, res.u_history)
    _write_long_profile(out / "adjoint.csv", res.times, g.nodes, res.p_history)
    _write_final_profile(out / "final_profile.csv", g.nodes, res.T_history[-1], ref.Tbar)
    if not res.converged:
        print(f"fbs: no convergence within {res.iterations} iterations", file=sys.stderr)
        return 1
    return 0


def cmd_sweep_alpha(cfg: ScenarioConfig, out: Path, grid, manufactured=None) -> int:
    write_effective_config(cfg, out / "effective_config.txt")
    if manufactured is not None:
        vertex, curvature = manufactured

        def evaluate(alpha):
            return curvature * (alpha - vertex) ** 2, True

    else:
        g = build_grid(cfg)
        _, coeffs = build_transport(cfg, g)
        ref = build_reference(cfg, g)
        ts = build_timestep(cfg)
        evaluate = fbs_evaluator(
            g,
            coeffs,
            ref,
            ts,
            cfg.chi_floor,
            eps=cfg.fbs_eps,
            n_max=cfg.fbs_n_max,
            relaxation=cfg.fbs_relaxation,
        )
    try:
        result = calibrate_alpha(grid, evaluate)
    except (CalibrationError, ValueError) as exc:
        print(f"sweep-alpha: {exc}", file=sys.stderr)
        return 1
    _write_csv(
        out / "alpha_sweep.csv",
        ["alpha", "J_star"],
        ([_fmt(a), _fmt(j)] for a, j in zip(result.alphas, result.j_values)),
    )
    _write_csv(
        out / "fit.csv",
        ["alpha_star", "kappa", "residual"],
        [[_fmt(result.alpha_star), _fmt(result.kappa), _fmt(result.fit_residual)]],
    )
    return 0


def _resolve_out_dir(args, cfg: ScenarioConfig) -> Path:
    if args.out:
        out = args.out
    elif os.environ.get(OUT_DIR_ENV):
        out = os.environ[OUT_DIR_ENV]
    else:
        out = cfg.output_dir
    path = Path(out)
    path.mkdir(parents=True, exist_ok=True)
    return path


def _parse_grid(text: str):
    try:
        values = [float(v) for v in text.split(",") if v.strip()]
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f"bad grid {text!r}: {exc}")
    if not values:
        raise argparse.ArgumentTypeError("empty alpha grid")
    return values


def _parse_manufactured(text: str):
    parts = text.split(",")
    if len(parts) != 2:
        raise argparse.ArgumentTypeError("expected 'alpha_star,kappa'")
    return float(parts[0]), float(parts[1])


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="tokatrack", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p):
        p.add_argument("--config", help="scenario file (key = value lines); defaults apply if omitted")
        p.add_argument("--out", help=f"output directory (overrides ${OUT_DIR_ENV} and output.dir)")
        p.add_argument("--seed", type=int, help="seed recorded for randomized property scenarios")

    p_sim = sub.add_parser("simulate", help="run the closed-loop controller")
    common(p_sim)

    p_fbs = sub.add_parser("fbs", help="run the open-loop forward-backward sweep")
    common(p_fbs)
    p_fbs.add_argument("--alpha", type=float, help="penalty weight (defaults to fbs.alpha)")

    p_sweep = sub.add_parser("sweep-alpha", help="calibrate the penalty weight over a grid")
    common(p_sweep)
    p_sweep.add_argument("--grid", type=_parse_grid, required=True, help="comma-separated alpha values")
    p_sweep.add_argument(
        "--manufactured",
        type=_parse_manufactured,
        help="test hook: fit synthetic J*(alpha) = kappa (alpha - alpha_star)^2 instead of running sweeps",
    )
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        cfg = load_config(args.config) if args.config else ScenarioConfig()
    except (OSError, ValueError) as exc:
        print(f"config: {exc}", file=sys.stderr)
        return 2
    if args.seed is not None:
        cfg.seed = args.seed
    out = _resolve_out_dir(args, cfg)

    if args.command == "simulate":
        return cmd_simulate(cfg, out)
    if args.command == "fbs":
        return cmd_fbs(cfg, out, args.alpha)
    return cmd_sweep_alpha(cfg, out, args.grid, args.manufactured)


if __name__ == "__main__":
    sys.exit(main())
