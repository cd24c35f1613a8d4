"""Command-line front end.

Every subcommand reads the run configuration (defaults, then ``--config``
file, then ``--set key=value`` pairs, then the dedicated flags) and exits with

* 0 on success,
* 2 on a usage, configuration or calibration failure,
* 3 when the fixed-point iteration does not converge,
* 4 when the positive gap condition fails.
"""

from __future__ import annotations

import argparse
import csv
import os
import sys
from concurrent.futures import ProcessPoolExecutor

import numpy as np

from .config import KEYS, ConfigError, RunConfig, load_config
from .coupled_solver import SolverConfig, is_cfp, solve_fixed_point
from .displacement import convexity_sweep
from .potential_functional import PGCViolation, W_kappa, big_W, breakdown
from .profiles import (
    Grid,
    Profile,
    ProfilePair,
    random_monotone_profile,
    random_profile,
    read_pair_csv,
    rearrange_increasing,
    write_pair_csv,
)
from .scalar_systems import (
    FAMILIES,
    CalibrationError,
    ScalarSystem,
    calibrate,
    check_gap_condition,
    perturb_bec,
)
from .svgplot import heat_map, line_plot, write_svg
from .window_kernels import Window

EXIT_OK, EXIT_USAGE, EXIT_NO_CONVERGENCE, EXIT_PGC = 0, 2, 3, 4


class CommandFailure(Exception):
    def __init__(self, code: int, message: str):
        super().__init__(message)
        self.code = code


# ---------------------------------------------------------------------------
# building blocks

def _num(x: float) -> str:
    return f"{x:.17g}"


def _ensure_parent(path) -> None:
    parent = os.path.dirname(os.fspath(path))
    if parent:
        os.makedirs(parent, exist_ok=True)


def _write_csv(path, header, rows) -> None:
    _ensure_parent(path)
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for row in rows:
            w.writerow([v if isinstance(v, str) else _num(v) for v in row])


def _emit(lines: dict, path=None) -> None:
    text = "".join(f"{k} = {v}\n" for k, v in lines.items())
    sys.stdout.write(text)
    if path:
        with open(path, "w", newline="") as fh:
            fh.write(text)


def system_params(cfg: RunConfig) -> dict:
    family = cfg["system.family"]
    names = {"ldpc_bec": ("l", "r"), "gldpc": ("n", "e"), "gaussian_ldpc": ("l", "r"), "amp": ("rho", "delta")}
    if family not in names:
        raise CommandFailure(EXIT_USAGE, f"unknown family {family!r}; choose from {', '.join(FAMILIES)}")
    return {k: cfg[f"system.{k}"] for k in names[family]}


def build_system(cfg: RunConfig) -> ScalarSystem:
    params = system_params(cfg)
    try:
        system = calibrate(cfg["system.family"], **params)
    except (CalibrationError, ValueError) as exc:
        raise CommandFailure(EXIT_USAGE, f"calibration failed: {exc}") from None
    if not system.calibration.residuals <= 1e-8:
        raise CommandFailure(EXIT_USAGE, f"calibration residual {system.calibration.residuals:.3e} exceeds 1e-8")
    offset = cfg["system.eps_offset"]
    if offset:
        if system.family != "ldpc_bec":
            raise CommandFailure(EXIT_USAGE, "eps_offset applies to the ldpc_bec family only")
        system = perturb_bec(system, offset)
    return system


def build_window(cfg: RunConfig) -> Window:
    try:
        return Window(cfg["window.kind"], cfg["window.half_width"])
    except ValueError as exc:
        raise CommandFailure(EXIT_USAGE, str(exc)) from None


def build_grid(cfg: RunConfig) -> Grid:
    if not cfg["grid.x_max"] > cfg["grid.x_min"] or not cfg["grid.dx"] > 0:
        raise CommandFailure(EXIT_USAGE, "grid needs x_max > x_min and dx > 0")
    return Grid.from_bounds(cfg["grid.x_min"], cfg["grid.x_max"], cfg["grid.dx"])


def solver_config(cfg: RunConfig) -> SolverConfig:
    try:
        return SolverConfig(**cfg.section("solver"))
    except ValueError as exc:
        raise CommandFailure(EXIT_USAGE, str(exc)) from None


def require_gap(system: ScalarSystem, cfg: RunConfig) -> None:
    report = check_gap_condition(system, cfg["check.lattice"])
    if not report.pgc_holds:
        raise CommandFailure(EXIT_PGC, f"positive gap condition fails: min phi = {report.min_phi:.3e} "
                                       f"at (u, v) = {report.argmin}")


def _read_pair(path, require_monotone=False) -> ProfilePair:
    try:
        return read_pair_csv(path, require_monotone)
    except (OSError, ValueError) as exc:
        raise CommandFailure(EXIT_USAGE, f"cannot read profile CSV {path}: {exc}") from None


def _profile_svg(pair: ProfilePair, title: str) -> str:
    x = pair.grid.x
    return line_plot([("f", x, pair.f.values), ("g", x, pair.g.values)], title, "x", "profile", yrange=(0, 1))


# ---------------------------------------------------------------------------
# subcommands

def cmd_calibrate(cfg: RunConfig, args) -> int:
    system = build_system(cfg)
    cal = system.calibration
    gap = check_gap_condition(system, cfg["check.lattice"])
    params = ";".join(f"{k}={v}" for k, v in system_params(cfg).items())
    _emit({
        "family": system.family,
        "params": params,
        "threshold": _num(cal.threshold),
        "x_MAP": _num(cal.scale_x),
        "y_MAP": _num(cal.scale_y),
        "residual": _num(cal.residuals),
        "pgc": gap.pgc_holds,
        "spgc": gap.spgc_holds,
    })
    if args.out:
        _write_csv(args.out, ["family", "params", "threshold", "x_MAP", "y_MAP", "residual"],
                   [[system.family, params, cal.threshold, cal.scale_x, cal.scale_y, cal.residuals]])
    return EXIT_OK


def cmd_solve(cfg: RunConfig, args) -> int:
    system = build_system(cfg)
    require_gap(system, cfg)
    win = build_window(cfg)
    report = solve_fixed_point(system, win, build_grid(cfg), solver_config(cfg))
    _ensure_parent(args.out or "fixed_point.csv")
    write_pair_csv(args.out or "fixed_point.csv", report.pair)
    _emit({
        "status": report.status,
        "iterations": report.iterations,
        "residual": _num(report.residual),
        "cfp": report.cfp.holds,
        "W": _num(report.W),
        "transition_width": _num(report.transition_width),
        "shift_cells": report.pair.shift,
    }, args.report)
    if args.svg:
        write_svg(args.svg, _profile_svg(report.pair, f"fixed point, {system.label()}"))
    if not report.converged:
        print(f"error: solver stopped with status {report.status}", file=sys.stderr)
        return EXIT_NO_CONVERGENCE
    return EXIT_OK


def cmd_potential(cfg: RunConfig, args) -> int:
    if not args.input:
        raise CommandFailure(EXIT_USAGE, "potential needs --input PROFILE_CSV")
    system = build_system(cfg)
    require_gap(system, cfg)
    win = build_window(cfg)
    pair = _read_pair(args.input)
    parts = breakdown(system, win, pair.f, pair.g)
    lines = {k: _num(v) for k, v in parts.as_row().items()}
    verdict = is_cfp(system, win, pair)
    lines["cfp"] = verdict.holds
    if verdict.holds:
        lines["W_kappa"] = _num(W_kappa(win, pair.f, pair.g, assume_cfp=True))
    _emit(lines, args.report)
    return EXIT_OK


_WORKER_STATE: dict = {}


def _init_worker(values: dict) -> None:
    cfg = RunConfig(dict(values))
    _WORKER_STATE.update(system=build_system(cfg), window=build_window(cfg), cfg=cfg)


def _random_sweep(seed_seq) -> tuple:
    cfg, system, win = _WORKER_STATE["cfg"], _WORKER_STATE["system"], _WORKER_STATE["window"]
    grid = build_grid(cfg)
    rng = np.random.default_rng(seed_seq)
    draw = lambda: random_monotone_profile(rng, grid)  # noqa: E731
    p0, p1 = ProfilePair(draw(), draw()), ProfilePair(draw(), draw())
    lambdas = np.linspace(0.0, 1.0, cfg["convexity.points"])
    path = convexity_sweep(system, win, p0, p1, lambdas)
    return path.lambdas, path.W, path.second_differences, path.convex, path.chord_gap(), path.tol


def _sweep_rows(lambdas, W, second):
    padded = np.concatenate([[np.nan], second, [np.nan]])
    return [[l, w, s] for l, w, s in zip(lambdas, W, padded)]


def _suffixed(path: str, k: int, count: int) -> str:
    if count == 1:
        return path
    stem, ext = os.path.splitext(path)
    return f"{stem}_{k:03d}{ext}"


def cmd_convexity(cfg: RunConfig, args) -> int:
    out = args.out or "sweep.csv"
    if cfg["convexity.points"] < 3:
        raise CommandFailure(EXIT_USAGE, "convexity.points must be at least 3")
    if args.pair0 or args.pair1:
        if not (args.pair0 and args.pair1):
            raise CommandFailure(EXIT_USAGE, "give both --pair0 and --pair1, or neither")
        system = build_system(cfg)
        win = build_window(cfg)
        p0 = _read_pair(args.pair0, require_monotone=True)
        p1 = _read_pair(args.pair1, require_monotone=True)
        lambdas = np.linspace(0.0, 1.0, cfg["convexity.points"])
        try:
            path = convexity_sweep(system, win, p0, p1, lambdas)
        except PGCViolation as exc:
            raise CommandFailure(EXIT_PGC, str(exc)) from None
        results = [(path.lambdas, path.W, path.second_differences, path.convex, path.chord_gap(), path.tol)]
    else:
        count = cfg["convexity.count"]
        seeds = np.random.SeedSequence(cfg["seed"]).spawn(count)
        workers = max(1, cfg["convexity.workers"])
        try:
            if workers == 1:
                _init_worker(cfg.values)
                results = [_random_sweep(s) for s in seeds]
            else:
                with ProcessPoolExecutor(workers, initializer=_init_worker, initargs=(cfg.values,)) as pool:
                    results = list(pool.map(_random_sweep, seeds))
        except PGCViolation as exc:
            raise CommandFailure(EXIT_PGC, str(exc)) from None
    count = len(results)
    all_convex = True
    worst = np.inf
    for k, (lambdas, W, second, convex, chord, tol) in enumerate(results):
        _write_csv(_suffixed(out, k, count), ["lambda", "W", "second_difference"], _sweep_rows(lambdas, W, second))
        all_convex &= convex and chord <= tol
        worst = min(worst, float(second.min()))
        if args.svg:
            write_svg(_suffixed(args.svg, k, count),
                      line_plot([("W", lambdas, W)], "W along the displacement path", "lambda", "W"))
    _emit({"pairs": count, "min_second_difference": _num(worst),
           "verdict": "CONVEX" if all_convex else "NOT CONVEX"}, args.report)
    return EXIT_OK


def cmd_rearrange(cfg: RunConfig, args) -> int:
    system = build_system(cfg)
    require_gap(system, cfg)
    win = build_window(cfg)
    if args.input:
        pair = _read_pair(args.input)
    else:
        rng = np.random.default_rng(cfg["seed"])
        grid = build_grid(cfg)
        pair = ProfilePair(random_profile(rng, grid), random_profile(rng, grid))
    sorted_pair = ProfilePair(rearrange_increasing(pair.f), rearrange_increasing(pair.g))
    before = big_W(system, win, pair.f, pair.g)
    after = big_W(system, win, sorted_pair.f, sorted_pair.g)
    _ensure_parent(args.out or "rearranged.csv")
    write_pair_csv(args.out or "rearranged.csv", sorted_pair)
    if args.svg:
        write_svg(args.svg, _profile_svg(sorted_pair, "increasing rearrangement"))
    _emit({"W_before": _num(before), "W_after": _num(after),
           "monotone": sorted_pair.f.is_monotone and sorted_pair.g.is_monotone,
           "decreased": after <= before + 1e-8}, args.report)
    return EXIT_OK


def cmd_export(cfg: RunConfig, args) -> int:
    system = build_system(cfg)
    outdir = args.out or "export"
    os.makedirs(outdir, exist_ok=True)
    cal = system.calibration
    params = ";".join(f"{k}={v}" for k, v in system_params(cfg).items())
    _write_csv(os.path.join(outdir, "calibration.csv"),
               ["family", "params", "threshold", "x_MAP", "y_MAP", "residual"],
               [[system.family, params, cal.threshold, cal.scale_x, cal.scale_y, cal.residuals]])

    t = np.linspace(0.0, 1.0, 401)
    hf, hg = system.h_f(t), system.h_g(t)
    _write_csv(os.path.join(outdir, "exit_curves.csv"), ["t", "h_f", "h_g"], zip(t, hf, hg))
    A, At = system.area_A(t), system.area_Atilde(t)
    _write_csv(os.path.join(outdir, "areas.csv"), ["t", "A", "A_tilde"], zip(t, A, At))
    s = np.linspace(0.0, 1.0, 65)
    phi = system.phi(s[:, None], s[None, :])
    _write_csv(os.path.join(outdir, "phi.csv"), ["u", "v", "phi"],
               ([s[i], s[j], phi[i, j]] for i in range(len(s)) for j in range(len(s))))

    label = system.label()
    write_svg(os.path.join(outdir, "exit.svg"), line_plot(
        [("u -> h_f(u)", t, hf), ("h_g(v) <- v", hg, t)], f"update curves, {label}", "u", "v",
        (0, 1), (0, 1)))
    write_svg(os.path.join(outdir, "phi.svg"), heat_map(phi, s, s, f"phi(u, v), {label}", "u", "v"))
    write_svg(os.path.join(outdir, "areas.svg"), line_plot(
        [("A(u)", t, A), ("A_tilde(v)", t, At)], f"signed areas, {label}", "t", "area"))
    if args.input:
        write_svg(os.path.join(outdir, "profile.svg"), _profile_svg(_read_pair(args.input), label))
    _emit({"directory": outdir, "threshold": _num(cal.threshold)})
    return EXIT_OK


COMMANDS = {
    "calibrate": (cmd_calibrate, "calibrate a scalar system and print its threshold"),
    "solve": (cmd_solve, "solve the coupled fixed-point equations"),
    "potential": (cmd_potential, "evaluate the coupled potential of a profile CSV"),
    "convexity": (cmd_convexity, "sweep W along displacement paths"),
    "rearrange": (cmd_rearrange, "increasing rearrangement of a profile pair"),
    "export": (cmd_export, "write update curves, areas and phi as CSV and SVG"),
}


# ---------------------------------------------------------------------------
# argument handling

def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="flat key = value config file")
    common.add_argument("--set", action="append", default=[], metavar="KEY=VALUE",
                        help="override any config key (repeatable)")
    for key in KEYS:
        kwargs = dict(dest=key.dest, default=argparse.SUPPRESS, help=f"{key.help} [{key.name}, default {key.default!r}]")
        if key.name == "system.family":
            kwargs["choices"] = FAMILIES
        elif key.name == "window.kind":
            kwargs["choices"] = ("uniform", "triangular", "gaussian")
        flag = "--window" if key.name == "window.kind" else key.flag
        common.add_argument(flag, **kwargs)
    common.add_argument("--out", help="output file (directory for export)")
    common.add_argument("--report", help="also write the key = value report here")
    common.add_argument("--svg", help="write an SVG figure here")
    common.add_argument("--input", help="input profile CSV (x,f,g)")
    common.add_argument("--pair0", help="first endpoint profile CSV for convexity")
    common.add_argument("--pair1", help="second endpoint profile CSV for convexity")

    parser = argparse.ArgumentParser(prog="spatial-coupling", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)
    for name, (_, help_text) in COMMANDS.items():
        sub.add_parser(name, parents=[common], help=help_text, description=help_text)
    return parser


def resolve_config(args) -> RunConfig:
    cfg = load_config(args.config) if args.config else RunConfig()
    for item in args.set:
        key, sep, value = item.partition("=")
        if not sep:
            raise ConfigError(f"--set expects KEY=VALUE, got {item!r}")
        cfg.set(key.strip(), value.strip())
    for key in KEYS:
        if hasattr(args, key.dest):
            cfg.set(key.name, getattr(args, key.dest))
    return cfg


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        cfg = resolve_config(args)
        return COMMANDS[args.command][0](cfg, args)
    except (ConfigError, OSError) as exc:
        parser.print_usage(sys.stderr)
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except CommandFailure as exc:
        if exc.code == EXIT_USAGE:
            parser.print_usage(sys.stderr)
        print(f"error: {exc}", file=sys.stderr)
        return exc.code
    except PGCViolation as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_PGC


if __name__ == "__main__":
    sys.exit(main())
