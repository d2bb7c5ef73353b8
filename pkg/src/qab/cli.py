"""Command-line front end.

Exit codes: 0 success, 1 invalid config or arguments, 2 solver
non-convergence, 3 I/O failure, 4 verification mismatch.
"""

from __future__ import annotations

import argparse
import contextlib
import csv
import sys

import numpy as np

from .circuit import conversion_ratio
from .config import load_config
from .errors import ConfigError, PowerFlowError, QabError
from .harmonic import solve_harmonic
from .powerflow import PowerFlowProblem, solve_phase_shifts
from .sweep import power_ratio_map, power_sweep, ratio_map, redundancy_scan
from .timedomain import (
    cycle_average_powers,
    cycle_copper_loss,
    record_fundamentals,
    simulate_cycles,
)
from .zvs import zvs_check, zvs_check_timedomain

EXIT_OK, EXIT_CONFIG, EXIT_SOLVER, EXIT_IO, EXIT_MISMATCH = 0, 1, 2, 3, 4


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


def _range(text: str):
    try:
        a, b, n = text.split(":")
        a, b, n = float(a), float(b), int(n)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected min:max:count, got {text!r}") from None
    if n < 1:
        raise argparse.ArgumentTypeError("count must be >= 1")
    return a, b, n


def _fmt(v) -> str:
    if isinstance(v, (bool, np.bool_)):
        return "true" if v else "false"
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    return f"{float(v):.9g}"


def _emit(out, key: str, value):
    out.write(f"{key} = {_fmt(value)}\n")


def _emit_report(out, rep, prefix=""):
    for k, v in rep.as_dict().items():
        _emit(out, prefix + k, v)
    _emit(out, prefix + "imbalance", rep.imbalance)


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="qab", description="Quad-active-bridge steady-state, power-flow and ZVS analysis.")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def command(name, help_text):
        p = sub.add_parser(name, help=help_text, description=help_text)
        p.add_argument("--config", required=True, metavar="PATH", help="converter TOML config file (V, H, ohm, Hz; phase shifts as ratio of pi)")
        return p

    def out_flag(p, what):
        p.add_argument("--out", metavar="PATH", help=f"write {what} to PATH")

    def workers_flag(p):
        p.add_argument("--workers", type=int, default=1, metavar="N",
                       help="worker processes for grid cells (default 1; output order is fixed)")

    p = command("simulate", "exact time-domain simulation from the periodic steady state")
    p.add_argument("--cycles", type=int, default=1, metavar="N", help="switching periods to record (default 1)")
    p.add_argument("--samples-per-cycle", type=int, default=1024, metavar="N",
                   help="uniform samples per period, >= 64 (default 1024)")
    out_flag(p, "the waveform CSV")

    command("analyze", "fundamental-frequency powers at the configured phase shifts")

    p = command("solve", "phase shifts for commanded load powers")
    p.add_argument("--p2", type=float, metavar="W", help="power absorbed by port 2 [W]")
    p.add_argument("--p4", type=float, metavar="W", help="power absorbed by port 4 [W]")
    p.add_argument("--p-total", type=float, metavar="W", help="total load power [W], split by --split")
    p.add_argument("--split", type=float, metavar="F", help="fraction of --p-total taken by port 2 (default from config, 0.5)")

    p = command("zvs", "switching-instant currents and ZVS verdicts at the configured phase shifts")
    p.add_argument("--timedomain", action="store_true", help="also evaluate verdicts on the full-harmonic waveform")

    p = command("zvs-map", "ZVS / reactive-power map over load conversion ratios")
    p.add_argument("--m2", type=_range, default=(0.8, 1.5, 21), metavar="a:b:n", help="port-2 conversion ratio axis [-] (default 0.8:1.5:21)")
    p.add_argument("--m4", type=_range, default=(0.75, 1.25, 21), metavar="a:b:n", help="port-4 conversion ratio axis [-] (default 0.75:1.25:21)")
    p.add_argument("--p-total", type=float, metavar="W", help="total load power [W] (default 10%% of rated)")
    p.add_argument("--split", type=float, metavar="F", help="port-2 share of the load power [-]")
    out_flag(p, "the grid CSV")
    workers_flag(p)

    p = command("power-sweep", "phase shifts and powers versus total load power")
    p.add_argument("--p", type=_range, metavar="a:b:n", help="total load power axis [W] (default 0:rated:51)")
    p.add_argument("--split", type=float, metavar="F", help="port-2 share of the load power [-]")
    out_flag(p, "the grid CSV")
    workers_flag(p)

    p = command("power-ratio-map", "ZVS / reactive-power map over port-4 ratio and total power")
    p.add_argument("--m4", type=_range, default=(0.75, 1.25, 21), metavar="a:b:n", help="port-4 conversion ratio axis [-] (default 0.75:1.25:21)")
    p.add_argument("--p", type=_range, default=(0.0, 380.0, 21), metavar="a:b:n", help="total load power axis [W] (default 0:380:21)")
    p.add_argument("--split", type=float, metavar="F", help="port-2 share of the load power [-]")
    out_flag(p, "the grid CSV")
    workers_flag(p)

    p = command("redundancy", "port-1 power and current under a common phase offset")
    p.add_argument("--p-total", type=float, metavar="W", help="total load power [W] (default rated)")
    p.add_argument("--split", type=float, metavar="F", help="port-2 share of the load power [-]")
    p.add_argument("--offsets", type=_range, default=(-0.5, 0.5, 11), metavar="a:b:n",
                   help="common phase-shift offsets [ratio of pi] (default -0.5:0.5:11; write --offsets=-a:b:n for a negative start)")
    out_flag(p, "the scan CSV")

    p = command("compare", "check fundamental phasors against the time-domain steady state")
    p.add_argument("--cycles", type=int, default=1, metavar="N", help="simulated periods; the last is analysed (default 1)")
    p.add_argument("--samples-per-cycle", type=int, default=1024, metavar="N", help="uniform samples per period (default 1024)")
    p.add_argument("--tol-amp", type=float, default=2.0, metavar="PCT", help="amplitude tolerance [%%] (default 2)")
    p.add_argument("--tol-phase", type=float, default=2.0, metavar="DEG", help="phase tolerance [deg] (default 2)")
    return parser


def _split(args, opts):
    split = opts.split if args.split is None else args.split
    if not 0.0 <= split <= 1.0:
        raise UsageError(f"--split {split} outside [0, 1]")
    return split


def _cmd_simulate(args, cfg, opts, out, sink):
    rec = simulate_cycles(cfg, n_cycles=args.cycles, samples_per_cycle=args.samples_per_cycle)
    fund = record_fundamentals(rec, cfg.f_sw)
    for k, name in enumerate(("i11", "i21", "i22", "i31", "i32", "i42", "i5")):
        _emit(out, f"x0_{name}", rec.x[0, k])
    for k, row in enumerate((0, 2, 3, 5)):
        _emit(out, f"i{k + 1}_fund_amp", abs(fund[row]))
        _emit(out, f"i{k + 1}_fund_deg", np.degrees(np.angle(fund[row])))
    _emit(out, "i5_fund_amp", abs(fund[6]))
    _emit(out, "i5_fund_deg", np.degrees(np.angle(fund[6])))
    p = cycle_average_powers(rec)
    for k in range(4):
        _emit(out, f"p{k + 1}_avg", p[k])
    _emit(out, "p_copper_avg", cycle_copper_loss(cfg, rec))
    _emit(out, "samples", len(rec.t))
    if sink is not None:
        rec.to_csv(sink)
    return EXIT_OK


def _cmd_analyze(args, cfg, opts, out, sink):
    for i in (2, 3, 4):
        _emit(out, f"m{i}", conversion_ratio(cfg, i))
    _emit_report(out, solve_harmonic(cfg).report)
    return EXIT_OK


def _cmd_solve(args, cfg, opts, out, sink):
    if args.p_total is not None:
        if args.p2 is not None or args.p4 is not None:
            raise UsageError("use either --p-total or --p2/--p4")
        problem = PowerFlowProblem.from_total(cfg, args.p_total, _split(args, opts))
    else:
        if args.p2 is None or args.p4 is None:
            raise UsageError("solve needs --p2 and --p4, or --p-total")
        problem = PowerFlowProblem(cfg, args.p2, args.p4)
    sol = solve_phase_shifts(problem)
    for i, d in enumerate(sol.delta):
        _emit(out, f"delta{i + 1}", d)
    _emit(out, "converged", sol.converged)
    _emit(out, "iterations", sol.iterations)
    _emit(out, "residual", sol.residual_norm)
    _emit_report(out, sol.report)
    return EXIT_OK if sol.converged else EXIT_SOLVER


def _emit_zvs(out, rep, prefix=""):
    for i in range(4):
        _emit(out, f"{prefix}isw{i + 1}", rep.i_sw[i])
    for i in range(4):
        _emit(out, f"{prefix}margin{i + 1}", rep.margin[i])
    for i in range(4):
        _emit(out, f"{prefix}zvs{i + 1}", bool(rep.zvs[i]))


def _cmd_zvs(args, cfg, opts, out, sink):
    rep = zvs_check(cfg)
    _emit_zvs(out, rep)
    for i in range(4):
        _emit(out, f"q{i + 1}", rep.q[i])
    if args.timedomain:
        _emit_zvs(out, zvs_check_timedomain(cfg), prefix="td_")
    return EXIT_OK


def _grid_summary(out, grid):
    conv = grid.converged
    _emit(out, "cells", conv.size)
    _emit(out, "converged", int(conv.sum()))
    z = grid.zvs[conv]
    q = grid.q[conv]
    for i in range(4):
        _emit(out, f"zvs{i + 1}_cells", int(z[:, i].sum()))
    for i in range(4):
        _emit(out, f"zvs{i + 1}_q_agree", int((z[:, i] == (q[:, i] > 0)).sum()))


def _cmd_zvs_map(args, cfg, opts, out, sink):
    p_total = 0.1 * opts.p_rated if args.p_total is None else args.p_total
    m2, m4 = args.m2, args.m4
    grid = ratio_map(cfg, m2[:2], m4[:2], (m2[2], m4[2]), p_total, _split(args, opts), args.workers)
    _grid_summary(out, grid)
    if sink is not None:
        grid.to_csv(sink)
    return EXIT_OK


def _cmd_power_sweep(args, cfg, opts, out, sink):
    a, b, n = args.p if args.p is not None else (0.0, opts.p_rated, 51)
    if n < 2:
        raise UsageError("power axis needs at least 2 points")
    grid = power_sweep(cfg, b, n, _split(args, opts), p_total_min=a, workers=args.workers)
    _grid_summary(out, grid)
    if sink is not None:
        grid.to_csv(sink)
    return EXIT_OK if grid.converged.all() else EXIT_SOLVER


def _cmd_power_ratio_map(args, cfg, opts, out, sink):
    m4, p = args.m4, args.p
    grid = power_ratio_map(cfg, m4[:2], p[:2], (m4[2], p[2]), _split(args, opts), args.workers)
    _grid_summary(out, grid)
    if sink is not None:
        grid.to_csv(sink)
    return EXIT_OK


def _cmd_redundancy(args, cfg, opts, out, sink):
    p_total = opts.p_rated if args.p_total is None else args.p_total
    a, b, n = args.offsets
    scan = redundancy_scan(cfg, p_total, (a, b), n, _split(args, opts))
    _emit(out, "converged", scan.converged)
    for k, c in enumerate(scan.offset):
        _emit(out, f"p1[{_fmt(c)}]", scan.p1[k])
        _emit(out, f"i1_peak[{_fmt(c)}]", scan.i1_peak[k])
    _emit(out, "p1_spread", np.ptp(scan.p1))
    _emit(out, "i1_peak_spread", np.ptp(scan.i1_peak))
    if sink is not None:
        w = csv.writer(sink, lineterminator="\n")
        w.writerow(("offset", "p1", "i1_peak"))
        for row in zip(scan.offset, scan.p1, scan.i1_peak):
            w.writerow([repr(float(v)) for v in row])
    return EXIT_OK if scan.converged else EXIT_SOLVER


def _cmd_compare(args, cfg, opts, out, sink):
    hb = solve_harmonic(cfg)
    rec = simulate_cycles(cfg, n_cycles=args.cycles, samples_per_cycle=args.samples_per_cycle)
    td = record_fundamentals(rec, cfg.f_sw)
    ok = True
    for name, row in (("i1", 0), ("i2", 2), ("i3", 3), ("i4", 5), ("i5", 6)):
        ref, got = hb.phasors.x_hat[row], td[row]
        amp_err = 100.0 * abs(abs(got) - abs(ref)) / max(abs(ref), 1e-300)
        ph_err = abs(np.degrees(np.angle(got / ref))) if abs(ref) > 0 and abs(got) > 0 else 0.0
        good = amp_err <= args.tol_amp and ph_err <= args.tol_phase
        ok &= good
        _emit(out, f"{name}_amp_err_pct", amp_err)
        _emit(out, f"{name}_phase_err_deg", ph_err)
        _emit(out, f"{name}_ok", good)
    _emit(out, "match", ok)
    return EXIT_OK if ok else EXIT_MISMATCH


COMMANDS = {
    "simulate": _cmd_simulate,
    "analyze": _cmd_analyze,
    "solve": _cmd_solve,
    "zvs": _cmd_zvs,
    "zvs-map": _cmd_zvs_map,
    "power-sweep": _cmd_power_sweep,
    "power-ratio-map": _cmd_power_ratio_map,
    "redundancy": _cmd_redundancy,
    "compare": _cmd_compare,
}


def run(argv=None, stdout=None, stderr=None) -> int:
    out = stdout or sys.stdout
    err = stderr or sys.stderr
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except UsageError as exc:
        err.write(f"qab: error: {exc}\n")
        return EXIT_CONFIG
    try:
        cfg, opts = load_config(args.config)
    except ConfigError as exc:
        err.write(f"qab: invalid config {args.config}: {exc}\n")
        return EXIT_CONFIG
    except OSError as exc:
        err.write(f"qab: cannot read config {args.config}: {exc.strerror or exc}\n")
        return EXIT_IO

    out_path = getattr(args, "out", None)
    with contextlib.ExitStack() as stack:
        sink = None
        if out_path:
            try:
                sink = stack.enter_context(open(out_path, "w", newline="", encoding="utf-8"))
            except OSError as exc:
                err.write(f"qab: cannot write {out_path}: {exc.strerror or exc}\n")
                return EXIT_IO
        try:
            return COMMANDS[args.command](args, cfg, opts, out, sink)
        except UsageError as exc:
            err.write(f"qab: error: {exc}\n")
            return EXIT_CONFIG
        except ConfigError as exc:
            err.write(f"qab: invalid parameters: {exc}\n")
            return EXIT_CONFIG
        except ValueError as exc:
            err.write(f"qab: error: {exc}\n")
            return EXIT_CONFIG
        except PowerFlowError as exc:
            err.write(f"qab: solver failed: {exc}\n")
            return EXIT_SOLVER
        except QabError as exc:
            err.write(f"qab: {exc}\n")
            return EXIT_SOLVER
        except OSError as exc:
            err.write(f"qab: I/O error: {exc}\n")
            return EXIT_IO


def main():
    sys.exit(run())


if __name__ == "__main__":
    main()
