"""Command line front end: ``heatbench {solve,bench,sweep,analyze,metrics}``.

Exit status is 0 on success, 1 for usage errors and 2 for runtime failures
(unstable configuration, I/O, ghost-exchange protocol violations).
"""

from __future__ import annotations

import argparse
import csv
import math
import sys
from pathlib import Path

import numpy as np

from . import analysis, bench
from .core import STRATEGIES, ConfigError, PartitionError, SolverConfig, solve, total_heat
from .exchange import Disconnected, ProtocolError

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_RUNTIME = 2

_DEFAULTS = SolverConfig()


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _int_at_least(lo: int):
    def parse(text: str) -> int:
        try:
            value = int(text)
        except ValueError:
            raise argparse.ArgumentTypeError(f"invalid integer {text!r}") from None
        if value < lo:
            raise argparse.ArgumentTypeError(f"must be >= {lo}, got {value}")
        return value

    return parse


def _real(positive: bool):
    def parse(text: str) -> float:
        try:
            value = float(text)
        except ValueError:
            raise argparse.ArgumentTypeError(f"invalid number {text!r}") from None
        if not math.isfinite(value) or value < 0 or (positive and value == 0):
            raise argparse.ArgumentTypeError(f"must be {'> 0' if positive else '>= 0'}, got {text}")
        return value

    return parse


def _thread_list(text: str) -> list[int]:
    parse = _int_at_least(1)
    items = [s for s in text.split(",") if s.strip()]
    if not items:
        raise argparse.ArgumentTypeError("empty thread list")
    return [parse(s.strip()) for s in items]


def _add_solver_flags(p: argparse.ArgumentParser) -> None:
    d = _DEFAULTS
    p.add_argument("--nodes", type=_int_at_least(1), default=d.nodes, help=f"grid cells (default {d.nodes})")
    p.add_argument("--steps", type=_int_at_least(0), default=d.steps, help=f"time steps (default {d.steps})")
    p.add_argument("--threads", type=_int_at_least(1), default=d.threads, help=f"workers (default {d.threads})")
    p.add_argument("--alpha", type=_real(False), default=d.alpha, help=f"diffusivity (default {d.alpha})")
    p.add_argument("--dt", type=_real(True), default=d.dt, help=f"time step (default {d.dt})")
    p.add_argument("--dx", type=_real(True), default=d.dx, help=f"grid spacing (default {d.dx})")
    p.add_argument("--strategy", choices=STRATEGIES, default=d.strategy, help=f"default {d.strategy}")
    p.add_argument("--paper-denominator", action="store_true", help="divide the stencil by 2*dx instead of dx**2")
    p.add_argument("--allow-unstable", action="store_true", help="run even if dt*alpha/D > 0.5")
    p.add_argument("--validate", action="store_true", help="step-tag ghost messages and check the protocol")


def _add_bench_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--repetitions", type=_int_at_least(1), default=bench.DEFAULT_REPETITIONS)
    p.add_argument("--warmup", type=_int_at_least(0), default=bench.DEFAULT_WARMUP)
    p.add_argument("--output", metavar="PATH", help="CSV file (default: CSV on stdout)")
    p.add_argument("--append", action="store_true", help="append to --output instead of overwriting")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="heatbench", description="Parallel 1D heat equation benchmark suite.")
    sub = parser.add_subparsers(dest="command", metavar="{solve,bench,sweep,analyze,metrics}")

    p = sub.add_parser("solve", help="run the solver and summarise the final field")
    _add_solver_flags(p)
    p.add_argument("--dump-field", metavar="PATH", help="write the final field, one value per line")

    p = sub.add_parser("bench", help="time repeated runs at one thread count")
    _add_solver_flags(p)
    _add_bench_flags(p)

    p = sub.add_parser("sweep", help="time runs over several thread counts")
    _add_solver_flags(p)
    _add_bench_flags(p)
    p.add_argument("--thread-list", type=_thread_list, required=True, metavar="a,b,c")

    p = sub.add_parser("analyze", help="fit scaling curves to benchmark CSV")
    p.add_argument("--input", required=True, metavar="PATH", help="benchmark CSV")
    p.add_argument(
        "--efforts",
        metavar="PATH",
        help="CSV with columns label,effort_months[,t_average] for the classification map",
    )
    p.add_argument("--output", metavar="PATH", help="result rows (.csv, otherwise JSON lines)")

    p = sub.add_parser("metrics", help="count lines of code and estimate COCOMO effort")
    p.add_argument("--path", required=True, metavar="PATH")
    p.add_argument("--output", metavar="PATH", help="result rows (.csv, otherwise JSON lines)")
    return parser


def parse_args(argv: list[str] | None = None) -> argparse.Namespace:
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.command is None:
        parser.print_help(sys.stderr)
        parser.exit(EXIT_USAGE)
    if getattr(args, "append", False) and not args.output:
        parser.error("--append requires --output")
    return args


def config_from_args(args: argparse.Namespace) -> SolverConfig:
    return SolverConfig(
        nodes=args.nodes,
        steps=args.steps,
        threads=args.threads,
        alpha=args.alpha,
        dt=args.dt,
        dx=args.dx,
        strategy=args.strategy,
        denominator_mode="paper_literal" if args.paper_denominator else "squared",
        validate=args.validate,
        allow_unstable=args.allow_unstable,
    )


def _cmd_solve(args) -> None:
    config = config_from_args(args)
    field = solve(config)
    u = field.current
    print(
        f"nodes={config.nodes} steps={field.step} strategy={config.strategy} threads={config.threads} "
        f"min={float(u.min())!r} max={float(u.max())!r} mean={float(np.mean(u))!r} total_heat={total_heat(field)!r}"
    )
    if args.dump_field:
        path = Path(args.dump_field)
        with open(path, "w") as fh:
            fh.writelines(f"{float(v)!r}\n" for v in u)


def _emit_records(records, args) -> None:
    if args.output:
        bench.write_csv(records, args.output, append=args.append)
    else:
        bench.write_records(records, sys.stdout)


def _cmd_bench(args, thread_list) -> None:
    config = config_from_args(args)
    # Summaries go to stderr when the CSV itself is on stdout.
    summary_stream = sys.stdout if args.output else sys.stderr
    records = bench.sweep(
        config,
        thread_list,
        repetitions=args.repetitions,
        warmup=args.warmup,
        on_record=lambda r: print(r.summary(), file=summary_stream, flush=True),
    )
    _emit_records(records, args)


def _read_efforts(path: str) -> list[dict]:
    with open(path, newline="") as fh:
        reader = csv.DictReader(fh)
        missing = {"label", "effort_months"} - set(reader.fieldnames or ())
        if missing:
            raise ValueError(f"{path}: missing column(s) {sorted(missing)}")
        return list(reader)


def _cmd_analyze(args) -> None:
    records = bench.read_csv(args.input)
    if not records:
        raise ValueError(f"{args.input}: no benchmark records")
    rows = []
    for strategy, fit in analysis.fits_by_strategy(records).items():
        if isinstance(fit, analysis.DegenerateFit):
            print(f"{strategy:<12} skipped: {fit}")
            continue
        print(f"{strategy:<12} serial_s={fit.serial_s:.6g} parallel_s={fit.parallel_s:.6g} R2={fit.r_squared:.6g}")
        rows.append(analysis.fit_row(strategy, fit))

    averages = analysis.average_times(records)
    for strategy, avg in averages.items():
        print(f"{strategy:<12} T_average={avg.t_average:.6g} (T2={avg.t2:.6g} T20={avg.t20:.6g} T40={avg.t40:.6g})")
        rows.append({"kind": "t_average", "label": strategy, "t2": avg.t2, "t20": avg.t20, "t40": avg.t40,
                     "t_average": avg.t_average})

    if args.efforts:
        entries = []
        for row in _read_efforts(args.efforts):
            label = row["label"]
            if row.get("t_average"):
                t_avg = float(row["t_average"])
            elif label in averages:
                t_avg = averages[label].t_average
            else:
                print(f"{label:<12} skipped: no t_average (needs runs at 2, 20 and 40 threads)")
                continue
            entries.append((label, float(row["effort_months"]), t_avg))
        if entries:
            print(f"{'label':<12} {'x (effort)':>12} {'y (speed)':>12}")
            for point in analysis.classify(entries):
                print(f"{point.label:<12} {point.x:>12.6f} {point.y:>12.6f}")
                rows.append(analysis.point_row(point))

    if args.output:
        analysis.write_rows(rows, args.output)


def _cmd_metrics(args) -> None:
    report = analysis.count_loc(args.path)
    for path, err in report.errors:
        print(f"warning: skipped {path}: {err}", file=sys.stderr)
    width = max([len(p) for p in report.files] + [4])
    print(f"{'file':<{width}} {'code':>7} {'comment':>8} {'blank':>7}")
    for path, c in report.files.items():
        print(f"{path:<{width}} {c.code:>7d} {c.comment:>8d} {c.blank:>7d}")
    print(f"{'total':<{width}} {report.total:>7d}")
    est = analysis.cocomo(report.total)
    print(
        f"COCOMO (basic, organic): kloc={est.kloc:.3f} effort={est.effort_pm:.4f} person-months "
        f"schedule={est.schedule_months:.4f} months"
    )
    if args.output:
        rows = [{"kind": "file", "path": p, "code": c.code, "comment": c.comment, "blank": c.blank}
                for p, c in report.files.items()]
        rows.append({"kind": "cocomo", "loc": est.loc, "kloc": est.kloc, "effort_pm": est.effort_pm,
                     "schedule_months": est.schedule_months})
        analysis.write_rows(rows, args.output)


def run(args: argparse.Namespace) -> int:
    try:
        if args.command == "solve":
            _cmd_solve(args)
        elif args.command == "bench":
            _cmd_bench(args, [args.threads])
        elif args.command == "sweep":
            _cmd_bench(args, args.thread_list)
        elif args.command == "analyze":
            _cmd_analyze(args)
        else:
            _cmd_metrics(args)
    except (ConfigError, PartitionError, ProtocolError, Disconnected, OSError, ValueError) as exc:
        print(f"heatbench {args.command}: error: {exc}", file=sys.stderr)
        return EXIT_RUNTIME
    return EXIT_OK


def main(argv: list[str] | None = None) -> int:
    return run(parse_args(argv))


if __name__ == "__main__":
    sys.exit(main())
