"""Command-line front door: run the hub, attach labs/users, replay, analyze.

Exit codes: 0 success, 1 usage error, 2 data error.
"""

from __future__ import annotations

import argparse
import asyncio
import sys

from . import pipeline
from .inequalities import (
    bilocality, chsh, k_statistic, mdl_i0, steering_s16_from_table,
)
from .labs import LabSpec
from .predictor import PredictorState
from .replay import LogFormatError, ReplayMismatchError
from .report import format_json_lines, format_row, format_table
from .tables import CountTable, NoDataError, ShapeError, TimeBinCounts, TriCountTable

USAGE_EXIT = 1
DATA_EXIT = 2


class _Parser(argparse.ArgumentParser):
    def error(self, message):  # usage errors exit 1, not argparse's 2
        self.print_usage(sys.stderr)
        print(f"error: {message}", file=sys.stderr)
        raise SystemExit(USAGE_EXIT)


def _parse_signs(text: str) -> tuple[int, ...]:
    signs = tuple(1 if c == "+" else -1 for c in text if c in "+-")
    if len(signs) != 4:
        raise ValueError("signs must be four '+'/'-' characters, e.g. '+++-'")
    return signs


def build_parser() -> _Parser:
    parser = _Parser(prog="bellstream")
    sub = parser.add_subparsers(dest="command", required=True)

    serve = sub.add_parser("serve", help="run the hub with configured labs and users")
    serve.add_argument("--config", required=True)
    serve.add_argument("--seed", type=int)
    serve.add_argument("--duration", type=float)
    serve.add_argument("--port", type=int)
    serve.add_argument("--format", choices=("table", "json-lines"), default="table")

    lab = sub.add_parser("lab", help="attach one simulated lab to a running hub")
    lab.add_argument("--host", default="127.0.0.1")
    lab.add_argument("--port", type=int, required=True)
    lab.add_argument("--id", required=True)
    lab.add_argument("--kind", required=True,
                     choices=("chsh", "steering", "bilocal", "timebin", "mdl"))
    lab.add_argument("--rate", type=int, default=1000)
    lab.add_argument("--burst", action="store_true")
    lab.add_argument("--visibility", type=float, default=1.0)
    lab.add_argument("--eta", type=float, default=1.0)
    lab.add_argument("--seed", type=int, default=0)
    lab.add_argument("--duration", type=float, default=10.0)
    lab.add_argument("--format", choices=("table", "json-lines"), default="table")

    users = sub.add_parser("users", help="attach synthetic users to a running hub")
    users.add_argument("--host", default="127.0.0.1")
    users.add_argument("--port", type=int, required=True)
    users.add_argument("--count", type=int, default=10)
    users.add_argument("--rate", type=float, default=10.0, help="bits per second per user")
    users.add_argument("--source", choices=("fair", "human"), default="human")
    users.add_argument("--robots", type=int, default=0)
    users.add_argument("--duration", type=float, default=10.0)
    users.add_argument("--seed", type=int, default=0)

    rep = sub.add_parser("replay", help="reconstruct lab streams from a monitor log")
    rep.add_argument("log")
    rep.add_argument("--config", required=True, help="run config naming the lab specs")
    rep.add_argument("--format", choices=("table", "json-lines"), default="table")

    analyze = sub.add_parser("analyze", help="evaluate an inequality over a count CSV")
    analyze.add_argument("table")
    analyze.add_argument("--inequality", required=True,
                         choices=("chsh", "steering", "bilocal", "mdl", "k"))
    analyze.add_argument("--signs", default="+++-",
                         help="CHSH sign pattern over cells (0,0),(0,1),(1,0),(1,1)")
    analyze.add_argument("--format", choices=("table", "json-lines"), default="table")

    predict = sub.add_parser("predict", help="streaming accuracy report over stdin bits")
    predict.add_argument("--every", type=int, default=20)

    return parser


def cmd_serve(args) -> int:
    config = pipeline.RunConfig.from_file(args.config)
    if args.seed is not None:
        config.seed = args.seed
    if args.duration is not None:
        config.duration = args.duration
    if args.port is not None:
        config.port = args.port
    result = pipeline.run_serve(config)
    rows = result.rows()
    formatter = format_table if args.format == "table" else format_json_lines
    print(formatter(rows))
    for outcome in result.outcomes:
        if outcome.result is None:
            print(f"# {outcome.spec.lab_id}: insufficient data "
                  f"({outcome.report.trials if outcome.report else 0} trials)",
                  file=sys.stderr)
        if outcome.report is not None and outcome.report.starved:
            print(f"# {outcome.spec.lab_id}: dead time (bit starvation)",
                  file=sys.stderr)
    print(f"# log: {result.log_path}  bits-sent: {result.bits_sent}", file=sys.stderr)
    return 0


def cmd_lab(args) -> int:
    spec = LabSpec(
        lab_id=args.id, kind=args.kind, rate=args.rate, burst=args.burst,
        visibility=args.visibility, eta=args.eta, seed=args.seed,
    )
    outcome = pipeline.LabOutcome(spec=spec, stream="", archived_bits=0,
                                  report=None, result=None)

    async def run():
        task = asyncio.create_task(
            pipeline._lab_client(args.host, args.port, spec, outcome))
        try:
            await asyncio.wait_for(asyncio.shield(task), timeout=args.duration)
        except asyncio.TimeoutError:
            task.cancel()
    asyncio.run(run())
    report, result = pipeline.analyze_stream(spec, outcome.stream)
    if result is None:
        print("no data collected", file=sys.stderr)
        return DATA_EXIT
    rows = [(spec.lab_id, spec.kind, result)]
    print((format_table if args.format == "table" else format_json_lines)(rows))
    return 0


def cmd_users(args) -> int:
    from .sources import make_source

    async def run():
        tasks = []
        for i in range(args.count):
            source = make_source(args.source, seed=args.seed * 100003 + i)
            per_batch = max(1, round(args.rate * 0.2))
            tasks.append(pipeline._user_client(
                args.host, args.port, f"user-{i}", source, per_batch, 0.2,
                args.duration))
        for j in range(args.robots):
            source = make_source("fair", seed=args.seed * 90001 + j)
            tasks.append(pipeline._user_client(
                args.host, args.port, f"robot-{j}", source, 11, 0.5, args.duration))
        return sum(await asyncio.gather(*tasks))

    sent = asyncio.run(run())
    print(f"sent {sent} bits")
    return 0


def cmd_replay(args) -> int:
    config = pipeline.RunConfig.from_file(args.config)
    rows = pipeline.replay(args.log, config.labs)
    print((format_table if args.format == "table" else format_json_lines)(rows))
    return 0


def cmd_analyze(args) -> int:
    kind = args.inequality
    if kind == "k":
        counts = TimeBinCounts.read_csv(args.table)
        result = k_statistic(counts)
        label = "timebin"
    elif kind == "bilocal":
        tri = TriCountTable.read_csv(args.table)
        result = bilocality(tri)
        label = "bilocal"
    else:
        table = CountTable.read_csv(args.table)
        if kind == "chsh":
            result = chsh(table, _parse_signs(args.signs))
        elif kind == "steering":
            result = steering_s16_from_table(table)
        else:
            trials = {(x, y): table.trials(x, y) for x in (0, 1) for y in (0, 1)}
            result = mdl_i0(table.prob, trials=trials)
        label = kind
    rows = [(kind, label, result)]
    print((format_table if args.format == "table" else format_json_lines)(rows))
    return 0


def cmd_predict(args) -> int:
    state = PredictorState()
    total = 0
    unpredicted = 0
    for line in sys.stdin:
        for ch in line.strip():
            if ch in " \t":
                continue
            if ch not in "01":
                print(f"error: non-bit character {ch!r}", file=sys.stderr)
                return DATA_EXIT
            bit = int(ch)
            if state.predict().bit != bit:
                unpredicted += 1
            state.observe(bit)
            total += 1
            if total % args.every == 0:
                accuracy = (total - unpredicted) / total
                print(f"bits={total} accuracy={accuracy:.3f} "
                      f"unpredicted={unpredicted / total:.1%}")
    if total:
        accuracy = (total - unpredicted) / total
        print(f"final: bits={total} accuracy={accuracy:.3f} "
              f"unpredicted={unpredicted / total:.1%}")
    return 0


COMMANDS = {
    "serve": cmd_serve,
    "lab": cmd_lab,
    "users": cmd_users,
    "replay": cmd_replay,
    "analyze": cmd_analyze,
    "predict": cmd_predict,
}


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return exc.code if isinstance(exc.code, int) else USAGE_EXIT
    try:
        return COMMANDS[args.command](args)
    except (NoDataError, ShapeError, LogFormatError, ReplayMismatchError,
            FileNotFoundError, ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return DATA_EXIT


if __name__ == "__main__":
    sys.exit(main())
