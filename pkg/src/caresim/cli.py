"""Command-line entry points.

Subcommands: simulate one scripted session, run a two-session experiment,
print the threshold calibration, replay/verify a log, compute metrics and
report figures from logs, generate/solve/score puzzles, and serve the live
gateway. Report paths write figures next to the comma-separated tables.
"""

from __future__ import annotations

import argparse
import logging
import random
import sys
from pathlib import Path

from . import metrics as metrics_mod
from .caretaker import BUNDLED_PROFILES, CaretakerProfile
from .logio import SessionLog
from .params import (
    FusionWeights,
    SocialParams,
    apply_overrides,
    calibrate_thresholds,
    load_params,
    save_params,
)
from .pollinator import OPS, Puzzle, PuzzleAnswer, generate, score, solve
from .session import (
    ExperimentConfig,
    SessionConfig,
    run_experiment,
    run_session,
    verify_replay,
)

log = logging.getLogger(__name__)


def _load_config(args) -> tuple[SocialParams, FusionWeights]:
    if getattr(args, "config", None):
        params, weights = load_params(args.config)
    else:
        params, weights = SocialParams(), FusionWeights()
    overrides = dict(kv.split("=", 1) for kv in getattr(args, "param", []) or [])
    return apply_overrides(params, weights, overrides)


def _load_profile(name_or_path: str) -> CaretakerProfile:
    if name_or_path in BUNDLED_PROFILES:
        return BUNDLED_PROFILES[name_or_path]
    path = Path(name_or_path)
    if path.exists():
        return CaretakerProfile.load(path)
    raise SystemExit(
        f"unknown profile {name_or_path!r}; bundled: {', '.join(sorted(BUNDLED_PROFILES))}"
    )


def _write_report(logs, out_dir: Path, figures: bool) -> None:
    rows = []
    for i, entry in enumerate(logs, start=1):
        order, position, session_log = entry
        rows.append(
            metrics_mod.SummaryRow(
                order=order,
                position=position,
                metrics=metrics_mod.compute_metrics(session_log),
            )
        )
    out_dir.mkdir(parents=True, exist_ok=True)
    summary_path = out_dir / "summary.csv"
    metrics_mod.export_summary(rows, summary_path)
    print(f"wrote {summary_path}")
    if figures:
        from .plotting import render_report_figures

        for path in render_report_figures([l for _, _, l in logs], rows, out_dir):
            print(f"wrote {path}")


def cmd_simulate(args) -> int:
    params, weights = _load_config(args)
    profile = _load_profile(args.profile)
    config = SessionConfig(mode=args.mode, seed=args.seed, phase_s=args.phase_s)
    session_log = run_session(config, profile, params, weights)
    out_dir = Path(args.out)
    out_dir.mkdir(parents=True, exist_ok=True)
    log_path = out_dir / f"session_{session_log.header['session']}_seed{args.seed}.log"
    session_log.save(log_path)
    print(f"wrote {log_path}")
    m = metrics_mod.compute_metrics(session_log)
    print(
        f"session {m.session} ({m.mode}): {m.hits_critical} critical "
        f"({m.responded} responded, {m.ignored} ignored), "
        f"{m.hits_saturation} saturation"
    )
    if not args.no_figures:
        from .plotting import plot_comfort_trace

        figure = plot_comfort_trace(session_log, out_dir / (log_path.stem + ".png"))
        print(f"wrote {figure}")
    return 0


def cmd_experiment(args) -> int:
    params, weights = _load_config(args)
    profile = _load_profile(args.profile)
    config = ExperimentConfig(
        order=args.order, profile=profile, seed=args.seed, phase_s=args.phase_s
    )
    result = run_experiment(config, params, weights)
    out_dir = Path(args.out)
    out_dir.mkdir(parents=True, exist_ok=True)
    entries = []
    for position, session_log in enumerate(result.logs, start=1):
        label = session_log.header["session"]
        path = out_dir / f"{args.order}_{position}_{label}_seed{args.seed}.log"
        session_log.save(path)
        print(f"wrote {path}")
        entries.append((args.order, position, session_log))
    _write_report(entries, out_dir, figures=not args.no_figures)
    for order, position, session_log in entries:
        m = metrics_mod.compute_metrics(session_log)
        print(
            f"{order} position {position} session {m.session}: "
            f"{m.hits_critical} critical ({m.responded} responded), "
            f"{m.hits_saturation} saturation"
        )
    return 0


def cmd_calibrate(args) -> int:
    params, _ = _load_config(args)
    c_critical, c_saturation = calibrate_thresholds(
        args.t_critical,
        args.t_saturation,
        beta0=params.beta0,
        tau0=params.tau0,
        tick_hz=params.tick_hz,
        c_max=params.c_max,
    )
    print(f"c_critical = {c_critical:.6f}")
    print(f"c_saturation = {c_saturation:.6f}")
    return 0


def cmd_replay(args) -> int:
    session_log = SessionLog.load(args.logfile)
    identical, divergent = verify_replay(session_log)
    if identical:
        print("identical")
        return 0
    where = f"tick {divergent}" if divergent is not None else "header/length"
    print(f"divergent at {where}")
    return 1


def cmd_metrics(args) -> int:
    logs = [SessionLog.load(path) for path in args.logfiles]
    entries = [
        (args.group or "-", i, session_log)
        for i, session_log in enumerate(logs, start=1)
    ]
    _write_report(entries, Path(args.out), figures=not args.no_figures)
    return 0


def cmd_puzzle(args) -> int:
    if args.action == "generate":
        rng = random.Random(args.seed)
        puzzle = generate(rng, op_palette=tuple(args.ops), n_constraints=args.n_constraints)
        text = puzzle.to_text(reveal_solution=args.reveal)
        if args.out:
            Path(args.out).write_text(text)
            print(f"wrote {args.out}")
        else:
            sys.stdout.write(text)
        return 0
    puzzle = Puzzle.load(args.file)
    if args.action == "solve":
        solutions = solve(puzzle)
        print(f"{len(solutions)} solution(s)")
        for solution in solutions[:10]:
            print(" ".join(map(str, solution)))
        return 0
    # score
    if puzzle.solution is None:
        solutions = solve(puzzle)
        if len(solutions) != 1:
            raise SystemExit("cannot score against a puzzle without a unique solution")
        solution = solutions[0]
    else:
        solution = puzzle.solution
    filled = {}
    if args.answer:
        for part in args.answer.split(","):
            cell, _, digit = part.partition("=")
            filled[int(cell)] = int(digit)
    x, y, z = score(
        PuzzleAnswer(filled), solution, y_denominator=args.y_denominator
    )
    print(f"X = {x:.1f}")
    print(f"Y = {y:.1f}")
    print(f"Z = {z:.1f}")
    return 0


def cmd_serve(args) -> int:
    from .server import serve
    from .service import ServiceConfig, SessionService

    params, weights = _load_config(args)
    config = ServiceConfig(
        mode=args.mode,
        seed=args.seed,
        phase_s=args.phase_s,
        debug=args.debug,
    )
    serve(
        lambda: SessionService(params, weights, config),
        host=args.host,
        port=args.port,
        speed=args.speed,
        log_path=args.out,
    )
    return 0


def cmd_params(args) -> int:
    params, weights = _load_config(args)
    save_params(args.out, params, weights)
    print(f"wrote {args.out}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="caresim",
        description="comfort-driven caretaker-robot simulator and gateway",
    )
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    def add_common(p):
        p.add_argument("--config", help="flat key=value parameter file")
        p.add_argument(
            "--param",
            action="append",
            metavar="KEY=VALUE",
            help="override one parameter (repeatable)",
        )

    p = sub.add_parser("simulate", help="run one scripted session")
    add_common(p)
    p.add_argument("--mode", choices=("adaptive", "fixed"), required=True)
    p.add_argument("--profile", default="attentive")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--phase-s", type=float, default=240.0)
    p.add_argument("--out", default="out")
    p.add_argument("--no-figures", action="store_true")
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("experiment", help="run a two-session experiment")
    add_common(p)
    p.add_argument("--order", choices=("AF", "FA"), required=True)
    p.add_argument("--profile", default="distracted")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--phase-s", type=float, default=240.0)
    p.add_argument("--out", default="out")
    p.add_argument("--no-figures", action="store_true")
    p.set_defaults(func=cmd_experiment)

    p = sub.add_parser("calibrate", help="solve thresholds from target times")
    add_common(p)
    p.add_argument("--t-critical", type=float, default=90.0)
    p.add_argument("--t-saturation", type=float, default=90.0)
    p.set_defaults(func=cmd_calibrate)

    p = sub.add_parser("replay", help="verify a log replays byte-identically")
    p.add_argument("logfile")
    p.set_defaults(func=cmd_replay)

    p = sub.add_parser("metrics", help="metrics tables and figures from logs")
    p.add_argument("logfiles", nargs="+")
    p.add_argument("--group", choices=("AF", "FA"))
    p.add_argument("--out", default="out")
    p.add_argument("--no-figures", action="store_true")
    p.set_defaults(func=cmd_metrics)

    p = sub.add_parser("puzzle", help="generate, solve or score puzzles")
    puzzle_sub = p.add_subparsers(dest="action", required=True)
    pg = puzzle_sub.add_parser("generate")
    pg.add_argument("--seed", type=int, default=0)
    pg.add_argument("--ops", default="".join(OPS), help=f"op palette, default {''.join(OPS)}")
    pg.add_argument("--n-constraints", type=int, default=10)
    pg.add_argument("--reveal", action="store_true", help="include the solution line")
    pg.add_argument("--out")
    pg.set_defaults(func=cmd_puzzle)
    ps = puzzle_sub.add_parser("solve")
    ps.add_argument("file")
    ps.set_defaults(func=cmd_puzzle)
    pc = puzzle_sub.add_parser("score")
    pc.add_argument("file")
    pc.add_argument("--answer", help="cell=digit pairs, e.g. 0=3,1=7")
    pc.add_argument("--y-denominator", choices=("filled", "all"), default="filled")
    pc.set_defaults(func=cmd_puzzle)

    p = sub.add_parser("serve", help="run the live gateway")
    add_common(p)
    p.add_argument("--mode", choices=("adaptive", "fixed"), default="adaptive")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--phase-s", type=float, default=240.0)
    p.add_argument("--host", default="127.0.0.1")
    p.add_argument("--port", type=int, default=8765)
    p.add_argument("--speed", type=float, default=1.0, help="pacing multiplier; 0 = unpaced")
    p.add_argument("--debug", action="store_true", help="expose comfort telemetry to the client")
    p.add_argument("--out", help="write the session log here at session end")
    p.set_defaults(func=cmd_serve)

    p = sub.add_parser("params", help="write the resolved parameter file")
    add_common(p)
    p.add_argument("--out", default="params.cfg")
    p.set_defaults(func=cmd_params)

    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(
        level=logging.DEBUG if args.verbose else logging.INFO,
        format="%(levelname)s %(name)s: %(message)s",
    )
    try:
        return args.func(args)
    except (ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
