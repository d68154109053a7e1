"""Command-line entry point: ``planeval <subcommand> [options]``."""

from __future__ import annotations

import argparse
import logging
import sys
from pathlib import Path

from planeval.agents.client import DEFAULT_KEY_VARIABLE
from planeval.course.model import Difficulty
from planeval.errors import ConfigError, PlanEvalError
from planeval.eval_core import Mode, Role
from planeval.harness.config import build_config, load_config_file
from planeval.harness.dataset import generate_dataset
from planeval.harness.records import load_records
from planeval.harness.report import render_text, summarize, write_report
from planeval.harness.runner import run_experiment

LEVELS = [d.value for d in Difficulty]


def _common(p: argparse.ArgumentParser, out_help: str) -> None:
    p.add_argument("--seed", type=int, default=None, help="run seed (default 0)")
    p.add_argument("--out", default=None, help=out_help)
    p.add_argument("--parallelism", type=int, default=None, help="concurrent instances (default 1)")


def _run_options(p: argparse.ArgumentParser, env_choice: bool) -> None:
    p.add_argument("--config", help="YAML file with experiment settings; flags override it")
    if env_choice:
        p.add_argument("--env", dest="environment", choices=["course", "fitness"], default=None)
    p.add_argument("--mode", choices=[m.value for m in Mode], default=None)
    p.add_argument("--agent", default=None, help="random, greedy_oracle, hill_climb, zero or endpoint")
    p.add_argument("--n-instances", type=int, default=None)
    p.add_argument("--difficulty", choices=LEVELS, default=None)
    p.add_argument("--dataset", default=None, help="directory written by 'generate' (course only)")
    p.add_argument("--delta", type=float, default=None, help="seat-ratio threshold (default 1.3)")
    p.add_argument("--reask", action="store_true", default=None, help="allow one re-ask after an unparseable reply")
    p.add_argument("--no-timing", action="store_true", help="omit wall time and timestamp for byte-stable output")
    g = p.add_argument_group("endpoint")
    g.add_argument("--base-url", default=None)
    g.add_argument("--model", default=None)
    g.add_argument("--api-key-env", default=None, help=f"variable holding the API key (default {DEFAULT_KEY_VARIABLE})")
    g.add_argument("--temperature", type=float, default=None)
    g.add_argument("--max-tokens", type=int, default=None)
    g.add_argument("--timeout", type=int, default=None)
    g.add_argument("--max-retries", type=int, default=None)
    g.add_argument("--requests-per-minute", type=int, default=None)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="planeval", description="Evaluate agents as planners, verifiers and heuristics.")
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    g = sub.add_parser("generate", help="write course instances and a statistics manifest")
    g.add_argument("--difficulty", choices=LEVELS + ["all"], default="all")
    g.add_argument("--count", type=int, default=400)
    _common(g, "output directory")

    s = sub.add_parser("solve", help="course solver evaluation")
    _run_options(s, env_choice=False)
    _common(s, "output JSONL file")

    v = sub.add_parser("verify", help="verifier evaluation")
    _run_options(v, env_choice=True)
    _common(v, "output JSONL file")

    r = sub.add_parser("rank", help="comparative heuristic evaluation")
    _run_options(r, env_choice=True)
    r.add_argument("--n-candidates", type=int, choices=[2, 4], default=None)
    _common(r, "output JSONL file")

    f = sub.add_parser("fitness-run", help="interactive fitness solver episodes")
    _run_options(f, env_choice=False)
    f.add_argument("--iterations", type=int, default=None)
    f.add_argument("--emergency-probability", type=float, default=None, help="0 disables dynamic constraints")
    f.add_argument("--alpha", type=float, default=None)
    f.add_argument("--beta", type=float, default=None)
    _common(f, "output JSONL file")

    rep = sub.add_parser("report", help="aggregate JSONL records into tables and figures")
    rep.add_argument("paths", nargs="+", help="JSONL files sharing one role")
    rep.add_argument("--no-figures", action="store_true")
    _common(rep, "output directory (default: print the table only)")
    return parser


_ROLE_OF = {"solve": Role.SOLVER, "verify": Role.VERIFIER, "rank": Role.HEURISTIC, "fitness-run": Role.SOLVER}
_DEFAULT_MODE = {Role.SOLVER: Mode.DIRECT, Role.VERIFIER: Mode.ZERO_SHOT, Role.HEURISTIC: Mode.ZERO_SHOT}


def config_from_args(args: argparse.Namespace):
    file_values = load_config_file(args.config) if args.config else {}
    role = _ROLE_OF[args.command]
    if file_values.get("role") not in (None, role.value):
        raise ConfigError(f"config file role {file_values['role']!r} does not match '{args.command}'")
    environment = getattr(args, "environment", None)
    if args.command == "solve":
        environment = "course"
    elif args.command == "fitness-run":
        environment = "fitness"
    overrides = {
        "environment": environment,
        "role": role.value,
        "mode": args.mode,
        "agent": args.agent,
        "n_instances": args.n_instances,
        "difficulty": args.difficulty,
        "dataset": args.dataset,
        "delta": args.delta,
        "reask": args.reask,
        "seed": args.seed,
        "output_path": args.out,
        "parallelism": args.parallelism,
        "n_candidates": getattr(args, "n_candidates", None),
        "record_timing": False if args.no_timing else None,
        "episode": {
            "iterations": getattr(args, "iterations", None),
            "emergency_probability": getattr(args, "emergency_probability", None),
            "alpha": getattr(args, "alpha", None),
            "beta": getattr(args, "beta", None),
        },
        "endpoint": {
            "base_url": args.base_url,
            "model_name": args.model,
            "api_key_source": args.api_key_env,
            "temperature": args.temperature,
            "max_tokens": args.max_tokens,
            "timeout_seconds": args.timeout,
            "max_retries": args.max_retries,
            "requests_per_minute": args.requests_per_minute,
        },
    }
    if "mode" not in file_values and args.mode is None:
        overrides["mode"] = _DEFAULT_MODE[role].value
    return build_config(file_values, overrides)


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING, format="%(levelname)s %(message)s")
    try:
        if args.command == "generate":
            levels = LEVELS if args.difficulty == "all" else [args.difficulty]
            path = generate_dataset(levels, args.count, args.seed or 0, args.out or "dataset", args.parallelism or 1)
            print(f"wrote {args.count} instance(s) per level and {path}")
            return 0
        if args.command == "report":
            records = load_records(args.paths)
            if args.out:
                paths = write_report(records, args.out, figures=not args.no_figures)
                sys.stdout.write(paths["text"].read_text(encoding="utf-8"))
            else:
                sys.stdout.write(render_text(summarize(records)))
            return 0
        cfg = config_from_args(args)
        out = run_experiment(cfg)
        print(f"records in {Path(out)}")
        return 0
    except ConfigError as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return 2
    except (PlanEvalError, OSError, ValueError) as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
