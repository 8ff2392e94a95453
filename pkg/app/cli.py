"""
Command line entry point.

    python -m app run      --config exp.conf [--seed 42] [--out run.json]
    python -m app rollout  --config exp.conf
    python -m app sweep    --config grid.conf --jobs 4 --format csv --out sweep.csv
    python -m app diagnose --config tree.conf

Exit codes: 0 success, 2 configuration error, 3 runtime error.
"""
import argparse
import logging
import sys
from typing import Sequence

from pydantic import ValidationError

from .db import init_db
from .errors import ConfigError
from .logs import configure_logging
from .schemas import ExperimentConfig, RunRecord
from .services import experiment_service, run_log_service
from .settings import settings

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_RUNTIME = 3


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="app", description="Budgeted open-loop planning experiments.")
    sub = parser.add_subparsers(dest="command", required=True)
    for name, help_text in (
        ("run", "one planner run per replication"),
        ("rollout", "receding-horizon rollouts"),
        ("sweep", "grid of budgets x noise levels x planners x seeds"),
        ("diagnose", "count profiles, kappa, proposition-2 check, coverage"),
    ):
        p = sub.add_parser(name, help=help_text)
        p.add_argument("--config", help="flat key = value config file")
        p.add_argument("--out", help="output path (stdout when omitted)")
        p.add_argument("--seed", type=int, help="master seed override")
        p.add_argument("--jobs", type=int, default=None, help="worker processes")
        p.add_argument("--format", choices=["csv", "json"], default=None)
        p.add_argument("--record", action="store_true", help="log the run in the database")
    return parser


def _load(args: argparse.Namespace) -> ExperimentConfig:
    cfg = experiment_service.load_config(args.config) if args.config else ExperimentConfig()
    return experiment_service.with_seed(cfg, args.seed)


def _record_runs(kind: str, records: list[RunRecord]) -> None:
    _, SessionLocal = init_db(settings.DATABASE_URL)
    with SessionLocal() as db:
        for rec in records:
            status = "error" if rec.error else "success"
            run_log_service.log_run(db, kind, rec.planner, status, rec.model_dump(mode="json"))


def _emit(text: str, out: str | None) -> None:
    if out is None:
        sys.stdout.write(text)


def _execute(args: argparse.Namespace) -> int:
    cfg = _load(args)
    out = args.out or cfg.output.path
    fmt = args.format or cfg.output.format
    jobs = args.jobs if args.jobs is not None else settings.SWEEP_JOBS

    if args.command == "diagnose":
        report, oracle = experiment_service.diagnose(cfg, jobs=jobs)
        text = report.model_dump_json(indent=2) + "\n"
        if out:
            with open(out, "w", encoding="utf-8") as fh:
                fh.write(text)
        _emit(text, out)
        if args.record:
            _, SessionLocal = init_db(settings.DATABASE_URL)
            name = f"{cfg.env.id}-{cfg.seeds.master}"
            with SessionLocal() as db:
                run_log_service.store_fixture(db, name, "counts",
                                              {"u": report.count_u, "v": report.count_v})
                run_log_service.store_fixture(db, name, "oracle", oracle.to_dict())
                run_log_service.log_run(db, "diagnose", "", "success", report.model_dump(mode="json"))
        return EXIT_OK

    if args.command == "sweep":
        records = experiment_service.sweep(cfg, jobs=jobs)
    else:
        step = experiment_service.rollout if args.command == "rollout" else experiment_service.run_once
        records = [step(cfg, spawn_key=(0, 0, rep)) for rep in range(cfg.seeds.replications)]

    text = experiment_service.write_records(records, fmt, out)
    _emit(text, out)
    if args.record:
        _record_runs(args.command, records)
    return EXIT_OK


def main(argv: Sequence[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    configure_logging()
    try:
        return _execute(args)
    except (ConfigError, ValidationError) as exc:
        logger.error("config error: %s", exc)
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except Exception as exc:
        logger.exception("%s failed", args.command)
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_RUNTIME


if __name__ == "__main__":
    sys.exit(main())
