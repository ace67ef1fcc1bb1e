"""src/doublet/cli.py

Batch front end: ``doublet SCENARIO EXPERIMENT [--events N] [--seed S] ...``.
"""

from __future__ import annotations

import argparse
import json
import logging
import os
import sys
from dataclasses import dataclass
from pathlib import Path
from typing import Any, Iterable, List, Mapping, Optional, Sequence

import yaml

from doublet.constants import (
    DEFAULT_EVENTS,
    DEFAULT_OUTPUT_DIR,
    DEFAULT_SEED,
    ENV_OUTPUT_DIR,
    ENV_SEED,
    EXIT_CLAIM_FAILED,
    EXIT_INPUT_ERROR,
    EXIT_OK,
    REPORT_FORMATS,
    validate_seed,
)
from doublet.core.dual import EventRecord
from doublet.errors import ArgumentError, DoubletError
from doublet.experiments import available_experiments, get_experiment
from doublet.experiments.report import ExperimentReport
from doublet.integrations.serializers import doublet_encoder
from doublet.scenario_format import load_scenario

logger = logging.getLogger(__name__)

LOG_FILE = "doublet.log"


@dataclass(frozen=True)
class RunConfig:
    """Everything one batch run needs; validated on construction."""

    scenario_path: Path
    experiment: str
    events: int = DEFAULT_EVENTS
    master_seed: int = DEFAULT_SEED
    output_dir: Path = Path(DEFAULT_OUTPUT_DIR)
    emit_events: bool = False
    report_format: str = "yaml"
    workers: int = 1

    def __post_init__(self) -> None:
        if isinstance(self.events, bool) or not isinstance(self.events, int):
            raise ArgumentError(f"Event count must be int, got {self.events!r}")
        if self.events < 1:
            raise ArgumentError(f"Event count must be at least 1, got {self.events}")
        if self.experiment not in available_experiments():
            raise ArgumentError(
                f"Unknown experiment {self.experiment!r}; "
                f"choose from {', '.join(available_experiments())}"
            )
        validate_seed(self.master_seed)
        if self.report_format not in REPORT_FORMATS:
            raise ArgumentError(
                f"Report format must be one of {REPORT_FORMATS}, "
                f"got {self.report_format!r}"
            )
        if isinstance(self.workers, bool) or self.workers < 1:
            raise ArgumentError(f"Workers must be at least 1, got {self.workers}")

    @classmethod
    def from_namespace(
        cls, args: argparse.Namespace, environ: Mapping[str, str]
    ) -> RunConfig:
        """
        Build a config from parsed flags, falling back to the environment.

        Precedence is flag, then ``DOUBLET_SEED`` / ``DOUBLET_OUT``, then the
        defaults in ``doublet.constants``.

        Raises:
            ArgumentError: If a value is invalid.
        """
        seed = args.seed
        if seed is None and environ.get(ENV_SEED):
            try:
                seed = int(environ[ENV_SEED], 0)
            except ValueError as exc:
                raise ArgumentError(
                    f"{ENV_SEED} must be an integer, got {environ[ENV_SEED]!r}"
                ) from exc
        output = args.out or environ.get(ENV_OUTPUT_DIR) or DEFAULT_OUTPUT_DIR
        return cls(
            scenario_path=Path(args.scenario),
            experiment=args.experiment,
            events=args.events,
            master_seed=DEFAULT_SEED if seed is None else seed,
            output_dir=Path(output),
            emit_events=args.emit_events,
            report_format=args.format,
            workers=args.workers,
        )

    @property
    def report_path(self) -> Path:
        return self.output_dir / f"{self.experiment}-report.{self.report_format}"

    @property
    def events_path(self) -> Path:
        return self.output_dir / f"{self.experiment}-events.jsonl"


class _Parser(argparse.ArgumentParser):
    """Argument parser that reports usage errors with the input-error status."""

    def error(self, message: str) -> Any:  # type: ignore[override]
        self.print_usage(sys.stderr)
        self.exit(EXIT_INPUT_ERROR, f"{self.prog}: error: {message}\n")


def _seed(text: str) -> int:
    try:
        return validate_seed(int(text, 0))
    except ValueError as exc:
        raise argparse.ArgumentTypeError(str(exc)) from exc


def build_parser() -> argparse.ArgumentParser:
    """Return the command-line parser."""
    parser = _Parser(
        prog="doublet",
        description="Simulate measurement scenarios with a dynamical state "
        "and per-event pointer records.",
    )
    parser.add_argument("scenario", help="scenario YAML file")
    parser.add_argument(
        "experiment",
        choices=available_experiments(),
        help="experiment to run",
    )
    parser.add_argument(
        "--events",
        type=int,
        default=DEFAULT_EVENTS,
        help=f"number of events (default: {DEFAULT_EVENTS})",
    )
    parser.add_argument(
        "--seed",
        type=_seed,
        default=None,
        help=f"64-bit master seed (default: ${ENV_SEED} or {DEFAULT_SEED})",
    )
    parser.add_argument(
        "--out",
        default=None,
        help=f"output directory (default: ${ENV_OUTPUT_DIR} or {DEFAULT_OUTPUT_DIR})",
    )
    parser.add_argument(
        "--emit-events",
        action="store_true",
        help="write one JSON line per event",
    )
    parser.add_argument(
        "--format",
        choices=REPORT_FORMATS,
        default="yaml",
        help="report file format (default: yaml)",
    )
    parser.add_argument(
        "--workers",
        type=int,
        default=1,
        help="worker processes for the event loop (default: 1)",
    )
    parser.add_argument("-v", "--verbose", action="store_true", help="debug logging")
    return parser


def setup_logging(level: int = logging.INFO, output_dir: Optional[Path] = None) -> None:
    """Log to stderr and, when ``output_dir`` is given, to ``doublet.log`` in it."""
    handlers: List[logging.Handler] = [logging.StreamHandler(sys.stderr)]
    if output_dir:
        output_dir.mkdir(parents=True, exist_ok=True)
        handlers.append(logging.FileHandler(output_dir / LOG_FILE, encoding="utf-8"))
    logging.basicConfig(
        level=level,
        format="%(asctime)s | %(levelname)-8s | %(name)s | %(message)s",
        datefmt="%Y-%m-%d %H:%M:%S",
        handlers=handlers,
        force=True,
    )


def shutdown_logging() -> None:
    """Close and detach the root handlers so the log file is released."""
    root_logger = logging.getLogger()
    for handler in root_logger.handlers[:]:
        handler.close()
        root_logger.removeHandler(handler)


def write_report(report: ExperimentReport, config: RunConfig) -> Path:
    """Write the report in the configured format and return its path."""
    path = config.report_path
    if config.report_format == "json":
        text = json.dumps(report, default=doublet_encoder, indent=2, sort_keys=True)
    else:
        payload = json.loads(json.dumps(report, default=doublet_encoder))
        text = yaml.safe_dump(payload, sort_keys=False, allow_unicode=True)
    path.write_text(text.rstrip("\n") + "\n", encoding="utf-8")
    return path


def write_events(records: Iterable[EventRecord], config: RunConfig) -> Path:
    """Write one sorted-key JSON object per event and return the path."""
    path = config.events_path
    with open(path, "w", encoding="utf-8", newline="\n") as handle:
        for record in records:
            handle.write(json.dumps(record, default=doublet_encoder, sort_keys=True))
            handle.write("\n")
    return path


def run(config: RunConfig) -> int:
    """
    Run one batch job.

    Returns:
        int: 0 when every verdict passes, 2 when a claim fails, 1 when the
        scenario cannot be loaded or run, or a file cannot be written.
    """
    try:
        scenario = load_scenario(config.scenario_path)
        report = get_experiment(config.experiment).run(
            scenario, config.events, config.master_seed, config.workers
        )
        config.output_dir.mkdir(parents=True, exist_ok=True)
        report_path = write_report(report, config)
        logger.info("Report written to %s", report_path)
        if config.emit_events:
            events_path = write_events(report.records, config)
            logger.info("%d events written to %s", len(report.records), events_path)
    except (DoubletError, OSError, ValueError) as exc:
        logger.error("%s", exc)
        return EXIT_INPUT_ERROR

    if report.passed:
        return EXIT_OK
    logger.error(
        "%d of %d verdicts failed", len(report.failures), len(report.verdicts)
    )
    return EXIT_CLAIM_FAILED


def main(argv: Optional[Sequence[str]] = None) -> int:
    """Entry point of ``doublet`` and ``python -m doublet``."""
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        config = RunConfig.from_namespace(args, os.environ)
    except ValueError as exc:
        parser.print_usage(sys.stderr)
        print(f"{parser.prog}: error: {exc}", file=sys.stderr)
        return EXIT_INPUT_ERROR

    setup_logging(logging.DEBUG if args.verbose else logging.INFO, config.output_dir)
    try:
        return run(config)
    finally:
        shutdown_logging()
