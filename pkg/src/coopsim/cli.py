"""Command line: ``coopsim run | tables | replay | validate``.

Exit codes: 0 success, 1 usage, 2 backend failure, 3 validation.
"""

from __future__ import annotations

import argparse
import logging
import sys
from dataclasses import replace
from pathlib import Path

from coopsim import transcript
from coopsim.runner import (
    AggregationError, ConfigError, export_tables, load_results, load_run_config, render_text_tables, run_matrix,
)

EXIT_OK, EXIT_USAGE, EXIT_BACKEND, EXIT_VALIDATION = 0, 1, 2, 3

log = logging.getLogger("coopsim")


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        print(f"{self.prog}: error: {message}", file=sys.stderr)
        sys.exit(EXIT_USAGE)


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="coopsim", description=__doc__.splitlines()[0])
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    run = sub.add_parser("run", help="run an experiment matrix and write the results tables")
    run.add_argument("config", type=Path)
    run.add_argument("--jobs", type=int, default=None,
                     help="parallel episodes (default 1; live HTTP backends should stay at 1)")
    run.add_argument("--backend", choices=("scripted", "http", "replay"), help="override the configured backend")
    run.add_argument("--allow-failed", action="store_true", help="aggregate cells with no completed episode")
    run.add_argument("--output", type=Path, help="override output_dir from the config")

    tables = sub.add_parser("tables", help="print (and re-export) the tables of a results directory")
    tables.add_argument("results_dir", type=Path)

    replay = sub.add_parser("replay", help="replay a dialogue log in the terminal")
    replay.add_argument("log", type=Path)
    replay.add_argument("--delay-ms", type=int, default=0)
    replay.add_argument("--speech-cmd", help="command template run per utterance; $TEXT$, $SPEAKER$, $VOICE$")
    replay.add_argument("--follow", action="store_true", help="keep reading as the log grows")
    replay.add_argument("--idle-timeout", type=float, default=None, help="stop following after N idle seconds")

    validate = sub.add_parser("validate", help="check a run config")
    validate.add_argument("config", type=Path)
    return parser


def cmd_run(args) -> int:
    matrix = load_run_config(args.config)
    if args.backend:
        matrix = replace(matrix, backend=replace(matrix.backend, kind=args.backend))
    out = args.output or Path(matrix.output_dir)
    jobs = args.jobs if args.jobs is not None else 1
    if jobs < 1:
        raise ConfigError("must be >= 1", "--jobs")
    results = run_matrix(matrix, jobs=jobs, allow_failed=args.allow_failed)
    export_tables(results, out)
    print(render_text_tables(results), end="")
    if results.backend_failures:
        print(f"{results.backend_failures} episode(s) aborted by backend errors", file=sys.stderr)
        return EXIT_BACKEND
    return EXIT_OK


def cmd_tables(args) -> int:
    results = load_results(args.results_dir)
    export_tables(results, args.results_dir)
    print(render_text_tables(results), end="")
    return EXIT_OK


def cmd_replay(args) -> int:
    if not args.log.exists():
        print(f"no such log: {args.log}", file=sys.stderr)
        return EXIT_USAGE
    if args.follow:
        source = transcript.follow_log(args.log, idle_timeout=args.idle_timeout)
    else:
        source = transcript.parse_log(args.log)
    try:
        transcript.replay(source, delay_ms=args.delay_ms, speech_command=args.speech_cmd)
    except KeyboardInterrupt:
        pass
    return EXIT_OK


def cmd_validate(args) -> int:
    matrix = load_run_config(args.config)
    n = len(matrix.combos) * len(matrix.models) * len(matrix.modes) * len(matrix.seeds)
    print(f"ok: {len(matrix.combos)} combos x {len(matrix.models)} models x {len(matrix.modes)} modes x "
          f"{len(matrix.seeds)} episodes = {n} episodes")
    return EXIT_OK


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    handler = {"run": cmd_run, "tables": cmd_tables, "replay": cmd_replay, "validate": cmd_validate}[args.command]
    try:
        return handler(args)
    except ConfigError as exc:
        print(f"invalid config: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    except AggregationError as exc:
        print(str(exc), file=sys.stderr)
        if exc.backend_failures:
            print(f"{exc.backend_failures} episode(s) aborted by backend errors", file=sys.stderr)
            return EXIT_BACKEND
        return EXIT_VALIDATION
    except FileNotFoundError as exc:
        print(str(exc), file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
