# SPDX-FileCopyrightText: 2026-present preguard contributors
#
# SPDX-License-Identifier: MIT
import json
import logging
import os
import sys

from argparse import ArgumentParser, Namespace
from pathlib import Path
from typing import Any
from typing import Callable
from typing import NoReturn
from typing import Optional
from typing import Sequence
from tqdm import tqdm

from preguard.__about__ import __version__
from preguard.errors import PreguardError
from preguard.evalkit import (
    DatasetFailure, DatasetRecord, DomainTooLarge, collect_metrics, cyclomatic,
    emit_dataset, enumerate_envs, explicit_guards, find_targets, judge,
    load_domain, purity, sidecar_path, triviality,
)
from preguard.instrument import NonProgress, infer
from preguard.lang import Program, ast_node_count, parse_program
from preguard.lang.util import statement_count
from preguard.reduce import Reducer, ReductionConstraint
from preguard.seedgen import PreconditionProgram, write_seed
from preguard.seedgen.types import PRE_SUFFIX
from preguard.testgen import read_suite, write_suite

from .config import ConfigError, RunConfig, build_config

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_NOT_CONVERGED = 2
EXIT_DOMAIN_TOO_LARGE = 3
EXIT_INCORRECT = 4

SOURCE_SUFFIX = ".mpl"
DATASET_NAME = "dataset.jsonl"


class _Parser(ArgumentParser):
    """
    ArgumentParser that reports usage errors with exit status 1
    """

    def error(self, message: str) -> NoReturn:
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _common_flags() -> ArgumentParser:
    common = ArgumentParser(add_help=False)
    common.add_argument("--seed", type=int, help="Generator seed (42)")
    common.add_argument("--budget", type=int,
                        help="Interpreter step budget (1000000)")
    common.add_argument("--out", type=Path, help="Output directory (./out)")
    common.add_argument("--no-reduce", action="store_true",
                        help="Skip reduction of converged preconditions")
    common.add_argument("--max-rounds", type=int,
                        help="Inference round limit (10)")
    common.add_argument("--envs-per-round", type=int,
                        help="Generated environments per round (200)")
    common.add_argument("--null-prob", type=float,
                        help="Probability of null references (0.25)")
    common.add_argument("--config", type=Path,
                        help="TOML or INI file with [preguard] settings")
    common.add_argument("--log", type=str.upper,
                        choices=["DEBUG", "INFO", "WARN", "ERROR",
                                 "CRITICAL"])
    return common


def build_parser() -> ArgumentParser:
    common = _common_flags()
    parser = _Parser(
            prog="preguard",
            description="Infer crash-preventing preconditions for MiniLang "
                        f"methods (Version {__version__})")
    parser.add_argument("--version",
                        action="version",
                        version=f"%(prog)s {__version__}")
    commands = parser.add_subparsers(dest="command", required=True)

    cmd = commands.add_parser("infer", parents=[common],
                              help="Infer a precondition for one method")
    cmd.add_argument("inputs", type=Path, nargs=1, metavar="FILE")
    cmd.add_argument("--method", help="Target method")
    cmd.add_argument("--emit-seed", action="store_true",
                     help="Also write the seed precondition and provenance")

    cmd = commands.add_parser("reduce", parents=[common],
                              help="Reduce a precondition against a suite")
    cmd.add_argument("inputs", type=Path, nargs=1, metavar="FILE")
    cmd.add_argument("suite", type=Path, metavar="SUITE")
    cmd.add_argument("--method", help="Precondition method")

    cmd = commands.add_parser("judge", parents=[common],
                              help="Judge a precondition on a domain")
    cmd.add_argument("inputs", type=Path, nargs=1, metavar="FILE")
    cmd.add_argument("--method", help="Guarded method")
    cmd.add_argument("--pre", type=Path,
                     help="File holding the precondition (FILE)")
    cmd.add_argument("--pre-method",
                     help="Precondition method (<method>_pre)")
    cmd.add_argument("--domain", type=Path,
                     help="Domain file (<method>.domain.json next to FILE)")

    cmd = commands.add_parser("metrics", parents=[common],
                              help="Static metrics of methods")
    cmd.add_argument("inputs", type=Path, nargs=1, metavar="FILE")
    cmd.add_argument("--method", help="Only this method")

    cmd = commands.add_parser("dataset", parents=[common],
                              help="Infer, judge and measure every method "
                                   "that has a domain file")
    cmd.add_argument("inputs", type=Path, nargs="+", metavar="PATH")
    cmd.add_argument("--method", help="Only this method")
    return parser


def load_program(path: Path) -> Program:
    logger.debug(f"Parsing {path}")
    with open(path, "r") as fp:
        return parse_program(fp.read())


def _write_json(path: Path, data: Any) -> None:
    with open(path, "w") as fp:
        json.dump(data, fp, indent=2, sort_keys=True)
        fp.write("\n")


def _require_method(parser: ArgumentParser, config: RunConfig) -> str:
    if config.method is None:
        parser.error("--method is required")
    return config.method


def cmd_infer(config: RunConfig, args: Namespace) -> int:
    """
    Infer, then write <method>.pre.mpl, .result.json and .suite.jsonl
    """
    method = _require_method(args.parser, config)
    program = load_program(config.inputs[0])
    result = infer(program, method, config.policy, config.max_rounds,
                   config.reduce, config.budget)

    config.out.mkdir(parents=True, exist_ok=True)
    if args.emit_seed:
        write_seed(result.seed, config.out / f"{method}.seed{SOURCE_SUFFIX}")
    with open(config.out / f"{method}.pre{SOURCE_SUFFIX}", "w") as fp:
        fp.write(result.precondition.program.printed.text)
    _write_json(config.out / f"{method}.result.json", result.to_json())
    write_suite(result.regression, config.out / f"{method}.suite.jsonl")

    for check in result.checks:
        where = "call at" if check.in_callee else "before"
        logger.info(f"{check.kind.value}: check {where} line "
                    f"{check.loc.display_line} (round {check.round_index})")
    if not result.converged:
        logger.error(f"{method}: no fixpoint within {config.max_rounds} "
                     f"rounds")
        return EXIT_NOT_CONVERGED
    return EXIT_OK


def cmd_reduce(config: RunConfig, args: Namespace) -> int:
    """
    Reduce a precondition file against a suite, write
    <pre>.reduced.mpl and <pre>.reduction.json
    """
    entry = _require_method(args.parser, config)
    program = load_program(config.inputs[0])
    if not program.has_method(entry):
        args.parser.error(f"no method {entry} in {config.inputs[0]}")
    source = entry.removesuffix(PRE_SUFFIX)
    if not program.has_method(source):
        source = entry
    pre = PreconditionProgram(program, entry, source)

    reducer = Reducer(ReductionConstraint(read_suite(args.suite),
                                          config.budget))
    reduced = reducer.reduce(pre)

    config.out.mkdir(parents=True, exist_ok=True)
    with open(config.out / f"{entry}.reduced{SOURCE_SUFFIX}", "w") as fp:
        fp.write(reduced.program.printed.text)
    report = reducer.report.to_json() if reducer.report else {}
    report["cc_before"] = cyclomatic(pre.method)
    report["cc_after"] = cyclomatic(reduced.method)
    _write_json(config.out / f"{entry}.reduction.json", report)
    return EXIT_OK


def cmd_judge(config: RunConfig, args: Namespace) -> int:
    """
    Judge a precondition on the exhaustive domain of its method,
    write <method>.verdict.json
    """
    method = _require_method(args.parser, config)
    source_path = config.inputs[0]
    program = load_program(source_path)
    pre_program = load_program(args.pre) if args.pre else program
    pre_method = args.pre_method or f"{method}{PRE_SUFFIX}"
    for prog, name in ((program, method), (pre_program, pre_method)):
        if not prog.has_method(name):
            args.parser.error(f"unknown method {name}")

    domain_path = args.domain or sidecar_path(source_path, method)
    domain = load_domain(domain_path, program, program.method(method))
    verdict = judge(program, method, pre_program, pre_method,
                    enumerate_envs(domain), config.budget)

    config.out.mkdir(parents=True, exist_ok=True)
    _write_json(config.out / f"{method}.verdict.json", verdict.to_json())
    logger.info(f"{pre_method}: safe={verdict.safe} "
                f"maximal={verdict.maximal} on {verdict.checked} inputs")
    return EXIT_OK if verdict.correct else EXIT_INCORRECT


def cmd_metrics(config: RunConfig, args: Namespace) -> int:
    """
    Static metrics of every (or one) method, write <file>.metrics.json
    """
    source_path = config.inputs[0]
    program = load_program(source_path)
    names = [m.name for m in program.methods]
    if config.method is not None:
        if not program.has_method(config.method):
            args.parser.error(f"unknown method {config.method}")
        names = [config.method]

    data = {}
    for name in names:
        method = program.method(name)
        data[name] = {
            "cyclomatic": cyclomatic(method),
            "nodes": ast_node_count(method),
            "statements": statement_count(method),
            "pure": purity(program, name),
            "triviality": triviality(method).value,
            "explicit_guards": explicit_guards(method),
        }
    config.out.mkdir(parents=True, exist_ok=True)
    _write_json(config.out / f"{source_path.stem}.metrics.json", data)
    return EXIT_OK


def _collect_sources(inputs: Sequence[Path]) -> list[Path]:
    sources: list[Path] = []
    for path in inputs:
        if path.is_dir():
            sources.extend(sorted(path.glob(f"*{SOURCE_SUFFIX}")))
        elif path.is_file():
            sources.append(path)
        else:
            logger.warning(f"{path} does not exist")
    return sorted(set(sources))


def cmd_dataset(config: RunConfig, args: Namespace) -> int:
    """
    Run the whole pipeline on every method with a domain file, write
    dataset.jsonl and summary.json
    """
    failures: list[DatasetFailure] = []
    programs: dict[Path, Program] = {}
    for path in _collect_sources(config.inputs):
        try:
            programs[path] = load_program(path)
        except PreguardError as exc:
            logger.warning(f"Skipping {path}: {exc}")
            failures.append(DatasetFailure(str(path), None, str(exc)))

    targets = find_targets(programs.keys(), programs)
    if config.method is not None:
        targets = [t for t in targets if t[1] == config.method]
    logger.info(f"Processing {len(targets)} methods")

    records: list[DatasetRecord] = []
    colour = None if "NO_COLOR" in os.environ else "green"
    for path, method in tqdm(targets, disable=None, colour=colour):
        program = programs[path]
        try:
            domain = load_domain(sidecar_path(path, method), program,
                                 program.method(method))
            envs = enumerate_envs(domain)
            result = infer(program, method, config.policy, config.max_rounds,
                           config.reduce, config.budget)
            pre = result.precondition
            verdict = judge(program, method, pre.program, pre.entry, envs,
                            config.budget)
        except PreguardError as exc:
            logger.warning(f"Skipping {method} in {path}: {exc}")
            failures.append(DatasetFailure(str(path), method, str(exc)))
            continue
        records.append(DatasetRecord(method, program, result, verdict,
                                     collect_metrics(result)))

    emit_dataset(records, config.out / DATASET_NAME, failures)
    return EXIT_OK


COMMANDS: dict[str, Callable[[RunConfig, Namespace], int]] = {
    "infer": cmd_infer,
    "reduce": cmd_reduce,
    "judge": cmd_judge,
    "metrics": cmd_metrics,
    "dataset": cmd_dataset,
}


def preguard(argv: Optional[Sequence[str]] = None) -> int:
    """
    CLI entry point
    """
    parser = build_parser()
    args = parser.parse_args(argv)
    args.parser = parser

    try:
        config = build_config(args)
    except ConfigError as exc:
        parser.error(str(exc))

    logging.basicConfig(level=config.log)
    logger.debug(f"Configuration: {config}")

    try:
        return COMMANDS[args.command](config, args)
    except DomainTooLarge as exc:
        logger.error(str(exc))
        return EXIT_DOMAIN_TOO_LARGE
    except NonProgress as exc:
        logger.error(str(exc))
        return EXIT_NOT_CONVERGED
    except (PreguardError, OSError) as exc:
        logger.error(str(exc))
        return EXIT_USAGE
