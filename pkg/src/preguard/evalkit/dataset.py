import json
import logging

from dataclasses import dataclass
from pathlib import Path
from typing import Any
from typing import Iterable
from typing import Optional
from typing import Sequence

from preguard.instrument.types import InferenceResult
from preguard.interp.serialize import dumps
from preguard.lang.printer import format_method
from preguard.lang.types import Program

from .domain import sidecar_path
from .types import DatasetFailure, DatasetStats, MetricsRecord, Verdict

logger = logging.getLogger(__name__)

SUMMARY_NAME = "summary.json"


@dataclass(frozen=True)
class DatasetRecord:
    """
    One (method, precondition) pair with its verdict and metrics
    """
    name: str
    program: Program
    result: InferenceResult
    verdict: Optional[Verdict]
    metrics: MetricsRecord

    def to_json(self) -> dict[str, Any]:
        pre = self.result.precondition
        return {
            "name": self.name,
            "source": format_method(self.program.method(self.name)),
            "precondition": format_method(pre.method),
            "converged": self.result.converged,
            "rounds": self.result.rounds_used,
            "crash_rounds": self.result.crash_rounds,
            "checks": [{"kind": c.kind.value, "node_id": c.loc.node_id,
                        "in_callee": c.in_callee}
                       for c in self.result.checks],
            "metrics": self.metrics.to_json(),
            "verdict": self.verdict.to_json() if self.verdict else None,
            "triviality": self.metrics.triviality.value,
        }


def find_targets(paths: Iterable[Path],
                 programs: dict[Path, Program]) -> list[tuple[Path, str]]:
    """
    (file, method) pairs that come with a domain sidecar, sorted
    """
    targets: list[tuple[Path, str]] = []
    for path in sorted(paths):
        program = programs[path]
        for method in program.methods:
            if sidecar_path(path, method.name).is_file():
                targets.append((path, method.name))
    return targets


def tally(records: Iterable[DatasetRecord],
          stats: Optional[DatasetStats] = None) -> DatasetStats:
    """
    Aggregate per-record metrics into dataset totals
    """
    stats = stats if stats is not None else DatasetStats()
    for record in records:
        m = record.metrics
        stats.methods += 1
        stats.converged += int(record.result.converged)
        stats.correct += int(record.verdict is not None
                             and record.verdict.correct)
        for kind, count in m.checks_by_kind.items():
            stats.checks_by_kind[kind] = stats.checks_by_kind.get(kind, 0) \
                + count
        key = m.triviality.value
        stats.triviality[key] = stats.triviality.get(key, 0) + 1
        stats.explicit_guards += m.explicit_guards
        stats.iteration_checks += m.iteration_checks
        stats.callee_checks += m.callee_checks
        stats.pure_before += int(m.pure_before)
        stats.pure_after += int(m.pure_after)
        stats.cc_before += m.cc_before
        stats.cc_after += m.cc_after
        stats.nodes_before += m.nodes_before
        stats.nodes_after += m.nodes_after
    return stats


def emit_dataset(records: list[DatasetRecord], path: Path,
                 failures: Sequence[DatasetFailure] = ()) -> Path:
    """
    Write one JSON line per record and a summary next to it
    :param records  Dataset records, written in the given order
    :param path     Destination JSONL file
    :param failures Files and methods that were left out, listed in the
                    summary
    :return         Path of the summary file
    """
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w") as fp:
        for record in records:
            fp.write(dumps(record.to_json()))
            fp.write("\n")

    stats = tally(records)
    stats.skipped = len(failures)
    stats.failures = list(failures)
    summary = path.parent / SUMMARY_NAME
    with open(summary, "w") as fp:
        json.dump(stats.to_json(), fp, indent=2, sort_keys=True)
        fp.write("\n")
    logger.info(f"Wrote {stats.methods} records to {path}")
    return summary
