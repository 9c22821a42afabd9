from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum
from typing import Annotated
from typing import Any
from typing import Optional

from preguard.errors import PreguardError
from preguard.interp.serialize import env_to_json
from preguard.interp.types import Environment

DEFAULT_CAP = 50_000


class DomainTooLarge(PreguardError):
    """
    Exhaustive enumeration would exceed the cartesian-product cap
    """


class DomainError(PreguardError):
    """
    Malformed domain sidecar or domain that does not fit the signature
    """


@dataclass(frozen=True)
class IntDomain:
    values: tuple[int, ...]


@dataclass(frozen=True)
class BoolDomain:
    pass


@dataclass(frozen=True)
class ArrayDomain:
    null: Annotated[bool, "null is one of the values"]
    lengths: tuple[int, ...]
    elems: ValueDomain


@dataclass(frozen=True)
class ObjectDomain:
    null: Annotated[bool, "null is one of the values"]
    classes: Annotated[tuple[tuple[str, tuple[tuple[str, ValueDomain], ...]],
                             ...],
                       "(dynamic class, field domains); fields not listed "
                       "keep their default value"]


ValueDomain = IntDomain | BoolDomain | ArrayDomain | ObjectDomain


@dataclass(frozen=True)
class DomainSpec:
    """
    Finite value domain per parameter, enumerated exhaustively by the oracle
    """
    params: tuple[tuple[str, ValueDomain], ...]
    cap: Annotated[int, "Maximum number of environments"] = DEFAULT_CAP


@dataclass(frozen=True)
class Verdict:
    """
    A precondition judged against a method on an exhaustive domain.
    Safe: rejects every crashing input. Maximal: accepts every
    input the method handles without crashing.
    """
    unsafe_witnesses: tuple[Environment, ...] = ()
    nonmaximal_witnesses: tuple[Environment, ...] = ()
    pre_crashes: tuple[Environment, ...] = ()
    checked: Annotated[int, "Environments judged"] = 0
    skipped: Annotated[int, "Environments where the method itself "
                            "exceeded its budget"] = 0

    @property
    def safe(self) -> bool:
        return not self.unsafe_witnesses

    @property
    def maximal(self) -> bool:
        return not self.nonmaximal_witnesses

    @property
    def correct(self) -> bool:
        return self.safe and self.maximal and not self.pre_crashes

    def to_json(self) -> dict[str, Any]:
        return {
            "safe": self.safe,
            "maximal": self.maximal,
            "correct": self.correct,
            "checked": self.checked,
            "skipped": self.skipped,
            "unsafe_witnesses": [env_to_json(e)
                                 for e in self.unsafe_witnesses],
            "nonmaximal_witnesses": [env_to_json(e)
                                     for e in self.nonmaximal_witnesses],
            "pre_crashes": [env_to_json(e) for e in self.pre_crashes],
        }


class Triviality(Enum):
    TRIVIALLY_TRUE = "TriviallyTrue"
    ALWAYS_FALSE = "AlwaysFalse"
    NON_TRIVIAL = "NonTrivial"


@dataclass(frozen=True)
class MetricsRecord:
    """
    Size, complexity and purity of a precondition before and after
    reduction, plus how it was inferred
    """
    cc_before: int
    cc_after: int
    nodes_before: int
    nodes_after: int
    pure_before: bool
    pure_after: bool
    rounds_used: int
    crash_rounds: int
    checks_by_kind: dict[str, int]
    triviality: Triviality
    explicit_guards: Annotated[int, "throw statements in the source method"]
    iteration_checks: Annotated[int, "Checks added after the first "
                                     "crashing round"]
    callee_checks: Annotated[int, "Checks that wrap a call"] = 0

    def to_json(self) -> dict[str, Any]:
        return {
            "cc_before": self.cc_before,
            "cc_after": self.cc_after,
            "nodes_before": self.nodes_before,
            "nodes_after": self.nodes_after,
            "pure_before": self.pure_before,
            "pure_after": self.pure_after,
            "rounds_used": self.rounds_used,
            "crash_rounds": self.crash_rounds,
            "checks_by_kind": dict(sorted(self.checks_by_kind.items())),
            "triviality": self.triviality.value,
            "explicit_guards": self.explicit_guards,
            "iteration_checks": self.iteration_checks,
            "callee_checks": self.callee_checks,
        }


@dataclass(frozen=True)
class DatasetFailure:
    """
    A file or method the dataset run had to leave out
    """
    file: str
    method: Annotated[Optional[str], "None when the file itself failed"]
    error: str

    def to_json(self) -> dict[str, Any]:
        return {"file": self.file, "method": self.method,
                "error": self.error}


@dataclass
class DatasetStats:
    """
    Running totals over a dataset
    """
    methods: Annotated[int, "Records written"] = 0
    converged: int = 0
    correct: int = 0
    skipped: Annotated[int, "Methods left out (errors, oversized domains)"] = 0
    failures: list[DatasetFailure] = field(default_factory=list)
    checks_by_kind: dict[str, int] = field(default_factory=dict)
    triviality: dict[str, int] = field(default_factory=dict)
    explicit_guards: int = 0
    iteration_checks: int = 0
    callee_checks: int = 0
    pure_before: int = 0
    pure_after: int = 0
    cc_before: int = 0
    cc_after: int = 0
    nodes_before: int = 0
    nodes_after: int = 0

    def to_json(self) -> dict[str, Any]:
        return {
            "methods": self.methods,
            "converged": self.converged,
            "correct": self.correct,
            "skipped": self.skipped,
            "failures": [f.to_json() for f in self.failures],
            "checks_by_kind": dict(sorted(self.checks_by_kind.items())),
            "triviality": dict(sorted(self.triviality.items())),
            "explicit_guards": self.explicit_guards,
            "iteration_checks": self.iteration_checks,
            "callee_checks": self.callee_checks,
            "pure_before": self.pure_before,
            "pure_after": self.pure_after,
            "cc_before": self.cc_before,
            "cc_after": self.cc_after,
            "nodes_before": self.nodes_before,
            "nodes_after": self.nodes_after,
        }
