from dataclasses import dataclass
from typing import Annotated
from typing import Any
from typing import Optional

from preguard.errors import PreguardError
from preguard.interp.types import CrashKind
from preguard.lang.printer import format_method
from preguard.lang.types import SourceLoc
from preguard.reduce.types import ReductionReport
from preguard.seedgen.types import PreconditionProgram
from preguard.testgen.types import RegressionSuite

DEFAULT_MAX_ROUNDS = 10


class NoMatchingExpression(PreguardError):
    """
    The crashing statement holds nothing of the reported crash kind
    """


class AlreadyGuarded(PreguardError):
    """
    An identical check for the same node already exists
    """


class NonProgress(PreguardError):
    """
    A round re-reported a crash that is already guarded
    """


@dataclass(frozen=True)
class Check:
    """
    One inserted guard batch or try-catch wrap
    """
    kind: CrashKind
    loc: Annotated[SourceLoc, "Guarded statement at insertion time"]
    round_index: Annotated[int, "Round whose crash produced the check"]
    in_callee: bool = False
    exception_name: str = ""
    guards: Annotated[int, "Number of if-guards (0 for a wrap)"] = 0
    repaired: Annotated[bool, "Re-running the crashing environment "
                              "answers false"] = True

    def to_json(self) -> dict[str, Any]:
        return {
            "kind": self.kind.value,
            "node_id": self.loc.node_id,
            "display_line": self.loc.display_line,
            "round": self.round_index,
            "in_callee": self.in_callee,
            "exception": self.exception_name,
            "guards": self.guards,
            "repaired": self.repaired,
        }


@dataclass(frozen=True)
class InferenceResult:
    """
    Outcome of iterating seed -> test -> guard until no crash shows up
    """
    precondition: PreconditionProgram
    seed: Annotated[PreconditionProgram, "Round 0 precondition"]
    rounds_used: Annotated[int, "Rounds run, verification round included"]
    crash_rounds: Annotated[int, "Rounds that found at least one crash"]
    checks: tuple[Check, ...]
    regression: RegressionSuite
    converged: bool
    reduction: Optional[ReductionReport] = None
    unreduced: Annotated[Optional[PreconditionProgram],
                         "Converged precondition before reduction"] = None

    @property
    def before_reduction(self) -> PreconditionProgram:
        return self.unreduced if self.unreduced is not None \
            else self.precondition

    def to_json(self) -> dict[str, Any]:
        data: dict[str, Any] = {
            "method": self.precondition.source,
            "precondition": self.precondition.entry,
            "text": format_method(self.precondition.method),
            "converged": self.converged,
            "rounds_used": self.rounds_used,
            "crash_rounds": self.crash_rounds,
            "checks": [c.to_json() for c in self.checks],
            "suite_size": len(self.regression),
            "suite_dropped": self.regression.dropped,
        }
        if self.reduction is not None:
            data["reduction"] = self.reduction.to_json()
        return data
