from dataclasses import dataclass
from typing import Annotated
from typing import Any

from preguard.interp.types import DEFAULT_BUDGET
from preguard.testgen.types import RegressionSuite


@dataclass(frozen=True)
class ReductionConstraint:
    """
    What a reduced precondition has to preserve: every suite case
    answers exactly as expected, without crash or budget blowout
    """
    suite: RegressionSuite
    budget: Annotated[int, "Step budget per replayed case"] = DEFAULT_BUDGET


@dataclass(frozen=True)
class ReductionReport:
    nodes_before: int
    nodes_after: int
    statements_before: int
    statements_after: int
    candidates: Annotated[int, "Candidates that were replayed"]
    rejected_untyped: Annotated[int, "Candidates that failed to resolve"]
    accepted: int
    passes: Annotated[int, "Iterations until the fixpoint"]

    def to_json(self) -> dict[str, Any]:
        return {
            "nodes_before": self.nodes_before,
            "nodes_after": self.nodes_after,
            "statements_before": self.statements_before,
            "statements_after": self.statements_after,
            "candidates": self.candidates,
            "rejected_untyped": self.rejected_untyped,
            "accepted": self.accepted,
            "passes": self.passes,
        }
