from dataclasses import dataclass, field
from typing import Annotated

from preguard.errors import PreguardError
from preguard.interp.types import Environment, PreOutcome

DEFAULT_INT_POOL: tuple[int, ...] = (
    -3, -2, -1, 0, 1, 2, 3, 17, -17, 1 << 30, -(1 << 30),
)


class NotConverged(PreguardError):
    """
    A precondition still crashes on some recorded environment
    """


class PolicyError(PreguardError):
    """
    Invalid generation policy
    """


@dataclass(frozen=True)
class GenPolicy:
    """
    Knobs of the random environment generator
    """
    rng_seed: Annotated[int, "Base seed; (rng_seed, round) fixes a round"] = 42
    null_prob: Annotated[float, "Probability of null for reference slots"] = 0.25
    int_pool: Annotated[tuple[int, ...], "Boundary-biased int pool"] = \
        DEFAULT_INT_POOL
    pool_prob: Annotated[float, "Probability of drawing from int_pool "
                                "instead of the uniform fallback"] = 0.9
    int_range: Annotated[tuple[int, int], "Uniform fallback range"] = \
        (-(1 << 31), (1 << 31) - 1)
    array_len_range: Annotated[tuple[int, int], "Inclusive array lengths"] = \
        (0, 4)
    object_depth_max: Annotated[int, "Nesting depth of generated objects"] = 2
    envs_per_round: Annotated[int, "Environments per round"] = 200

    def __post_init__(self) -> None:
        for name in ("null_prob", "pool_prob"):
            if not 0.0 <= getattr(self, name) <= 1.0:
                raise PolicyError(f"{name} must be within [0, 1]")
        if not self.int_pool:
            raise PolicyError("int_pool must not be empty")
        for name in ("int_range", "array_len_range"):
            lo, hi = getattr(self, name)
            if lo > hi:
                raise PolicyError(f"{name} is empty")
        if self.array_len_range[0] < 0:
            raise PolicyError("array lengths must be non-negative")
        if self.object_depth_max < 0 or self.envs_per_round < 0:
            raise PolicyError("depth and round size must be non-negative")


@dataclass(frozen=True)
class TestCase:
    """
    A generated environment and what the precondition did on it
    """
    __test__ = False  # not a pytest class

    env: Environment
    observed: PreOutcome
    round_index: int = 0


@dataclass(frozen=True)
class RegressionSuite:
    """
    Recorded (environment, expected answer) pairs
    """
    cases: tuple[tuple[Environment, bool], ...] = ()
    dropped: Annotated[int, "BudgetExceeded environments left out"] = \
        field(default=0, compare=False)

    def __len__(self) -> int:
        return len(self.cases)
