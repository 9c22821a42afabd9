import json
import logging

from pathlib import Path
from typing import Iterable

from preguard.interp.interpreter import Interpreter, to_pre_outcome
from preguard.interp.serialize import dumps, env_from_json, env_to_json
from preguard.interp.types import DEFAULT_BUDGET, Environment, PreStatus
from preguard.lang.types import Program

from .types import NotConverged, RegressionSuite, TestCase

logger = logging.getLogger(__name__)


def unique_envs(cases: Iterable[TestCase | Environment]) -> list[Environment]:
    """
    Distinct environments in first-seen order
    """
    seen: dict[Environment, None] = {}
    for case in cases:
        env = case.env if isinstance(case, TestCase) else case
        seen.setdefault(env, None)
    return list(seen)


def to_regression(cases: Iterable[TestCase | Environment], program: Program,
                  entry: str, budget: int = DEFAULT_BUDGET) -> RegressionSuite:
    """
    Label every accumulated environment with the answer of the
    converged precondition
    :param cases    Accumulated cases (or bare environments)
    :param program  Program holding the converged precondition
    :param entry    Name of the precondition method
    :param budget   Step budget per execution
    :raises NotConverged  Some environment still crashes the precondition
    """
    interp = Interpreter(program, budget)
    labelled: list[tuple[Environment, bool]] = []
    dropped = 0
    for env in unique_envs(cases):
        observed = to_pre_outcome(interp.run(entry, env))
        match observed.status:
            case PreStatus.CRASHED:
                assert observed.crash is not None
                raise NotConverged(f"{entry} still crashes: "
                                   f"{observed.crash.summary()} "
                                   f"on {env_to_json(env)}")
            case PreStatus.BUDGET_EXCEEDED:
                dropped += 1
            case _:
                labelled.append((env, observed.answer is True))
    if dropped:
        logger.warning(f"Dropped {dropped} environments that exceeded "
                       f"the step budget in {entry}")
    return RegressionSuite(tuple(labelled), dropped)


def replay(suite: RegressionSuite, program: Program, entry: str,
           budget: int = DEFAULT_BUDGET) -> list[int]:
    """
    Indices of the suite cases whose answer differs (or that crash)
    """
    interp = Interpreter(program, budget)
    return [idx for idx, (env, expected) in enumerate(suite.cases)
            if to_pre_outcome(interp.run(entry, env)).answer is not expected]


def write_suite(suite: RegressionSuite, path: Path) -> None:
    """
    Persist a suite as JSONL, one {"env", "expected"} object per line
    """
    logger.debug(f"Writing {len(suite)} cases to {path}")
    with open(path, "w") as fp:
        for env, expected in suite.cases:
            fp.write(dumps({"env": env_to_json(env), "expected": expected}))
            fp.write("\n")


def read_suite(path: Path) -> RegressionSuite:
    cases: list[tuple[Environment, bool]] = []
    with open(path, "r") as fp:
        for line in fp:
            if not line.strip():
                continue
            data = json.loads(line)
            cases.append((env_from_json(data["env"]), bool(data["expected"])))
    return RegressionSuite(tuple(cases))
