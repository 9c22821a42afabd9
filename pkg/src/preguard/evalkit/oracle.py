import logging

from typing import Iterable

from preguard.interp.interpreter import Interpreter, to_pre_outcome
from preguard.interp.types import (
    BudgetExceeded, CrashReport, DEFAULT_BUDGET, Environment, PreStatus,
    ShapeError,
)
from preguard.lang.types import Program, BOOL

from .types import Verdict

logger = logging.getLogger(__name__)


def judge(program: Program, method: str, pre_program: Program, pre: str,
          envs: Iterable[Environment],
          budget: int = DEFAULT_BUDGET) -> Verdict:
    """
    Judge a precondition against the method it guards
    :param program      Program holding the method
    :param method       Name of the guarded method
    :param pre_program  Program holding the precondition
    :param pre          Name of the boolean precondition method
    :param envs         Oracle environments (never the inference suite)
    :param budget       Step budget per execution
    """
    if pre_program.method(pre).return_type != BOOL:
        raise ShapeError(f"{pre} does not return bool")
    run_method = Interpreter(program, budget)
    run_pre = Interpreter(pre_program, budget)

    unsafe: list[Environment] = []
    nonmaximal: list[Environment] = []
    pre_crashes: list[Environment] = []
    checked = 0
    skipped = 0
    for env in envs:
        outcome = run_method.run(method, env)
        if isinstance(outcome, BudgetExceeded):
            skipped += 1
            continue
        checked += 1
        answer = to_pre_outcome(run_pre.run(pre, env))
        match answer.status:
            case PreStatus.CRASHED | PreStatus.BUDGET_EXCEEDED:
                pre_crashes.append(env)
            case PreStatus.TRUE if isinstance(outcome, CrashReport):
                unsafe.append(env)
            case PreStatus.FALSE if not isinstance(outcome, CrashReport):
                nonmaximal.append(env)

    verdict = Verdict(tuple(unsafe), tuple(nonmaximal), tuple(pre_crashes),
                      checked, skipped)
    logger.debug(f"Judged {pre} on {checked} environments: "
                 f"{len(unsafe)} unsafe, {len(nonmaximal)} non-maximal, "
                 f"{len(pre_crashes)} crashing")
    return verdict
