import logging

from preguard.interp.interpreter import Interpreter, to_pre_outcome
from preguard.interp.types import (
    CrashReport, DEFAULT_BUDGET, Environment, PreStatus,
)
from preguard.lang.types import Program, SourceLoc
from preguard.reduce.reducer import Reducer
from preguard.reduce.types import ReductionConstraint, ReductionReport
from preguard.seedgen.seed import make_seed
from preguard.seedgen.types import PreconditionProgram
from preguard.testgen.generator import run_round
from preguard.testgen.suite import to_regression
from preguard.testgen.types import (
    GenPolicy, NotConverged, RegressionSuite, TestCase,
)

from .checks import crash_site, guard_statements, insert_checks
from .types import (
    AlreadyGuarded, Check, InferenceResult, NonProgress, DEFAULT_MAX_ROUNDS,
)

logger = logging.getLogger(__name__)


def _observe(pre: PreconditionProgram, envs: dict[Environment, None],
             policy: GenPolicy, round_index: int,
             budget: int) -> list[TestCase]:
    """
    Fresh cases of this round plus a replay of every earlier environment
    """
    fresh = run_round(pre.program, pre.entry, policy, round_index, budget)
    interp = Interpreter(pre.program, budget)
    fresh_envs = {case.env for case in fresh}
    replayed = [TestCase(env, to_pre_outcome(interp.run(pre.entry, env)),
                         round_index)
                for env in envs if env not in fresh_envs]
    for case in fresh:
        envs.setdefault(case.env, None)
    return replayed + fresh


def _guard_round(pre: PreconditionProgram,
                 crashes: dict[tuple, tuple[CrashReport, Environment]],
                 round_index: int, budget: int,
                 ) -> tuple[PreconditionProgram, list[Check]]:
    """
    Insert checks for every distinct crash of a round
    """
    checks: list[Check] = []
    for crash, env in crashes.values():
        if crash_site(pre, crash) is None:
            # an earlier check of this round moved the statement
            logger.debug(f"Deferring {crash.summary()} to the next round")
            continue
        loc = SourceLoc(crash.loc.node_id,
                        pre.program.display_line(crash.loc.node_id))
        before = guard_statements(pre)
        try:
            pre = insert_checks(pre, crash)
        except AlreadyGuarded as exc:
            raise NonProgress(f"{pre.source}: {exc}") from exc

        after = to_pre_outcome(Interpreter(pre.program, budget)
                               .run(pre.entry, env))
        # the environment that crashed must now be rejected
        repaired = after.status is PreStatus.FALSE
        if not repaired:
            logger.warning(f"{pre.entry}: check for {crash.summary()} "
                           f"did not repair its environment")
        guards = guard_statements(pre) - before
        checks.append(Check(crash.kind, loc, round_index, crash.in_callee,
                            crash.exception_name, guards, repaired))
    return pre, checks


def infer(program: Program, target: str, policy: GenPolicy = GenPolicy(),
          max_rounds: int = DEFAULT_MAX_ROUNDS, reduce: bool = True,
          budget: int = DEFAULT_BUDGET) -> InferenceResult:
    """
    Infer a precondition for target: seed it, then alternate test
    generation and check insertion until a round finds no crash
    :param program     Resolved program holding target
    :param target      Method to infer a precondition for
    :param policy      Test generation policy
    :param max_rounds  Round limit; hitting it leaves the result unconverged
    :param reduce      Reduce the converged precondition against its suite
    :param budget      Step budget per execution
    :raises NonProgress  A crash showed up again despite its check
    """
    seed = make_seed(program, target)
    pre = seed
    envs: dict[Environment, None] = {}
    checks: list[Check] = []
    rounds_used = 0
    crash_rounds = 0
    converged = False

    for round_index in range(max_rounds):
        rounds_used += 1
        cases = _observe(pre, envs, policy, round_index, budget)
        crashes: dict[tuple, tuple[CrashReport, Environment]] = {}
        for case in cases:
            if (crash := case.observed.crash) is not None:
                crashes.setdefault(crash.key, (crash, case.env))
        logger.info(f"{target} round {round_index}: {len(cases)} cases, "
                    f"{len(crashes)} distinct crashes")
        if not crashes:
            converged = True
            break
        crash_rounds += 1
        pre, added = _guard_round(pre, crashes, round_index, budget)
        checks.extend(added)

    regression = RegressionSuite()
    reduction: ReductionReport | None = None
    unreduced: PreconditionProgram | None = None
    if converged:
        try:
            regression = to_regression(envs, pre.program, pre.entry, budget)
        except NotConverged as exc:
            logger.warning(str(exc))
            converged = False

    if converged:
        logger.info(f"{target} converged after {rounds_used} rounds "
                    f"with {len(checks)} checks")
        if reduce:
            unreduced = pre
            reducer = Reducer(ReductionConstraint(regression, budget))
            pre = reducer.reduce(pre)
            reduction = reducer.report
    else:
        logger.warning(f"{target} did not converge within {max_rounds} rounds")

    return InferenceResult(pre, seed, rounds_used, crash_rounds,
                           tuple(checks), regression, converged, reduction,
                           unreduced)
