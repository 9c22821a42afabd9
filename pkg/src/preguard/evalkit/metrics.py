import logging

from collections import Counter

from preguard.instrument.types import InferenceResult
from preguard.lang.types import (
    ArrayAccess, Assign, Binary, BoolLit, Call, FieldAccess, If, MethodDef,
    Program, Return, Throw, TryCatch, While,
)
from preguard.lang.util import ast_node_count, walk

from .types import MetricsRecord, Triviality

logger = logging.getLogger(__name__)


def cyclomatic(method: MethodDef) -> int:
    """
    1 + decision points: every if, while, catch clause and && / ||
    """
    decisions = 0
    for node in walk(method.body):
        match node:
            case If() | While() | TryCatch():
                decisions += 1
            case Binary(op="&&" | "||"):
                decisions += 1
    return 1 + decisions


def _stores(method: MethodDef) -> bool:
    return any(isinstance(n, Assign)
               and isinstance(n.target, (FieldAccess, ArrayAccess))
               for n in walk(method.body))


def purity(program: Program, method: str) -> bool:
    """
    No field or array element store in the method or in any method
    it can reach through calls
    """
    seen: set[str] = set()
    pending = [method]
    while pending:
        name = pending.pop()
        if name in seen:
            continue
        seen.add(name)
        current = program.method(name)
        if _stores(current):
            return False
        pending.extend(n.name for n in walk(current.body)
                       if isinstance(n, Call))
    return True


def triviality(method: MethodDef) -> Triviality:
    match method.body.stmts:
        case (Return(value=BoolLit(value=True)),):
            return Triviality.TRIVIALLY_TRUE
        case (Return(value=BoolLit(value=False)),):
            return Triviality.ALWAYS_FALSE
    return Triviality.NON_TRIVIAL


def explicit_guards(method: MethodDef) -> int:
    """
    Developer-written illegal input checks: throw statements
    """
    return sum(1 for n in walk(method.body) if isinstance(n, Throw))


def collect_metrics(result: InferenceResult) -> MetricsRecord:
    """
    Metrics of an inference run, before and after reduction
    """
    pre = result.precondition
    after = pre.method
    before = result.before_reduction.method
    before_program = result.before_reduction.program

    first_crash_round = min((c.round_index for c in result.checks),
                            default=0)
    record = MetricsRecord(
        cc_before=cyclomatic(before),
        cc_after=cyclomatic(after),
        nodes_before=ast_node_count(before),
        nodes_after=ast_node_count(after),
        pure_before=purity(before_program, before.name),
        pure_after=purity(pre.program, after.name),
        rounds_used=result.rounds_used,
        crash_rounds=result.crash_rounds,
        checks_by_kind=dict(Counter(c.kind.value for c in result.checks)),
        triviality=triviality(after),
        explicit_guards=explicit_guards(pre.program.method(pre.source)),
        iteration_checks=sum(1 for c in result.checks
                             if c.round_index > first_crash_round),
        callee_checks=sum(1 for c in result.checks if c.in_callee),
    )
    logger.debug(f"Metrics of {pre.entry}: {record.to_json()}")
    return record
