import logging

from dataclasses import replace
from typing import Callable
from typing import Optional
from typing import Sequence
from typing import TypeVar

from preguard.interp.interpreter import Interpreter, to_pre_outcome
from preguard.lang.types import (
    Block, If, Node, ResolveError, Stmt, TryCatch, While,
)
from preguard.lang.util import (
    ast_node_count, blocks, can_complete, is_expr, replace_block,
    splice_stmt, statement_count, walk,
)
from preguard.seedgen.seed import with_method
from preguard.seedgen.types import PreconditionProgram

from .types import ReductionConstraint, ReductionReport

logger = logging.getLogger(__name__)

T = TypeVar("T")


def ddmin(items: Sequence[T], test: Callable[[list[T]], bool]) -> list[T]:
    """
    Shrink items to a 1-minimal subsequence that still passes test.
    Removes complements of ever smaller chunks, down to single items.
    :param items  Sequence that passes test
    :param test   True if a subsequence is still acceptable
    """
    current = list(items)
    n = 2
    while current:
        n = min(n, len(current))
        chunk = len(current) // n
        start = 0
        reduced = False
        while start < len(current):
            complement = current[:start] + current[start + chunk:]
            if test(complement):
                current = complement
                n = max(n - 1, 2)
                reduced = True
                break
            start += chunk

        if not reduced:
            if n >= len(current):
                break
            n = min(n * 2, len(current))
    return current


def is_valid(candidate: PreconditionProgram,
             constraint: ReductionConstraint) -> bool:
    """
    Whether every suite case still answers exactly as expected
    """
    interp = Interpreter(candidate.program, constraint.budget)
    return all(
        to_pre_outcome(interp.run(candidate.entry, env)).answer is expected
        for env, expected in constraint.suite.cases)


def _simplifications(stmt: Stmt) -> list[list[Stmt]]:
    """
    Smaller replacements for a single statement
    """
    out: list[list[Stmt]] = []
    match stmt:
        case If(then=then, orelse=orelse):
            if orelse is not None and not orelse.stmts:
                out.append([replace(stmt, orelse=None)])
            out.append(list(then.stmts))
            if orelse is not None:
                out.append(list(orelse.stmts))
        case TryCatch(body=body):
            out.append(list(body.stmts))
        case While(body=body) if not body.stmts:
            out.append([])
        case Block(stmts=stmts):
            out.append(list(stmts))
    return out


class Reducer:
    """
    Test-constrained reduction of a precondition: delta debugging over
    the statement list of every block (outermost first) plus
    statement simplifications, repeated until nothing changes
    """

    constraint: ReductionConstraint
    cache: dict[Block, bool]
    last_failure: int
    candidates: int
    rejected_untyped: int
    accepted: int

    def __init__(self, constraint: ReductionConstraint) -> None:
        """
        Constructor
        :param constraint  Suite (and budget) every candidate must satisfy
        """
        self.constraint = constraint
        self.cache = {}
        self.last_failure = 0
        self.candidates = 0
        self.rejected_untyped = 0
        self.accepted = 0
        self.report: Optional[ReductionReport] = None

    def replay(self, candidate: PreconditionProgram) -> bool:
        """
        Replay the suite, starting with the case that failed last
        """
        cases = self.constraint.suite.cases
        if not cases:
            return True
        interp = Interpreter(candidate.program, self.constraint.budget)
        start = self.last_failure % len(cases)
        for idx in [*range(start, len(cases)), *range(start)]:
            env, expected = cases[idx]
            outcome = to_pre_outcome(interp.run(candidate.entry, env))
            if outcome.answer is not expected:
                self.last_failure = idx
                return False
        return True

    def build(self, pre: PreconditionProgram,
              body: Node) -> Optional[PreconditionProgram]:
        """
        Candidate precondition with a new body, None if it does not resolve
        """
        assert isinstance(body, Block)
        method = replace(pre.method, body=body)
        try:
            program = with_method(pre.program, method)
        except ResolveError:
            return None
        alive = {n.nid for n in walk(body)} | {method.nid}
        provenance = {nid: origin for nid, origin in pre.provenance.items()
                      if nid in alive}
        return pre.with_program(program, provenance)

    def attempt(self, pre: PreconditionProgram,
                body: Node) -> Optional[PreconditionProgram]:
        """
        The candidate if it is valid, None otherwise
        """
        assert isinstance(body, Block)
        if self.cache.get(body) is False:
            return None
        candidate = self.build(pre, body)
        if candidate is None:
            self.rejected_untyped += 1
            self.cache[body] = False
            return None
        self.candidates += 1
        valid = self.replay(candidate)
        self.cache[body] = valid
        if not valid:
            logger.debug(f"Rejected candidate with "
                         f"{ast_node_count(body)} nodes")
            return None
        return candidate

    def reduce_block(self, pre: PreconditionProgram,
                     block_id: int) -> PreconditionProgram:
        block = next((b for b in blocks(pre.method.body)
                      if b.nid == block_id), None)
        if block is None or not block.stmts:
            return pre
        best = pre

        def test(stmts: list[Stmt]) -> bool:
            nonlocal best
            body = replace_block(pre.method.body, block_id, stmts)
            candidate = self.attempt(pre, body)
            if candidate is None:
                return False
            best = candidate
            return True

        kept = ddmin(block.stmts, test)
        if len(kept) == len(block.stmts):
            return pre
        # best holds the last accepted candidate, which is exactly `kept`
        self.accepted += 1
        return best

    def simplify(self, pre: PreconditionProgram) -> PreconditionProgram:
        """
        One sweep of the statement simplifications, outermost first
        """
        for block in blocks(pre.method.body):
            stmts = block.stmts
            cut = next((i for i, s in enumerate(stmts)
                        if not can_complete(s)), len(stmts))
            if cut < len(stmts) - 1:
                body = replace_block(pre.method.body, block.nid,
                                     stmts[:cut + 1])
                if (candidate := self.attempt(pre, body)) is not None:
                    self.accepted += 1
                    return candidate
            for stmt in stmts:
                for repl in _simplifications(stmt):
                    body = splice_stmt(pre.method.body, stmt.nid, repl)
                    if (candidate := self.attempt(pre, body)) is not None:
                        self.accepted += 1
                        return candidate
        return pre

    def reduce(self, pre: PreconditionProgram) -> PreconditionProgram:
        """
        Reduce pre to a 1-minimal valid precondition
        :param pre  Converged precondition
        :return     Reduced precondition (pre itself if it is invalid)
        """
        nodes_before = ast_node_count(pre.method)
        statements_before = statement_count(pre.method)
        if not self.replay(pre):
            logger.warning(f"{pre.entry} does not satisfy its own suite, "
                           f"skipping reduction")
            self.report = ReductionReport(
                nodes_before, nodes_before, statements_before,
                statements_before, 1, 0, 0, 0)
            return pre

        current = pre
        passes = 0
        while True:
            passes += 1
            start = current
            for block in blocks(current.method.body):
                current = self.reduce_block(current, block.nid)
            while (simpler := self.simplify(current)) is not current:
                current = simpler
            if current is start:
                break

        nodes_after = ast_node_count(current.method)
        self.report = ReductionReport(
            nodes_before, nodes_after, statements_before,
            statement_count(current.method), self.candidates,
            self.rejected_untyped, self.accepted, passes)
        logger.info(f"Reduced {pre.entry} from {nodes_before} to "
                    f"{nodes_after} nodes in {passes} passes")
        return current


def reduce(pre: PreconditionProgram,
           constraint: ReductionConstraint) -> PreconditionProgram:
    """
    Remove every statement the suite does not need
    """
    return Reducer(constraint).reduce(pre)


def is_removable(pre: PreconditionProgram, stmt_id: int,
                 constraint: ReductionConstraint) -> bool:
    """
    Whether deleting one statement yields a valid precondition.
    A reduced precondition has no removable statement.
    """
    body = splice_stmt(pre.method.body, stmt_id, [])
    candidate = Reducer(constraint).build(pre, body)
    return candidate is not None and is_valid(candidate, constraint)


def statement_ids(pre: PreconditionProgram) -> list[int]:
    return [n.nid for n in walk(pre.method.body)
            if not is_expr(n) and not isinstance(n, Block)]
