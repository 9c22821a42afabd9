import logging

from dataclasses import replace
from typing import Optional

from preguard.interp.types import CrashKind, CrashReport
from preguard.lang.types import (
    ArrayAccess, Assign, Binary, Block, BoolLit, Cast, Expr, FieldAccess, If,
    InstanceOf, IntLit, NewArray, NewObject, NodeId, NullLit, Return, Stmt,
    TryCatch, Type, Unary, Var, VarDecl, BOOL, INT,
)
from preguard.lang.util import (
    IdAllocator, PathCond, clone, evaluated_exprs_with_paths, find_stmt,
    splice_stmt, walk,
)
from preguard.seedgen.seed import with_method
from preguard.seedgen.types import (
    Origin, OriginKind, PreconditionProgram, WRAP_INSERTED, guard_inserted,
)

from .types import AlreadyGuarded, NoMatchingExpression

logger = logging.getLogger(__name__)

WRAP_KEY = "wrap"


def guard_key(kind: CrashKind, nid: NodeId) -> tuple[str, NodeId]:
    return (kind.value, nid)


def wrap_key(exception_name: str, nid: NodeId) -> tuple[str, NodeId]:
    return (f"{WRAP_KEY}:{exception_name}", nid)


def guard_statements(pre: PreconditionProgram) -> int:
    """
    Number of inserted if-guards in the precondition
    """
    return sum(1 for n in walk(pre.method.body)
               if isinstance(n, If) and n.nid in pre.provenance
               and pre.provenance[n.nid].kind is OriginKind.GUARD_INSERTED)


def crash_site(pre: PreconditionProgram, crash: CrashReport) -> Optional[Stmt]:
    """
    The statement a crash is attributed to, if it still holds the
    faulting node
    """
    stmt = find_stmt(pre.method.body, crash.loc.node_id)
    if stmt is None:
        return None
    if not any(n.nid == crash.fault_node for n in walk(stmt)):
        return None
    return stmt


def guarded_operand(kind: CrashKind, expr: Expr) -> bool:
    """
    Whether expr is an expression a crash of this kind can come from
    """
    match kind, expr:
        case (CrashKind.NULL_DEREF,
              FieldAccess(obj=recv) | ArrayAccess(array=recv)):
            return not isinstance(recv, (NewObject, NewArray))
        case CrashKind.INDEX_OUT_OF_BOUNDS, ArrayAccess():
            return True
        case CrashKind.NEGATIVE_ARRAY_SIZE, NewArray():
            return True
        case CrashKind.DIV_BY_ZERO, Binary(op="/" | "%"):
            return True
        case CrashKind.BAD_CAST, Cast():
            return True
    return False


def guard_condition(kind: CrashKind, expr: Expr, ids: IdAllocator) -> Expr:
    """
    Condition under which evaluating expr raises a crash of this kind.
    Every operand is a fresh copy of the original subexpression.
    """
    def copy(e: Expr) -> Expr:
        return clone(e, ids)  # type: ignore[return-value]

    match expr:
        case (FieldAccess(obj=recv) | ArrayAccess(array=recv)) \
                if kind is CrashKind.NULL_DEREF:
            return Binary("==", copy(recv), NullLit(nid=ids()), nid=ids())
        case ArrayAccess(array=array, index=index):
            low = Binary("<", copy(index), IntLit(0, nid=ids()), nid=ids())
            length = FieldAccess(copy(array), "length", nid=ids())
            high = Binary(">=", copy(index), length, nid=ids())
            return Binary("||", low, high, nid=ids())
        case NewArray(length=length):
            return Binary("<", copy(length), IntLit(0, nid=ids()), nid=ids())
        case Binary(right=right):
            return Binary("==", copy(right), IntLit(0, nid=ids()), nid=ids())
        case Cast(cls=cls, expr=inner):
            # casting null succeeds, so null must not be rejected
            present = Binary("!=", copy(inner), NullLit(nid=ids()), nid=ids())
            wrong = Unary("!", InstanceOf(copy(inner), cls, nid=ids()),
                          nid=ids())
            return Binary("&&", present, wrong, nid=ids())
    raise NoMatchingExpression(f"no {kind.value} template for {expr!r}")


def on_path(path: PathCond, cond: Expr, ids: IdAllocator) -> Expr:
    """
    Conjoin cond with the short-circuit conditions that lead to it
    """
    terms: list[Expr] = []
    for operand, polarity in path:
        term: Expr = clone(operand, ids)  # type: ignore[assignment]
        if not polarity:
            term = Unary("!", term, nid=ids())
        terms.append(term)
    acc = cond
    if terms:
        acc = terms[0]
        for term in terms[1:] + [cond]:
            acc = Binary("&&", acc, term, nid=ids())
    return acc


def _reject(cond: Expr, ids: IdAllocator) -> If:
    ret = Return(BoolLit(False, nid=ids()), nid=ids())
    return If(cond, Block((ret,), nid=ids()), nid=ids())


def _default(t: Type, ids: IdAllocator) -> Expr:
    if t == INT:
        return IntLit(0, nid=ids())
    if t == BOOL:
        return BoolLit(False, nid=ids())
    return NullLit(nid=ids())


def _commit(pre: PreconditionProgram, body: Block, origin: Origin,
            keys: list[tuple[str, NodeId]]) -> PreconditionProgram:
    method = replace(pre.method, body=body)
    program = with_method(pre.program, method)
    provenance = dict(pre.provenance)
    for n in walk(body):
        provenance.setdefault(n.nid, origin)
    return pre.with_program(program, provenance, pre.guarded | set(keys))


def _guard(pre: PreconditionProgram, stmt: Stmt, crash: CrashReport,
           ids: IdAllocator) -> PreconditionProgram:
    kind = crash.kind
    targets = [(e, path) for e, path in evaluated_exprs_with_paths(stmt)
               if guarded_operand(kind, e)]
    if not targets:
        raise NoMatchingExpression(
            f"{kind.value} at line {crash.loc.display_line} of "
            f"{pre.entry}, but the statement has no such expression")

    keys: list[tuple[str, NodeId]] = []
    guards: list[If] = []
    for expr, path in targets:
        key = guard_key(kind, expr.nid)
        if key in pre.guarded:
            continue
        keys.append(key)
        cond = on_path(path, guard_condition(kind, expr, ids), ids)
        if any(g.cond == cond for g in guards):
            continue
        guards.append(_reject(cond, ids))
    if not keys:
        raise AlreadyGuarded(f"{kind.value} at line {crash.loc.display_line} "
                             f"of {pre.entry} is already guarded")

    body = splice_stmt(pre.method.body, stmt.nid, [*guards, stmt])
    logger.debug(f"{pre.entry}: {len(guards)} {kind.value} guard(s) before "
                 f"line {crash.loc.display_line}")
    return _commit(pre, body, guard_inserted(kind), keys)  # type: ignore


def _wrap(pre: PreconditionProgram, stmt: Stmt, crash: CrashReport,
          ids: IdAllocator) -> PreconditionProgram:
    key = wrap_key(crash.exception_name, crash.fault_node)
    if key in pre.guarded:
        raise AlreadyGuarded(f"call at line {crash.loc.display_line} of "
                             f"{pre.entry} is already wrapped for "
                             f"{crash.exception_name}")

    handler = Block((Return(BoolLit(False, nid=ids()), nid=ids()),),
                    nid=ids())
    repl: list[Stmt]
    match stmt:
        case VarDecl(type=t, name=name, init=init):
            # keep the local visible after the try
            decl = replace(stmt, init=_default(t, ids))
            store = Assign(Var(name, nid=ids()), init, nid=ids())
            body = Block((store,), nid=ids())
            repl = [decl, TryCatch(body, crash.exception_name, handler,
                                   nid=ids())]
        case _:
            repl = [TryCatch(Block((stmt,), nid=ids()), crash.exception_name,
                             handler, nid=ids())]

    new_body = splice_stmt(pre.method.body, stmt.nid, repl)
    logger.debug(f"{pre.entry}: wrapped line {crash.loc.display_line} "
                 f"for {crash.exception_name}")
    return _commit(pre, new_body, WRAP_INSERTED, [key])  # type: ignore


def insert_checks(pre: PreconditionProgram,
                  crash: CrashReport) -> PreconditionProgram:
    """
    Make the precondition answer false instead of crashing.
    A crash inside a callee wraps the calling statement in a
    try-catch; any other crash prepends one guard per matching
    expression of the statement, in evaluation order.
    :param pre    Current precondition
    :param crash  Crash observed when running pre
    :raises NoMatchingExpression  The crash does not fit the statement
    :raises AlreadyGuarded        No new check would be inserted
    """
    stmt = crash_site(pre, crash)
    if stmt is None:
        raise NoMatchingExpression(f"no statement {crash.loc.node_id} "
                                   f"holding node {crash.fault_node} "
                                   f"in {pre.entry}")
    ids = IdAllocator(pre.program.next_id)
    if crash.in_callee:
        return _wrap(pre, stmt, crash, ids)
    return _guard(pre, stmt, crash, ids)
