import itertools
import re

from dataclasses import replace
from typing import Callable
from typing import Iterator
from typing import Sequence

from preguard.interp.types import catches
from preguard.lang.types import (
    ArrayAccess, Assign, Binary, Block, BoolLit, Break, Call, Expr, ExprStmt,
    FieldAccess, If, IntLit, MethodDef, Node, NullLit, Program, Return, Stmt,
    Throw, TryCatch, Type, Unary, Var, VarDecl, While, BOOL,
)
from preguard.lang.util import (
    IdAllocator, can_complete, children, evaluated_exprs, has_call, is_expr,
    map_children, may_crash, walk,
)

from .types import TEMP_PREFIX

TEMP_RE = re.compile(re.escape(TEMP_PREFIX) + r"(\d+)")


def temp_names(method: MethodDef) -> Iterator[str]:
    """
    Fresh `__t<k>` names, numbered past every temporary already in method
    """
    used = [int(m.group(1)) for name in _declared_names(method)
            if (m := TEMP_RE.fullmatch(name))]
    start = max(used, default=0) + 1
    return (f"{TEMP_PREFIX}{k}" for k in itertools.count(start))


def _declared_names(method: MethodDef) -> Iterator[str]:
    yield from (name for name, _ in method.params)
    yield from (n.name for n in walk(method.body) if isinstance(n, VarDecl))


def rewrite_stmts(root: Node, fn: Callable[[Stmt], Sequence[Stmt]]) -> Node:
    """
    Rebuild every block below root bottom-up, replacing each statement
    by fn(statement) once its own nested blocks have been rewritten
    """
    def go(node: Node) -> Node:
        if is_expr(node):
            return node
        if isinstance(node, Block):
            out: list[Stmt] = []
            for stmt in node.stmts:
                out.extend(fn(go(stmt)))  # type: ignore[arg-type]
            return replace(node, stmts=tuple(out))
        return map_children(node, go)

    return go(root)


def _true(ids: IdAllocator) -> Return:
    return Return(BoolLit(True, nid=ids()), nid=ids())


def _false(ids: IdAllocator) -> Return:
    return Return(BoolLit(False, nid=ids()), nid=ids())


def booleanize(method: MethodDef, ids: IdAllocator) -> MethodDef:
    """
    Turn a method into a boolean one that answers true wherever the
    original returned. Returned expressions still get evaluated.
    :param method  Resolved method
    :param ids     Allocator for the inserted nodes
    """
    def lift(stmt: Stmt) -> Sequence[Stmt]:
        match stmt:
            case Return(value=None | IntLit() | BoolLit() | NullLit()):
                return [_true(ids)]
            case Return(value=value):
                return [ExprStmt(value, nid=ids()), _true(ids)]
        return [stmt]

    body = rewrite_stmts(method.body, lift)
    assert isinstance(body, Block)
    if can_complete(body):
        body = replace(body, stmts=body.stmts + (_true(ids),))
    return replace(method, return_type=BOOL, body=body)


def strip_throws(method: MethodDef, ids: IdAllocator) -> MethodDef:
    """
    Replace every throw that would leave the method by `return false;`.
    Throws caught by an enclosing try in the same method stay.
    """
    def go(node: Node, caught: tuple[str, ...]) -> Node:
        match node:
            case Throw(name=name) if not any(catches(c, name)
                                             for c in caught):
                return _false(ids)
            case TryCatch(body=body, exc=exc, handler=handler):
                new_body = go(body, caught + (exc,))
                new_handler = go(handler, caught)
                if new_body is body and new_handler is handler:
                    return node
                return replace(node, body=new_body, handler=new_handler)
        if is_expr(node):
            return node
        return map_children(node, lambda c: go(c, caught))

    body = go(method.body, ())
    return replace(method, body=body)  # type: ignore[arg-type]


def normalize_loops(method: MethodDef, ids: IdAllocator) -> MethodDef:
    """
    Move loop conditions that may crash into the loop body:
    `while (c) B` becomes `while (true) { bool t = c; if (!t) { break; } B }`
    so the condition sits on a guardable statement of every iteration
    """
    temps = temp_names(method)

    def lower(stmt: Stmt) -> Sequence[Stmt]:
        if not isinstance(stmt, While) or not may_crash(stmt.cond):
            return [stmt]
        name = next(temps)
        test = VarDecl(BOOL, name, stmt.cond, nid=ids())
        exit_ = If(Unary("!", Var(name, nid=ids()), nid=ids()),
                   Block((Break(nid=ids()),), nid=ids()), nid=ids())
        body = replace(stmt.body, stmts=(test, exit_) + stmt.body.stmts)
        return [replace(stmt, cond=BoolLit(True, nid=ids()), body=body)]

    body = rewrite_stmts(method.body, lower)
    return replace(method, body=body)  # type: ignore[arg-type]


def _atomic(expr: Expr) -> bool:
    return isinstance(expr, (IntLit, BoolLit, NullLit, Var))


class _CallLinearizer:
    """
    Hoists calls out of larger expressions into temporaries while
    keeping the original evaluation order
    """

    def __init__(self, program: Program, ids: IdAllocator,
                 temps: Iterator[str]) -> None:
        self.program = program
        self.ids = ids
        self.temps = temps

    def hoist(self, expr: Expr, t: Type, out: list[Stmt]) -> Var:
        name = next(self.temps)
        out.append(VarDecl(t, name, expr, nid=self.ids()))
        return Var(name, nid=self.ids())

    def type_of(self, expr: Expr) -> Type:
        if isinstance(expr, Call):
            return self.program.method(expr.name).return_type
        return self.program.expr_types[expr.nid]

    def operands(self, exprs: Sequence[Expr], out: list[Stmt]) -> list[Expr]:
        """
        Linearize sibling operands. Operands evaluated before the last
        call-bearing one are pinned to temporaries if they read the heap
        or may fault, so they still run before the call.
        """
        last = max((i for i, e in enumerate(exprs) if has_call(e)),
                   default=-1)
        result: list[Expr] = []
        for idx, expr in enumerate(exprs):
            if idx > last:
                result.append(expr)
                continue
            new = self.expr(expr, out)
            if idx < last and may_crash(new):
                new = self.hoist(new, self.type_of(expr), out)
            result.append(new)
        return result

    def call_in_place(self, call: Call, out: list[Stmt]) -> Call:
        args = self.operands(call.args, out)
        return replace(call, args=tuple(args))

    def expr(self, expr: Expr, out: list[Stmt]) -> Expr:
        """
        Call-free version of expr; prelude statements go to out
        """
        if not has_call(expr):
            return expr
        match expr:
            case Call():
                return self.hoist(self.call_in_place(expr, out),
                                  self.type_of(expr), out)
            case Binary(op="&&" | "||" as op, left=left, right=right) \
                    if has_call(right):
                flag = self.hoist(self.expr(left, out), BOOL, out)
                inner: list[Stmt] = []
                if isinstance(right, Call):
                    value: Expr = self.call_in_place(right, inner)
                else:
                    value = self.expr(right, inner)
                inner.append(Assign(Var(flag.name, nid=self.ids()), value,
                                    nid=self.ids()))
                cond: Expr = Var(flag.name, nid=self.ids())
                if op == "||":
                    cond = Unary("!", cond, nid=self.ids())
                out.append(If(cond, Block(tuple(inner), nid=self.ids()),
                              nid=self.ids()))
                return Var(flag.name, nid=self.ids())
        parts = iter(self.operands(children(expr), out))  # type: ignore
        return map_children(expr, lambda _: next(parts))  # type: ignore

    def stmt(self, stmt: Stmt) -> Sequence[Stmt]:
        if not any(isinstance(e, Call) for e in evaluated_exprs(stmt)):
            return [stmt]
        out: list[Stmt] = []
        match stmt:
            case ExprStmt(expr=Call() as call):
                new: Stmt = replace(stmt, expr=self.call_in_place(call, out))
            case ExprStmt(expr=expr):
                new = replace(stmt, expr=self.expr(expr, out))
            case VarDecl(init=Call() as call):
                new = replace(stmt, init=self.call_in_place(call, out))
            case VarDecl(init=init):
                new = replace(stmt, init=self.expr(init, out))
            case Assign(target=Var(), value=Call() as call):
                new = replace(stmt, value=self.call_in_place(call, out))
            case Assign(target=FieldAccess(obj=obj) as target, value=value):
                obj2, value2 = self.operands([obj, value], out)
                new = replace(stmt, target=replace(target, obj=obj2),
                              value=value2)
            case Assign(target=ArrayAccess(array=array, index=index) as target,
                        value=value):
                array2, index2, value2 = self.operands([array, index, value],
                                                       out)
                new = replace(stmt,
                              target=replace(target, array=array2,
                                             index=index2),
                              value=value2)
            case Assign(value=value):
                new = replace(stmt, value=self.expr(value, out))
            case Return(value=Call() as call):
                new = replace(stmt, value=self.call_in_place(call, out))
            case Return(value=value) if value is not None:
                new = replace(stmt, value=self.expr(value, out))
            case If(cond=cond):
                new = replace(stmt, cond=self.expr(cond, out))
            case _:
                new = stmt
        return out + [new]


def normalize_calls(method: MethodDef, program: Program,
                    ids: IdAllocator) -> MethodDef:
    """
    Give every call a statement of its own: a call stays where it is
    only as `f(..);`, `T x = f(..);`, `x = f(..);` or `return f(..);`
    with call-free arguments, everything else is hoisted into `__t<k>`
    temporaries in evaluation order.
    :param method   Method to rewrite (its expressions must be typed
                    in program)
    :param program  Resolved program holding method
    :param ids      Allocator for the inserted nodes
    """
    if any(isinstance(n, While) and has_call(n.cond)
           for n in walk(method.body)):
        raise ValueError("loop conditions with calls must be normalized "
                         "first (normalize_loops)")
    linearizer = _CallLinearizer(program, ids, temp_names(method))
    body = rewrite_stmts(method.body, linearizer.stmt)
    return replace(method, body=body)  # type: ignore[arg-type]
