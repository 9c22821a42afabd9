from __future__ import annotations

from dataclasses import fields, replace
from typing import Annotated
from typing import Callable
from typing import Iterable
from typing import Iterator
from typing import Optional

from .types import (
    ArrayAccess, Assign, Binary, Block, BoolLit, Break, Call, Cast, Expr,
    ExprStmt, FieldAccess, If, MethodDef, NewArray, Node, NodeId, Program,
    Return, Stmt, Throw, TryCatch, Var, VarDecl, While, EXPR_TYPES,
)

# a short-circuit path: operands that must evaluate to the given polarity
# for an expression to be reached ("&&" left must be true, "||" left false)
PathCond = tuple[tuple[Expr, bool], ...]


class IdAllocator:
    """
    Hands out fresh, strictly increasing node ids
    """

    next_id: Annotated[int, "Next id to hand out"]

    def __init__(self, start: int = 1) -> None:
        self.next_id = start

    def __call__(self) -> NodeId:
        nid = self.next_id
        self.next_id += 1
        return nid


def children(node: Node) -> list[Node]:
    """
    Direct child nodes in source (and evaluation) order
    """
    out: list[Node] = []
    for f in fields(node):
        if f.name == "nid":
            continue
        value = getattr(node, f.name)
        if isinstance(value, Node):
            out.append(value)
        elif isinstance(value, tuple):
            out.extend(v for v in value if isinstance(v, Node))
    return out


def walk(node: Node) -> Iterator[Node]:
    """
    Pre-order traversal of a subtree
    """
    yield node
    for child in children(node):
        yield from walk(child)


def map_children(node: Node, fn: Callable[[Node], Node]) -> Node:
    """
    Rebuild node with fn applied to each direct child.
    Returns node itself when nothing changed.
    """
    changes: dict[str, object] = {}
    for f in fields(node):
        if f.name == "nid":
            continue
        value = getattr(node, f.name)
        if isinstance(value, Node):
            new = fn(value)
            if new is not value:
                changes[f.name] = new
        elif isinstance(value, tuple) and value \
                and all(isinstance(v, Node) for v in value):
            new_items = tuple(fn(v) for v in value)
            if any(a is not b for a, b in zip(new_items, value)):
                changes[f.name] = new_items
    if not changes:
        return node
    return replace(node, **changes)  # type: ignore[arg-type]


def clone(node: Node, ids: IdAllocator) -> Node:
    """
    Deep copy of a subtree with fresh node ids
    """
    copied = map_children(node, lambda c: clone(c, ids))
    return replace(copied, nid=ids())


def ast_node_count(node: Node | MethodDef) -> int:
    """
    Number of statement and expression nodes in a subtree.
    Blocks are grouping only and are not counted.
    """
    if isinstance(node, MethodDef):
        node = node.body
    return sum(1 for n in walk(node) if not isinstance(n, Block))


def statement_count(node: Node | MethodDef) -> int:
    """
    Number of statements in a subtree, Blocks excluded
    """
    if isinstance(node, MethodDef):
        node = node.body
    return sum(1 for n in walk(node)
               if not is_expr(n) and not isinstance(n, Block))


def is_expr(node: Node) -> bool:
    return isinstance(node, EXPR_TYPES)


def has_call(expr: Node) -> bool:
    return any(isinstance(n, Call) for n in walk(expr))


def may_crash(expr: Node) -> bool:
    """
    Syntactic over-approximation of "evaluating this can fault"
    """
    for n in walk(expr):
        if isinstance(n, (FieldAccess, ArrayAccess, Cast, Call, NewArray)):
            return True
        if isinstance(n, Binary) and n.op in ("/", "%"):
            return True
    return False


def _expr_order(expr: Expr, path: PathCond,
                out: list[tuple[Expr, PathCond]]) -> None:
    if isinstance(expr, Binary) and expr.op in ("&&", "||"):
        _expr_order(expr.left, path, out)
        _expr_order(expr.right, path + ((expr.left, expr.op == "&&"),), out)
    else:
        for child in children(expr):
            _expr_order(child, path, out)  # type: ignore[arg-type]
    out.append((expr, path))


def evaluated_exprs_with_paths(stmt: Stmt) -> list[tuple[Expr, PathCond]]:
    """
    Expressions evaluated by a statement in evaluation order
    (left to right, innermost first), each with the short-circuit
    path condition under which it is reached.
    For an assignment to a field or array element the target itself
    comes last: the store happens after the right hand side.
    Containers only contribute their condition.
    """
    out: list[tuple[Expr, PathCond]] = []
    match stmt:
        case VarDecl(init=init):
            _expr_order(init, (), out)
        case Assign(target=target, value=value):
            match target:
                case FieldAccess(obj=obj):
                    _expr_order(obj, (), out)
                case ArrayAccess(array=array, index=index):
                    _expr_order(array, (), out)
                    _expr_order(index, (), out)
            _expr_order(value, (), out)
            if not isinstance(target, Var):
                out.append((target, ()))
        case Return(value=value) if value is not None:
            _expr_order(value, (), out)
        case If(cond=cond) | While(cond=cond):
            _expr_order(cond, (), out)
        case ExprStmt(expr=expr):
            _expr_order(expr, (), out)
    return out


def evaluated_exprs(stmt: Stmt) -> list[Expr]:
    """
    Expressions evaluated by a statement in evaluation order
    """
    return [e for e, _ in evaluated_exprs_with_paths(stmt)]


def find_stmt(root: Node, nid: NodeId) -> Optional[Stmt]:
    """
    Find the statement with the given node id below root
    """
    for n in walk(root):
        if n.nid == nid and not is_expr(n):
            return n  # type: ignore[return-value]
    return None


def splice_stmt(root: Node, nid: NodeId, repl: Iterable[Stmt]) -> Node:
    """
    Replace the statement with id nid (inside some block) by repl
    :param root  Subtree to rewrite, usually a method body
    :param nid   Id of the statement to replace
    :param repl  Replacement statements, may be empty to delete
    """
    repl = tuple(repl)

    def go(node: Node) -> Node:
        if is_expr(node):
            return node
        if isinstance(node, Block):
            out: list[Stmt] = []
            changed = False
            for s in node.stmts:
                if s.nid == nid:
                    out.extend(repl)
                    changed = True
                else:
                    new = go(s)
                    changed = changed or new is not s
                    out.append(new)  # type: ignore[arg-type]
            return replace(node, stmts=tuple(out)) if changed else node
        return map_children(node, go)

    return go(root)


def replace_block(root: Node, nid: NodeId, stmts: Iterable[Stmt]) -> Node:
    """
    Replace the statement list of the block with id nid
    """
    stmts = tuple(stmts)

    def go(node: Node) -> Node:
        if is_expr(node):
            return node
        if isinstance(node, Block) and node.nid == nid:
            return replace(node, stmts=stmts)
        return map_children(node, go)

    return go(root)


def blocks(root: Node) -> list[Block]:
    """
    All blocks below root, outermost first (breadth first)
    """
    out: list[Block] = []
    queue: list[Node] = [root]
    while queue:
        node = queue.pop(0)
        if is_expr(node):
            continue
        if isinstance(node, Block):
            out.append(node)
        queue.extend(children(node))
    return out


def _has_break(node: Node) -> bool:
    if isinstance(node, Break):
        return True
    if isinstance(node, While) or is_expr(node):
        return False
    return any(_has_break(c) for c in children(node))


def can_complete(stmt: Stmt) -> bool:
    """
    Whether a statement can finish normally (fall through to the next one)
    """
    match stmt:
        case Return() | Throw() | Break():
            return False
        case Block(stmts=stmts):
            return all(can_complete(s) for s in stmts)
        case If(then=then, orelse=orelse):
            if orelse is None:
                return True
            return can_complete(then) or can_complete(orelse)
        case While(cond=cond, body=body):
            if isinstance(cond, BoolLit) and cond.value:
                return _has_break(body)
            return True
        case TryCatch(body=body, handler=handler):
            return can_complete(body) or can_complete(handler)
    return True


def node_order(program: Program) -> list[NodeId]:
    """
    Node ids in canonical pre-order (method, then its body)
    """
    out: list[NodeId] = []
    for m in program.methods:
        out.append(m.nid)
        out.extend(n.nid for n in walk(m.body))
    return out


def reassign_ids(methods: Iterable[MethodDef],
                 ids: Iterable[NodeId]) -> tuple[MethodDef, ...]:
    """
    Re-attach node ids in canonical pre-order, the inverse of node_order
    """
    it = iter(ids)

    def go(node: Node) -> Node:
        nid = next(it)
        return replace(map_children(node, go), nid=nid)

    out = []
    for m in methods:
        nid = next(it)
        out.append(replace(m, nid=nid, body=go(m.body)))
    if next(it, None) is not None:
        raise ValueError("node id map is longer than the program")
    return tuple(out)
