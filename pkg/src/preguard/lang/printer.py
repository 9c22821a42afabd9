from dataclasses import dataclass
from typing import Annotated

from .types import (
    ArrayAccess, Assign, Binary, Block, BoolLit, Break, Call, Cast,
    ClassDecl, Expr, ExprStmt, FieldAccess, If, InstanceOf, IntLit,
    MethodDef, NewArray, NewObject, NodeId, NullLit, Program, Return, Stmt,
    Throw, TryCatch, Unary, Var, VarDecl, While,
)
from .util import children, is_expr, node_order, walk

INDENT = "    "

BINARY_PRECEDENCE: dict[str, int] = {
    "||": 1,
    "&&": 2,
    "==": 3, "!=": 3,
    "<": 4, "<=": 4, ">": 4, ">=": 4,
    "+": 5, "-": 5,
    "*": 6, "/": 6, "%": 6,
}
RELATIONAL = 4
UNARY = 7
POSTFIX = 8


@dataclass(frozen=True)
class Printed:
    """
    Canonical text of a program plus its node id side maps
    """
    text: str
    lines: Annotated[dict[NodeId, int], "node id -> 1-based display line"]
    order: Annotated[list[NodeId], "node ids in canonical pre-order"]


def precedence(expr: Expr) -> int:
    match expr:
        case Binary(op=op):
            return BINARY_PRECEDENCE[op]
        case InstanceOf():
            return RELATIONAL
        case Unary() | Cast():
            return UNARY
        case IntLit(value=value) if value < 0:
            return UNARY
    return POSTFIX


def format_expr(expr: Expr, min_prec: int = 0) -> str:
    """
    Render an expression with the minimal parentheses needed
    to re-parse to the same tree
    :param expr      Expression
    :param min_prec  Precedence required by the enclosing context
    """
    text = _format_expr(expr)
    if precedence(expr) < min_prec:
        return f"({text})"
    return text


def _format_expr(expr: Expr) -> str:
    match expr:
        case IntLit(value=value):
            return str(value)
        case BoolLit(value=value):
            return "true" if value else "false"
        case NullLit():
            return "null"
        case Var(name=name):
            return name
        case Unary(op=op, operand=operand):
            if op == "-" and isinstance(operand, IntLit):
                return f"-({operand.value})"
            return op + format_expr(operand, UNARY)
        case Binary(op=op, left=left, right=right):
            prec = BINARY_PRECEDENCE[op]
            return (f"{format_expr(left, prec)} {op} "
                    f"{format_expr(right, prec + 1)}")
        case FieldAccess(obj=obj, name=name):
            return f"{format_expr(obj, POSTFIX)}.{name}"
        case ArrayAccess(array=array, index=index):
            return f"{format_expr(array, POSTFIX)}[{format_expr(index)}]"
        case NewObject(cls=cls):
            return f"new {cls}()"
        case NewArray(elem=elem, length=length):
            return f"new {elem}[{format_expr(length)}]"
        case Cast(cls=cls, expr=inner):
            return f"({cls}) {format_expr(inner, UNARY)}"
        case InstanceOf(expr=inner, cls=cls):
            return f"{format_expr(inner, RELATIONAL)} instanceof {cls}"
        case Call(name=name, args=args):
            return f"{name}({', '.join(format_expr(a) for a in args)})"
    raise TypeError(f"not an expression: {expr!r}")


class _Printer:
    """
    Line-oriented emitter that tracks display lines per node
    """

    out: Annotated[list[str], "Emitted lines"]
    lines: Annotated[dict[NodeId, int], "node id -> display line"]

    def __init__(self) -> None:
        self.out = []
        self.lines = {}

    def emit(self, depth: int, text: str) -> int:
        self.out.append(INDENT * depth + text)
        return len(self.out)

    def mark(self, node: Stmt | Expr, line: int) -> None:
        self.lines[node.nid] = line

    def mark_exprs(self, stmt: Stmt, line: int) -> None:
        for child in children(stmt):
            if is_expr(child):
                for n in walk(child):
                    self.lines[n.nid] = line

    def class_decl(self, decl: ClassDecl) -> None:
        header = f"class {decl.name}"
        if decl.superclass is not None:
            header += f" extends {decl.superclass}"
        self.emit(0, header + " {")
        for t, name in decl.fields:
            self.emit(1, f"{t} {name};")
        self.emit(0, "}")

    def method(self, method: MethodDef) -> None:
        params = ", ".join(f"{t} {name}" for name, t in method.params)
        line = self.emit(0, f"{method.return_type} {method.name}({params}) {{")
        self.lines[method.nid] = line
        self.lines[method.body.nid] = line
        self.stmts(method.body.stmts, 1)
        self.emit(0, "}")

    def stmts(self, stmts: tuple[Stmt, ...], depth: int) -> None:
        for stmt in stmts:
            self.stmt(stmt, depth)

    def block_body(self, block: Block, line: int, depth: int) -> None:
        self.lines[block.nid] = line
        self.stmts(block.stmts, depth)

    def stmt(self, stmt: Stmt, depth: int) -> None:
        match stmt:
            case Block(stmts=stmts):
                line = self.emit(depth, "{")
                self.mark(stmt, line)
                self.stmts(stmts, depth + 1)
                self.emit(depth, "}")
            case If(cond=cond, then=then, orelse=None) if (
                    len(then.stmts) == 1
                    and isinstance(then.stmts[0], (Return, Break, Throw))):
                inner = then.stmts[0]
                line = self.emit(depth, f"if ({format_expr(cond)}) "
                                        f"{{ {self.simple(inner)} }}")
                self.mark(stmt, line)
                self.mark_exprs(stmt, line)
                self.lines[then.nid] = line
                self.mark(inner, line)
                self.mark_exprs(inner, line)
            case If(cond=cond, then=then, orelse=orelse):
                line = self.emit(depth, f"if ({format_expr(cond)}) {{")
                self.mark(stmt, line)
                self.mark_exprs(stmt, line)
                self.block_body(then, line, depth + 1)
                if orelse is not None:
                    else_line = self.emit(depth, "} else {")
                    self.block_body(orelse, else_line, depth + 1)
                self.emit(depth, "}")
            case While(cond=cond, body=body):
                line = self.emit(depth, f"while ({format_expr(cond)}) {{")
                self.mark(stmt, line)
                self.mark_exprs(stmt, line)
                self.block_body(body, line, depth + 1)
                self.emit(depth, "}")
            case TryCatch(body=body, exc=exc, handler=handler):
                line = self.emit(depth, "try {")
                self.mark(stmt, line)
                self.block_body(body, line, depth + 1)
                catch_line = self.emit(depth, f"}} catch ({exc}) {{")
                self.block_body(handler, catch_line, depth + 1)
                self.emit(depth, "}")
            case _:
                line = self.emit(depth, self.simple(stmt))
                self.mark(stmt, line)
                self.mark_exprs(stmt, line)

    def simple(self, stmt: Stmt) -> str:
        match stmt:
            case VarDecl(type=t, name=name, init=init):
                return f"{t} {name} = {format_expr(init)};"
            case Assign(target=target, value=value):
                return f"{format_expr(target)} = {format_expr(value)};"
            case Return(value=None):
                return "return;"
            case Return(value=value):
                return f"return {format_expr(value)};"
            case Throw(name=name):
                return f"throw {name};"
            case Break():
                return "break;"
            case ExprStmt(expr=expr):
                return f"{format_expr(expr)};"
        raise TypeError(f"not a simple statement: {stmt!r}")


def pretty_print(program: Program) -> Printed:
    """
    Canonical formatting: one statement per line, four space indent.
    :param program  Resolved program
    :return         Text plus node id -> display line and id order side maps
    """
    printer = _Printer()
    for decl in program.classes:
        printer.class_decl(decl)
        printer.emit(0, "")
    for idx, method in enumerate(program.methods):
        if idx:
            printer.emit(0, "")
        printer.method(method)
    text = "\n".join(printer.out) + "\n"
    return Printed(text, printer.lines, node_order(program))


def format_method(method: MethodDef) -> str:
    """
    Render a single method (no line map)
    """
    printer = _Printer()
    printer.method(method)
    return "\n".join(printer.out) + "\n"
