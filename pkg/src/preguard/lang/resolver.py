import logging

from typing import Annotated
from typing import Optional

from .types import (
    ArrayAccess, ArrayType, Assign, Binary, Block, BoolLit, Break, Call, Cast,
    ClassDecl, ClassInfo, ClassType, Expr, ExprStmt, FieldAccess, If,
    InstanceOf, IntLit, MethodDef, NewArray, NewObject, NodeId, NullLit,
    NullType, Program, ResolveError, Return, Stmt, Throw, TryCatch, Type,
    Unary, Var, VarDecl, While, BOOL, INT, NULL, VOID, is_reference,
)
from .util import can_complete, walk

logger = logging.getLogger(__name__)


def build_class_table(classes: tuple[ClassDecl, ...]) -> dict[str, ClassInfo]:
    """
    Resolve superclasses and flatten inherited fields
    :param classes  Declared classes
    :return         class name -> ClassInfo
    """
    decls: dict[str, ClassDecl] = {}
    for decl in classes:
        if decl.name in decls:
            raise ResolveError(f"duplicate class {decl.name}")
        decls[decl.name] = decl

    for decl in classes:
        if decl.superclass is not None and decl.superclass not in decls:
            raise ResolveError(f"class {decl.name} extends unknown class "
                               f"{decl.superclass}")
        seen = {decl.name}
        current = decl.superclass
        while current is not None:
            if current in seen:
                raise ResolveError(f"inheritance cycle through {decl.name}")
            seen.add(current)
            current = decls[current].superclass

    table: dict[str, ClassInfo] = {}

    def info(name: str) -> ClassInfo:
        if name in table:
            return table[name]
        decl = decls[name]
        inherited: tuple[tuple[str, Type], ...] = ()
        if decl.superclass is not None:
            inherited = info(decl.superclass).fields
        names = {n for n, _ in inherited}
        own: list[tuple[str, Type]] = []
        for t, field_name in decl.fields:
            if field_name in names:
                raise ResolveError(f"duplicate field {name}.{field_name}")
            names.add(field_name)
            own.append((field_name, t))
        table[name] = ClassInfo(name, decl.superclass, inherited + tuple(own))
        return table[name]

    for decl in classes:
        info(decl.name)

    for ci in table.values():
        for field_name, t in ci.fields:
            check_type(t, table, f"field {ci.name}.{field_name}")
    return table


def check_type(t: Type, table: dict[str, ClassInfo], what: str) -> None:
    """
    Validate a declared (non-void) type
    """
    match t:
        case ClassType(name=name):
            if name not in table:
                raise ResolveError(f"unknown type {name} for {what}")
        case ArrayType(elem=elem):
            if elem != INT and not isinstance(elem, ClassType):
                raise ResolveError(f"array element type of {what} must be "
                                   f"int or a class, got {elem}")
            check_type(elem, table, what)
        case NullType():
            raise ResolveError(f"invalid type for {what}")
        case _ if t == VOID:
            raise ResolveError(f"void is not a value type ({what})")


class MethodChecker:
    """
    Type checks one method body, recording the type of every expression
    """

    program_methods: Annotated[dict[str, MethodDef], "All methods by name"]
    table: Annotated[dict[str, ClassInfo], "Resolved classes"]
    method: Annotated[MethodDef, "Method being checked"]
    scopes: Annotated[list[dict[str, Type]], "Block scopes, innermost last"]
    loop_depth: Annotated[int, "Number of enclosing loops"]
    expr_types: Annotated[dict[NodeId, Type], "Output type map"]

    def __init__(self, methods: dict[str, MethodDef],
                 table: dict[str, ClassInfo], method: MethodDef,
                 expr_types: dict[NodeId, Type]) -> None:
        self.program_methods = methods
        self.table = table
        self.method = method
        self.scopes = [{}]
        self.loop_depth = 0
        self.expr_types = expr_types

    def fail(self, message: str) -> ResolveError:
        return ResolveError(f"in {self.method.name}: {message}")

    def lookup(self, name: str) -> Optional[Type]:
        for scope in reversed(self.scopes):
            if name in scope:
                return scope[name]
        return None

    def declare(self, name: str, t: Type) -> None:
        if self.lookup(name) is not None:
            raise self.fail(f"{name} is already declared")
        self.scopes[-1][name] = t

    def assignable(self, src: Type, dst: Type) -> bool:
        if src == dst:
            return True
        if src == NULL:
            return is_reference(dst)
        if isinstance(src, ClassType) and isinstance(dst, ClassType):
            current: Optional[str] = src.name
            while current is not None:
                if current == dst.name:
                    return True
                current = self.table[current].superclass
        return False

    def check(self) -> None:
        method = self.method
        if method.return_type != VOID:
            check_type(method.return_type, self.table,
                       f"return of {method.name}")
        for name, t in method.params:
            check_type(t, self.table, f"parameter {name} of {method.name}")
            self.declare(name, t)
        self.block(method.body)
        if method.return_type != VOID and can_complete(method.body):
            raise self.fail("missing return statement")

    def block(self, block: Block) -> None:
        self.scopes.append({})
        for stmt in block.stmts:
            self.stmt(stmt)
        self.scopes.pop()

    def stmt(self, stmt: Stmt) -> None:
        match stmt:
            case Block():
                self.block(stmt)
            case VarDecl(type=t, name=name, init=init):
                check_type(t, self.table, f"local {name}")
                src = self.expr(init)
                if not self.assignable(src, t):
                    raise self.fail(f"cannot initialise {t} {name} with {src}")
                self.declare(name, t)
            case Assign(target=target, value=value):
                if isinstance(target, FieldAccess) \
                        and isinstance(self.expr(target.obj), ArrayType):
                    raise self.fail("array length is read-only")
                dst = self.expr(target)
                src = self.expr(value)
                if not self.assignable(src, dst):
                    raise self.fail(f"cannot assign {src} to {dst}")
            case If(cond=cond, then=then, orelse=orelse):
                self.condition(cond)
                self.block(then)
                if orelse is not None:
                    self.block(orelse)
            case While(cond=cond, body=body):
                self.condition(cond)
                self.loop_depth += 1
                self.block(body)
                self.loop_depth -= 1
            case Return(value=value):
                rt = self.method.return_type
                if value is None:
                    if rt != VOID:
                        raise self.fail("missing return value")
                else:
                    if rt == VOID:
                        raise self.fail("void method returns a value")
                    src = self.expr(value)
                    if not self.assignable(src, rt):
                        raise self.fail(f"cannot return {src} as {rt}")
            case Throw():
                pass
            case TryCatch(body=body, handler=handler):
                self.block(body)
                self.block(handler)
            case ExprStmt(expr=expr):
                self.expr(expr, allow_void=True)
            case Break():
                if self.loop_depth == 0:
                    raise self.fail("break outside of a loop")

    def condition(self, cond: Expr) -> None:
        if (t := self.expr(cond)) != BOOL:
            raise self.fail(f"condition must be bool, got {t}")

    def expr(self, expr: Expr, allow_void: bool = False) -> Type:
        t = self._expr(expr, allow_void)
        self.expr_types[expr.nid] = t
        return t

    def _expr(self, expr: Expr, allow_void: bool) -> Type:
        match expr:
            case IntLit():
                return INT
            case BoolLit():
                return BOOL
            case NullLit():
                return NULL
            case Var(name=name):
                if (t := self.lookup(name)) is None:
                    raise self.fail(f"unknown variable {name}")
                return t
            case Unary(op=op, operand=operand):
                t = self.expr(operand)
                want = BOOL if op == "!" else INT
                if t != want:
                    raise self.fail(f"operator {op} expects {want}, got {t}")
                return want
            case Binary(op=op, left=left, right=right):
                lt = self.expr(left)
                rt = self.expr(right)
                if op in ("+", "-", "*", "/", "%"):
                    if lt != INT or rt != INT:
                        raise self.fail(f"operator {op} expects int operands")
                    return INT
                if op in ("<", "<=", ">", ">="):
                    if lt != INT or rt != INT:
                        raise self.fail(f"operator {op} expects int operands")
                    return BOOL
                if op in ("&&", "||"):
                    if lt != BOOL or rt != BOOL:
                        raise self.fail(f"operator {op} expects bool operands")
                    return BOOL
                if lt == rt and lt in (INT, BOOL):
                    return BOOL
                if is_reference(lt) and is_reference(rt):
                    return BOOL
                raise self.fail(f"cannot compare {lt} with {rt}")
            case FieldAccess(obj=obj, name=name):
                t = self.expr(obj)
                if isinstance(t, ArrayType) and name == "length":
                    return INT
                if not isinstance(t, ClassType):
                    raise self.fail(f"field access .{name} on {t}")
                if (ft := self.table[t.name].field_type(name)) is None:
                    raise self.fail(f"class {t.name} has no field {name}")
                return ft
            case ArrayAccess(array=array, index=index):
                t = self.expr(array)
                if not isinstance(t, ArrayType):
                    raise self.fail(f"indexing non-array {t}")
                if self.expr(index) != INT:
                    raise self.fail("array index must be int")
                return t.elem
            case NewObject(cls=cls):
                if cls not in self.table:
                    raise self.fail(f"unknown class {cls}")
                return ClassType(cls)
            case NewArray(elem=elem, length=length):
                check_type(ArrayType(elem), self.table, "array creation")
                if self.expr(length) != INT:
                    raise self.fail("array size must be int")
                return ArrayType(elem)
            case Cast(cls=cls, expr=inner):
                if cls not in self.table:
                    raise self.fail(f"unknown class {cls}")
                t = self.expr(inner)
                if not isinstance(t, (ClassType, NullType)):
                    raise self.fail(f"cannot cast {t} to {cls}")
                return ClassType(cls)
            case InstanceOf(expr=inner, cls=cls):
                if cls not in self.table:
                    raise self.fail(f"unknown class {cls}")
                t = self.expr(inner)
                if not isinstance(t, (ClassType, NullType)):
                    raise self.fail(f"instanceof on {t}")
                return BOOL
            case Call(name=name, args=args):
                if (callee := self.program_methods.get(name)) is None:
                    raise self.fail(f"unknown method {name}")
                if len(args) != len(callee.params):
                    raise self.fail(f"{name} expects {len(callee.params)} "
                                    f"arguments, got {len(args)}")
                for arg, (pname, pt) in zip(args, callee.params):
                    at = self.expr(arg)
                    if not self.assignable(at, pt):
                        raise self.fail(f"argument {pname} of {name}: "
                                        f"cannot pass {at} as {pt}")
                if callee.return_type == VOID and not allow_void:
                    raise self.fail(f"void method {name} used as a value")
                return callee.return_type
        raise self.fail(f"unknown expression {expr!r}")


def resolve(classes: tuple[ClassDecl, ...],
            methods: tuple[MethodDef, ...]) -> Program:
    """
    Resolve names and types of a parsed (or transformed) compilation unit
    :param classes  Class declarations
    :param methods  Method definitions
    :return         Program with class table and expression types
    """
    table = build_class_table(classes)

    by_name: dict[str, MethodDef] = {}
    for method in methods:
        if method.name in by_name:
            raise ResolveError(f"duplicate method {method.name}")
        by_name[method.name] = method

    expr_types: dict[NodeId, Type] = {}
    for method in methods:
        MethodChecker(by_name, table, method, expr_types).check()

    top = max([m.nid for m in methods]
              + [n.nid for m in methods for n in walk(m.body)], default=0)
    return Program(classes, methods, class_table=table,
                   expr_types=expr_types, next_id=top + 1)
