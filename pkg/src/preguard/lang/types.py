from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property
from typing import Annotated
from typing import Optional
from typing import TYPE_CHECKING

from preguard.errors import PreguardError

if TYPE_CHECKING:
    from .printer import Printed

NodeId = int


class ParseError(PreguardError):
    """
    Syntax error in MiniLang source
    """

    def __init__(self, message: str, line: int, col: int,
                 expected: Optional[str] = None) -> None:
        """
        Constructor
        :param message   What went wrong
        :param line      1-based line of the offending token
        :param col       1-based column of the offending token
        :param expected  Human readable description of the expected token
        """
        self.message = message
        self.line = line
        self.col = col
        self.expected = expected
        text = f"{line}:{col}: {message}"
        if expected is not None:
            text += f" (expected {expected})"
        super().__init__(text)


class ResolveError(PreguardError):
    """
    Name or type resolution failure (unknown name, type mismatch,
    inheritance cycle, missing return, ...)
    """


@dataclass(frozen=True)
class PrimType:
    name: str

    def __str__(self) -> str:
        return self.name


@dataclass(frozen=True)
class ArrayType:
    elem: Type

    def __str__(self) -> str:
        return f"{self.elem}[]"


@dataclass(frozen=True)
class ClassType:
    name: str

    def __str__(self) -> str:
        return self.name


@dataclass(frozen=True)
class NullType:
    def __str__(self) -> str:
        return "null"


Type = PrimType | ArrayType | ClassType | NullType

INT = PrimType("int")
BOOL = PrimType("bool")
VOID = PrimType("void")
NULL = NullType()


def is_reference(t: Type) -> bool:
    """
    True for types whose values may be null
    """
    return isinstance(t, (ArrayType, ClassType, NullType))


@dataclass(frozen=True)
class Node:
    """
    Base of every statement and expression.
    The node id never takes part in structural equality.
    """
    nid: NodeId = field(default=0, compare=False, repr=False, kw_only=True)


@dataclass(frozen=True)
class IntLit(Node):
    value: int


@dataclass(frozen=True)
class BoolLit(Node):
    value: bool


@dataclass(frozen=True)
class NullLit(Node):
    pass


@dataclass(frozen=True)
class Var(Node):
    name: str


@dataclass(frozen=True)
class Unary(Node):
    op: str
    operand: Expr


@dataclass(frozen=True)
class Binary(Node):
    op: str
    left: Expr
    right: Expr


@dataclass(frozen=True)
class FieldAccess(Node):
    obj: Expr
    name: str


@dataclass(frozen=True)
class ArrayAccess(Node):
    array: Expr
    index: Expr


@dataclass(frozen=True)
class NewObject(Node):
    cls: str


@dataclass(frozen=True)
class NewArray(Node):
    elem: Type
    length: Expr


@dataclass(frozen=True)
class Cast(Node):
    cls: str
    expr: Expr


@dataclass(frozen=True)
class InstanceOf(Node):
    expr: Expr
    cls: str


@dataclass(frozen=True)
class Call(Node):
    name: str
    args: tuple[Expr, ...]


Expr = (IntLit | BoolLit | NullLit | Var | Unary | Binary | FieldAccess
        | ArrayAccess | NewObject | NewArray | Cast | InstanceOf | Call)


@dataclass(frozen=True)
class Block(Node):
    stmts: tuple[Stmt, ...]


@dataclass(frozen=True)
class VarDecl(Node):
    type: Type
    name: str
    init: Expr


@dataclass(frozen=True)
class Assign(Node):
    target: Expr
    value: Expr


@dataclass(frozen=True)
class If(Node):
    cond: Expr
    then: Block
    orelse: Optional[Block] = None


@dataclass(frozen=True)
class While(Node):
    cond: Expr
    body: Block


@dataclass(frozen=True)
class Return(Node):
    value: Optional[Expr] = None


@dataclass(frozen=True)
class Throw(Node):
    name: str


@dataclass(frozen=True)
class TryCatch(Node):
    body: Block
    exc: str
    handler: Block


@dataclass(frozen=True)
class ExprStmt(Node):
    expr: Expr


@dataclass(frozen=True)
class Break(Node):
    pass


Stmt = (Block | VarDecl | Assign | If | While | Return | Throw | TryCatch
        | ExprStmt | Break)

EXPR_TYPES = (IntLit, BoolLit, NullLit, Var, Unary, Binary, FieldAccess,
              ArrayAccess, NewObject, NewArray, Cast, InstanceOf, Call)
STMT_TYPES = (Block, VarDecl, Assign, If, While, Return, Throw, TryCatch,
              ExprStmt, Break)


@dataclass(frozen=True)
class ClassDecl:
    name: str
    superclass: Optional[str]
    fields: tuple[tuple[Type, str], ...]


@dataclass(frozen=True)
class MethodDef:
    name: str
    params: tuple[tuple[str, Type], ...]
    return_type: Type
    body: Block
    nid: NodeId = field(default=0, compare=False, repr=False)

    @property
    def param_types(self) -> tuple[Type, ...]:
        return tuple(t for _, t in self.params)


@dataclass(frozen=True)
class ClassInfo:
    """
    Resolved class: superclass and all fields including inherited ones,
    inherited fields first
    """
    name: str
    superclass: Optional[str]
    fields: tuple[tuple[str, Type], ...]

    def field_type(self, name: str) -> Optional[Type]:
        for field_name, t in self.fields:
            if field_name == name:
                return t
        return None


@dataclass(frozen=True)
class Program:
    """
    A resolved MiniLang compilation unit.
    Only `classes` and `methods` take part in structural equality.
    """
    classes: tuple[ClassDecl, ...]
    methods: tuple[MethodDef, ...]
    class_table: Annotated[dict[str, ClassInfo],
                           "class name -> resolved class"] = field(
        default_factory=dict, compare=False, repr=False)
    expr_types: Annotated[dict[NodeId, Type],
                          "static type of every expression"] = field(
        default_factory=dict, compare=False, repr=False)
    next_id: Annotated[NodeId, "first unused node id"] = field(
        default=1, compare=False, repr=False)

    def method(self, name: str) -> MethodDef:
        """
        Look up a method by name
        :param name  Method name
        """
        for m in self.methods:
            if m.name == name:
                return m
        raise KeyError(name)

    def has_method(self, name: str) -> bool:
        return any(m.name == name for m in self.methods)

    def is_subclass(self, cls: str, ancestor: str) -> bool:
        """
        Reflexive-transitive subclass check
        """
        current: Optional[str] = cls
        while current is not None:
            if current == ancestor:
                return True
            current = self.class_table[current].superclass
        return False

    def subclasses(self, cls: str) -> list[str]:
        """
        All classes (sorted by name) that are subclasses of cls, cls included
        """
        return sorted(c for c in self.class_table if self.is_subclass(c, cls))

    @cached_property
    def printed(self) -> Printed:
        """
        Canonical pretty-print of this program with its line map
        """
        from .printer import pretty_print
        return pretty_print(self)

    def display_line(self, nid: NodeId) -> int:
        """
        Display line of a node in the canonical pretty-print (0 if unknown)
        """
        return self.printed.lines.get(nid, 0)


@dataclass(frozen=True)
class SourceLoc:
    """
    Location of a node: the node id is authoritative,
    the display line is only for humans
    """
    node_id: NodeId
    display_line: int
