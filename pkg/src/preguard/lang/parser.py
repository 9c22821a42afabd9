import logging

from typing import Annotated
from typing import Optional
from typing import Sequence

from .lexer import Token, TokenKind, tokenize
from .resolver import resolve
from .types import (
    ArrayAccess, ArrayType, Assign, Binary, Block, BoolLit, Break, Call, Cast,
    ClassDecl, ClassType, Expr, ExprStmt, FieldAccess, If, InstanceOf, IntLit,
    MethodDef, NewArray, NewObject, NodeId, NullLit, ParseError, Program,
    Return, Stmt, Throw, TryCatch, Type, Unary, Var, VarDecl, While,
    BOOL, INT, VOID,
)
from .util import IdAllocator, reassign_ids

logger = logging.getLogger(__name__)

# binary operator precedence, lowest first
PRECEDENCE: tuple[tuple[str, ...], ...] = (
    ("||",),
    ("&&",),
    ("==", "!="),
    ("<", "<=", ">", ">="),
    ("+", "-"),
    ("*", "/", "%"),
)

INT_BITS = 64


def wrap_int(value: int) -> int:
    """
    Wrap an arbitrary integer into signed 64 bit range
    """
    half = 1 << (INT_BITS - 1)
    return ((value + half) % (1 << INT_BITS)) - half


class Parser:
    """
    Recursive descent parser for MiniLang.
    `for` loops are desugared to `while` here.
    """

    tokens: Annotated[list[Token], "Token stream ending in EOF"]
    pos: Annotated[int, "Index of the current token"]
    ids: Annotated[IdAllocator, "Node id source"]
    class_names: Annotated[set[str], "Classes declared so far, "
                                     "used to recognise casts"]

    def __init__(self, text: str) -> None:
        """
        Constructor
        :param text  MiniLang source text
        """
        self.tokens = tokenize(text)
        self.pos = 0
        self.ids = IdAllocator()
        self.class_names = set()

    @property
    def tok(self) -> Token:
        return self.tokens[self.pos]

    def peek(self, offset: int = 1) -> Token:
        return self.tokens[min(self.pos + offset, len(self.tokens) - 1)]

    def advance(self) -> Token:
        tok = self.tok
        if tok.kind != TokenKind.EOF:
            self.pos += 1
        return tok

    def error(self, message: str, expected: Optional[str] = None) -> ParseError:
        return ParseError(message, self.tok.line, self.tok.col, expected)

    def expect_op(self, op: str) -> Token:
        if not self.tok.is_op(op):
            raise self.error(f"unexpected {self.tok.text or 'end of input'!r}",
                             expected=repr(op))
        return self.advance()

    def expect_kw(self, kw: str) -> Token:
        if not self.tok.is_kw(kw):
            raise self.error(f"unexpected {self.tok.text or 'end of input'!r}",
                             expected=repr(kw))
        return self.advance()

    def expect_ident(self) -> str:
        if self.tok.kind != TokenKind.IDENT:
            raise self.error(f"unexpected {self.tok.text or 'end of input'!r}",
                             expected="identifier")
        return self.advance().text

    def parse_unit(self) -> tuple[tuple[ClassDecl, ...], tuple[MethodDef, ...]]:
        """
        program := classdecl* methoddecl+
        """
        classes: list[ClassDecl] = []
        while self.tok.is_kw("class"):
            classes.append(self.parse_class())

        methods: list[MethodDef] = []
        while self.tok.kind != TokenKind.EOF:
            methods.append(self.parse_method())

        if not methods:
            raise self.error("program declares no method",
                             expected="method declaration")
        return tuple(classes), tuple(methods)

    def parse_class(self) -> ClassDecl:
        self.expect_kw("class")
        name = self.expect_ident()
        # register early so field types and casts can refer to it
        self.class_names.add(name)
        superclass = None
        if self.tok.is_kw("extends"):
            self.advance()
            superclass = self.expect_ident()
        self.expect_op("{")
        fields: list[tuple[Type, str]] = []
        while not self.tok.is_op("}"):
            t = self.parse_type()
            fields.append((t, self.expect_ident()))
            self.expect_op(";")
        self.expect_op("}")
        return ClassDecl(name, superclass, tuple(fields))

    def parse_type(self, allow_void: bool = False) -> Type:
        """
        type := ("int" | "bool" | IDENT) "[]"*
        """
        base: Type
        if self.tok.is_kw("int"):
            self.advance()
            base = INT
        elif self.tok.is_kw("bool"):
            self.advance()
            base = BOOL
        elif allow_void and self.tok.is_kw("void"):
            self.advance()
            return VOID
        elif self.tok.kind == TokenKind.IDENT:
            base = ClassType(self.advance().text)
        else:
            raise self.error(f"unexpected {self.tok.text or 'end of input'!r}",
                             expected="type")
        while self.tok.is_op("[") and self.peek().is_op("]"):
            self.advance()
            self.advance()
            base = ArrayType(base)
        return base

    def parse_method(self) -> MethodDef:
        return_type = self.parse_type(allow_void=True)
        name = self.expect_ident()
        self.expect_op("(")
        params: list[tuple[str, Type]] = []
        if not self.tok.is_op(")"):
            while True:
                t = self.parse_type()
                params.append((self.expect_ident(), t))
                if not self.tok.is_op(","):
                    break
                self.advance()
        self.expect_op(")")
        body = self.parse_block()
        return MethodDef(name, tuple(params), return_type, body, nid=self.ids())

    def parse_block(self) -> Block:
        self.expect_op("{")
        stmts: list[Stmt] = []
        while not self.tok.is_op("}"):
            if self.tok.kind == TokenKind.EOF:
                raise self.error("unterminated block", expected="'}'")
            stmts.append(self.parse_stmt())
        self.expect_op("}")
        return Block(tuple(stmts), nid=self.ids())

    def starts_decl(self) -> bool:
        if self.tok.is_kw("int") or self.tok.is_kw("bool"):
            return True
        if self.tok.kind != TokenKind.IDENT:
            return False
        nxt = self.peek()
        if nxt.kind == TokenKind.IDENT:
            return True
        return nxt.is_op("[") and self.peek(2).is_op("]")

    def parse_stmt(self) -> Stmt:
        tok = self.tok
        if tok.is_op("{"):
            return self.parse_block()
        if tok.is_kw("if"):
            self.advance()
            self.expect_op("(")
            cond = self.parse_expr()
            self.expect_op(")")
            then = self.parse_block()
            orelse = None
            if self.tok.is_kw("else"):
                self.advance()
                orelse = self.parse_block()
            return If(cond, then, orelse, nid=self.ids())
        if tok.is_kw("while"):
            self.advance()
            self.expect_op("(")
            cond = self.parse_expr()
            self.expect_op(")")
            return While(cond, self.parse_block(), nid=self.ids())
        if tok.is_kw("for"):
            return self.parse_for()
        if tok.is_kw("return"):
            self.advance()
            value = None
            if not self.tok.is_op(";"):
                value = self.parse_expr()
            self.expect_op(";")
            return Return(value, nid=self.ids())
        if tok.is_kw("throw"):
            self.advance()
            name = self.expect_ident()
            self.expect_op(";")
            return Throw(name, nid=self.ids())
        if tok.is_kw("break"):
            self.advance()
            self.expect_op(";")
            return Break(nid=self.ids())
        if tok.is_kw("try"):
            self.advance()
            body = self.parse_block()
            self.expect_kw("catch")
            self.expect_op("(")
            exc = self.expect_ident()
            self.expect_op(")")
            handler = self.parse_block()
            return TryCatch(body, exc, handler, nid=self.ids())

        stmt = self.parse_simple()
        self.expect_op(";")
        return stmt

    def parse_simple(self) -> Stmt:
        """
        Declaration, assignment or expression statement without its ';'
        """
        if self.starts_decl():
            t = self.parse_type()
            name = self.expect_ident()
            self.expect_op("=")
            return VarDecl(t, name, self.parse_expr(), nid=self.ids())

        expr = self.parse_expr()
        if self.tok.is_op("="):
            if not isinstance(expr, (Var, FieldAccess, ArrayAccess)):
                raise self.error("invalid assignment target")
            self.advance()
            return Assign(expr, self.parse_expr(), nid=self.ids())
        return ExprStmt(expr, nid=self.ids())

    def parse_for(self) -> Stmt:
        """
        for (init cond; update) body  ==>  { init while (cond) { body update } }
        """
        self.expect_kw("for")
        self.expect_op("(")
        init = self.parse_simple()
        self.expect_op(";")
        cond = self.parse_expr()
        self.expect_op(";")
        update = self.parse_simple()
        self.expect_op(")")
        body = self.parse_block()
        loop_body = Block(body.stmts + (update,), nid=self.ids())
        loop = While(cond, loop_body, nid=self.ids())
        return Block((init, loop), nid=self.ids())

    def parse_expr(self) -> Expr:
        return self.parse_binary(0)

    def parse_binary(self, level: int) -> Expr:
        if level == len(PRECEDENCE):
            return self.parse_unary()
        left = self.parse_binary(level + 1)
        ops = PRECEDENCE[level]
        while True:
            tok = self.tok
            if tok.kind == TokenKind.OP and tok.text in ops:
                self.advance()
                right = self.parse_binary(level + 1)
                left = Binary(tok.text, left, right, nid=self.ids())
            elif "<" in ops and tok.is_kw("instanceof"):
                self.advance()
                left = InstanceOf(left, self.expect_ident(), nid=self.ids())
            else:
                return left

    def starts_operand(self, tok: Token) -> bool:
        if tok.kind in (TokenKind.IDENT, TokenKind.INT):
            return True
        if tok.kind == TokenKind.KEYWORD:
            return tok.text in ("true", "false", "null", "new")
        return tok.is_op("(") or tok.is_op("!")

    def parse_unary(self) -> Expr:
        tok = self.tok
        if tok.is_op("!"):
            self.advance()
            return Unary("!", self.parse_unary(), nid=self.ids())
        if tok.is_op("-"):
            self.advance()
            if self.tok.kind == TokenKind.INT:
                value = wrap_int(-int(self.advance().text))
                return self.parse_postfix(IntLit(value, nid=self.ids()))
            return Unary("-", self.parse_unary(), nid=self.ids())
        if (tok.is_op("(")
                and self.peek().kind == TokenKind.IDENT
                and self.peek().text in self.class_names
                and self.peek(2).is_op(")")
                and self.starts_operand(self.peek(3))):
            self.advance()
            cls = self.advance().text
            self.advance()
            return Cast(cls, self.parse_unary(), nid=self.ids())
        return self.parse_postfix(self.parse_primary())

    def parse_postfix(self, expr: Expr) -> Expr:
        while True:
            if self.tok.is_op("."):
                self.advance()
                expr = FieldAccess(expr, self.expect_ident(), nid=self.ids())
            elif self.tok.is_op("["):
                self.advance()
                index = self.parse_expr()
                self.expect_op("]")
                expr = ArrayAccess(expr, index, nid=self.ids())
            else:
                return expr

    def parse_primary(self) -> Expr:
        tok = self.tok
        if tok.kind == TokenKind.INT:
            self.advance()
            return IntLit(wrap_int(int(tok.text)), nid=self.ids())
        if tok.is_kw("true") or tok.is_kw("false"):
            self.advance()
            return BoolLit(tok.text == "true", nid=self.ids())
        if tok.is_kw("null"):
            self.advance()
            return NullLit(nid=self.ids())
        if tok.is_kw("new"):
            return self.parse_new()
        if tok.kind == TokenKind.IDENT:
            name = self.advance().text
            if not self.tok.is_op("("):
                return Var(name, nid=self.ids())
            self.advance()
            args: list[Expr] = []
            if not self.tok.is_op(")"):
                while True:
                    args.append(self.parse_expr())
                    if not self.tok.is_op(","):
                        break
                    self.advance()
            self.expect_op(")")
            return Call(name, tuple(args), nid=self.ids())
        if tok.is_op("("):
            self.advance()
            expr = self.parse_expr()
            self.expect_op(")")
            return expr
        raise self.error(f"unexpected {tok.text or 'end of input'!r}",
                         expected="expression")

    def parse_new(self) -> Expr:
        self.expect_kw("new")
        if (self.tok.kind == TokenKind.IDENT and self.peek().is_op("(")):
            cls = self.advance().text
            self.advance()
            self.expect_op(")")
            return NewObject(cls, nid=self.ids())
        elem = self.parse_type()
        self.expect_op("[")
        length = self.parse_expr()
        self.expect_op("]")
        return NewArray(elem, length, nid=self.ids())


def parse_program(text: str,
                  node_ids: Optional[Sequence[NodeId]] = None) -> Program:
    """
    Parse and resolve a MiniLang compilation unit
    :param text      Source text
    :param node_ids  Optional node id side map (canonical pre-order ids,
                     as emitted by the pretty-printer) to re-attach
    :return          Resolved program
    """
    classes, methods = Parser(text).parse_unit()
    if node_ids is not None:
        methods = reassign_ids(methods, node_ids)
    program = resolve(classes, methods)
    logger.debug(f"Parsed {len(classes)} classes, {len(methods)} methods")
    return program
