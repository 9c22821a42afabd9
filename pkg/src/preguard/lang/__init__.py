# exports
from .parser import parse_program
from .printer import Printed, format_expr, format_method, pretty_print
from .resolver import resolve
from .types import (
    ArrayAccess, ArrayType, Assign, Binary, Block, BoolLit, Break, Call, Cast,
    ClassDecl, ClassInfo, ClassType, Expr, ExprStmt, FieldAccess, If,
    InstanceOf, IntLit, MethodDef, NewArray, NewObject, Node, NodeId, NullLit,
    ParseError, PrimType, Program, ResolveError, Return, SourceLoc, Stmt,
    Throw, TryCatch, Type, Unary, Var, VarDecl, While, BOOL, INT, NULL, VOID,
)
from .util import ast_node_count, evaluated_exprs
