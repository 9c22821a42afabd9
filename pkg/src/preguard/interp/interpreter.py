import logging

from dataclasses import dataclass, field
from typing import Annotated
from typing import Optional

from preguard.lang.parser import wrap_int
from preguard.lang.types import (
    ArrayAccess, ArrayType, Assign, Binary, Block, BoolLit, Break, Call, Cast,
    ClassType, Expr, ExprStmt, FieldAccess, If, InstanceOf, IntLit, MethodDef,
    NewArray, NewObject, NodeId, NullLit, Program, Return, SourceLoc, Stmt,
    Throw, TryCatch, Type, Unary, Var, VarDecl, While, BOOL, INT,
)

from .types import (
    ArrayRef, ArrayValue, BudgetExceeded, CrashKind, CrashReport, EnvValue,
    Environment, ObjectRef, ObjectValue, Outcome, PreOutcome, PreStatus,
    Returned, ShapeError, Value, catches,
    DEFAULT_BUDGET, HEAP_LIMIT, MAX_CALL_DEPTH,
)

logger = logging.getLogger(__name__)


class _Fault(Exception):
    """
    A MiniLang exception in flight
    """

    def __init__(self, kind: CrashKind, name: str, node: NodeId,
                 stack: tuple[tuple[str, NodeId, NodeId], ...]) -> None:
        super().__init__(name)
        self.kind = kind
        self.name = name
        self.node = node
        self.stack = stack


class _Return(Exception):
    def __init__(self, value: Value) -> None:
        super().__init__()
        self.value = value


class _Break(Exception):
    pass


class _OutOfBudget(Exception):
    def __init__(self, reason: str) -> None:
        super().__init__(reason)
        self.reason = reason


@dataclass
class _Frame:
    method: str
    locals: dict[str, Value]
    stmt: Annotated[NodeId, "Statement currently executing"] = 0
    call: Annotated[NodeId, "Call expression currently executing"] = 0


@dataclass
class _HeapObject:
    cls: str
    fields: dict[str, Value]


@dataclass
class _HeapArray:
    values: list[Value] = field(default_factory=list)


def _default(t: Type) -> Value:
    if t == INT:
        return 0
    if t == BOOL:
        return False
    return None


def _divide(a: int, b: int) -> int:
    # truncating division
    q = abs(a) // abs(b)
    if (a < 0) != (b < 0):
        q = -q
    return q


class Interpreter:
    """
    Deterministic tree-walking evaluator for one program.
    Every `run` starts from an empty heap.
    """

    program: Annotated[Program, "Program being executed"]
    budget: Annotated[int, "Maximum number of interpreter steps"]
    heap_limit: Annotated[int, "Maximum number of heap cells"]
    max_depth: Annotated[int, "Maximum call depth"]
    trace: Annotated[Optional[list[tuple[str, NodeId]]],
                     "If set, (method, node id) of every completed "
                     "expression and of the faulting node"]

    def __init__(self, program: Program, budget: int = DEFAULT_BUDGET,
                 heap_limit: int = HEAP_LIMIT,
                 max_depth: int = MAX_CALL_DEPTH,
                 trace: bool = False) -> None:
        """
        Constructor
        :param program     Resolved program
        :param budget      Step budget per run
        :param heap_limit  Heap cell limit per run
        :param max_depth   Call depth limit per run
        :param trace       Record an evaluation trace
        """
        self.program = program
        self.budget = budget
        self.heap_limit = heap_limit
        self.max_depth = max_depth
        self.trace = [] if trace else None
        self._reset()

    def _reset(self) -> None:
        self.steps = 0
        self.cells = 0
        self.heap: list[_HeapObject | _HeapArray] = []
        self.frames: list[_Frame] = []

    def run(self, method_name: str, env: Environment) -> Outcome:
        """
        Execute a method on an environment
        :param method_name  Entry method
        :param env          Argument values
        :return             Returned, CrashReport or BudgetExceeded
        """
        if not self.program.has_method(method_name):
            raise ShapeError(f"unknown method {method_name}")
        method = self.program.method(method_name)
        if len(env.args) != len(method.params):
            raise ShapeError(f"{method_name} takes {len(method.params)} "
                             f"arguments, environment has {len(env.args)}")

        self._reset()
        if self.trace is not None:
            self.trace.clear()

        try:
            args = [self._load(value, t)
                    for value, (_, t) in zip(env.args, method.params)]
            value = self._call(method, args)
        except _Fault as fault:
            return self._report(fault)
        except _OutOfBudget as exc:
            return BudgetExceeded(exc.reason)
        except RecursionError:
            return BudgetExceeded("host recursion limit")
        return Returned(value)

    def _report(self, fault: _Fault) -> CrashReport:
        entry_method, entry_stmt, entry_call = fault.stack[0]
        in_callee = len(fault.stack) > 1
        return CrashReport(
            kind=fault.kind,
            exception_name=fault.name,
            loc=SourceLoc(entry_stmt, self.program.display_line(entry_stmt)),
            fault_node=entry_call if in_callee else fault.node,
            in_callee=in_callee,
            callee_stack=tuple((m, s) for m, s, _ in fault.stack[1:]),
        )

    def _alloc(self, obj: _HeapObject | _HeapArray, cells: int) -> int:
        self.cells += cells
        if self.cells > self.heap_limit:
            raise _OutOfBudget("heap")
        self.heap.append(obj)
        return len(self.heap) - 1

    def _new_object(self, cls: str) -> ObjectRef:
        info = self.program.class_table[cls]
        fields = {name: _default(t) for name, t in info.fields}
        return ObjectRef(self._alloc(_HeapObject(cls, fields), 1 + len(fields)),
                         cls)

    def _load(self, value: EnvValue, t: Type) -> Value:
        """
        Copy an environment value into the heap, checking its shape
        """
        if t == BOOL:
            if not isinstance(value, bool):
                raise ShapeError(f"expected bool, got {value!r}")
            return value
        if t == INT:
            if isinstance(value, bool) or not isinstance(value, int):
                raise ShapeError(f"expected int, got {value!r}")
            return wrap_int(value)
        if value is None:
            return None
        match t:
            case ArrayType(elem=elem):
                if not isinstance(value, ArrayValue):
                    raise ShapeError(f"expected {t}, got {value!r}")
                values = [self._load(v, elem) for v in value.elems]
                return ArrayRef(self._alloc(_HeapArray(values),
                                            1 + len(values)))
            case ClassType(name=name):
                if not isinstance(value, ObjectValue):
                    raise ShapeError(f"expected {t}, got {value!r}")
                if value.cls not in self.program.class_table \
                        or not self.program.is_subclass(value.cls, name):
                    raise ShapeError(f"{value.cls} is not a {name}")
                ref = self._new_object(value.cls)
                info = self.program.class_table[value.cls]
                obj = self.heap[ref.addr]
                assert isinstance(obj, _HeapObject)
                for field_name, field_value in value.fields:
                    if (ft := info.field_type(field_name)) is None:
                        raise ShapeError(f"{value.cls} has no field "
                                         f"{field_name}")
                    obj.fields[field_name] = self._load(field_value, ft)
                return ref
        raise ShapeError(f"cannot load {value!r} as {t}")

    def _tick(self) -> None:
        self.steps += 1
        if self.steps > self.budget:
            raise _OutOfBudget("steps")

    def _fault(self, kind: CrashKind, node: NodeId,
               name: Optional[str] = None) -> _Fault:
        if self.trace is not None:
            self.trace.append((self.frames[-1].method, node))
        stack = tuple((f.method, f.stmt, f.call) for f in self.frames)
        return _Fault(kind, name or kind.exception_name, node, stack)

    def _call(self, method: MethodDef, args: list[Value]) -> Value:
        if len(self.frames) >= self.max_depth:
            raise _OutOfBudget("call depth")
        frame = _Frame(method.name,
                       {name: arg for (name, _), arg in zip(method.params,
                                                             args)})
        self.frames.append(frame)
        try:
            self._block(method.body)
        except _Return as ret:
            return ret.value
        finally:
            self.frames.pop()
        return None

    def _block(self, block: Block) -> None:
        for stmt in block.stmts:
            self._exec(stmt)

    def _exec(self, stmt: Stmt) -> None:
        self._tick()
        frame = self.frames[-1]
        if not isinstance(stmt, Block):
            frame.stmt = stmt.nid

        match stmt:
            case Block():
                self._block(stmt)
            case VarDecl(name=name, init=init):
                frame.locals[name] = self._eval(init)
            case Assign(target=target, value=value):
                self._assign(target, value)
            case If(cond=cond, then=then, orelse=orelse):
                if self._eval(cond):
                    self._block(then)
                elif orelse is not None:
                    self._block(orelse)
            case While(cond=cond, body=body):
                while True:
                    frame.stmt = stmt.nid
                    if not self._eval(cond):
                        break
                    try:
                        self._block(body)
                    except _Break:
                        break
            case Return(value=value):
                raise _Return(None if value is None else self._eval(value))
            case Throw(name=name):
                raise self._fault(CrashKind.USER_THROWN, stmt.nid, name)
            case TryCatch(body=body, exc=exc, handler=handler):
                depth = len(self.frames)
                try:
                    self._block(body)
                except _Fault as fault:
                    if not catches(exc, fault.name):
                        raise
                    # frames above ours were popped while unwinding
                    del self.frames[depth:]
                    self._block(handler)
            case ExprStmt(expr=expr):
                self._eval(expr)
            case Break():
                raise _Break()

    def _assign(self, target: Expr, value: Expr) -> None:
        frame = self.frames[-1]
        match target:
            case Var(name=name):
                frame.locals[name] = self._eval(value)
            case FieldAccess(obj=obj_expr, name=name):
                obj = self._eval(obj_expr)
                new = self._eval(value)
                if obj is None:
                    raise self._fault(CrashKind.NULL_DEREF, target.nid)
                heap_obj = self.heap[obj.addr]  # type: ignore[union-attr]
                assert isinstance(heap_obj, _HeapObject)
                heap_obj.fields[name] = new
                self._record(target)
            case ArrayAccess(array=array_expr, index=index_expr):
                arr = self._eval(array_expr)
                idx = self._eval(index_expr)
                new = self._eval(value)
                values = self._array(arr, target.nid)
                if not 0 <= idx < len(values):  # type: ignore[operator]
                    raise self._fault(CrashKind.INDEX_OUT_OF_BOUNDS,
                                      target.nid)
                values[idx] = new  # type: ignore[index]
                self._record(target)

    def _array(self, ref: Value, nid: NodeId) -> list[Value]:
        if ref is None:
            raise self._fault(CrashKind.NULL_DEREF, nid)
        heap_arr = self.heap[ref.addr]  # type: ignore[union-attr]
        assert isinstance(heap_arr, _HeapArray)
        return heap_arr.values

    def _record(self, expr: Expr) -> None:
        if self.trace is not None:
            self.trace.append((self.frames[-1].method, expr.nid))

    def _eval(self, expr: Expr) -> Value:
        self._tick()
        value = self._eval_inner(expr)
        if self.trace is not None:
            self.trace.append((self.frames[-1].method, expr.nid))
        return value

    def _eval_inner(self, expr: Expr) -> Value:
        match expr:
            case IntLit(value=value):
                return value
            case BoolLit(value=value):
                return value
            case NullLit():
                return None
            case Var(name=name):
                return self.frames[-1].locals[name]
            case Unary(op="!", operand=operand):
                return not self._eval(operand)
            case Unary(operand=operand):
                return wrap_int(-self._eval(operand))  # type: ignore[operator]
            case Binary(op="&&", left=left, right=right):
                return bool(self._eval(left)) and bool(self._eval(right))
            case Binary(op="||", left=left, right=right):
                return bool(self._eval(left)) or bool(self._eval(right))
            case Binary(op=op, left=left, right=right):
                return self._binary(expr, op, self._eval(left),
                                    self._eval(right))
            case FieldAccess(obj=obj_expr, name=name):
                obj = self._eval(obj_expr)
                if obj is None:
                    raise self._fault(CrashKind.NULL_DEREF, expr.nid)
                if isinstance(obj, ArrayRef):
                    return len(self._array(obj, expr.nid))
                heap_obj = self.heap[obj.addr]  # type: ignore[union-attr]
                assert isinstance(heap_obj, _HeapObject)
                return heap_obj.fields[name]
            case ArrayAccess(array=array_expr, index=index_expr):
                arr = self._eval(array_expr)
                idx = self._eval(index_expr)
                values = self._array(arr, expr.nid)
                if not 0 <= idx < len(values):  # type: ignore[operator]
                    raise self._fault(CrashKind.INDEX_OUT_OF_BOUNDS, expr.nid)
                return values[idx]  # type: ignore[index]
            case NewObject(cls=cls):
                return self._new_object(cls)
            case NewArray(elem=elem, length=length_expr):
                n = self._eval(length_expr)
                if n < 0:  # type: ignore[operator]
                    raise self._fault(CrashKind.NEGATIVE_ARRAY_SIZE, expr.nid)
                if n > self.heap_limit:  # type: ignore[operator]
                    raise _OutOfBudget("heap")
                values = [_default(elem)] * n  # type: ignore[operator]
                return ArrayRef(self._alloc(_HeapArray(values), 1 + len(values)))
            case Cast(cls=cls, expr=inner):
                value = self._eval(inner)
                if value is None:
                    return None
                assert isinstance(value, ObjectRef)
                if not self.program.is_subclass(value.cls, cls):
                    raise self._fault(CrashKind.BAD_CAST, expr.nid)
                return value
            case InstanceOf(expr=inner, cls=cls):
                value = self._eval(inner)
                if value is None:
                    return False
                assert isinstance(value, ObjectRef)
                return self.program.is_subclass(value.cls, cls)
            case Call(name=name, args=arg_exprs):
                args = [self._eval(a) for a in arg_exprs]
                self.frames[-1].call = expr.nid
                return self._call(self.program.method(name), args)
        raise TypeError(f"cannot evaluate {expr!r}")

    def _binary(self, expr: Binary, op: str, a: Value, b: Value) -> Value:
        match op:
            case "==":
                return a == b
            case "!=":
                return a != b
        assert isinstance(a, int) and isinstance(b, int)
        match op:
            case "+":
                return wrap_int(a + b)
            case "-":
                return wrap_int(a - b)
            case "*":
                return wrap_int(a * b)
            case "/" | "%":
                if b == 0:
                    raise self._fault(CrashKind.DIV_BY_ZERO, expr.nid)
                q = _divide(a, b)
                return wrap_int(q if op == "/" else a - b * q)
            case "<":
                return a < b
            case "<=":
                return a <= b
            case ">":
                return a > b
            case ">=":
                return a >= b
        raise TypeError(f"unknown operator {op}")


def eval_method(program: Program, method: str, env: Environment,
                budget: int = DEFAULT_BUDGET) -> Outcome:
    """
    Run a method on an environment
    :param program  Resolved program
    :param method   Entry method name
    :param env      Argument values (never mutated)
    :param budget   Step budget
    """
    return Interpreter(program, budget).run(method, env)


def to_pre_outcome(outcome: Outcome) -> PreOutcome:
    """
    Map the outcome of a boolean method onto precondition answers
    """
    match outcome:
        case Returned(value=True):
            return PreOutcome(PreStatus.TRUE)
        case Returned(value=False):
            return PreOutcome(PreStatus.FALSE)
        case CrashReport():
            return PreOutcome(PreStatus.CRASHED, outcome)
        case BudgetExceeded():
            return PreOutcome(PreStatus.BUDGET_EXCEEDED)
    raise ShapeError(f"precondition returned a non-bool: {outcome!r}")


def eval_precondition(program: Program, pre_method: str, env: Environment,
                      budget: int = DEFAULT_BUDGET) -> PreOutcome:
    """
    Run a boolean-returning precondition on an environment.
    A crash is surfaced as CRASHED, never as an answer.
    """
    if program.method(pre_method).return_type != BOOL:
        raise ShapeError(f"{pre_method} does not return bool")
    return to_pre_outcome(eval_method(program, pre_method, env, budget))
