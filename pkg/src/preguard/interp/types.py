from __future__ import annotations

from dataclasses import dataclass
from enum import Enum
from typing import Annotated
from typing import Any
from typing import Optional

from preguard.errors import PreguardError
from preguard.lang.types import NodeId, SourceLoc

DEFAULT_BUDGET = 1_000_000
HEAP_LIMIT = 100_000
MAX_CALL_DEPTH = 64

CATCH_ALL = "Exception"


class ShapeError(PreguardError):
    """
    Environment does not fit the method signature.
    A contract violation of the caller, never a MiniLang crash.
    """


class CrashKind(Enum):
    """
    The six crash categories a guard can be derived for
    """
    NULL_DEREF = "NullDeref"
    INDEX_OUT_OF_BOUNDS = "IndexOutOfBounds"
    NEGATIVE_ARRAY_SIZE = "NegativeArraySize"
    DIV_BY_ZERO = "DivByZero"
    BAD_CAST = "BadCast"
    USER_THROWN = "UserThrown"

    @property
    def exception_name(self) -> str:
        """
        Canonical exception identifier of a built-in kind
        """
        return BUILTIN_EXCEPTIONS[self]


BUILTIN_EXCEPTIONS: dict[CrashKind, str] = {
    CrashKind.NULL_DEREF: "NullPointerException",
    CrashKind.INDEX_OUT_OF_BOUNDS: "ArrayIndexOutOfBoundsException",
    CrashKind.NEGATIVE_ARRAY_SIZE: "NegativeArraySizeException",
    CrashKind.DIV_BY_ZERO: "ArithmeticException",
    CrashKind.BAD_CAST: "ClassCastException",
}


def catches(catch_name: str, exception_name: str) -> bool:
    """
    Whether `catch (catch_name)` handles exception_name
    """
    return catch_name == CATCH_ALL or catch_name == exception_name


@dataclass(frozen=True)
class ArrayValue:
    """
    An array in an input environment
    """
    elems: tuple[EnvValue, ...]


@dataclass(frozen=True)
class ObjectValue:
    """
    An object in an input environment, fields ordered by name.
    Fields missing here start at their default value.
    """
    cls: str
    fields: tuple[tuple[str, EnvValue], ...]


EnvValue = int | bool | None | ArrayValue | ObjectValue


@dataclass(frozen=True)
class Environment:
    """
    Argument values for one execution, in signature order.
    Immutable: every execution loads a private copy into its own heap.
    """
    args: tuple[EnvValue, ...]


@dataclass(frozen=True)
class ArrayRef:
    addr: int


@dataclass(frozen=True)
class ObjectRef:
    addr: int
    cls: str


Value = int | bool | None | ArrayRef | ObjectRef


@dataclass(frozen=True)
class Returned:
    value: Value

    def summary(self) -> str:
        return f"returned {render_value(self.value)}"


@dataclass(frozen=True)
class CrashReport:
    """
    First uncaught dynamic error of an execution, located in the
    frame of the method that was run
    """
    kind: CrashKind
    exception_name: str
    loc: Annotated[SourceLoc, "Statement in the entry method's frame; "
                              "the call statement when in_callee"]
    fault_node: Annotated[NodeId, "Faulting expression (or call) "
                                  "in the entry frame"]
    in_callee: bool
    callee_stack: Annotated[tuple[tuple[str, NodeId], ...],
                            "(method, statement) per callee frame, "
                            "outermost first"] = ()

    @property
    def key(self) -> tuple[str, NodeId, bool, str]:
        """
        Identity of a crash site for deduplication
        """
        return (self.kind.value, self.loc.node_id, self.in_callee,
                self.exception_name)

    def summary(self) -> str:
        where = " in callee" if self.in_callee else ""
        return (f"{self.kind.value}({self.exception_name}){where} "
                f"at line {self.loc.display_line}")

    def to_json(self) -> dict[str, Any]:
        return {
            "kind": self.kind.value,
            "node_id": self.loc.node_id,
            "display_line": self.loc.display_line,
            "in_callee": self.in_callee,
            "exception": self.exception_name,
        }


@dataclass(frozen=True)
class BudgetExceeded:
    reason: str

    def summary(self) -> str:
        return f"budget exceeded ({self.reason})"


Outcome = Returned | CrashReport | BudgetExceeded


class PreStatus(Enum):
    """
    Result categories of running a precondition
    """
    TRUE = "true"
    FALSE = "false"
    CRASHED = "crashed"
    BUDGET_EXCEEDED = "budget"


@dataclass(frozen=True)
class PreOutcome:
    status: PreStatus
    crash: Optional[CrashReport] = None

    @property
    def answer(self) -> Optional[bool]:
        """
        True/False for a legal answer, None otherwise
        """
        match self.status:
            case PreStatus.TRUE:
                return True
            case PreStatus.FALSE:
                return False
        return None

    def summary(self) -> str:
        if self.crash is not None:
            return f"crashed: {self.crash.summary()}"
        return self.status.value


def render_value(value: Value) -> str:
    match value:
        case None:
            return "null"
        case bool():
            return "true" if value else "false"
        case ArrayRef(addr=addr):
            return f"array@{addr}"
        case ObjectRef(addr=addr, cls=cls):
            return f"{cls}@{addr}"
    return str(value)
