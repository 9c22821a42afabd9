# exports
from .interpreter import (
    Interpreter, eval_method, eval_precondition, to_pre_outcome,
)
from .serialize import env_from_json, env_to_json
from .types import (
    ArrayValue, BudgetExceeded, CrashKind, CrashReport, Environment,
    ObjectValue, Outcome, PreOutcome, PreStatus, Returned, ShapeError,
    BUILTIN_EXCEPTIONS, CATCH_ALL, DEFAULT_BUDGET, catches,
)
