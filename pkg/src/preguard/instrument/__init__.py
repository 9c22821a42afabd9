# exports
from .checks import (
    crash_site, guard_condition, guard_statements, guarded_operand,
    insert_checks,
)
from .driver import infer
from .types import (
    AlreadyGuarded, Check, InferenceResult, NoMatchingExpression, NonProgress,
    DEFAULT_MAX_ROUNDS,
)
