# exports
from .reducer import (
    Reducer, ddmin, is_removable, is_valid, reduce, statement_ids,
)
from .types import ReductionConstraint, ReductionReport
