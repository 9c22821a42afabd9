# exports
from .seed import make_seed, pre_name, with_method, write_seed
from .transforms import (
    booleanize, normalize_calls, normalize_loops, strip_throws, temp_names,
)
from .types import (
    Origin, OriginKind, PreconditionProgram, FROM_SOURCE, SEED_INSERTED,
    WRAP_INSERTED, guard_inserted,
)
