# exports
from .dataset import (
    DatasetRecord, emit_dataset, find_targets, tally, SUMMARY_NAME,
)
from .domain import (
    domain_size, domain_values, enumerate_envs, load_domain, parse_domain,
    sidecar_path, spec_size,
)
from .metrics import (
    collect_metrics, cyclomatic, explicit_guards, purity, triviality,
)
from .oracle import judge
from .types import (
    ArrayDomain, BoolDomain, DatasetFailure, DatasetStats, DomainError,
    DomainSpec, DomainTooLarge, IntDomain, MetricsRecord, ObjectDomain,
    Triviality, Verdict, DEFAULT_CAP,
)
