# exports
from .generator import generate_env, generate_round, round_rng, run_round
from .suite import read_suite, replay, to_regression, unique_envs, write_suite
from .types import (
    GenPolicy, NotConverged, PolicyError, RegressionSuite, TestCase,
    DEFAULT_INT_POOL,
)
