"""Unit tests for `preguard.testgen`.
"""
import pytest
from pytest import raises

from preguard.interp import (
    ArrayValue, CrashKind, Environment, ObjectValue, PreOutcome, PreStatus,
)
from preguard.lang import parse_program
from preguard.seedgen import make_seed
from preguard.testgen import (
    GenPolicy, NotConverged, PolicyError, RegressionSuite, TestCase,
    generate_env, generate_round, read_suite, replay, round_rng, run_round,
    to_regression, unique_envs, write_suite,
)

SHAPES = """
class A { int v; A next; }
class B extends A { int w; }
bool f(int x, bool b, int[] a, A o) { return true; }
"""


def test_rounds_are_reproducible():
    program = parse_program(SHAPES)
    policy = GenPolicy(rng_seed=7, envs_per_round=50)
    first = generate_round(program, "f", policy, 0)
    assert first == generate_round(program, "f", policy, 0)
    assert first != generate_round(program, "f", policy, 1)
    assert first != generate_round(program, "f", GenPolicy(rng_seed=8,
                                                           envs_per_round=50), 0)


def test_generated_values_fit_signature():
    program = parse_program(SHAPES)
    policy = GenPolicy(envs_per_round=300)
    envs = generate_round(program, "f", policy, 0)
    assert len(envs) == 300
    classes = set()
    for env in envs:
        x, b, a, o = env.args
        assert isinstance(x, int) and not isinstance(x, bool)
        assert isinstance(b, bool)
        assert a is None or (isinstance(a, ArrayValue) and len(a.elems) <= 4)
        if o is not None:
            assert isinstance(o, ObjectValue)
            names = [name for name, _ in o.fields]
            assert names == sorted(names)
            classes.add(o.cls)
    assert classes == {"A", "B"}
    assert any(env.args[2] is None for env in envs)
    assert any(env.args[0] in (-1, 0, 1) for env in envs)


def _depth(value) -> int:
    if isinstance(value, ObjectValue):
        return 1 + max((_depth(v) for _, v in value.fields), default=0)
    if isinstance(value, ArrayValue):
        return 1 + max((_depth(v) for v in value.elems), default=0)
    return 0


def test_generate_env_bounds_object_depth():
    program = parse_program(SHAPES)
    sig = program.method("f").param_types
    policy = GenPolicy(null_prob=0.0, object_depth_max=2)
    rng = round_rng(policy, 0)
    for _ in range(50):
        env = generate_env(program, sig, policy, rng)
        assert len(env.args) == 4
        assert 1 <= _depth(env.args[3]) <= 3
    assert generate_env(program, sig, policy, round_rng(policy, 0)) \
        == generate_env(program, sig, policy, round_rng(policy, 0))


def test_null_probability_extremes():
    program = parse_program(SHAPES)
    never = generate_round(program, "f", GenPolicy(null_prob=0.0), 0)
    assert all(env.args[2] is not None and env.args[3] is not None
               for env in never)
    always = generate_round(program, "f", GenPolicy(null_prob=1.0), 0)
    assert all(env.args[2] is None and env.args[3] is None for env in always)


@pytest.mark.parametrize("kwargs", [
    {"null_prob": 1.5},
    {"pool_prob": -0.1},
    {"int_pool": ()},
    {"array_len_range": (3, 1)},
    {"array_len_range": (-1, 2)},
    {"envs_per_round": -1},
])
def test_policy_validation(kwargs):
    with raises(PolicyError):
        GenPolicy(**kwargs)


def test_divrem_seed_round_zero_finds_null(divrem):
    """the default policy hits a null receiver in the first round"""
    seed = make_seed(divrem, "divideAndRemainder")
    cases = run_round(seed.program, seed.entry, GenPolicy(), 0)
    assert len(cases) == 200
    kinds = {c.observed.crash.kind for c in cases if c.observed.crash}
    assert CrashKind.NULL_DEREF in kinds
    assert all(c.round_index == 0 for c in cases)


def test_unique_envs_keeps_first_seen_order():
    a, b = Environment((1,)), Environment((2,))
    cases = [TestCase(a, PreOutcome(PreStatus.TRUE)), b, a]
    assert unique_envs(cases) == [a, b]


CONVERGED = """
bool p(int x) { if (x == 0) { return false; } return true; }
bool crashy(int x) { return 10 / x > 0; }
bool spin(int x) { while (x > 0) { x = x + 1; } return true; }
"""


def test_to_regression_labels_answers():
    program = parse_program(CONVERGED)
    envs = [Environment((0,)), Environment((3,)), Environment((0,))]
    suite = to_regression(envs, program, "p")
    assert suite.cases == ((Environment((0,)), False),
                           (Environment((3,)), True))
    assert replay(suite, program, "p") == []


def test_to_regression_refuses_crashes():
    program = parse_program(CONVERGED)
    with raises(NotConverged):
        to_regression([Environment((0,))], program, "crashy")


def test_to_regression_drops_budget_blowouts():
    program = parse_program(CONVERGED)
    suite = to_regression([Environment((1,)), Environment((-1,))], program,
                          "spin", budget=500)
    assert suite.cases == ((Environment((-1,)), True),)
    assert suite.dropped == 1


def test_replay_reports_mismatches():
    program = parse_program(CONVERGED)
    suite = RegressionSuite(((Environment((0,)), True),
                             (Environment((5,)), True)))
    assert replay(suite, program, "p") == [0]


def test_suite_file(tmp_path):
    suite = RegressionSuite((
        (Environment((None, ArrayValue((1, 2)))), True),
        (Environment((ObjectValue("A", (("next", None), ("v", 3))), None)),
         False),
    ))
    path = tmp_path / "f.suite.jsonl"
    write_suite(suite, path)
    assert len(path.read_text().splitlines()) == 2
    assert read_suite(path) == suite
