"""Unit tests for `preguard.seedgen`.
"""
import json
from pathlib import Path

import pytest
from pytest import raises

from preguard.evalkit import find_targets
from preguard.instrument import DEFAULT_MAX_ROUNDS
from preguard.interp import (
    BudgetExceeded, CrashKind, CrashReport, Interpreter, Returned,
)
from preguard.lang import (
    ResolveError, While, format_method, parse_program,
)
from preguard.lang.util import IdAllocator, walk
from preguard.seedgen import (
    FROM_SOURCE, SEED_INSERTED, OriginKind, booleanize, make_seed,
    normalize_calls, normalize_loops, pre_name, strip_throws, temp_names,
    write_seed,
)
from preguard.testgen import GenPolicy, generate_round


def _seed_text(source: str, target: str) -> str:
    seed = make_seed(parse_program(source), target)
    return format_method(seed.method)


def test_booleanize_keeps_returned_expression():
    assert _seed_text("int f(int x) { return x + 1; }", "f") == (
        "bool f_pre(int x) {\n"
        "    x + 1;\n"
        "    return true;\n"
        "}\n")


def test_booleanize_literals_and_void():
    assert _seed_text("int f(int x) { if (x > 0) { return 1; } return -1; }",
                      "f") == (
        "bool f_pre(int x) {\n"
        "    if (x > 0) { return true; }\n"
        "    return true;\n"
        "}\n")
    assert _seed_text("void g(int[] a) { a[0] = 1; }", "g") == (
        "bool g_pre(int[] a) {\n"
        "    a[0] = 1;\n"
        "    return true;\n"
        "}\n")


def test_strip_throws_sqrt():
    """an argument check becomes a false answer"""
    text = _seed_text("int Sqrt(int x) { if (x == 0) { throw Exception; } "
                      "return x; }", "Sqrt")
    assert "if (x == 0) { return false; }" in text
    assert "throw" not in text


def test_strip_throws_keeps_caught_throws():
    program = parse_program("""
int f(int x) {
    try { throw Oops; } catch (Oops) { x = 1; }
    try { throw Other; } catch (Exception) { x = 2; }
    try { throw Gone; } catch (Oops) { x = 3; }
    return x;
}
""")
    method = strip_throws(program.method("f"), IdAllocator(program.next_id))
    text = format_method(method)
    assert "throw Oops;" in text
    assert "throw Other;" in text
    assert "throw Gone;" not in text
    assert text.count("return false;") == 1


def test_always_throwing_method_seeds_to_false(load_corpus):
    seed = make_seed(load_corpus("checks"), "unsupported")
    assert [type(s).__name__ for s in seed.method.body.stmts] == ["Return"]
    assert format_method(seed.method).splitlines()[1].strip() \
        == "return false;"


def test_normalize_loops_moves_crashing_condition():
    assert _seed_text("int f(int[] a) { int i = 0; "
                      "while (i < a.length && a[i] > 0) { i = i + 1; } "
                      "return i; }", "f") == (
        "bool f_pre(int[] a) {\n"
        "    int i = 0;\n"
        "    while (true) {\n"
        "        bool __t1 = i < a.length && a[i] > 0;\n"
        "        if (!__t1) { break; }\n"
        "        i = i + 1;\n"
        "    }\n"
        "    i;\n"
        "    return true;\n"
        "}\n")


def test_normalize_loops_keeps_safe_conditions():
    program = parse_program("int f(int n) { int i = 0; while (i < n) "
                            "{ i = i + 1; } return i; }")
    method = program.method("f")
    assert normalize_loops(method, IdAllocator(program.next_id)) == method


def test_normalize_calls_nested():
    """an exception in Sqrt is localized to its own statement"""
    assert _seed_text("""
int Sqrt(int x) { if (x < 0) { throw Exception; } return x; }
int Round(int v) { return v; }
int f(int x) { return Round(Sqrt(x)); }
""", "f") == (
        "bool f_pre(int x) {\n"
        "    int __t1 = Sqrt(x);\n"
        "    Round(__t1);\n"
        "    return true;\n"
        "}\n")


def test_normalize_calls_keeps_evaluation_order():
    assert _seed_text("""
class A { int v; }
int g(int x) { return x; }
int f(A a, int x) { int y = a.v + g(x); return y; }
""", "f") == (
        "bool f_pre(A a, int x) {\n"
        "    int __t1 = a.v;\n"
        "    int __t2 = g(x);\n"
        "    int y = __t1 + __t2;\n"
        "    y;\n"
        "    return true;\n"
        "}\n")


def test_normalize_calls_short_circuit():
    assert _seed_text("""
bool p(int x) { return x > 1; }
int f(int x) { bool b = x > 0 && p(x); if (b) { return 1; } return 0; }
""", "f") == (
        "bool f_pre(int x) {\n"
        "    bool __t1 = x > 0;\n"
        "    if (__t1) {\n"
        "        __t1 = p(x);\n"
        "    }\n"
        "    bool b = __t1;\n"
        "    if (b) { return true; }\n"
        "    return true;\n"
        "}\n")


def test_normalize_calls_requires_loop_normalization():
    program = parse_program("""
bool p(int x) { return x > 1; }
int f(int x) { while (p(x)) { x = x - 1; } return x; }
""")
    method = program.method("f")
    with raises(ValueError):
        normalize_calls(method, program, IdAllocator(program.next_id))


def test_loop_with_call_in_condition():
    text = _seed_text("""
bool p(int x) { return x > 1; }
int f(int x) { while (p(x)) { x = x - 1; } return x; }
""", "f")
    assert "bool __t1 = p(x);" in text
    assert "while (true) {" in text


@pytest.mark.parametrize("stem, target", [
    ("divrem", "divideAndRemainder"),
    ("arrays", "countPositivePrefix"),
    ("sqrt", "sqrtRound"),
    ("helpers", "parseDigit"),
])
def test_normalization_is_idempotent(load_corpus, stem, target):
    seed = make_seed(load_corpus(stem), target)
    method = seed.method
    ids = IdAllocator(seed.program.next_id)
    assert normalize_loops(method, ids) == method
    assert normalize_calls(method, seed.program, ids) == method


def test_divrem_seed(divrem):
    seed = make_seed(divrem, "divideAndRemainder")
    assert seed.entry == "divideAndRemainder_pre"
    assert seed.source == "divideAndRemainder"
    assert format_method(seed.method) == (
        "bool divideAndRemainder_pre(BigIntegerLike val) {\n"
        "    if (val.m_sign == 0) { return false; }\n"
        "    int[] result = new int[2];\n"
        "    int sign = val.m_sign;\n"
        "    if (sign < 0) {\n"
        "        result[0] = -1;\n"
        "    } else {\n"
        "        result[0] = 1;\n"
        "    }\n"
        "    result[1] = sign * sign;\n"
        "    result;\n"
        "    return true;\n"
        "}\n")
    # the source method is left alone
    assert seed.program.method("divideAndRemainder") \
        == divrem.method("divideAndRemainder")


def test_seed_provenance(divrem):
    seed = make_seed(divrem, "divideAndRemainder")
    method = seed.method
    assert seed.provenance[method.nid] == SEED_INSERTED
    source_ids = {n.nid for n in walk(divrem.method("divideAndRemainder").body)}
    seed_ids = {n.nid for n in walk(method.body)}
    assert not source_ids & seed_ids
    check = method.body.stmts[0]
    assert seed.provenance[check.nid] == FROM_SOURCE
    assert seed.provenance[check.then.stmts[0].nid] == SEED_INSERTED
    assert seed.provenance[method.body.stmts[-1].nid].kind \
        is OriginKind.SEED_INSERTED


def test_write_seed(tmp_path, divrem):
    seed = make_seed(divrem, "divideAndRemainder")
    path = tmp_path / "divideAndRemainder.seed.mpl"
    sidecar = write_seed(seed, path)
    assert sidecar.name == "divideAndRemainder.seed.provenance.json"
    data = json.loads(sidecar.read_text())
    assert data["entry"] == "divideAndRemainder_pre"
    again = parse_program(path.read_text(), data["node_ids"])
    assert [n.nid for n in walk(again.method(seed.entry).body)] \
        == [n.nid for n in walk(seed.method.body)]
    assert data["provenance"][str(seed.method.nid)] == "seed"


def test_seed_unknown_target(divrem):
    with raises(ResolveError):
        make_seed(divrem, "nope")


def test_pre_name_is_unique():
    program = parse_program("int f() { return 0; } bool f_pre() "
                            "{ return true; }")
    assert pre_name(program, "f") == "f_pre2"
    assert make_seed(program, "f").entry == "f_pre2"


def test_temp_names_continue_numbering():
    program = parse_program("int f(int __t4) { int __t2 = 1; return __t2; }")
    names = temp_names(program.method("f"))
    assert next(names) == "__t5"
    assert next(names) == "__t6"


def test_booleanize_appends_final_answer():
    program = parse_program("void f(int x) { x = x + 1; }")
    method = booleanize(program.method("f"), IdAllocator(program.next_id))
    assert str(method.return_type) == "bool"
    assert format_method(method).splitlines()[-2].strip() == "return true;"


CORPUS = Path(__file__).resolve().parent.parent / "corpus"
_PATHS = sorted(CORPUS.glob("*.mpl"))
CORPUS_TARGETS = [(path.stem, method) for path, method in find_targets(
    _PATHS, {p: parse_program(p.read_text()) for p in _PATHS})]


@pytest.mark.parametrize("stem, target", CORPUS_TARGETS)
def test_seed_preserves_semantics(load_corpus, stem, target):
    """
    differential run: returns map to true, own-frame throws to false,
    every other crash to the same crash
    """
    program = load_corpus(stem)
    seed = make_seed(program, target)
    source_run = Interpreter(program)
    seed_run = Interpreter(seed.program)
    policy = GenPolicy(rng_seed=1234)
    compared = 0
    for round_index in range(DEFAULT_MAX_ROUNDS):
        if compared >= 1000:
            break
        for env in generate_round(program, target, policy, round_index):
            expected = source_run.run(target, env)
            actual = seed_run.run(seed.entry, env)
            if isinstance(expected, BudgetExceeded) \
                    or isinstance(actual, BudgetExceeded):
                continue
            compared += 1
            match expected:
                case Returned():
                    assert actual == Returned(True)
                case CrashReport(kind=CrashKind.USER_THROWN,
                                 in_callee=False):
                    assert actual == Returned(False)
                case CrashReport(kind=kind, in_callee=in_callee,
                                 exception_name=name):
                    assert isinstance(actual, CrashReport)
                    assert (actual.kind, actual.in_callee,
                            actual.exception_name) == (kind, in_callee, name)
    assert compared >= 1000


def test_seed_has_no_call_inside_expressions(load_corpus):
    seed = make_seed(load_corpus("sqrt"), "sqrtRound")
    for stmt in walk(seed.method.body):
        if isinstance(stmt, While):
            assert "Call" not in {type(n).__name__ for n in walk(stmt.cond)}
