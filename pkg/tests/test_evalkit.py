"""Unit tests for `preguard.evalkit`.
"""
import json

import pytest
from pytest import raises

from preguard.evalkit import (
    DatasetFailure, DatasetRecord, DomainError, DomainTooLarge, Triviality,
    collect_metrics, cyclomatic, emit_dataset, enumerate_envs,
    explicit_guards, find_targets, judge, load_domain, parse_domain, purity,
    sidecar_path, spec_size, triviality, SUMMARY_NAME,
)
from preguard.instrument import infer
from preguard.interp import ArrayValue, Environment, ObjectValue
from preguard.lang import parse_program

DIVREM_PRE = """
bool divideAndRemainder_pre(BigIntegerLike val) {{
    {body}
}}
"""


def _divrem_domain(corpus_dir, program):
    path = sidecar_path(corpus_dir / "divrem.mpl", "divideAndRemainder")
    return load_domain(path, program, program.method("divideAndRemainder"))


def _divrem_pre(corpus_dir, body):
    text = (corpus_dir / "divrem.mpl").read_text()
    return parse_program(text + DIVREM_PRE.format(body=body))


def test_divrem_domain(corpus_dir, divrem):
    spec = _divrem_domain(corpus_dir, divrem)
    assert spec_size(spec) == 7
    envs = enumerate_envs(spec)
    assert len(envs) == 7
    assert len(set(envs)) == 7
    assert envs[0] == Environment((None,))
    signs = sorted(dict(e.args[0].fields)["m_sign"] for e in envs[1:])
    assert signs == [-1, -1, 0, 0, 1, 1]


def test_array_and_range_domains(load_corpus, corpus_dir):
    program = load_corpus("arrays")
    path = sidecar_path(corpus_dir / "arrays.mpl", "getAt")
    spec = load_domain(path, program, program.method("getAt"))
    # null plus 1 + 2 + 4 + 8 arrays, seven indices
    assert spec_size(spec) == 16 * 7
    envs = enumerate_envs(spec)
    assert envs == enumerate_envs(spec)
    assert Environment((ArrayValue((1, 0)), -2)) in envs


def test_domain_cap():
    program = parse_program("int f(int a, int b) { return a + b; }")
    data = {"cap": 10, "params": {"a": {"range": [0, 3]},
                                  "b": {"range": [0, 3]}}}
    spec = parse_domain(program, program.method("f"), data)
    with raises(DomainTooLarge):
        enumerate_envs(spec)


def test_bool_parameters_default_to_both_values():
    program = parse_program("int f(bool b, int x) { return x; }")
    spec = parse_domain(program, program.method("f"),
                        {"params": {"x": {"ints": [1, 2]}}})
    envs = enumerate_envs(spec)
    assert envs == [Environment((False, 1)), Environment((False, 2)),
                    Environment((True, 1)), Environment((True, 2))]


OBJECTS = """
class A { int v; A next; }
class B extends A { int w; }
class Z { }
int f(A a, int x) { return x; }
"""


@pytest.mark.parametrize("params, message", [
    ({"a": {"null": True}}, "no domain for x"),
    ({"x": {"ints": [0]}, "y": {"ints": [0]}}, "unknown parameters"),
    ({"x": {"range": [3, 1]}, "a": {}}, "empty range"),
    ({"x": {}, "a": {}}, "needs 'ints' or 'range'"),
    ({"x": {"ints": [0]}, "a": {"class": "Z"}}, "Z is not a A"),
    ({"x": {"ints": [0]}, "a": {"fields": {"u": {"ints": [1]}}}},
     "has no field u"),
])
def test_domain_errors(params, message):
    program = parse_program(OBJECTS)
    with raises(DomainError, match=message):
        parse_domain(program, program.method("f"), {"params": params})


def test_object_domain_with_subclasses():
    program = parse_program(OBJECTS)
    data = {"params": {
        "x": {"ints": [0]},
        "a": {"null": True, "classes": {"A": {}, "B": {"w": {"ints": [1, 2]}}}},
    }}
    envs = enumerate_envs(parse_domain(program, program.method("f"), data))
    assert [e.args[0] for e in envs] == [
        None, ObjectValue("A", ()), ObjectValue("B", (("w", 1),)),
        ObjectValue("B", (("w", 2),))]


def test_malformed_sidecar(tmp_path, divrem):
    path = tmp_path / "divideAndRemainder.domain.json"
    path.write_text("{not json")
    with raises(DomainError):
        load_domain(path, divrem, divrem.method("divideAndRemainder"))


def test_judge_trivial_precondition_is_unsafe(corpus_dir, divrem):
    envs = enumerate_envs(_divrem_domain(corpus_dir, divrem))
    pre_program = _divrem_pre(corpus_dir, "return true;")
    verdict = judge(divrem, "divideAndRemainder", pre_program,
                    "divideAndRemainder_pre", envs)
    assert not verdict.safe
    assert verdict.maximal
    assert Environment((None,)) in verdict.unsafe_witnesses
    # null plus the two zero signs
    assert len(verdict.unsafe_witnesses) == 3
    assert verdict.checked == 7
    assert not verdict.correct


def test_judge_rejecting_everything_is_not_maximal(corpus_dir, divrem):
    envs = enumerate_envs(_divrem_domain(corpus_dir, divrem))
    verdict = judge(divrem, "divideAndRemainder",
                    _divrem_pre(corpus_dir, "return false;"),
                    "divideAndRemainder_pre", envs)
    assert verdict.safe
    assert len(verdict.nonmaximal_witnesses) == 4


def test_judge_crashing_precondition(corpus_dir, divrem):
    envs = enumerate_envs(_divrem_domain(corpus_dir, divrem))
    verdict = judge(divrem, "divideAndRemainder",
                    _divrem_pre(corpus_dir, "return val.m_sign != 0;"),
                    "divideAndRemainder_pre", envs)
    assert verdict.pre_crashes == (Environment((None,)),)
    assert not verdict.correct
    data = verdict.to_json()
    assert data["pre_crashes"] == [[None]]
    assert data["correct"] is False


def test_inferred_divrem_precondition_is_correct(corpus_dir, divrem):
    result = infer(divrem, "divideAndRemainder")
    pre = result.precondition
    envs = enumerate_envs(_divrem_domain(corpus_dir, divrem))
    verdict = judge(divrem, "divideAndRemainder", pre.program, pre.entry, envs)
    assert verdict.correct
    assert verdict.checked == 7


def test_cyclomatic():
    program = parse_program("""
int f(int x, bool b) {
    if (x > 0 && b) { x = 1; }
    while (x < 10) { x = x + 1; }
    try { x = 1 / x; } catch (Exception) { return 0; }
    return x;
}
int g(int x) { return x; }
""")
    assert cyclomatic(program.method("f")) == 5
    assert cyclomatic(program.method("g")) == 1


def test_purity_follows_calls():
    program = parse_program("""
class A { int v; }
void set(A a) { a.v = 1; }
int local(int x) { int y = x; y = 2; return y; }
int viaCall(A a) { set(a); return 0; }
int clean(A a) { return local(a.v); }
""")
    assert purity(program, "local")
    assert purity(program, "clean")
    assert not purity(program, "set")
    assert not purity(program, "viaCall")


def test_triviality_and_explicit_guards(load_corpus):
    program = parse_program("""
bool t(int x) { return true; }
bool f(int x) { return false; }
bool n(int x) { if (x > 0) { return false; } return true; }
""")
    assert triviality(program.method("t")) is Triviality.TRIVIALLY_TRUE
    assert triviality(program.method("f")) is Triviality.ALWAYS_FALSE
    assert triviality(program.method("n")) is Triviality.NON_TRIVIAL
    checks = load_corpus("checks")
    assert explicit_guards(checks.method("clampPercent")) == 1
    assert explicit_guards(checks.method("maxOf")) == 0


def test_collect_metrics_divrem(divrem):
    metrics = collect_metrics(infer(divrem, "divideAndRemainder"))
    assert not metrics.pure_before
    assert metrics.pure_after
    assert metrics.triviality is Triviality.NON_TRIVIAL
    assert metrics.explicit_guards == 1
    assert metrics.checks_by_kind == {"NullDeref": 1}
    assert metrics.cc_after == 3
    assert metrics.cc_before > metrics.cc_after
    assert metrics.nodes_after < metrics.nodes_before
    assert metrics.iteration_checks == 0
    assert metrics.callee_checks == 0


def test_find_targets_needs_sidecar(corpus_dir):
    paths = sorted(corpus_dir.glob("*.mpl"))
    programs = {p: parse_program(p.read_text()) for p in paths}
    targets = find_targets(paths, programs)
    names = [name for _, name in targets]
    assert (corpus_dir / "divrem.mpl", "divideAndRemainder") in targets
    assert "Round" not in names
    assert "headValue" not in names
    assert len(names) == len(set(names))


def test_emit_dataset(tmp_path, corpus_dir, divrem):
    result = infer(divrem, "divideAndRemainder")
    pre = result.precondition
    envs = enumerate_envs(_divrem_domain(corpus_dir, divrem))
    verdict = judge(divrem, "divideAndRemainder", pre.program, pre.entry, envs)
    record = DatasetRecord("divideAndRemainder", divrem, result, verdict,
                           collect_metrics(result))
    path = tmp_path / "out" / "dataset.jsonl"
    failures = [DatasetFailure("broken.mpl", None, "expected class name"),
                DatasetFailure("divrem.mpl", "other", "no domain")]
    summary = emit_dataset([record], path, failures)
    assert summary.name == SUMMARY_NAME
    lines = path.read_text().splitlines()
    assert len(lines) == 1
    row = json.loads(lines[0])
    assert row["name"] == "divideAndRemainder"
    assert row["verdict"]["correct"] is True
    assert row["precondition"].startswith("bool divideAndRemainder_pre(")
    stats = json.loads(summary.read_text())
    assert stats["methods"] == 1
    assert stats["correct"] == 1
    assert stats["skipped"] == 2
    assert stats["failures"] == [
        {"file": "broken.mpl", "method": None,
         "error": "expected class name"},
        {"file": "divrem.mpl", "method": "other", "error": "no domain"},
    ]
    assert stats["checks_by_kind"] == {"NullDeref": 1}


def test_emit_empty_dataset(tmp_path):
    path = tmp_path / "dataset.jsonl"
    summary = emit_dataset([], path)
    assert path.read_text() == ""
    stats = json.loads(summary.read_text())
    assert stats["methods"] == 0
    assert stats["correct"] == 0
    assert stats["skipped"] == 0
    assert stats["failures"] == []
    assert stats["checks_by_kind"] == {}
