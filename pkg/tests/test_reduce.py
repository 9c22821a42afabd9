"""Unit tests for `preguard.reduce`.
"""
from preguard.instrument import infer
from preguard.interp import Environment
from preguard.lang import format_method, parse_program
from preguard.lang.util import splice_stmt
from preguard.reduce import (
    ReductionConstraint, Reducer, ddmin, is_removable, is_valid, reduce,
    statement_ids,
)
from preguard.seedgen import PreconditionProgram
from preguard.testgen import RegressionSuite


def _pre(source: str) -> PreconditionProgram:
    return PreconditionProgram(parse_program(source), "p", "p")


def _suite(*cases) -> ReductionConstraint:
    return ReductionConstraint(RegressionSuite(tuple(
        (Environment(args), expected) for args, expected in cases)))


SIGN = _suite(((-1,), False), ((0,), True), ((1,), True))


def test_ddmin_finds_needed_items():
    calls = []

    def test(items):
        calls.append(items)
        return {2, 5} <= set(items)

    assert ddmin(range(8), test) == [2, 5]
    assert all(isinstance(c, list) for c in calls)


def test_ddmin_keeps_order_and_can_empty():
    assert ddmin([3, 1, 2], lambda items: 2 in items and 3 in items) == [3, 2]
    assert ddmin([1, 2, 3], lambda items: True) == []
    assert ddmin([], lambda items: True) == []


def test_ddmin_result_is_one_minimal():
    def test(items):
        return sum(items) >= 10

    kept = ddmin([1, 4, 2, 6, 3, 1], test)
    assert test(kept)
    for i in range(len(kept)):
        assert not test(kept[:i] + kept[i + 1:])


def test_reduce_drops_unused_statements():
    pre = _pre("""
bool p(int x) {
    int y = x + 1;
    int z = y * 2;
    if (x < 0) { return false; }
    return true;
}
""")
    reducer = Reducer(SIGN)
    reduced = reducer.reduce(pre)
    assert format_method(reduced.method) == (
        "bool p(int x) {\n"
        "    if (x < 0) { return false; }\n"
        "    return true;\n"
        "}\n")
    report = reducer.report
    assert report.statements_before == 5
    assert report.statements_after == 3
    assert report.nodes_after < report.nodes_before
    assert report.accepted >= 1
    assert report.passes >= 1
    assert is_valid(reduced, SIGN)


def test_reduce_drops_empty_else():
    pre = _pre("""
bool p(int x) {
    if (x < 0) { return false; } else { x = x + 1; }
    return true;
}
""")
    reduced = reduce(pre, SIGN)
    assert format_method(reduced.method).splitlines()[1].strip() \
        == "if (x < 0) { return false; }"


def test_trivially_true_reduces_to_literal():
    pre = _pre("""
bool p(int x) {
    int y = 10 / 2;
    x + y;
    return true;
}
""")
    constraint = _suite(((-1,), True), ((5,), True))
    assert format_method(reduce(pre, constraint).method) == (
        "bool p(int x) {\n"
        "    return true;\n"
        "}\n")


def test_empty_suite_constrains_nothing():
    pre = _pre("bool p(int x) { if (x < 0) { return false; } return true; }")
    reduced = reduce(pre, ReductionConstraint(RegressionSuite()))
    assert [type(s).__name__ for s in reduced.method.body.stmts] == ["Return"]


def test_candidate_that_does_not_resolve_is_rejected():
    pre = _pre("bool p(int x) { int y = x; return y > 0; }")
    reducer = Reducer(_suite(((1,), True)))
    decl = pre.method.body.stmts[0]
    body = splice_stmt(pre.method.body, decl.nid, [])
    assert reducer.build(pre, body) is None
    assert reducer.attempt(pre, body) is None
    assert reducer.rejected_untyped == 1
    assert reducer.candidates == 0


def test_invalid_precondition_is_left_alone():
    pre = _pre("bool p(int x) { return true; }")
    reducer = Reducer(SIGN)
    assert reducer.reduce(pre) is pre
    assert reducer.report.nodes_after == reducer.report.nodes_before
    assert reducer.report.accepted == 0


def test_provenance_follows_surviving_nodes(divrem):
    result = infer(divrem, "divideAndRemainder")
    reduced = result.precondition
    assert set(reduced.provenance) <= set(result.before_reduction.provenance)
    assert reduced.method.nid in reduced.provenance


def test_divrem_reduction_is_one_minimal(divrem):
    result = infer(divrem, "divideAndRemainder")
    constraint = ReductionConstraint(result.regression)
    reduced = result.precondition
    assert is_valid(reduced, constraint)
    for stmt_id in statement_ids(reduced):
        assert not is_removable(reduced, stmt_id, constraint)
    assert result.reduction.to_json()["statements_after"] == 3
