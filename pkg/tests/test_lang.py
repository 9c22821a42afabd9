"""Unit tests for `preguard.lang`.
"""
import pytest
from pytest import raises

from preguard.lang import (
    ArrayAccess, Binary, Block, Cast, ExprStmt, FieldAccess, IntLit, ParseError,
    ResolveError, Return, Var, VarDecl, While, ast_node_count,
    evaluated_exprs, format_method, parse_program, pretty_print,
)
from preguard.lang.lexer import TokenKind, tokenize
from preguard.lang.util import (
    IdAllocator, blocks, can_complete, clone, evaluated_exprs_with_paths,
    find_stmt, splice_stmt, statement_count, walk,
)

CORPUS_STEMS = ["arith", "arrays", "buffers", "checks", "divrem", "helpers",
                "lists", "shapes", "sqrt"]


def test_tokenize_skips_comments_and_tracks_lines():
    tokens = tokenize("int x = 1; // note\nx <= 2;")
    kinds = [t.kind for t in tokens]
    assert kinds[-1] is TokenKind.EOF
    le = next(t for t in tokens if t.text == "<=")
    assert le.kind is TokenKind.OP
    assert (le.line, le.col) == (2, 3)
    assert "note" not in [t.text for t in tokens]


def test_tokenize_rejects_unknown_character():
    with raises(ParseError) as exc:
        tokenize("int x = 1 @ 2;")
    assert exc.value.line == 1
    assert exc.value.col == 11


def test_parse_divrem(divrem):
    """the big-integer analog parses into one class and one method"""
    assert [c.name for c in divrem.classes] == ["BigIntegerLike"]
    info = divrem.class_table["BigIntegerLike"]
    assert [name for name, _ in info.fields] == ["m_sign", "m_magnitude"]
    method = divrem.method("divideAndRemainder")
    assert str(method.return_type) == "int[]"
    assert [name for name, _ in method.params] == ["val"]


def test_parse_error_reports_position_and_expectation():
    with raises(ParseError) as exc:
        parse_program("int f(int x) {\n  return x\n}\n")
    assert exc.value.line == 3
    assert exc.value.expected == "';'"


@pytest.mark.parametrize("source, message", [
    ("int f() { return y; }", "unknown variable y"),
    ("int f(int x) { int x = 1; return x; }", "already declared"),
    ("int f(int x) { if (x > 0) { return 1; } }", "missing return"),
    ("bool f(int x) { return x; }", "cannot return"),
    ("int f(int x) { return g(x); }", "unknown method g"),
    ("class A { int a; } int f(A a) { return a.b; }", "has no field b"),
    ("int f(int[] a) { a.length = 2; return 0; }", "read-only"),
    ("int f() { break; return 0; }", "break outside"),
    ("class A extends B { } int f() { return 0; }", "unknown class"),
])
def test_resolve_errors(source, message):
    with raises(ResolveError, match=message):
        parse_program(source)


def test_for_loop_desugars_to_while():
    program = parse_program(
        "int f(int n) { int s = 0; for (int i = 0; i < n; i = i + 1) "
        "{ s = s + i; } return s; }")
    body = program.method("f").body.stmts
    assert isinstance(body[1], Block)
    init, loop = body[1].stmts
    assert isinstance(init, VarDecl) and init.name == "i"
    assert isinstance(loop, While)
    assert loop.body.stmts[-1].target == Var("i")


def test_negative_literal_folds():
    program = parse_program("int f() { return -3; }")
    ret = program.method("f").body.stmts[0]
    assert ret.value == IntLit(-3)


def test_cast_needs_known_class():
    program = parse_program(
        "class A { } class B extends A { } int f(A a) { B b = (B) a; "
        "int x = 1; int y = (x) + 1; return y; }")
    decl = program.method("f").body.stmts[0]
    assert isinstance(decl.init, Cast) and decl.init.cls == "B"
    # (x) is a parenthesised variable, not a cast
    paren = program.method("f").body.stmts[2]
    assert isinstance(paren.init, Binary)


@pytest.mark.parametrize("stem", CORPUS_STEMS)
def test_pretty_print_round_trip(load_corpus, stem):
    program = load_corpus(stem)
    printed = pretty_print(program)
    again = parse_program(printed.text)
    assert again == program
    assert pretty_print(again).text == printed.text


def test_round_trip_keeps_node_ids(divrem):
    printed = pretty_print(divrem)
    again = parse_program(printed.text, printed.order)
    assert [n.nid for n in walk(again.method("divideAndRemainder").body)] \
        == [n.nid for n in walk(divrem.method("divideAndRemainder").body)]


def test_display_lines(divrem):
    printed = divrem.printed
    method = divrem.method("divideAndRemainder")
    check = method.body.stmts[0]
    line = printed.text.splitlines()[printed.lines[check.nid] - 1]
    assert line.strip() == "if (val.m_sign == 0) { throw ArithmeticException; }"
    assert divrem.display_line(check.cond.nid) == divrem.display_line(check.nid)


def test_format_method_one_statement_per_line():
    program = parse_program("int f(int a, int b) { if (a > b) { return a; } "
                            "return b; }")
    assert format_method(program.method("f")) == (
        "int f(int a, int b) {\n"
        "    if (a > b) { return a; }\n"
        "    return b;\n"
        "}\n")


def test_node_ids_unique(load_corpus):
    program = load_corpus("arrays")
    ids = [n.nid for m in program.methods for n in walk(m.body)]
    assert len(ids) == len(set(ids))
    assert program.next_id > max(ids)


def test_ast_node_count_excludes_blocks():
    program = parse_program("int f(int x) { if (x > 0) { return 1; } "
                            "return 0; }")
    method = program.method("f")
    # if, x > 0 (3 nodes), return 1 (2 nodes), return 0 (2 nodes)
    assert ast_node_count(method) == 8
    assert statement_count(method) == 3


def test_evaluated_exprs_order():
    """left to right, innermost first, store target last"""
    program = parse_program("int f(int[] a, int[] b, int i) { a[i] = b[i + 1]; "
                            "return 0; }")
    stmt = program.method("f").body.stmts[0]
    order = evaluated_exprs(stmt)
    assert order[:2] == [Var("a"), Var("i")]
    assert isinstance(order[-1], ArrayAccess) and order[-1].array == Var("a")
    reads = [e for e in order if isinstance(e, ArrayAccess)]
    assert reads[0].array == Var("b")


def test_evaluated_exprs_short_circuit_paths():
    program = parse_program("bool f(int[] a, int i) { return i < a.length && "
                            "a[i] > 0; }")
    stmt = program.method("f").body.stmts[0]
    paths = {type(e).__name__ + ":" + str(len(p)): p
             for e, p in evaluated_exprs_with_paths(stmt)
             if isinstance(e, (ArrayAccess, FieldAccess))}
    assert paths["FieldAccess:0"] == ()
    (operand, polarity), = paths["ArrayAccess:1"]
    assert polarity is True
    assert isinstance(operand, Binary) and operand.op == "<"


def test_clone_gives_fresh_ids(divrem):
    body = divrem.method("divideAndRemainder").body
    ids = IdAllocator(divrem.next_id)
    copy = clone(body, ids)
    assert copy == body
    old = {n.nid for n in walk(body)}
    assert not old & {n.nid for n in walk(copy)}


def test_splice_and_find(divrem):
    body = divrem.method("divideAndRemainder").body
    first = body.stmts[0]
    assert find_stmt(body, first.nid) is first
    ids = IdAllocator(divrem.next_id)
    extra = ExprStmt(Var("val", nid=ids()), nid=ids())
    spliced = splice_stmt(body, first.nid, [extra, first])
    assert spliced.stmts[:2] == (extra, first)
    assert splice_stmt(body, first.nid, []).stmts == body.stmts[1:]


def test_blocks_outermost_first(divrem):
    body = divrem.method("divideAndRemainder").body
    found = blocks(body)
    assert found[0] is body
    assert len(found) == 4


def test_can_complete():
    program = parse_program(
        "int f(int x) { while (true) { if (x > 0) { break; } } "
        "if (x > 1) { return 1; } else { throw E; } }")
    loop, branch = program.method("f").body.stmts
    assert can_complete(loop)
    assert not can_complete(branch)
    assert not can_complete(Return(None))
