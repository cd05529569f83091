import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from minioo.diagnostics import LexError, ParseError
from minioo.driver import load_program
from minioo.syntax import ast as A
from minioo.syntax import parse_repl_input, parse_source, print_expr, print_program, tokenize

LABELS = {"getX", "moveX", "print", "getColor", "varX"}


def kinds(src):
    return [(t.kind, t.text) for t in tokenize(src)][:-1]


def test_tokenize_method_call():
    assert kinds("p # getX") == [("IDENT", "p"), ("HASH", "#"), ("IDENT", "getX")]


def test_tokenize_bind_arrow():
    assert kinds("x <- readRef r") == [("IDENT", "x"), ("BINDARROW", "<-"), ("IDENT", "readRef"), ("IDENT", "r")]


def test_tokenize_string_literal():
    (tok,) = tokenize('"so far - "')[:-1]
    assert tok.kind == "STRING" and tok.value == "so far - "


def test_comments_and_whitespace_are_dropped():
    assert kinds("x -- trailing words\n  y") == [("IDENT", "x"), ("IDENT", "y")]


def test_string_escapes():
    (tok,) = tokenize(r'"a\"b\\c\nd"')[:-1]
    assert tok.value == 'a"b\\c\nd'


@pytest.mark.parametrize("src", ['"never closed', "x $ y"])
def test_lex_errors(src):
    with pytest.raises(LexError):
        tokenize(src, "t.moo")


def test_identity_binding():
    prog = parse_source("let id = \\x -> x")
    (d,) = prog.decls
    assert isinstance(d, A.LetDecl) and d.name == "id"
    assert d.body == A.Lam(("x",), A.Var("x"))


def test_printable_point_shape():
    src = """
    let printable_point x_init s = do {
      x <- newRef x_init;
      return ((varX = x) .*. (getX = readRef x) .*. (moveX = \\d -> modifyRef x (\\v -> v + d))
          .*. (print = do { v <- s # getX; print v }) .*. emptyRecord)
    }"""
    (d,) = parse_source(src, labels=set(LABELS)).decls
    assert d.params == ("x_init", "s")
    last = d.body.stmts[-1].expr
    assert isinstance(last, A.App) and last.fn == A.Builtin("return")
    node, labels = last.args[0], []
    while isinstance(node, A.Extend):
        labels.append(node.label)
        node = node.base
    assert labels == ["varX", "getX", "moveX", "print"] and isinstance(node, A.EmptyRec)


def test_extension_over_variable():
    e = parse_repl_input("(getColor = return color) .*. super", set(LABELS))
    assert isinstance(e, A.Extend) and e.label == "getColor" and e.base == A.Var("super")


def test_record_operators_associate_right():
    e = parse_repl_input("a .<++. b .<++. c", set(LABELS))
    assert e == A.RecUnion(A.Var("a"), A.RecUnion(A.Var("b"), A.Var("c")))
    e = parse_repl_input("(getX = 1) .*. a .<++. b", set(LABELS))
    assert e == A.RecUnion(A.Extend("getX", A.Lit(1), A.Var("a")), A.Var("b"))
    e = parse_repl_input("(getX = 1) .*. (varX = 2) .*. emptyRecord", set(LABELS))
    assert e == A.Extend("getX", A.Lit(1), A.Extend("varX", A.Lit(2), A.EmptyRec()))


def test_application_binds_tighter_than_invocation_args():
    e = parse_repl_input("p # moveX 3", set(LABELS))
    assert e == A.App(A.FieldGet(A.Var("p"), "moveX"), (A.Lit(3),))


def test_repl_dispatch():
    labels = set()
    assert isinstance(parse_repl_input("label moveX", labels), A.LabelDecl)
    assert "moveX" in labels
    assert isinstance(parse_repl_input("nominal PP", labels), A.NominalDecl)
    d = parse_repl_input("nominal CP extends {PP}", labels)
    assert isinstance(d, A.NominalDecl) and d.parents == ("PP",)
    labels.add("print")
    assert isinstance(parse_repl_input("p # print", labels), A.FieldGet)
    assert isinstance(parse_repl_input("x <- return 1", labels), A.BindDecl)
    assert isinstance(parse_repl_input("let y = 2", labels), A.LetDecl)
    assert isinstance(parse_repl_input("let y = 2 in y", labels), A.LetIn)


def test_undeclared_label_is_rejected():
    with pytest.raises(ParseError, match="undeclared label"):
        parse_source("let f o = o # getZ")


def test_parse_error_reports_expected_tokens():
    with pytest.raises(ParseError) as info:
        parse_source("let = 3")
    assert info.value.span.line == 1 and info.value.expected


def test_do_block_must_end_with_expression():
    with pytest.raises(ParseError):
        parse_source("let m = do { x <- return 1 }")


def _corpus_programs(corpus):
    return sorted(p for p in corpus.glob("*.moo"))


def test_round_trip_corpus(corpus):
    for path in _corpus_programs(corpus):
        prog = load_program(path)
        text = print_program(prog)
        assert parse_source(text, str(path)) == prog, path.name


def test_spans_inside_source(corpus):
    for path in _corpus_programs(corpus):
        prog = load_program(path)
        for decl in prog.decls:
            for node in decl.walk():
                sp = node.span
                assert sp is not None, (path.name, node)
                lines = open(sp.file).read().split("\n")
                assert 1 <= sp.line <= len(lines)
                assert 1 <= sp.column <= len(lines[sp.line - 1]) + 1
                assert sp.length >= 0


# --- generated round trips -------------------------------------------------------

names = st.sampled_from(["x", "y", "obj", "f"])
labels = st.sampled_from(sorted(LABELS))
literals = st.one_of(
    st.integers(0, 999).map(A.Lit),
    st.booleans().map(A.Lit),
    st.text(max_size=4).map(A.Lit),
    st.floats(0, 100, allow_nan=False).map(lambda f: A.Lit(round(f, 2))),
)
leaves = st.one_of(literals, names.map(A.Var), st.just(A.EmptyRec()), st.just(A.Builtin("return")))


def _extend(children):
    return st.one_of(
        st.tuples(children, labels).map(lambda t: A.FieldGet(*t)),
        st.tuples(children, st.lists(children, min_size=1, max_size=2)).map(lambda t: A.App(t[0], tuple(t[1]))),
        st.tuples(st.lists(names, min_size=1, max_size=2, unique=True), children).map(lambda t: A.Lam(tuple(t[0]), t[1])),
        st.tuples(labels, children, children).map(lambda t: A.Extend(*t)),
        st.tuples(labels, children, children).map(lambda t: A.Update(*t)),
        st.tuples(children, children).map(lambda t: A.RecUnion(*t)),
        st.tuples(st.sampled_from(["+", "-", "*", "/", "==", "<", "++"]), children, children).map(lambda t: A.BinOp(*t)),
        st.tuples(children, children, children).map(lambda t: A.If(*t)),
        st.lists(children, max_size=3).map(lambda xs: A.ListLit(tuple(xs))),
        st.tuples(children, children).map(lambda t: A.PairLit(*t)),
        st.tuples(names, children, children).map(lambda t: A.LetIn(*t)),
        st.tuples(names, children, children).map(lambda t: A.Do((A.Bind(t[0], t[1]), A.ExprStmt(t[2])))),
        children.map(lambda c: A.Annot("narrow", c, A.TyRecord((("getX", A.TyIO(A.TyBase("Int"))),)))),
        st.tuples(children, children).map(lambda t: A.LubCons(t[0], A.LubCons(t[1], A.LubNil()))),
    )


exprs = st.recursive(leaves, _extend, max_leaves=12)


@settings(max_examples=200, deadline=None)
@given(exprs)
def test_round_trip_generated(e):
    text = print_expr(e)
    assert parse_repl_input(text, set(LABELS)) == e, text
