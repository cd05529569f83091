"""One check per acceptance criterion; each prints a PASS/FAIL line."""
import random
import re

import pytest

from minioo.driver import check_file, run_file
from minioo.golden import discover, run_case
from minioo.infer import pretty_scheme
from minioo.typesys import (
    FieldTypeClash, NotDeepSubtype, Row, depth_subtype, derive_deep_narrow, is_ancestor, lub_row, width_subtype,
)

import oracles

SESSIONS = {
    "first": "0\n3\n",
    "nested": "1\n2\n",
    "selfish": "9\n",
    "colored": '(5,"red")\n',
    "overriding": 'so far - 5\ncolor  - "red"\n',
    "diamond": "super1: 42\nsuper2: 42\nsuper3: 42\nsuper1: 46\nsuper2: 46\nsuper3: 44\n",
}

ERROR_CASES = {
    "abstract_fix": ("MissingField", "getX"),
    "self_returning_bad": ("InfiniteType", "infinite"),
    "dup_label": ("DuplicateLabel", "getX"),
    "stupid_cast": ("StupidCast", "can never succeed"),
    "covariant_set_origin": ("MissingField", "getColor"),
    "new_self_print": ("PrematureSelfAccess", "print"),
}


def _matches(outcome, kind, needle):
    return any(d.kind == kind and needle in d.message for d in outcome.diagnostics)


@pytest.mark.criterion(1, "shapes golden output")
def test_shapes_golden(corpus, criterion):
    out = run_file(corpus / "shapes.moo")
    expected = (
        "Drawing a Rectangle at:(10,20), width 5, height 6\n"
        "Drawing a Rectangle at:(110,120), width 5, height 6\n"
        "Drawing a Circle at:(15,25), radius 8\n"
        "Drawing a Circle at:(115,125), radius 8\n"
    )
    assert criterion(out.code == 0 and out.output == expected)


@pytest.mark.criterion(2, "session goldens")
def test_session_goldens(corpus, criterion):
    results = {name: run_file(corpus / f"{name}.moo").output == want for name, want in SESSIONS.items()}
    # the first-class session runs printable_point then the colored variant; each prints 42
    results["firstclass"] = run_file(corpus / "firstclass.moo").output == "42\n42\n"
    assert criterion(all(results.values())), results


@pytest.mark.criterion(3, "type-error corpus")
def test_error_corpus(corpus, criterion):
    results = {}
    for name, (kind, needle) in ERROR_CASES.items():
        outcome = check_file(corpus / f"{name}.moo")
        results[name] = outcome.code == 1 and _matches(outcome, kind, needle)
    assert criterion(all(results.values())), results


@pytest.mark.criterion(4, "depth-subtyping demo")
def test_depth_demo(corpus, criterion):
    out = run_file(corpus / "vectors.moo")
    lines = out.output.splitlines()
    ok = out.code == 0 and lines[:4] == ["Length of v", "5", "Length of colored cv", "15"]
    assert criterion(ok), out.output


@pytest.mark.criterion(5, "union down-cast loop")
def test_union_loop(corpus, criterion):
    out = run_file(corpus / "union_loop.moo")
    ok = out.code == 0 and out.output == "Not a circle.\nDrawing a Circle at:(15,25), radius 10\n"
    assert criterion(ok), out.output


def _width_partial_order(rows):
    for s in rows:
        if not width_subtype(s, s):
            return False
    for s in rows:
        for t in rows:
            st, ts = width_subtype(s, t), width_subtype(t, s)
            if st != oracles.oracle_width(s, t):
                return False
            if st and ts and s != t:
                return False
    sample = rows[::7]
    return all(
        width_subtype(a, c)
        for a in sample for b in sample if width_subtype(a, b)
        for c in sample if width_subtype(b, c)
    )


def _lub_exhaustive(rows):
    for a in rows:
        for b in rows:
            try:
                got = lub_row(a, b)
            except FieldTypeClash as e:
                if a.get(e.label) == b.get(e.label):
                    return False
                continue
            if got != lub_row(b, a) or got != oracles.oracle_lub(a, b, rows):
                return False
    return True


def _deep_agreement(n=1000):
    rng = random.Random(5)
    for _ in range(n):
        s, t = oracles.random_type_pair(rng)
        try:
            derive_deep_narrow(s, t)
            derived = True
        except NotDeepSubtype:
            derived = False
        if derived != depth_subtype(s, t):
            return False
    return True


def _ancestry(n=200):
    rng = random.Random(7)
    for _ in range(n):
        g, parents = oracles.random_dag(rng)
        rel = oracles.closure_oracle(parents)
        for c in parents:
            for a in parents:
                if is_ancestor(g, c, a) != ((c, a) in rel):
                    return False
    return True


def _commutation(n=500):
    rng = random.Random(11)
    for _ in range(n):
        record, target, label = oracles.random_record_case(rng)
        direct = oracles.session_output([f"{record} # {label}"])
        narrowed = oracles.session_output([f"(narrow {record} : {target}) # {label}"])
        if direct != narrowed or direct[1]:
            return False
    return True


@pytest.mark.criterion(6, "property suites")
def test_property_suites(criterion):
    rows = list(oracles.all_rows())
    results = {
        "width partial order": _width_partial_order(rows),
        "lub exhaustive": _lub_exhaustive(rows),
        "deep narrow agreement x1000": _deep_agreement(),
        "ancestry x200": _ancestry(),
        "narrow/observe x500": _commutation(),
    }
    assert criterion(all(results.values())), results


@pytest.mark.criterion(7, "polymorphic generator scheme")
def test_colored_point_scheme(corpus, criterion):
    outcome = check_file(corpus / "points.moo")
    text = pretty_scheme(outcome.result.schemes["colored_point"])
    context, _, body = text.partition(" => ")
    constraints = sorted(c.strip() for c in context.strip("()").split(", "))
    fields = re.findall(r"(\w+) :=:", body)
    ok = (
        constraints == ["HasField GetX r (IO a1)", "Num a", "Show a1"]
        and fields == ["GetColor", "GetX", "MoveX", "Print", "VarX"]
    )
    assert criterion(ok), text


def test_whole_corpus_passes(corpus):
    failures = [r for r in map(run_case, discover(corpus)) if not r.passed]
    assert not failures, [(f.case.name, f.detail) for f in failures]
