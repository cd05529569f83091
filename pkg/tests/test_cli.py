import io
import subprocess
import sys

import pytest

from minioo.cli import main
from minioo.driver import load_program
from minioo.golden import discover
from minioo.infer import binding_dependencies, tarjan_sccs
from minioo.repl import Session
from minioo.syntax import ast as A
from minioo.syntax.printer import print_decl


def cli(*argv, stdin=None, monkeypatch=None):
    out, err = io.StringIO(), io.StringIO()
    if stdin is not None:
        monkeypatch.setattr(sys, "stdin", io.StringIO(stdin))
    code = main(list(argv), out, err)
    return code, out.getvalue(), err.getvalue()


def test_run_prints_program_output(corpus):
    code, out, _ = cli("run", str(corpus / "points.moo"))
    assert code == 0 and out == (corpus / "points.out").read_text()


def test_run_static_error_exit_code(corpus):
    code, out, err = cli("run", "--no-color", str(corpus / "dup_label.moo"))
    assert code == 1 and out == ""
    assert "error[DuplicateLabel]" in err and "dup_label.moo:" in err


def test_run_runtime_fault_exit_code(corpus):
    code, _, err = cli("run", "--no-color", str(corpus / "div_zero.moo"))
    assert code == 2 and "runtime fault[DivisionByZero]" in err


@pytest.mark.parametrize("argv", [[], ["frobnicate"], ["run"], ["run", "/no/such/file.moo"], ["check", "--max-errors"]])
def test_usage_errors(argv):
    code, _, err = cli(*argv)
    assert code == 3 and "usage error" in err


def test_check_prints_schemes(corpus):
    code, out, _ = cli("check", str(corpus / "first.moo"))
    assert code == 0
    lines = out.splitlines()
    assert lines and all(" :: " in l for l in lines)
    assert any(l.startswith("main :: IO ") for l in lines)
    # prelude declarations are not listed
    assert not any(l.startswith("label") for l in lines)


def test_check_single_binding(corpus):
    code, out, _ = cli("check", str(corpus / "shapes.moo"), "--binding", "main")
    assert code == 0 and out == "main :: IO ()\n"
    code, _, err = cli("check", str(corpus / "shapes.moo"), "--binding", "nope")
    assert code == 1 and "nope" in err


def test_max_errors_limits_report(tmp_path):
    (tmp_path / "many.moo").write_text("let a = x1\nlet b = x2\nlet c = x3\nlet main = return ()\n")
    code, _, err = cli("check", "--no-color", "--max-errors", "2", str(tmp_path / "many.moo"))
    assert code == 1 and err.count("error[UnboundName]") == 2


def test_test_command_passes_corpus(corpus):
    code, out, _ = cli("test", str(corpus))
    assert code == 0
    n = len(discover(corpus))
    assert out.splitlines()[-1] == f"{n} cases, {n} passed, 0 failed"


def test_test_command_reports_one_byte_diff(tmp_path, corpus):
    (tmp_path / "prelude.moo").write_text((corpus / "prelude.moo").read_text())
    (tmp_path / "points.moo").write_text((corpus / "points.moo").read_text())
    good = (corpus / "points.out").read_text()
    (tmp_path / "points.out").write_text(good.replace("3", "4", 1))
    code, out, _ = cli("test", str(tmp_path))
    assert code == 1
    assert "FAIL points" in out and out.splitlines()[-1] == "1 cases, 0 passed, 1 failed"


def test_test_command_empty_directory(tmp_path):
    code, out, _ = cli("test", str(tmp_path))
    assert code == 0 and "0 cases" in out


# --- interactive session ------------------------------------------------------------


def test_repl_type_and_point_session(monkeypatch, tmp_path, corpus):
    monkeypatch.chdir(corpus)
    script = "\n".join([
        ":t \\o -> o # getX",
        ":{",
        "let point self = do {",
        "  x <- newRef 0;",
        "  return ((getX = readRef x) .*. (moveX = \\d -> modifyRef x (\\v -> v + d)) .*. emptyRecord)",
        "}",
        ":}",
        "p <- fix point",
        "p # getX",
        "p # moveX 3",
        "p # getX",
        ":quit",
        "p # getX",
    ]) + "\n"
    code, out, err = cli("repl", stdin=script, monkeypatch=monkeypatch)
    assert code == 0 and err == ""
    assert out.splitlines() == ["HasField GetX r a => r -> a", "0", "3"]


def test_repl_reports_errors_and_continues(monkeypatch, corpus):
    monkeypatch.chdir(corpus)
    code, out, err = cli("repl", "--no-color", stdin="nope\n1 + 1\n", monkeypatch=monkeypatch)
    assert code == 0 and "error[UnboundName]" in err and out == "2\n"


def test_repl_rejects_redefinition():
    out, err = io.StringIO(), io.StringIO()
    s = Session(out, err)
    s.feed("let x = 1")
    s.feed("let x = 2")
    s.feed("x")
    assert "DuplicateLabel" in err.getvalue() and out.getvalue() == "1\n"


def test_repl_shows_type_of_unshowable_value():
    out, err = io.StringIO(), io.StringIO()
    s = Session(out, err)
    s.feed("\\x -> x")
    assert out.getvalue() == "<value> :: a -> a\n"


def _golden_programs(corpus):
    return [c for c in discover(corpus) if c.mode == "out"]


def test_repl_equals_batch(corpus):
    checked = 0
    for case in _golden_programs(corpus):
        out, err = io.StringIO(), io.StringIO()
        s = Session(out, err)
        s.load_prelude_near(corpus)
        own = [d for d in load_program(case.program).decls if not d.span.file.endswith("prelude.moo")]
        lets = {d.name: d for d in own if isinstance(d, A.LetDecl)}
        groups = tarjan_sccs(binding_dependencies(list(lets.values())))
        if any(len(g) > 1 for g in groups):
            continue  # mutually recursive bindings cannot be entered one at a time
        for d in own:
            if not isinstance(d, A.LetDecl):
                s.feed(print_decl(d))
        for (name,) in groups:
            s.feed(print_decl(lets[name]))
        s.feed("main")
        assert err.getvalue() == "", (case.program.name, err.getvalue())
        assert out.getvalue() == case.expected.read_text(), case.program.name
        checked += 1
    assert checked >= 15


def test_module_entry_point(corpus):
    proc = subprocess.run(
        [sys.executable, "-m", "minioo", "run", str(corpus / "first.moo")],
        capture_output=True, text=True, timeout=60,
    )
    assert proc.returncode == 0 and proc.stdout == (corpus / "first.out").read_text()
