"""Load, check and run a program file.  Shared by the CLI, the golden runner and tests."""
from __future__ import annotations

import io
import sys
from dataclasses import dataclass, field
from pathlib import Path

from .diagnostics import LexError, MiniOOError, ParseError, RuntimeFault, TypeCheckError
from .eval import Interpreter
from .infer import InferResult, infer_program
from .syntax import ast as A
from .syntax import parse_source

PRELUDE = "prelude.moo"

EXIT_OK, EXIT_STATIC, EXIT_FAULT, EXIT_USAGE = 0, 1, 2, 3


@dataclass
class Outcome:
    code: int
    output: str = ""
    diagnostics: list = field(default_factory=list)
    counters: dict = field(default_factory=dict)
    result: InferResult | None = None
    program: A.Program | None = None


def prelude_for(path: Path) -> Path | None:
    p = path.parent / PRELUDE
    if path.name != PRELUDE and p.is_file():
        return p
    return None


def load_program(path, labels: set | None = None) -> A.Program:
    """Parse a file, prefixed by the prelude that sits next to it, if any."""
    path = Path(path)
    labels = labels if labels is not None else set()
    decls: list = []
    pre = prelude_for(path)
    if pre is not None:
        decls.extend(parse_source(pre.read_text(), str(pre), labels).decls)
    prog = parse_source(path.read_text(), str(path), labels)
    return A.Program(tuple(decls) + prog.decls, span=prog.span)


def check_file(path, max_errors: int | None = 20) -> Outcome:
    try:
        prog = load_program(path)
    except (LexError, ParseError) as e:
        return Outcome(EXIT_STATIC, diagnostics=[e])
    result = infer_program(prog, max_errors)
    code = EXIT_STATIC if result.errors else EXIT_OK
    return Outcome(code, diagnostics=list(result.errors[:max_errors] if max_errors else result.errors), result=result, program=prog)


def run_file(path, out=None, max_errors: int | None = 20) -> Outcome:
    """Check then evaluate `main`.  Program output goes to `out` (a capture buffer if None)."""
    checked = check_file(path, max_errors)
    if checked.code != EXIT_OK:
        return checked
    prog, result = checked.program, checked.result
    if "main" not in result.schemes:
        err = TypeCheckError("UnboundName", "program has no main binding", prog.span)
        return Outcome(EXIT_STATIC, diagnostics=[err], result=result, program=prog)
    capture = out is None
    sink = io.StringIO() if capture else out
    interp = Interpreter(result.notes, sink)
    interp.add_bindings(prog.decls)
    code, diags = EXIT_OK, []
    limit = sys.getrecursionlimit()
    sys.setrecursionlimit(max(limit, 20000))
    try:
        interp.run_main()
    except RuntimeFault as f:
        code, diags = EXIT_FAULT, [f]
    except RecursionError:
        code, diags = EXIT_FAULT, [RuntimeFault("UserFail", "evaluation exceeded the recursion limit")]
    finally:
        sys.setrecursionlimit(limit)
    text = sink.getvalue() if capture else ""
    return Outcome(code, text, diags, dict(interp.store.counters), result, prog)


def render_all(diags, color=False) -> str:
    return "".join(d.render(color) + "\n" for d in diags if isinstance(d, MiniOOError))
