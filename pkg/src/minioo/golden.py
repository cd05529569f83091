"""Golden corpus runner: `<name>.moo` paired with `<name>.out` or `<name>.err`."""
from __future__ import annotations

import difflib
from dataclasses import dataclass
from pathlib import Path

from .driver import PRELUDE, run_file


@dataclass
class GoldenCase:
    program: Path
    expected: Path | None
    mode: str  # "out", "err" or "broken"

    @property
    def name(self):
        return self.program.stem


@dataclass
class CaseResult:
    case: GoldenCase
    passed: bool
    detail: str = ""


def discover(directory) -> list[GoldenCase]:
    cases = []
    for prog in sorted(Path(directory).glob("*.moo")):
        if prog.name == PRELUDE:
            continue
        out, err = prog.with_suffix(".out"), prog.with_suffix(".err")
        if out.exists() and not err.exists():
            cases.append(GoldenCase(prog, out, "out"))
        elif err.exists() and not out.exists():
            cases.append(GoldenCase(prog, err, "err"))
        else:
            cases.append(GoldenCase(prog, None, "broken"))
    return cases


def normalize(text: str) -> str:
    return text.rstrip("\n") + "\n" if text else ""


def run_case(case: GoldenCase, max_errors=20) -> CaseResult:
    if case.mode == "broken":
        return CaseResult(case, False, "needs exactly one of .out / .err")
    try:
        expected = case.expected.read_text()
        outcome = run_file(case.program, None, max_errors)
    except OSError as e:
        return CaseResult(case, False, f"io error: {e}")
    if case.mode == "out":
        if outcome.code != 0:
            msgs = "; ".join(d.render() for d in outcome.diagnostics)
            return CaseResult(case, False, f"exit {outcome.code}: {msgs}")
        want, got = normalize(expected), normalize(outcome.output)
        if want == got:
            return CaseResult(case, True)
        diff = difflib.unified_diff(
            want.splitlines(keepends=True), got.splitlines(keepends=True),
            fromfile=str(case.expected), tofile="actual",
        )
        return CaseResult(case, False, "".join(diff).rstrip("\n"))
    lines = expected.splitlines()
    kind = lines[0].strip() if lines else ""
    needle = lines[1].strip() if len(lines) > 1 else ""
    for d in outcome.diagnostics:
        if d.kind == kind and needle in d.message:
            return CaseResult(case, True)
    got = "; ".join(d.render() for d in outcome.diagnostics) or f"no diagnostic (exit {outcome.code})"
    return CaseResult(case, False, f"expected {kind} containing {needle!r}, got: {got}")


def run_directory(directory, out, max_errors=20) -> int:
    results = [run_case(c, max_errors) for c in discover(directory)]
    for r in results:
        if r.passed:
            out.write(f"PASS {r.case.name}\n")
        else:
            out.write(f"FAIL {r.case.name}\n")
            if r.detail:
                out.write("".join(f"  {line}\n" for line in r.detail.splitlines()))
    failed = sum(not r.passed for r in results)
    if not results:
        out.write("0 cases\n")
    else:
        out.write(f"{len(results)} cases, {len(results) - failed} passed, {failed} failed\n")
    return 0 if failed == 0 else 1
