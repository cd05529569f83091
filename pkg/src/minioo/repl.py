"""Interactive session.  Declarations accumulate; expressions are checked, then evaluated."""
from __future__ import annotations

import sys
from pathlib import Path

from .diagnostics import LexError, MiniOOError, ParseError, RuntimeFault, TypeCheckError
from .driver import load_program, prelude_for
from .eval import ActionV, Interpreter, show_value
from .infer import SHOWABLE_BASES, Checker, Scheme, check_decls, pretty_scheme
from .syntax import ast as A
from .syntax import parse_repl_input, parse_source
from .typesys import TAction, TCon, TList, TPair, TRef, children

BANNER = "MiniOO interactive session. :t EXPR shows a type, :quit leaves."


def _showable(t) -> bool:
    if isinstance(t, TCon):
        return t.name in SHOWABLE_BASES
    if isinstance(t, (TPair, TList)):
        return all(_showable(c) for c in children(t))
    return False


def _mentions_ref(t) -> bool:
    return isinstance(t, TRef) or any(_mentions_ref(c) for c in children(t))


class Session:
    def __init__(self, out=None, err=None, color=False):
        self.out = out if out is not None else sys.stdout
        self.err = err if err is not None else sys.stderr
        self.color = color
        self.labels: set = set()
        self.checker = Checker()
        self.interp = Interpreter(self.checker.notes, self.out)
        self.defined: set = set()
        self.counter = 0

    # --- loading -------------------------------------------------------------------
    def load_file(self, path) -> bool:
        path = Path(path)
        try:
            prog = load_program(path, self.labels)
        except (LexError, ParseError) as e:
            self.report(e)
            return False
        return all(self.declare(d) for d in prog.decls)

    def load_prelude_near(self, directory) -> bool:
        pre = prelude_for(Path(directory) / "_")
        if pre is None:
            return True
        try:
            prog = parse_source(pre.read_text(), str(pre), self.labels)
        except (LexError, ParseError) as e:
            self.report(e)
            return False
        return all(self.declare(d) for d in prog.decls)

    def report(self, e: MiniOOError):
        self.err.write(e.render(self.color) + "\n")

    # --- input handling ----------------------------------------------------------------
    def feed(self, text: str) -> bool:
        """Process one complete input.  Returns False when the session should end."""
        stripped = text.strip()
        if not stripped:
            return True
        if stripped in (":quit", ":q"):
            return False
        self.counter += 1
        where = f"<repl:{self.counter}>"
        try:
            if stripped.startswith(":t ") or stripped.startswith(":type "):
                body = stripped.split(None, 1)[1]
                self.show_type(parse_repl_input(body, set(self.labels), where))
                return True
            if stripped.startswith(":"):
                self.err.write(f"unknown command {stripped.split()[0]}\n")
                return True
            item = parse_repl_input(stripped, self.labels, where)
            if isinstance(item, A.BindDecl):
                self.bind(item)
            elif isinstance(item, A.Decl):
                self.declare(item)
            else:
                self.evaluate(item)
        except MiniOOError as e:
            self.report(e)
        except RecursionError:
            self.err.write("runtime fault: evaluation exceeded the recursion limit\n")
        return True

    def declare(self, d: A.Decl) -> bool:
        if isinstance(d, A.LetDecl) and d.name in self.defined:
            self.report(TypeCheckError("DuplicateLabel", f"{d.name} is already defined in this session", d.span))
            return False
        errors: list = []
        check_decls(self.checker, [d], errors)
        if errors:
            for e in errors:
                self.report(e)
            if isinstance(d, A.LetDecl):
                self.checker.globals.pop(d.name, None)
            return False
        if isinstance(d, A.LetDecl):
            self.defined.add(d.name)
            self.interp.add_bindings([d])
        return True

    def _check(self, e: A.Expr) -> Scheme:
        self.checker.annot_vars = {}
        return self.checker.check_expr(e)

    def show_type(self, item):
        if isinstance(item, A.Decl):
            raise ParseError(item.span, ":t expects an expression")
        self.out.write(pretty_scheme(self._check(item)) + "\n")

    def bind(self, d: A.BindDecl):
        if d.name in self.defined:
            raise TypeCheckError("DuplicateLabel", f"{d.name} is already defined in this session", d.span)
        s = self._check(d.expr)
        t = self.checker.zonk(s.type)
        if not isinstance(t, TAction):
            raise TypeCheckError("Mismatch", f"`{d.name} <- e` needs an action, got {self.checker.show(t)}", d.span)
        if s.vars and _mentions_ref(t.result):
            raise TypeCheckError("AmbiguousRow", f"a reference bound at the prompt must have a fixed type: {pretty_scheme(s)}", d.span)
        value = self.interp.run_action(self.interp.eval(d.expr, {}))
        self.checker.globals[d.name] = Scheme(s.vars, s.constraints, t.result)
        self.interp.define_value(d.name, value)
        self.defined.add(d.name)

    def evaluate(self, e: A.Expr):
        s = self._check(e)
        t = self.checker.zonk(s.type)
        value = self.interp.eval(e, {})
        if isinstance(value, ActionV):
            value = self.interp.run_action(value)
            t = t.result if isinstance(t, TAction) else t
            if value == () or not _showable(t):
                return
        elif not _showable(t):
            self.out.write(f"<value> :: {pretty_scheme(s)}\n")
            return
        self.out.write(show_value(value) + "\n")


def read_inputs(stream, prompt=None, out=None):
    """Yield complete inputs, joining `:{ ... :}` blocks."""
    block = None
    while True:
        if prompt and out is not None:
            out.write(prompt if block is None else "...> ")
            out.flush()
        line = stream.readline()
        if not line:
            if block:
                yield "\n".join(block)
            return
        line = line.rstrip("\n")
        if block is None and line.strip() == ":{":
            block = []
        elif block is not None and line.strip() == ":}":
            yield "\n".join(block)
            block = None
        elif block is not None:
            block.append(line)
        else:
            yield line


def repl_loop(stdin=None, out=None, err=None, color=False, load=None) -> int:
    stdin = stdin or sys.stdin
    session = Session(out, err, color)
    interactive = hasattr(stdin, "isatty") and stdin.isatty()
    if load is not None:
        session.load_file(load)
    else:
        session.load_prelude_near(Path.cwd())
    if interactive:
        session.out.write(BANNER + "\n")
    for text in read_inputs(stdin, "minioo> " if interactive else None, session.out):
        try:
            if not session.feed(text):
                break
        except RuntimeFault as f:  # pragma: no cover - feed reports faults itself
            session.report(f)
        session.out.flush()
    return 0
