"""Call-by-value evaluator with a mutable store.

Primitive values are plain Python objects: int, float, bool, str, () for
unit, 2-tuples for pairs and lists for lists.  Objects are RecordV values
whose fields hold closures and reference handles.
"""
from __future__ import annotations

import itertools
import math
import sys
from dataclasses import dataclass, field
from typing import Callable

from .diagnostics import RuntimeFault
from .infer import Notes
from .syntax import ast as A
from .typesys import IDENTITY, Identity, PerField, Plan, Project, Type, WrapAction, WrapFunction

# --- values ------------------------------------------------------------------------


@dataclass
class RecordV:
    fields: dict

    def __post_init__(self):
        self.fields = dict(sorted(self.fields.items()))


@dataclass
class ClosureV:
    params: tuple
    body: A.Expr
    env: dict = field(repr=False)


@dataclass
class PrimV:
    name: str
    arity: int
    fn: Callable = field(repr=False)
    args: tuple = ()


@dataclass
class RefV:
    id: int


@dataclass
class ActionV:
    run: Callable = field(repr=False)
    name: str = "action"


@dataclass
class UnionV:
    path: tuple
    payload: object


@dataclass
class NominalV:
    name: str
    payload: object


@dataclass
class DynV:
    full: object
    type: Type
    view: object


@dataclass
class SelfCellV:
    cell: int


@dataclass
class ViewV:
    """A lazily narrowed view of an object that may still be under construction."""
    base: object
    plan: Plan


NONE_VALUE = UnionV(("R",), ())


def some(v):
    return UnionV(("L",), v)


# --- store -----------------------------------------------------------------------------


class Store:
    def __init__(self, out=None):
        self.heap: dict = {}
        self.cells: dict = {}
        self.cell_mode: dict = {}
        self._ids = itertools.count()
        self.out = out if out is not None else sys.stdout
        self.counters = {"cell_reads": 0, "premature_reads": 0, "premature_reads_new": 0}

    def new_ref(self, v) -> RefV:
        i = next(self._ids)
        self.heap[i] = v
        return RefV(i)

    def new_cell(self, mode: str) -> SelfCellV:
        i = next(self._ids)
        self.cells[i] = None
        self.cell_mode[i] = mode
        return SelfCellV(i)

    def read_cell(self, cell: int, span=None, label=None):
        self.counters["cell_reads"] += 1
        v = self.cells[cell]
        if v is None:
            self.counters["premature_reads"] += 1
            if self.cell_mode[cell] == "new":
                self.counters["premature_reads_new"] += 1
            what = f"method {label}" if label else "self"
            raise RuntimeFault("PrematureSelfAccess", f"{what} accessed on an object that is still under construction", span)
        return v

    def write(self, text: str):
        self.out.write(text)


# --- display -----------------------------------------------------------------------


def show_float(x: float) -> str:
    if math.isnan(x):
        return "NaN"
    if math.isinf(x):
        return "Infinity" if x > 0 else "-Infinity"
    text = repr(x)
    if "e" in text:
        mant, exp = text.split("e")
        if "." not in mant:
            mant += ".0"
        return f"{mant}e{int(exp)}"
    if "." not in text:
        text += ".0"
    return text


def show_string(s: str) -> str:
    out = []
    for i, ch in enumerate(s):
        if ch == "\\":
            out.append("\\\\")
        elif ch == '"':
            out.append('\\"')
        elif ch == "\n":
            out.append("\\n")
        elif ch == "\t":
            out.append("\\t")
        elif ord(ch) < 32 or ord(ch) == 127:
            out.append(f"\\{ord(ch)}")
            if s[i + 1 : i + 2].isdigit():
                out.append("\\&")
        else:
            out.append(ch)
    return '"' + "".join(out) + '"'


def show_value(v) -> str:
    if isinstance(v, bool):
        return "True" if v else "False"
    if isinstance(v, int):
        return str(v)
    if isinstance(v, float):
        return show_float(v)
    if isinstance(v, str):
        return show_string(v)
    if isinstance(v, tuple):
        if not v:
            return "()"
        return "(" + ",".join(show_value(x) for x in v) + ")"
    if isinstance(v, list):
        return "[" + ",".join(show_value(x) for x in v) + "]"
    if isinstance(v, UnionV):
        tag = "Left" if v.path and v.path[-1:] == ("L",) else "Right"
        return f"{tag} {show_value(v.payload)}"
    return f"<{type(v).__name__}>"


# --- interpreter ---------------------------------------------------------------------------


class _Thunk:
    __slots__ = ("expr", "value", "state")

    def __init__(self, expr):
        self.expr = expr
        self.value = None
        self.state = 0  # 0 unforced, 1 forcing, 2 done


class Interpreter:
    def __init__(self, notes: Notes | None = None, out=None):
        self.notes = notes or Notes()
        self.store = Store(out)
        self.globals: dict = {}
        self.prims = self._make_prims()

    # --- program level ----------------------------------------------------------
    def add_bindings(self, decls):
        for d in decls:
            if isinstance(d, A.LetDecl):
                body = A.Lam(d.params, d.body, span=d.span) if d.params else d.body
                self.globals[d.name] = _Thunk(body)

    def define_value(self, name, value):
        t = _Thunk(None)
        t.value, t.state = value, 2
        self.globals[name] = t

    def force(self, name, span=None):
        t = self.globals[name]
        if t.state == 2:
            return t.value
        if t.state == 1:
            raise RuntimeFault("UserFail", f"<<loop>> while evaluating {name}", span)
        t.state = 1
        try:
            t.value = self.eval(t.expr, {})
        except BaseException:
            t.state = 0
            raise
        t.state = 2
        return t.value

    def run_main(self):
        main = self.force("main")
        return self.run_action(main)

    # --- application ------------------------------------------------------------------
    def apply(self, f, arg):
        if isinstance(f, ClosureV):
            env = dict(f.env)
            env[f.params[0]] = arg
            if len(f.params) == 1:
                return self.eval(f.body, env)
            return ClosureV(f.params[1:], f.body, env)
        if isinstance(f, PrimV):
            args = f.args + (arg,)
            if len(args) == f.arity:
                return f.fn(*args)
            return PrimV(f.name, f.arity, f.fn, args)
        raise TypeError(f"cannot apply {f!r}")

    def run_action(self, a):
        if not isinstance(a, ActionV):
            raise TypeError(f"not an action: {a!r}")
        return a.run()

    # --- objects -----------------------------------------------------------------------
    def materialize(self, v, span=None):
        if isinstance(v, SelfCellV):
            return self.materialize(self.store.read_cell(v.cell, span), span)
        if isinstance(v, ViewV):
            base = self.materialize(v.base, span)
            return self.apply_plan(v.plan, base)
        return v

    def get_field(self, v, label, span=None):
        while True:
            if isinstance(v, RecordV):
                return v.fields[label]
            if isinstance(v, SelfCellV):
                v = self.store.read_cell(v.cell, span, label)
            elif isinstance(v, ViewV):
                if isinstance(v.plan, PerField):
                    sub = dict(v.plan.fields)[label]
                    return self.apply_plan(sub, self.get_field(v.base, label, span))
                v = v.base
            elif isinstance(v, (NominalV, UnionV)):
                v = v.payload
            elif isinstance(v, DynV):
                v = v.view
            else:
                raise TypeError(f"no field {label} in {v!r}")

    def project(self, v, labels):
        if isinstance(v, RecordV):
            return RecordV({l: v.fields[l] for l in labels})
        if isinstance(v, (SelfCellV, ViewV)):
            return ViewV(v, Project(tuple(labels)))
        if isinstance(v, DynV):
            return self.project(v.view, labels)
        if isinstance(v, (NominalV, UnionV)):
            return self.project(v.payload, labels)
        raise TypeError(f"cannot project {v!r}")

    def apply_plan(self, plan, v):
        if isinstance(plan, Identity):
            return v
        if isinstance(plan, Project):
            return self.project(v, plan.labels)
        if isinstance(plan, PerField):
            if isinstance(v, (SelfCellV, ViewV)):
                return ViewV(v, plan)
            return RecordV({l: self.apply_plan(p, self.get_field(v, l)) for l, p in plan.fields})
        if isinstance(plan, WrapFunction):
            return PrimV("coerce", 1, lambda x: self.apply_plan(plan.result, self.apply(v, self.apply_plan(plan.arg, x))))
        if isinstance(plan, WrapAction):
            return ActionV(lambda: self.apply_plan(plan.result, self.run_action(v)), "coerce")
        raise TypeError(plan)

    def update(self, v, label, new, span=None):
        v = self.materialize(v, span)
        if isinstance(v, RecordV):
            fs = dict(v.fields)
            fs[label] = new
            return RecordV(fs)
        if isinstance(v, NominalV):
            return NominalV(v.name, self.update(v.payload, label, new, span))
        raise TypeError(f"cannot update {v!r}")

    def record_of(self, v, span=None) -> RecordV:
        v = self.materialize(v, span)
        if isinstance(v, DynV):
            return self.record_of(v.view, span)
        if not isinstance(v, RecordV):
            raise TypeError(f"not a record: {v!r}")
        return v

    def construct_object(self, generator, mode: str):
        cell = self.store.new_cell(mode)
        result = self.run_action(self.apply(generator, cell))
        self.store.cells[cell.cell] = result
        return result

    # --- expressions ------------------------------------------------------------------
    def eval(self, e: A.Expr, env: dict):
        method = getattr(self, "_eval_" + type(e).__name__)
        return method(e, env)

    def _eval_Lit(self, e, env):
        if id(e) in self.notes.float_lits:
            return float(e.value)
        return e.value

    def _eval_Var(self, e, env):
        if e.name in env:
            return env[e.name]
        return self.force(e.name, e.span)

    def _eval_Builtin(self, e, env):
        return self.prims[e.name]

    def _eval_Ctor(self, e, env):
        return PrimV(e.name, 1, lambda x: x)

    def _eval_Lam(self, e, env):
        return ClosureV(tuple(e.params), e.body, env)

    def _eval_App(self, e, env):
        f = self.eval(e.fn, env)
        for a in e.args:
            f = self.apply(f, self.eval(a, env))
        return f

    def _eval_LetIn(self, e, env):
        v = self.eval(e.value, env)
        return self.eval(e.body, {**env, e.name: v})

    def _eval_Do(self, e, env):
        return ActionV(lambda: self._run_do(e.stmts, env), "do")

    def _run_do(self, stmts, env):
        env = dict(env)
        result = ()
        for st in stmts:
            try:
                if isinstance(st, A.LetStmt):
                    env[st.name] = self.eval(st.expr, env)
                    continue
                result = self.run_action(self.eval(st.expr, env))
            except RuntimeFault as f:
                if f.span is None:
                    f.span = st.span
                raise
            if isinstance(st, A.Bind):
                env[st.name] = result
        return result

    def _eval_FieldGet(self, e, env):
        return self.get_field(self.eval(e.obj, env), e.label, e.span)

    def _eval_EmptyRec(self, e, env):
        return RecordV({})

    def _eval_Extend(self, e, env):
        v = self.eval(e.value, env)
        base = self.record_of(self.eval(e.base, env), e.span)
        fs = dict(base.fields)
        fs[e.label] = v
        return RecordV(fs)

    def _eval_Update(self, e, env):
        v = self.eval(e.value, env)
        return self.update(self.eval(e.base, env), e.label, v, e.span)

    def _eval_RecUnion(self, e, env):
        left = self.record_of(self.eval(e.left, env), e.span)
        right = self.record_of(self.eval(e.right, env), e.span)
        fs = dict(right.fields)
        fs.update(left.fields)
        return RecordV(fs)

    def _eval_Annot(self, e, env):
        v = self.eval(e.expr, env)
        k = e.kind
        if k == "annotate":
            return v
        if k == "narrow":
            return self.project(v, self.notes.narrow_labels[id(e)])
        if k == "deepNarrow":
            return self.apply_plan(self.notes.deep_plans.get(id(e), IDENTITY), v)
        if k == "downCast":
            paths = self.notes.downcast_paths[id(e)]
            if isinstance(v, UnionV):
                return some(v.payload) if v.path in paths else NONE_VALUE
            return some(v) if () in paths else NONE_VALUE
        if k == "dynUpCast":
            full = self.materialize(v, e.span)
            return DynV(full, self.notes.dyn_full[id(e)], self.project(full, self.notes.narrow_labels[id(e)]))
        if k == "dynDownCast":
            target, source = self.notes.dyn_down[id(e)]
            if isinstance(v, DynV):
                return some(v.full) if v.type == target else NONE_VALUE
            return some(v) if source == target else NONE_VALUE
        if k == "nUpCast":
            return NominalV(e.type.name, v.payload if isinstance(v, NominalV) else v)
        raise AssertionError(k)

    def _eval_Nominate(self, e, env):
        return NominalV(e.nomination, self.eval(e.expr, env))

    def _eval_LubNil(self, e, env):
        return []

    def _eval_LubCons(self, e, env):
        h = self.eval(e.head, env)
        t = self.eval(e.tail, env)
        labels = self.notes.lub_labels.get(id(e))
        if labels is None:
            return [h] + list(t)
        return [self.project(x, labels) for x in [h] + list(t)]

    def _eval_UnionNil(self, e, env):
        return []

    def _eval_UnionCons(self, e, env):
        h = self.eval(e.head, env)
        t = self.eval(e.tail, env)
        if isinstance(e.tail, A.UnionNil):
            return [h]
        out = [UnionV(("L",), h)]
        for x in t:
            if isinstance(x, UnionV):
                out.append(UnionV(("R",) + x.path, x.payload))
            else:
                out.append(UnionV(("R",), x))
        return out

    def _eval_If(self, e, env):
        return self.eval(e.then if self.eval(e.cond, env) else e.else_, env)

    def _eval_ListLit(self, e, env):
        return [self.eval(i, env) for i in e.items]

    def _eval_PairLit(self, e, env):
        return (self.eval(e.first, env), self.eval(e.second, env))

    def _eval_BinOp(self, e, env):
        a = self.eval(e.left, env)
        b = self.eval(e.right, env)
        op = e.op
        if op == "+":
            return a + b
        if op == "-":
            return a - b
        if op == "*":
            return a * b
        if op == "/":
            if b == 0:
                raise RuntimeFault("DivisionByZero", "division by zero", e.span)
            if isinstance(a, int) and isinstance(b, int):
                return a // b
            return a / b
        if op == "==":
            return a == b
        if op == "<":
            return a < b
        if op == "++":
            return a + b
        raise AssertionError(op)

    # --- builtins ------------------------------------------------------------------------
    def _make_prims(self):
        st = self.store

        def act(fn, name):
            return ActionV(fn, name)

        def write_ref(r, v):
            def run():
                st.heap[r.id] = v
                return ()
            return act(run, "writeRef")

        def modify_ref(r, f):
            def run():
                st.heap[r.id] = self.apply(f, st.heap[r.id])
                return ()
            return act(run, "modifyRef")

        def fail(msg):
            def run():
                raise RuntimeFault("UserFail", msg)
            return act(run, "fail")

        def map_m(f, xs):
            def run():
                for x in xs:
                    self.run_action(self.apply(f, x))
                return ()
            return act(run, "mapM_")

        def maybe(d, f, m):
            if isinstance(m, UnionV) and m.path == ("L",):
                return self.apply(f, m.payload)
            return d

        def anonymize(v):
            return v.payload if isinstance(v, NominalV) else v

        table = {
            "return": (1, lambda x: act(lambda: x, "return")),
            "newRef": (1, lambda x: act(lambda: st.new_ref(x), "newRef")),
            "readRef": (1, lambda r: act(lambda: st.heap[r.id], "readRef")),
            "writeRef": (2, write_ref),
            "modifyRef": (2, modify_ref),
            "print": (1, lambda x: act(lambda: st.write(show_value(x) + "\n") or (), "print")),
            "putStr": (1, lambda s: act(lambda: st.write(s) or (), "putStr")),
            "putStrLn": (1, lambda s: act(lambda: st.write(s + "\n") or (), "putStrLn")),
            "show": (1, show_value),
            "fail": (1, fail),
            "mapM_": (2, map_m),
            "maybe": (3, maybe),
            "fix": (1, lambda g: act(lambda: self.construct_object(g, "fix"), "fix")),
            "new": (1, lambda g: act(lambda: self.construct_object(g, "new"), "new")),
            "construct": (2, lambda s, f: act(lambda: self.apply(f, s), "construct")),
            "concrete": (2, lambda g, s: self.apply(g, s)),
            "abs": (1, abs),
            "negate": (1, lambda x: -x),
            "fst": (1, lambda p: p[0]),
            "snd": (1, lambda p: p[1]),
            "anonymize": (1, anonymize),
        }
        return {name: PrimV(name, arity, fn) for name, (arity, fn) in table.items()}
