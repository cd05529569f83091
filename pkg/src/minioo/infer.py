"""Constraint-based type inference for MiniOO.

Hindley-Milner with qualified types.  Field access, record extension and the
various casts produce deferred constraints that are solved as soon as the
types involved are known.  Generalization happens only for top-level
bindings, one strongly connected dependency group at a time.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass, field, fields, replace

from .diagnostics import NO_SPAN, SourceSpan, TypeCheckError
from .syntax import ast as A
from .syntax.parser import parse_type
from .typesys import (
    BOOL,
    EMPTY_ROW,
    FLOAT,
    INT,
    STRING,
    UNIT,
    DuplicateLabel,
    NominalGraph,
    NotDeepSubtype,
    Row,
    RowError,
    TAction,
    TCon,
    TFun,
    TList,
    TNamed,
    TNominal,
    TNotFixed,
    TPair,
    TRecord,
    TRef,
    TUnion,
    TVar,
    Type,
    TypePrinter,
    children,
    derive_deep_narrow,
    display_label,
    free_vars,
    fun,
    is_ancestor,
    is_ground,
    map_type,
    row_extend,
    row_project,
    row_union_left,
    substitute,
)

# --- constraints ----------------------------------------------------------------


@dataclass(eq=False)
class Constraint:
    span: SourceSpan | None = field(default=None, kw_only=True)

    def types(self):
        return [getattr(self, f.name) for f in fields(self) if isinstance(getattr(self, f.name), Type)]

    def map(self, f):
        changes = {fl.name: f(getattr(self, fl.name)) for fl in fields(self) if isinstance(getattr(self, fl.name), Type)}
        return replace(self, **changes)


@dataclass(eq=False)
class HasField(Constraint):
    label: str
    rec: Type
    field_type: Type


@dataclass(eq=False)
class Lacks(Constraint):
    label: str
    rec: Type


@dataclass(eq=False)
class Extend(Constraint):
    """result = base extended with label : field_type (label must be absent)."""
    label: str
    field_type: Type
    base: Type
    result: Type


@dataclass(eq=False)
class Narrowable(Constraint):
    source: Type
    target: Type


@dataclass(eq=False)
class DeepNarrowable(Constraint):
    source: Type
    target: Type
    node: object = None


@dataclass(eq=False)
class DownCastable(Constraint):
    union: Type
    target: Type
    node: object = None


@dataclass(eq=False)
class DynCastPair(Constraint):
    full: Type
    view: Type
    node: object = None


@dataclass(eq=False)
class DynDownCast(Constraint):
    source: Type
    target: Type
    node: object = None


@dataclass(eq=False)
class AncestorOf(Constraint):
    child: Type
    ancestor: Type


@dataclass(eq=False)
class ClassC(Constraint):
    cls: str  # Num Show Eq Pure
    type: Type


@dataclass(eq=False)
class LubCons(Constraint):
    head: Type
    tail: Type
    result: Type
    node: object = None


@dataclass(eq=False)
class LeftUnion(Constraint):
    left: Type
    right: Type
    result: Type
    node: object = None


@dataclass(eq=False)
class Concrete(Constraint):
    self_type: Type
    result: Type


# must be discharged inside the binding that produced them
MUST_RESOLVE = (DeepNarrowable, DownCastable, DynCastPair, DynDownCast, LubCons, LeftUnion)


@dataclass
class Scheme:
    vars: tuple
    constraints: tuple
    type: Type

    @staticmethod
    def mono(t: Type) -> "Scheme":
        return Scheme((), (), t)


@dataclass
class NamedDef:
    name: str
    params: tuple  # TVar ids
    body: Type


@dataclass
class Alias:
    name: str
    params: tuple  # names
    body: A.TypeExpr


@dataclass
class Notes:
    """Facts the evaluator needs, keyed by id() of AST nodes."""
    float_lits: set = field(default_factory=set)
    narrow_labels: dict = field(default_factory=dict)
    deep_plans: dict = field(default_factory=dict)
    downcast_paths: dict = field(default_factory=dict)
    dyn_full: dict = field(default_factory=dict)
    dyn_down: dict = field(default_factory=dict)
    lub_labels: dict = field(default_factory=dict)


# --- builtins -------------------------------------------------------------------

BUILTIN_SIGS = {
    "return": ("a -> IO a", ()),
    "newRef": ("a -> IO (Ref a)", ()),
    "readRef": ("Ref a -> IO a", ()),
    "writeRef": ("Ref a -> a -> IO ()", ()),
    "modifyRef": ("Ref a -> (a -> a) -> IO ()", ()),
    "print": ("a -> IO ()", (("Show", "a"),)),
    "putStr": ("String -> IO ()", ()),
    "putStrLn": ("String -> IO ()", ()),
    "show": ("a -> String", (("Show", "a"),)),
    "fail": ("String -> IO a", ()),
    "mapM_": ("(a -> IO b) -> [a] -> IO ()", ()),
    "maybe": ("b -> (a -> b) -> Either a () -> b", ()),
    "fix": ("(a -> IO a) -> IO a", ()),
    "new": ("(NotFixed a -> IO (NotFixed a)) -> IO a", ()),
    "construct": ("NotFixed a -> (a -> b) -> IO (NotFixed b)", (("Pure", "b"),)),
    "concrete": ("(s -> IO t) -> s -> IO t", (("Concrete", "s", "t"),)),
    "abs": ("a -> a", (("Num", "a"),)),
    "negate": ("a -> a", (("Num", "a"),)),
    "fst": ("(a, b) -> a", ()),
    "snd": ("(a, b) -> b", ()),
    "anonymize": ("N f x -> x", ()),
}

SHOWABLE_BASES = ("Int", "Float", "Bool", "String", "()")


def _node_span(node):
    return getattr(node, "span", None)


class Checker:
    def __init__(self):
        self.subst: dict = {}
        self._ids = itertools.count(1)
        self.pending: list = []
        self.globals: dict = {}  # name -> Scheme
        self.group_mono: dict = {}  # names of the group being checked -> monotype
        self.named: dict = {}
        self.aliases: dict = {}
        self.nominals = NominalGraph()
        self.notes = Notes()
        self.annot_vars: dict = {}
        self.lit_log: list = []
        self._builtins = {}
        for name, (sig, cs) in BUILTIN_SIGS.items():
            self._builtins[name] = self._builtin_scheme(sig, cs)

    # --- basics -------------------------------------------------------------------
    def fresh(self) -> TVar:
        return TVar(next(self._ids))

    def resolve(self, t: Type) -> Type:
        while isinstance(t, TVar) and t.id in self.subst:
            t = self.subst[t.id]
        return t

    def zonk(self, t: Type) -> Type:
        t = self.resolve(t)
        if isinstance(t, TVar):
            return t
        return map_type(t, self.zonk)

    def printer(self) -> TypePrinter:
        names: dict = {}
        gen = _name_supply("a")

        class _P(TypePrinter):
            def var(p, v):
                if v.id not in names:
                    names[v.id] = next(gen)
                return names[v.id]

        return _P(names)

    def show(self, *ts):
        p = self.printer()
        out = [p.show(self.zonk(t)) for t in ts]
        return out[0] if len(out) == 1 else out

    def error(self, kind, msg, span):
        return TypeCheckError(kind, msg, span or NO_SPAN)

    # --- unification -------------------------------------------------------------
    def occurs(self, vid: int, t: Type) -> bool:
        t = self.resolve(t)
        if isinstance(t, TVar):
            return t.id == vid
        return any(self.occurs(vid, c) for c in children(t))

    def bind(self, v: TVar, t: Type, span):
        if isinstance(t, TVar) and t.id == v.id:
            return
        if self.occurs(v.id, t):
            a, b = self.show(v, t)
            raise self.error("InfiniteType", f"cannot construct the infinite type: {a} = {b}", span)
        self.subst[v.id] = t

    def unify(self, t1: Type, t2: Type, span=None):
        a, b = self.resolve(t1), self.resolve(t2)
        if a is b or (isinstance(a, TVar) and isinstance(b, TVar) and a.id == b.id):
            return
        if isinstance(a, TVar):
            return self.bind(a, b, span)
        if isinstance(b, TVar):
            return self.bind(b, a, span)
        if type(a) is not type(b):
            self._mismatch(a, b, span)
        if isinstance(a, TCon):
            if a.name != b.name:
                self._mismatch(a, b, span)
            return
        if isinstance(a, TRecord):
            la, lb = a.row.labels(), b.row.labels()
            if la != lb:
                diff = sorted(la ^ lb)
                x, y = self.show(a, b)
                raise self.error(
                    "MissingField",
                    f"records disagree on field(s) {', '.join(diff)}: {x} vs {y}",
                    span,
                )
            for (l, ta), (_, tb) in zip(a.row.entries, b.row.entries):
                self.unify(ta, tb, span)
            return
        if isinstance(a, TNamed):
            if a.name != b.name or len(a.args) != len(b.args):
                self._mismatch(a, b, span)
        for ca, cb in zip(children(a), children(b)):
            self.unify(ca, cb, span)

    def _mismatch(self, a, b, span):
        x, y = self.show(a, b)
        raise self.error("Mismatch", f"cannot match {x} with {y}", span)

    # --- types from annotations ---------------------------------------------------
    def _builtin_scheme(self, sig, cs):
        varmap: dict = {}
        t = self.convert(parse_type(sig), varmap)
        constraints = []
        for c in cs:
            if c[0] == "Concrete":
                constraints.append(Concrete(varmap[c[1]], varmap[c[2]]))
            else:
                constraints.append(ClassC(c[0], varmap[c[1]]))
        return Scheme(tuple(v.id for v in varmap.values()), tuple(constraints), t)

    def convert(self, te: A.TypeExpr, varmap: dict) -> Type:
        sp = te.span
        if isinstance(te, A.TyBase):
            return TCon(te.name)
        if isinstance(te, A.TyVar):
            if te.name not in varmap:
                varmap[te.name] = self.fresh()
            return varmap[te.name]
        if isinstance(te, A.TyIO):
            return TAction(self.convert(te.inner, varmap))
        if isinstance(te, A.TyRef):
            return TRef(self.convert(te.inner, varmap))
        if isinstance(te, A.TyNotFixed):
            return TNotFixed(self.convert(te.inner, varmap))
        if isinstance(te, A.TyList):
            return TList(self.convert(te.inner, varmap))
        if isinstance(te, A.TyPair):
            return TPair(self.convert(te.first, varmap), self.convert(te.second, varmap))
        if isinstance(te, A.TyFun):
            return TFun(self.convert(te.arg, varmap), self.convert(te.result, varmap))
        if isinstance(te, A.TyEither):
            return TUnion(self.convert(te.left, varmap), self.convert(te.right, varmap))
        if isinstance(te, A.TyRecord):
            try:
                return TRecord(Row.from_pairs((l, self.convert(t, varmap)) for l, t in te.fields))
            except DuplicateLabel as e:
                raise self.error("DuplicateLabel", f"duplicate label {e.label} in record type", sp)
        if isinstance(te, A.TyNominal):
            if te.nomination[:1].isupper():
                if te.nomination not in self.nominals:
                    raise self.error("UnboundName", f"unknown nomination {te.nomination}", sp)
                nom = TCon(te.nomination)
            else:
                if te.nomination not in varmap:
                    varmap[te.nomination] = self.fresh()
                nom = varmap[te.nomination]
            return TNominal(nom, self.convert(te.inner, varmap))
        if isinstance(te, A.TyName):
            args = [self.convert(a, varmap) for a in te.args]
            if te.name in self.named:
                d = self.named[te.name]
                if len(args) != len(d.params):
                    raise self.error("Mismatch", f"type {te.name} expects {len(d.params)} argument(s), got {len(args)}", sp)
                return TNamed(te.name, tuple(args))
            if te.name in self.aliases:
                al = self.aliases[te.name]
                if len(args) != len(al.params):
                    raise self.error("Mismatch", f"type {te.name} expects {len(al.params)} argument(s), got {len(args)}", sp)
                return self.convert(al.body, dict(zip(al.params, args)))
            raise self.error("UnboundName", f"unknown type {te.name}", sp)
        raise TypeError(te)

    def unfold(self, t: TNamed) -> Type:
        d = self.named[t.name]
        return substitute(d.body, dict(zip(d.params, t.args)))

    # --- declarations -----------------------------------------------------------
    def declare_type(self, d: A.TypeDecl):
        if d.name in self.named or d.name in self.aliases:
            raise self.error("DuplicateLabel", f"type {d.name} declared twice", d.span)
        if len(set(d.params)) != len(d.params):
            raise self.error("DuplicateLabel", f"repeated type parameter in {d.name}", d.span)
        used = {n.name for n in d.body.walk() if isinstance(n, A.TyVar)}
        extra = sorted(used - set(d.params))
        if extra:
            raise self.error("UnboundName", f"type variable {extra[0]} is not a parameter of {d.name}", d.span)
        recursive = any(isinstance(n, A.TyName) and n.name == d.name for n in d.body.walk())
        if not recursive:
            self.aliases[d.name] = Alias(d.name, d.params, d.body)
            return
        varmap = {p: self.fresh() for p in d.params}
        params = tuple(varmap[p].id for p in d.params)
        self.named[d.name] = NamedDef(d.name, params, UNIT)
        try:
            body = self.convert(d.body, dict(varmap))
        except TypeCheckError:
            del self.named[d.name]
            raise
        self.named[d.name] = NamedDef(d.name, params, body)

    def declare_nominal(self, d: A.NominalDecl):
        for p in d.parents:
            if p not in self.nominals:
                raise self.error("UnboundName", f"unknown nomination {p}", d.span)
        if d.name in self.nominals:
            raise self.error("DuplicateLabel", f"nomination {d.name} declared twice", d.span)
        self.nominals.declare(d.name, d.parents)

    # --- constraint plumbing -----------------------------------------------------
    def emit(self, c: Constraint):
        if not self.try_solve(c):
            self.pending.append(c)

    def solve(self):
        progress = True
        while progress:
            progress = False
            for c in list(self.pending):
                if c not in self.pending:
                    continue
                self.pending.remove(c)
                if self.try_solve(c):
                    progress = True
                else:
                    self.pending.append(c)

    def instantiate(self, s: Scheme, span) -> Type:
        mapping = {v: self.fresh() for v in s.vars}
        for c in s.constraints:
            inst = c.map(lambda t: substitute(t, mapping))
            inst.span = span
            self.emit(inst)
        return substitute(s.type, mapping)

    def _object_row(self, t: Type):
        """Row of a record seen through nominal and named wrappers, or None."""
        t = self.resolve(t)
        while True:
            if isinstance(t, TNominal):
                t = self.resolve(t.payload)
            elif isinstance(t, TNamed):
                t = self.resolve(self.unfold(t))
            else:
                break
        return t.row if isinstance(t, TRecord) else None

    def try_solve(self, c: Constraint) -> bool:
        method = getattr(self, "_solve_" + type(c).__name__)
        return method(c)

    def _solve_HasField(self, c: HasField) -> bool:
        r = self.resolve(c.rec)
        if isinstance(r, TVar):
            return False
        if isinstance(r, TRecord):
            ft = r.row.get(c.label)
            if ft is None:
                rec, want = self.show(r, c.field_type)
                raise self.error(
                    "MissingField",
                    f"no field {c.label} in {rec} (wanted {display_label(c.label)} :=: {want})",
                    c.span,
                )
            self.unify(ft, c.field_type, c.span)
            return True
        if isinstance(r, TNominal):
            self.emit(HasField(c.label, r.payload, c.field_type, span=c.span))
            return True
        if isinstance(r, TNamed):
            self.emit(HasField(c.label, self.unfold(r), c.field_type, span=c.span))
            return True
        if isinstance(r, TUnion):
            self.emit(HasField(c.label, r.left, c.field_type, span=c.span))
            self.emit(HasField(c.label, r.right, c.field_type, span=c.span))
            return True
        if isinstance(r, TNotFixed):
            raise self.error(
                "PrematureSelfAccess",
                f"cannot invoke {c.label} on a not-yet-constructed object of type {self.show(r)}",
                c.span,
            )
        raise self.error("MissingField", f"no field {c.label}: {self.show(r)} is not an object", c.span)

    def _solve_Lacks(self, c: Lacks) -> bool:
        r = self.resolve(c.rec)
        if isinstance(r, TVar):
            return False
        if isinstance(r, TRecord):
            if c.label in r.row:
                raise self.error("DuplicateLabel", f"duplicate label {c.label} in {self.show(r)}", c.span)
            return True
        raise self.error("Mismatch", f"cannot extend {self.show(r)}: not a record", c.span)

    def _solve_Extend(self, c: Extend) -> bool:
        r = self.resolve(c.base)
        if isinstance(r, TVar):
            return False
        if not isinstance(r, TRecord):
            raise self.error("Mismatch", f"cannot extend {self.show(r)} with {c.label}: not a record", c.span)
        if c.label in r.row:
            raise self.error("DuplicateLabel", f"duplicate label {c.label} in {self.show(r)}", c.span)
        self.unify(c.result, TRecord(row_extend(r.row, c.label, c.field_type)), c.span)
        return True

    def _solve_LeftUnion(self, c: LeftUnion) -> bool:
        a, b = self.resolve(c.left), self.resolve(c.right)
        for side in (a, b):
            if not isinstance(side, (TVar, TRecord)):
                raise self.error("Mismatch", f"left-biased union needs records, got {self.show(side)}", c.span)
        if isinstance(a, TVar) or isinstance(b, TVar):
            return False
        self.unify(c.result, TRecord(row_union_left(a.row, b.row)), c.span)
        return True

    def _narrow_view(self, t):
        t = self.resolve(t)
        if isinstance(t, TNamed):
            t = self.resolve(self.unfold(t))
        return t

    def _solve_Narrowable(self, c: Narrowable) -> bool:
        s, t = self._narrow_view(c.source), self._narrow_view(c.target)
        if isinstance(s, TVar) or isinstance(t, TVar):
            return False
        if not isinstance(s, TRecord) or not isinstance(t, TRecord):
            x, y = self.show(s, t)
            raise self.error("NotNarrowable", f"cannot narrow {x} to {y}", c.span)
        missing = sorted(t.row.labels() - s.row.labels())
        if missing:
            x, y = self.show(s, t)
            raise self.error("NotNarrowable", f"cannot narrow: missing field(s) {', '.join(missing)} ({x} to {y})", c.span)
        sd = s.row.as_dict()
        for l, ft in t.row.entries:
            self.unify(sd[l], ft, c.span)
        return True

    def _solve_DeepNarrowable(self, c: DeepNarrowable) -> bool:
        s, t = self.zonk(c.source), self.zonk(c.target)
        if not (is_ground(s) and is_ground(t)):
            return False
        try:
            plan = derive_deep_narrow(s, t)
        except NotDeepSubtype as e:
            where = e.path or "<top>"
            detail = f" ({e.detail})" if e.detail else ""
            x, y = self.show(e.source, e.target)
            raise self.error("NotDeepSubtype", f"not a deep subtype at {where}{detail}: {x} vs {y}", c.span)
        self.notes.deep_plans[id(c.node)] = plan
        return True

    def union_branches(self, u: Type, prefix=()):
        u = self.zonk(u)
        if not isinstance(u, TUnion):
            return [(prefix, u)]
        out = [(prefix + ("L",), u.left)]
        right = self.zonk(u.right)
        if isinstance(right, TUnion):
            out.extend(self.union_branches(right, prefix + ("R",)))
        else:
            out.append((prefix + ("R",), right))
        return out

    def _solve_DownCastable(self, c: DownCastable) -> bool:
        u, t = self.zonk(c.union), self.zonk(c.target)
        if not (is_ground(u) and is_ground(t)):
            return False
        paths = frozenset(p for p, b in self.union_branches(u) if b == t)
        if not paths:
            x, y = self.show(t, u)
            raise self.error("StupidCast", f"downcast to {x} can never succeed: not a branch of {y}", c.span)
        self.notes.downcast_paths[id(c.node)] = paths
        return True

    def _solve_DynCastPair(self, c: DynCastPair) -> bool:
        full = self.zonk(c.full)
        if not is_ground(full):
            return False
        self.notes.dyn_full[id(c.node)] = full
        return True

    def _solve_DynDownCast(self, c: DynDownCast) -> bool:
        s, t = self.zonk(c.source), self.zonk(c.target)
        if not (is_ground(s) and is_ground(t)):
            return False
        self.notes.dyn_down[id(c.node)] = (t, s)
        return True

    def _solve_AncestorOf(self, c: AncestorOf) -> bool:
        ch, an = self.resolve(c.child), self.resolve(c.ancestor)
        if isinstance(ch, TVar) or isinstance(an, TVar):
            return False
        if not is_ancestor(self.nominals, ch.name, an.name):
            raise self.error("NotAncestor", f"{an.name} is not an ancestor of {ch.name}", c.span)
        return True

    def _solve_ClassC(self, c: ClassC) -> bool:
        t = self.resolve(c.type)
        if isinstance(t, TVar):
            return False
        ok = True
        if c.cls == "Num":
            ok = t in (INT, FLOAT)
        elif c.cls in ("Show", "Eq"):
            if isinstance(t, TCon) and t.name in SHOWABLE_BASES:
                ok = True
            elif isinstance(t, TPair):
                self.emit(ClassC(c.cls, t.first, span=c.span))
                self.emit(ClassC(c.cls, t.second, span=c.span))
            elif isinstance(t, TList):
                self.emit(ClassC(c.cls, t.elem, span=c.span))
            else:
                ok = False
        elif c.cls == "Pure":
            ok = not isinstance(t, TAction)
            if not ok:
                raise self.error("ClassError", f"the function given to construct must not perform actions: {self.show(t)}", c.span)
        if not ok:
            raise self.error("ClassError", f"no {c.cls} instance for {self.show(t)}", c.span)
        return True

    def _solve_LubCons(self, c: LubCons) -> bool:
        h, e = self._narrow_view(c.head), self._narrow_view(c.tail)
        for side in (h, e):
            if not isinstance(side, (TVar, TRecord)):
                raise self.error("Mismatch", f"lubCons needs objects, got {self.show(side)}", c.span)
        if isinstance(h, TVar) or isinstance(e, TVar):
            return False
        shared = h.row.labels() & e.row.labels()
        hd, ed = h.row.as_dict(), e.row.as_dict()
        for l in sorted(shared):
            try:
                self.unify(hd[l], ed[l], c.span)
            except TypeCheckError:
                x, y = self.show(hd[l], ed[l])
                raise self.error("Mismatch", f"shared field {l} has different types in lubCons: {x} vs {y}", c.span)
        self.unify(c.result, TRecord(row_project(h.row, shared)), c.span)
        self.notes.lub_labels[id(c.node)] = tuple(sorted(shared))
        return True

    def _solve_Concrete(self, c: Concrete) -> bool:
        s = self.resolve(c.self_type)
        row = self._object_row(c.result)
        if row is None:
            return False
        if isinstance(s, TVar):
            missing = []
            have = row.as_dict()
            for other in self.pending:
                if isinstance(other, HasField) and self.resolve(other.rec) == s and other.label not in have:
                    missing.append(f"{other.label} :: {self.show(other.field_type)}")
                if isinstance(other, Narrowable) and self.resolve(other.source) == s:
                    trow = self._object_row(other.target)
                    if trow is not None:
                        missing.extend(f"{l} :: {self.show(t)}" for l, t in trow.entries if l not in have)
            if missing:
                raise self.error("NotConcrete", "generator is not concrete; missing " + ", ".join(sorted(set(missing))), c.span)
        self.unify(c.self_type, c.result, c.span)
        return True

    # --- expressions -------------------------------------------------------------
    def infer(self, e: A.Expr, env: dict) -> Type:
        method = getattr(self, "_infer_" + type(e).__name__)
        return method(e, env)

    def _infer_Lit(self, e: A.Lit, env):
        v = e.value
        if isinstance(v, bool):
            return BOOL
        if isinstance(v, int):
            a = self.fresh()
            self.emit(ClassC("Num", a, span=e.span))
            self.lit_log.append((e, a))
            return a
        if isinstance(v, float):
            return FLOAT
        if isinstance(v, str):
            return STRING
        return UNIT

    def _infer_Var(self, e: A.Var, env):
        if e.name in env:
            return env[e.name]
        if e.name in self.group_mono:
            return self.group_mono[e.name]
        if e.name in self.globals:
            return self.instantiate(self.globals[e.name], e.span)
        raise self.error("UnboundName", f"unbound name {e.name}", e.span)

    def _infer_Builtin(self, e: A.Builtin, env):
        return self.instantiate(self._builtins[e.name], e.span)

    def _infer_Ctor(self, e: A.Ctor, env):
        d = self.named.get(e.name)
        if d is None:
            what = "a type alias, not a recursive type" if e.name in self.aliases else "not a declared type"
            raise self.error("UnboundName", f"{e.name} is {what}", e.span)
        args = tuple(self.fresh() for _ in d.params)
        named = TNamed(e.name, args)
        return TFun(self.unfold(named), named)

    def _infer_Lam(self, e: A.Lam, env):
        env = dict(env)
        params = []
        for p in e.params:
            v = self.fresh()
            env[p] = v
            params.append(v)
        return fun(*params, self.infer(e.body, env))

    def _infer_App(self, e: A.App, env):
        ft = self.infer(e.fn, env)
        for arg in e.args:
            at = self.infer(arg, env)
            r = self.fresh()
            self.unify(ft, TFun(at, r), arg.span or e.span)
            ft = r
        if isinstance(e.fn, A.Builtin) and e.fn.name == "concrete":
            self.solve()
        return ft

    def _infer_LetIn(self, e: A.LetIn, env):
        t = self.infer(e.value, env)
        return self.infer(e.body, {**env, e.name: t})

    def _infer_Do(self, e: A.Do, env):
        env = dict(env)
        last = len(e.stmts) - 1
        result = UNIT
        for i, st in enumerate(e.stmts):
            if isinstance(st, A.Bind):
                a = self.fresh()
                self.unify(self.infer(st.expr, env), TAction(a), st.span)
                env[st.name] = a
            elif isinstance(st, A.LetStmt):
                env[st.name] = self.infer(st.expr, env)
            else:
                a = self.fresh()
                self.unify(self.infer(st.expr, env), TAction(a), st.span)
                if i == last:
                    result = a
        return TAction(result)

    def _infer_FieldGet(self, e: A.FieldGet, env):
        o = self.infer(e.obj, env)
        v = self.fresh()
        self.emit(HasField(e.label, o, v, span=e.span))
        return v

    def _infer_EmptyRec(self, e, env):
        return TRecord(EMPTY_ROW)

    def _infer_Extend(self, e: A.Extend, env):
        tv = self.infer(e.value, env)
        tb = self.infer(e.base, env)
        r = self.fresh()
        self.emit(Extend(e.label, tv, tb, r, span=e.span))
        return r

    def _infer_Update(self, e: A.Update, env):
        tv = self.infer(e.value, env)
        tb = self.infer(e.base, env)
        self.emit(HasField(e.label, tb, tv, span=e.span))
        return tb

    def _infer_RecUnion(self, e: A.RecUnion, env):
        tl = self.infer(e.left, env)
        tr = self.infer(e.right, env)
        r = self.fresh()
        self.emit(LeftUnion(tl, tr, r, e, span=e.span))
        return r

    def _record_target(self, t: Type, span, what):
        view = self._narrow_view(t)
        if not isinstance(view, TRecord):
            raise self.error("NotNarrowable", f"the target of {what} must be an object type, not {self.show(t)}", span)
        return view

    def _infer_Annot(self, e: A.Annot, env):
        t = self.infer(e.expr, env)
        if e.kind == "nUpCast":
            g = e.type.name
            if g not in self.nominals:
                raise self.error("UnboundName", f"unknown nomination {g}", e.type.span or e.span)
            f, x = self.fresh(), self.fresh()
            self.unify(t, TNominal(f, x), e.expr.span or e.span)
            self.emit(AncestorOf(f, TCon(g), span=e.span))
            return TNominal(TCon(g), x)
        target = self.convert(e.type, self.annot_vars)
        if e.kind == "annotate":
            self.unify(t, target, e.span)
            return target
        if e.kind == "narrow":
            view = self._record_target(target, e.span, "narrow")
            self.notes.narrow_labels[id(e)] = tuple(sorted(view.row.labels()))
            self.emit(Narrowable(t, target, span=e.span))
            return target
        if e.kind == "deepNarrow":
            self.emit(DeepNarrowable(t, target, e, span=e.span))
            return target
        if e.kind == "downCast":
            self.emit(DownCastable(t, target, e, span=e.span))
            return TUnion(target, UNIT)
        if e.kind == "dynUpCast":
            view = self._record_target(target, e.span, "dynUpCast")
            self.notes.narrow_labels[id(e)] = tuple(sorted(view.row.labels()))
            self.emit(Narrowable(t, target, span=e.span))
            self.emit(DynCastPair(t, target, e, span=e.span))
            return target
        if e.kind == "dynDownCast":
            self._record_target(target, e.span, "dynDownCast")
            self.emit(Narrowable(target, t, span=e.span))
            self.emit(DynDownCast(t, target, e, span=e.span))
            return TUnion(target, UNIT)
        raise AssertionError(e.kind)

    def _infer_Nominate(self, e: A.Nominate, env):
        if e.nomination not in self.nominals:
            raise self.error("UnboundName", f"unknown nomination {e.nomination}", e.span)
        return TNominal(TCon(e.nomination), self.infer(e.expr, env))

    def _infer_LubNil(self, e, env):
        return TList(self.fresh())

    def _infer_LubCons(self, e: A.LubCons, env):
        th = self.infer(e.head, env)
        tt = self.infer(e.tail, env)
        elem = self.fresh()
        self.unify(tt, TList(elem), e.tail.span or e.span)
        if isinstance(e.tail, A.LubNil):
            self.unify(elem, th, e.span)
            return TList(th)
        r = self.fresh()
        self.emit(LubCons(th, elem, r, e, span=e.span))
        return TList(r)

    def _infer_UnionNil(self, e, env):
        return TList(self.fresh())

    def _infer_UnionCons(self, e: A.UnionCons, env):
        th = self.infer(e.head, env)
        tt = self.infer(e.tail, env)
        elem = self.fresh()
        self.unify(tt, TList(elem), e.tail.span or e.span)
        if isinstance(e.tail, A.UnionNil):
            self.unify(elem, th, e.span)
            return TList(th)
        return TList(TUnion(th, elem))

    def _infer_If(self, e: A.If, env):
        self.unify(self.infer(e.cond, env), BOOL, e.cond.span)
        t = self.infer(e.then, env)
        self.unify(t, self.infer(e.else_, env), e.else_.span)
        return t

    def _infer_ListLit(self, e: A.ListLit, env):
        a = self.fresh()
        for item in e.items:
            self.unify(a, self.infer(item, env), item.span)
        return TList(a)

    def _infer_PairLit(self, e: A.PairLit, env):
        return TPair(self.infer(e.first, env), self.infer(e.second, env))

    def _infer_BinOp(self, e: A.BinOp, env):
        tl = self.infer(e.left, env)
        tr = self.infer(e.right, env)
        if e.op == "++":
            self.unify(tl, STRING, e.left.span)
            self.unify(tr, STRING, e.right.span)
            return STRING
        self.unify(tl, tr, e.span)
        if e.op == "==":
            self.emit(ClassC("Eq", tl, span=e.span))
            return BOOL
        self.emit(ClassC("Num", tl, span=e.span))
        return BOOL if e.op == "<" else tl

    # --- top-level bindings -----------------------------------------------------------
    def check_group(self, decls: list) -> dict:
        """Infer, solve and generalize one dependency group.  Returns name -> Scheme."""
        saved = self.pending
        self.pending = []
        self.lit_log = []
        self.group_mono = {d.name: self.fresh() for d in decls}
        try:
            for d in decls:
                self.annot_vars = {}
                body = A.Lam(d.params, d.body, span=d.span) if d.params else d.body
                self.unify(self.group_mono[d.name], self.infer(body, {}), d.span)
            self.solve()
            return self.finalize(decls)
        finally:
            self.pending = saved
            self.group_mono = {}

    def _reachable(self, roots: set) -> set:
        reach = set(roots)
        changed = True
        while changed:
            changed = False
            for c in self.pending:
                vs = set()
                for t in c.types():
                    free_vars(self.zonk(t), _ListSet(vs))
                if vs & reach and not vs <= reach:
                    reach |= vs
                    changed = True
        return reach

    def _constraint_vars(self, c) -> set:
        vs: set = set()
        for t in c.types():
            free_vars(self.zonk(t), _ListSet(vs))
        return vs

    def finalize(self, decls) -> dict:
        types = {d.name: self.zonk(self.group_mono[d.name]) for d in decls}
        fn_roots = set()
        for t in types.values():
            if isinstance(t, TFun):
                fn_roots |= set(free_vars(t))
        keep = self._reachable(fn_roots)
        defaulted = False
        for c in list(self.pending):
            if isinstance(c, ClassC) and c.cls == "Num":
                t = self.resolve(c.type)
                if isinstance(t, TVar) and t.id not in keep:
                    self.unify(t, INT, c.span)
                    defaulted = True
        if defaulted:
            self.solve()
        for c in self.pending:
            if isinstance(c, MUST_RESOLVE):
                raise self.error("AmbiguousRow", f"cannot resolve {describe(c)}: the object types involved are not known here", c.span)
        types = {d.name: self.zonk(self.group_mono[d.name]) for d in decls}
        all_roots = set()
        for t in types.values():
            all_roots |= set(free_vars(t))
        reach = self._reachable(all_roots)
        for c in self.pending:
            vs = self._constraint_vars(c)
            if not vs & reach:
                kind = "ClassError" if isinstance(c, ClassC) else "AmbiguousRow"
                raise self.error(kind, f"ambiguous constraint {self.pretty_constraint(c)}", c.span)
        for e, a in self.lit_log:
            if self.zonk(a) == FLOAT:
                self.notes.float_lits.add(id(e))
        schemes = {}
        for d in decls:
            t = types[d.name]
            mine = self._reachable(set(free_vars(t)))
            cs = tuple(c.map(self.zonk) for c in self.pending if self._constraint_vars(c) <= mine)
            vs = list(free_vars(t))
            for c in cs:
                for ct in c.types():
                    free_vars(ct, vs)
            schemes[d.name] = Scheme(tuple(vs), cs, t)
        return schemes

    def pretty_constraint(self, c, printer=None) -> str:
        p = printer or self.printer()
        z = c.map(self.zonk)
        return _constraint_text(z, p)

    def check_expr(self, e: A.Expr, name="it") -> Scheme:
        d = A.LetDecl(name, (), e, span=e.span)
        return self.check_group([d])[name]


class _ListSet(list):
    """free_vars helper that accumulates into a set."""

    def __init__(self, target: set):
        super().__init__()
        self.target = target

    def __contains__(self, x):
        return x in self.target

    def append(self, x):
        self.target.add(x)


def _name_supply(prefix):
    yield prefix
    for i in itertools.count(1):
        yield f"{prefix}{i}"


def describe(c) -> str:
    return {
        DeepNarrowable: "deepNarrow",
        DownCastable: "downCast",
        DynCastPair: "dynUpCast",
        DynDownCast: "dynDownCast",
        LubCons: "lubCons",
        LeftUnion: "left-biased union",
    }.get(type(c), type(c).__name__)


def _constraint_text(c, p: TypePrinter) -> str:
    if isinstance(c, HasField):
        return f"HasField {display_label(c.label)} {p.atom(c.rec)} {p.atom(c.field_type)}"
    if isinstance(c, Lacks):
        return f"Lacks {display_label(c.label)} {p.atom(c.rec)}"
    if isinstance(c, Extend):
        return f"Extend {display_label(c.label)} {p.atom(c.field_type)} {p.atom(c.base)} {p.atom(c.result)}"
    if isinstance(c, ClassC):
        return f"{c.cls} {p.atom(c.type)}"
    if isinstance(c, AncestorOf):
        return f"Ancestor {p.atom(c.child)} {p.atom(c.ancestor)}"
    if isinstance(c, Concrete):
        return f"Concrete {p.atom(c.self_type)} {p.atom(c.result)}"
    name = {Narrowable: "Narrow", DeepNarrowable: "DeepNarrow", DownCastable: "DownCast",
            DynCastPair: "DynUpCast", DynDownCast: "DynDownCast", LubCons: "LubCons", LeftUnion: "LeftUnion"}[type(c)]
    return " ".join([name] + [p.atom(t) for t in c.types()])


def _record_position_vars(s: Scheme) -> set:
    out = set()
    for c in s.constraints:
        cand = []
        if isinstance(c, (HasField, Lacks)):
            cand = [c.rec]
        elif isinstance(c, Extend):
            cand = [c.base, c.result]
        elif isinstance(c, (Narrowable, DeepNarrowable, DynCastPair, DynDownCast)):
            cand = [c.source if hasattr(c, "source") else c.full]
        elif isinstance(c, (LeftUnion, LubCons)):
            cand = c.types()
        elif isinstance(c, Concrete):
            cand = [c.self_type]
        out |= {t.id for t in cand if isinstance(t, TVar)}
    return out


def pretty_scheme(s: Scheme) -> str:
    order = list(free_vars(s.type))
    for c in s.constraints:
        for t in c.types():
            free_vars(t, order)
    recs = _record_position_vars(s)
    plain, rows = _name_supply("a"), _name_supply("r")
    names = {v: next(rows) if v in recs else next(plain) for v in order}
    p = TypePrinter(names)
    body = p.show(s.type)
    if not s.constraints:
        return body
    index = {v: i for i, v in enumerate(order)}

    def key(c):
        vs = []
        for t in c.types():
            free_vars(t, vs)
        return min((index[v] for v in vs), default=len(order))

    cs = sorted(s.constraints, key=key)
    texts = [_constraint_text(c, p) for c in cs]
    ctx = texts[0] if len(texts) == 1 else "(" + ", ".join(texts) + ")"
    return f"{ctx} => {body}"


# --- whole programs --------------------------------------------------------------------


def binding_dependencies(decls) -> dict:
    names = {d.name for d in decls}
    deps = {}
    for d in decls:
        deps[d.name] = sorted(free_names(d.body, set(d.params)) & names)
    return deps


def free_names(e, bound: set) -> set:
    if isinstance(e, A.Var):
        return set() if e.name in bound else {e.name}
    if isinstance(e, A.Lam):
        return free_names(e.body, bound | set(e.params))
    if isinstance(e, A.LetIn):
        return free_names(e.value, bound) | free_names(e.body, bound | {e.name})
    if isinstance(e, A.Do):
        out, b = set(), set(bound)
        for st in e.stmts:
            out |= free_names(st.expr, b)
            if isinstance(st, (A.Bind, A.LetStmt)):
                b = b | {st.name}
        return out
    out = set()
    for c in e.children():
        if isinstance(c, A.Expr):
            out |= free_names(c, bound)
    return out


def tarjan_sccs(graph: dict) -> list:
    """SCCs in dependency order (dependencies first)."""
    index, low, stack, on, out = {}, {}, [], set(), []
    counter = itertools.count()

    def visit(v):
        index[v] = low[v] = next(counter)
        stack.append(v)
        on.add(v)
        for w in graph.get(v, ()):
            if w not in index:
                visit(w)
                low[v] = min(low[v], low[w])
            elif w in on:
                low[v] = min(low[v], index[w])
        if low[v] == index[v]:
            comp = []
            while True:
                w = stack.pop()
                on.discard(w)
                comp.append(w)
                if w == v:
                    break
            out.append(comp)

    for v in graph:
        if v not in index:
            visit(v)
    return out


@dataclass
class InferResult:
    schemes: dict
    errors: list
    notes: Notes
    checker: Checker

    @property
    def ok(self):
        return not self.errors


def check_decls(checker: Checker, decls, errors: list, max_errors: int | None = None) -> dict:
    """Process declarations in order, collecting errors.  Returns new schemes."""
    schemes = {}
    bindings = []
    seen = set(checker.globals)
    for d in decls:
        try:
            if isinstance(d, A.TypeDecl):
                checker.declare_type(d)
            elif isinstance(d, A.NominalDecl):
                checker.declare_nominal(d)
            elif isinstance(d, A.LetDecl):
                if d.name in {b.name for b in bindings}:
                    raise checker.error("DuplicateLabel", f"binding {d.name} defined twice", d.span)
                bindings.append(d)
        except TypeCheckError as e:
            errors.append(e)
    by_name = {d.name: d for d in bindings}
    for comp in tarjan_sccs(binding_dependencies(bindings)):
        group = [by_name[n] for n in sorted(comp, key=lambda n: bindings.index(by_name[n]))]
        if max_errors is not None and len(errors) >= max_errors:
            break
        try:
            result = checker.check_group(group)
        except TypeCheckError as e:
            errors.append(e)
            for d in group:
                v = checker.fresh()
                checker.globals[d.name] = Scheme((v.id,), (), v)
            continue
        checker.globals.update(result)
        schemes.update(result)
    del seen
    return {d.name: schemes[d.name] for d in bindings if d.name in schemes}


def infer_program(program: A.Program, max_errors: int | None = None) -> InferResult:
    checker = Checker()
    errors: list = []
    schemes = check_decls(checker, program.decls, errors, max_errors)
    errors.sort(key=lambda e: (e.span.line, e.span.column) if e.span else (0, 0))
    return InferResult(schemes, errors, checker.notes, checker)


def check_concrete(s: Scheme) -> bool:
    """Whether fixing a generator of scheme `self -> IO record` would typecheck.

    Raises TypeCheckError(NotConcrete) naming the methods used on self that
    the produced record lacks.
    """
    ck = Checker()
    ck._ids = itertools.count(max(list(s.vars) + [0]) + 1)
    t = ck.instantiate(s, NO_SPAN)
    t = ck.resolve(t)
    if not isinstance(t, TFun):
        raise ck.error("Mismatch", f"not a generator: {ck.show(t)}", NO_SPAN)
    res = ck.resolve(t.result)
    if not isinstance(res, TAction):
        raise ck.error("Mismatch", f"not a generator: {ck.show(t)}", NO_SPAN)
    ck.emit(Concrete(t.arg, res.result, span=NO_SPAN))
    ck.solve()
    return True
