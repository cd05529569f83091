"""Type language, label rows, subtyping and coercion plans.

Everything here is pure: no substitution, no unification.  The checker
zonks types before handing them over.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Iterable

# --- types --------------------------------------------------------------------


class Type:
    __slots__ = ()


@dataclass(frozen=True)
class TVar(Type):
    id: int


@dataclass(frozen=True)
class TCon(Type):
    name: str  # Int Float Bool String () or a nomination name


INT = TCon("Int")
FLOAT = TCon("Float")
BOOL = TCon("Bool")
STRING = TCon("String")
UNIT = TCon("()")
BASE_NAMES = ("Int", "Float", "Bool", "String", "()")


@dataclass(frozen=True)
class TPair(Type):
    first: Type
    second: Type


@dataclass(frozen=True)
class TList(Type):
    elem: Type


@dataclass(frozen=True)
class TFun(Type):
    arg: Type
    result: Type


@dataclass(frozen=True)
class TAction(Type):
    result: Type


@dataclass(frozen=True)
class TRef(Type):
    inner: Type


@dataclass(frozen=True)
class TRecord(Type):
    row: "Row"


@dataclass(frozen=True)
class TUnion(Type):
    left: Type
    right: Type


@dataclass(frozen=True)
class TNominal(Type):
    nom: Type  # TCon naming the nomination, or a TVar
    payload: Type


@dataclass(frozen=True)
class TNotFixed(Type):
    inner: Type


@dataclass(frozen=True)
class TNamed(Type):
    name: str
    args: tuple = ()


def fun(*ts: Type) -> Type:
    """fun(a, b, c) is a -> b -> c."""
    out = ts[-1]
    for t in reversed(ts[:-1]):
        out = TFun(t, out)
    return out


def children(t: Type) -> tuple:
    if isinstance(t, (TVar, TCon)):
        return ()
    if isinstance(t, TPair):
        return (t.first, t.second)
    if isinstance(t, (TList,)):
        return (t.elem,)
    if isinstance(t, TFun):
        return (t.arg, t.result)
    if isinstance(t, TAction):
        return (t.result,)
    if isinstance(t, (TRef, TNotFixed)):
        return (t.inner,)
    if isinstance(t, TRecord):
        return tuple(ft for _, ft in t.row.entries)
    if isinstance(t, TUnion):
        return (t.left, t.right)
    if isinstance(t, TNominal):
        return (t.nom, t.payload)
    if isinstance(t, TNamed):
        return t.args
    raise TypeError(f"not a type: {t!r}")


def map_type(t: Type, f: Callable[[Type], Type]) -> Type:
    """Rebuild t with f applied to each immediate child."""
    if isinstance(t, (TVar, TCon)):
        return t
    if isinstance(t, TPair):
        return TPair(f(t.first), f(t.second))
    if isinstance(t, TList):
        return TList(f(t.elem))
    if isinstance(t, TFun):
        return TFun(f(t.arg), f(t.result))
    if isinstance(t, TAction):
        return TAction(f(t.result))
    if isinstance(t, TRef):
        return TRef(f(t.inner))
    if isinstance(t, TNotFixed):
        return TNotFixed(f(t.inner))
    if isinstance(t, TRecord):
        return TRecord(Row(tuple((l, f(ft)) for l, ft in t.row.entries)))
    if isinstance(t, TUnion):
        return TUnion(f(t.left), f(t.right))
    if isinstance(t, TNominal):
        return TNominal(f(t.nom), f(t.payload))
    if isinstance(t, TNamed):
        return TNamed(t.name, tuple(f(a) for a in t.args))
    raise TypeError(f"not a type: {t!r}")


def free_vars(t: Type, acc: list | None = None) -> list:
    """Variable ids in order of first appearance."""
    acc = [] if acc is None else acc
    if isinstance(t, TVar):
        if t.id not in acc:
            acc.append(t.id)
        return acc
    for c in children(t):
        free_vars(c, acc)
    return acc


def substitute(t: Type, mapping: dict) -> Type:
    if isinstance(t, TVar):
        return mapping.get(t.id, t)
    return map_type(t, lambda c: substitute(c, mapping))


def is_ground(t: Type) -> bool:
    return not free_vars(t)


# --- rows -----------------------------------------------------------------------


class RowError(Exception):
    pass


class DuplicateLabel(RowError):
    def __init__(self, label):
        super().__init__(f"duplicate label {label}")
        self.label = label


class MissingLabel(RowError):
    def __init__(self, label):
        super().__init__(f"missing label {label}")
        self.label = label


class FieldTypeClash(RowError):
    def __init__(self, label, left=None, right=None):
        super().__init__(f"field {label} has different types")
        self.label = label
        self.left = left
        self.right = right


class NotDeepSubtype(RowError):
    def __init__(self, path, source, target, detail=""):
        self.path = path
        self.source = source
        self.target = target
        self.detail = detail
        super().__init__(f"not a deep subtype at {path or '<top>'}" + (f": {detail}" if detail else ""))


class UnknownNomination(RowError):
    def __init__(self, name):
        super().__init__(f"unknown nomination {name}")
        self.name = name


@dataclass(frozen=True)
class Row:
    entries: tuple = ()

    def __post_init__(self):
        labels = [l for l, _ in self.entries]
        if labels != sorted(set(labels)):
            raise ValueError(f"row not normalized: {labels}")

    @staticmethod
    def from_pairs(pairs: Iterable) -> "Row":
        seen = {}
        for l, t in pairs:
            if l in seen:
                raise DuplicateLabel(l)
            seen[l] = t
        return Row(tuple(sorted(seen.items(), key=lambda kv: kv[0])))

    def labels(self) -> frozenset:
        return frozenset(l for l, _ in self.entries)

    def get(self, label, default=None):
        for l, t in self.entries:
            if l == label:
                return t
        return default

    def as_dict(self) -> dict:
        return dict(self.entries)

    def __contains__(self, label):
        return any(l == label for l, _ in self.entries)

    def __len__(self):
        return len(self.entries)

    def __iter__(self):
        return iter(self.entries)


EMPTY_ROW = Row()


def row_extend(row: Row, label: str, t: Type) -> Row:
    if label in row:
        raise DuplicateLabel(label)
    return Row.from_pairs(list(row.entries) + [(label, t)])


def row_update(row: Row, label: str, t: Type) -> Row:
    if label not in row:
        raise MissingLabel(label)
    return Row(tuple((l, t if l == label else ft) for l, ft in row.entries))


def row_union_left(a: Row, b: Row) -> Row:
    merged = dict(b.entries)
    merged.update(a.entries)
    return Row.from_pairs(merged.items())


def row_intersect(a: Row, b: Row) -> frozenset:
    return a.labels() & b.labels()


def row_project(row: Row, labels) -> Row:
    labels = set(labels)
    for l in sorted(labels):
        if l not in row:
            raise MissingLabel(l)
    return Row(tuple((l, t) for l, t in row.entries if l in labels))


def width_subtype(s: Row, t: Row) -> bool:
    sd = s.as_dict()
    return all(l in sd and sd[l] == ft for l, ft in t.entries)


def lub_row(a: Row, b: Row) -> Row:
    shared = row_intersect(a, b)
    for l in sorted(shared):
        if a.get(l) != b.get(l):
            raise FieldTypeClash(l, a.get(l), b.get(l))
    return row_project(a, shared)


def depth_subtype(s: Type, t: Type) -> bool:
    if s == t:
        return True
    if isinstance(s, TRecord) and isinstance(t, TRecord):
        sd = s.row.as_dict()
        return all(l in sd and depth_subtype(sd[l], ft) for l, ft in t.row.entries)
    if isinstance(s, TFun) and isinstance(t, TFun):
        return depth_subtype(t.arg, s.arg) and depth_subtype(s.result, t.result)
    if isinstance(s, TAction) and isinstance(t, TAction):
        return depth_subtype(s.result, t.result)
    return False


# --- coercion plans -------------------------------------------------------------


class Plan:
    __slots__ = ()


@dataclass(frozen=True)
class Identity(Plan):
    pass


@dataclass(frozen=True)
class Project(Plan):
    labels: tuple


@dataclass(frozen=True)
class PerField(Plan):
    fields: tuple  # ((label, Plan), ...); labels not listed are dropped


@dataclass(frozen=True)
class WrapFunction(Plan):
    arg: Plan
    result: Plan


@dataclass(frozen=True)
class WrapAction(Plan):
    result: Plan


IDENTITY = Identity()


def _join(path: str, seg: str) -> str:
    return f"{path}.{seg}" if path else seg


def derive_deep_narrow(s: Type, t: Type, path: str = "") -> Plan:
    """Coercion from s to t following depth subtyping, or NotDeepSubtype."""
    if s == t:
        return IDENTITY
    if isinstance(s, TRecord) and isinstance(t, TRecord):
        sd = s.row.as_dict()
        plans = []
        for l, ft in t.row.entries:
            if l not in sd:
                raise NotDeepSubtype(path, s, t, f"missing field {l}")
            plans.append((l, derive_deep_narrow(sd[l], ft, _join(path, l))))
        if all(isinstance(p, Identity) for _, p in plans):
            return IDENTITY if len(sd) == len(plans) else Project(tuple(l for l, _ in plans))
        return PerField(tuple(plans))
    if isinstance(s, TFun) and isinstance(t, TFun):
        arg = derive_deep_narrow(t.arg, s.arg, _join(path, "arg"))
        res = derive_deep_narrow(s.result, t.result, _join(path, "result"))
        if isinstance(arg, Identity) and isinstance(res, Identity):
            return IDENTITY
        return WrapFunction(arg, res)
    if isinstance(s, TAction) and isinstance(t, TAction):
        res = derive_deep_narrow(s.result, t.result, path)
        return IDENTITY if isinstance(res, Identity) else WrapAction(res)
    raise NotDeepSubtype(path, s, t)


# --- nominations ------------------------------------------------------------------


@dataclass
class NominalGraph:
    parents: dict

    def __init__(self, parents: dict | None = None):
        self.parents = {}
        for name, ps in (parents or {}).items():
            self.parents[name] = tuple(ps)

    def declare(self, name: str, parents=()):
        for p in parents:
            if p not in self.parents:
                raise UnknownNomination(p)
        if name in self.parents:
            raise DuplicateLabel(name)
        self.parents[name] = tuple(parents)

    def __contains__(self, name):
        return name in self.parents

    def copy(self):
        return NominalGraph(self.parents)


def is_ancestor(g: NominalGraph, child: str, anc: str) -> bool:
    for n in (child, anc):
        if n not in g.parents:
            raise UnknownNomination(n)
    todo, seen = [child], set()
    while todo:
        n = todo.pop()
        if n == anc:
            return True
        if n in seen:
            continue
        seen.add(n)
        todo.extend(g.parents[n])
    return False


# --- printing -----------------------------------------------------------------------


def display_label(label: str) -> str:
    return label[:1].upper() + label[1:]


class TypePrinter:
    """Sugared type display; variable names come from `names` (id -> str)."""

    def __init__(self, names: dict | None = None):
        self.names = names if names is not None else {}

    def var(self, v: TVar) -> str:
        if v.id not in self.names:
            self.names[v.id] = f"t{v.id}"
        return self.names[v.id]

    def atom(self, t: Type) -> str:
        s = self.show(t)
        if isinstance(t, (TVar, TCon, TPair, TList)) or (isinstance(t, TNamed) and not t.args):
            return s
        return f"({s})"

    def show(self, t: Type) -> str:
        if isinstance(t, TVar):
            return self.var(t)
        if isinstance(t, TCon):
            return t.name
        if isinstance(t, TPair):
            return f"({self.show(t.first)}, {self.show(t.second)})"
        if isinstance(t, TList):
            return f"[{self.show(t.elem)}]"
        if isinstance(t, TFun):
            arg = self.show(t.arg)
            if isinstance(t.arg, TFun):
                arg = f"({arg})"
            return f"{arg} -> {self.show(t.result)}"
        if isinstance(t, TAction):
            return f"IO {self.atom(t.result)}"
        if isinstance(t, TRef):
            return f"Ref {self.atom(t.inner)}"
        if isinstance(t, TNotFixed):
            return f"NotFixed {self.atom(t.inner)}"
        if isinstance(t, TUnion):
            return f"Either {self.atom(t.left)} {self.atom(t.right)}"
        if isinstance(t, TNominal):
            return f"N {self.show(t.nom)} {self.atom(t.payload)}"
        if isinstance(t, TNamed):
            return " ".join([t.name] + [self.atom(a) for a in t.args])
        if isinstance(t, TRecord):
            parts = []
            for l, ft in t.row.entries:
                fs = self.show(ft)
                if isinstance(ft, TFun):
                    fs = f"({fs})"
                parts.append(f"{display_label(l)} :=: {fs}")
            parts.append("HNil")
            return "Record ( " + " :*: ".join(parts) + " )"
        raise TypeError(f"not a type: {t!r}")


def pretty_type(t: Type, names: dict | None = None) -> str:
    return TypePrinter(names).show(t)


def pretty_plan(p: Plan) -> str:
    if isinstance(p, Identity):
        return "identity"
    if isinstance(p, Project):
        return "project{" + ",".join(p.labels) + "}"
    if isinstance(p, PerField):
        return "per-field{" + ", ".join(f"{l} -> {pretty_plan(q)}" for l, q in p.fields) + "}"
    if isinstance(p, WrapFunction):
        return f"wrap-function({pretty_plan(p.arg)}, {pretty_plan(p.result)})"
    if isinstance(p, WrapAction):
        return f"wrap-action({pretty_plan(p.result)})"
    raise TypeError(p)
