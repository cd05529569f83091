"""Independent reference implementations and random generators shared by the property tests."""
from __future__ import annotations

import io
import itertools
import random

from minioo.repl import Session
from minioo.typesys import (
    BOOL, INT, STRING, UNIT, NominalGraph, Row, TAction, TFun, TRecord, Type,
)

LABELS4 = ("a", "b", "c", "d")
BASES2 = (INT, BOOL)


def all_rows(labels=LABELS4, bases=BASES2):
    """Every row over the given labels where each label is absent or has one of the base types."""
    for choice in itertools.product((None,) + tuple(bases), repeat=len(labels)):
        yield Row.from_pairs((l, t) for l, t in zip(labels, choice) if t is not None)


def oracle_width(s: Row, t: Row) -> bool:
    return set(t.entries) <= set(s.entries)


def oracle_lub(a: Row, b: Row, universe) -> Row | None:
    """The greatest common supertype by search, or None if there is no unique greatest one."""
    common = [c for c in universe if oracle_width(a, c) and oracle_width(b, c)]
    top = max(common, key=len)
    return top if all(oracle_width(top, d) for d in common) else None


# --- random types ---------------------------------------------------------------------

FIELD_LABELS = ("p", "q", "r", "s")


def random_type(rng: random.Random, depth: int) -> Type:
    if depth <= 0:
        return rng.choice((INT, BOOL, STRING, UNIT))
    k = rng.randrange(5)
    if k == 0:
        return rng.choice((INT, BOOL))
    if k == 1:
        labels = rng.sample(FIELD_LABELS, rng.randint(0, 3))
        return TRecord(Row.from_pairs((l, random_type(rng, depth - 1)) for l in labels))
    if k == 2:
        return TFun(random_type(rng, depth - 1), random_type(rng, depth - 1))
    if k == 3:
        return TAction(random_type(rng, depth - 1))
    return random_type(rng, depth - 1)


def mutate(rng: random.Random, t: Type, towards_super: bool) -> Type:
    """A nearby type; usually a deep super- (or sub-) type of t, sometimes not."""
    if rng.random() < 0.08:
        return random_type(rng, 1)
    if isinstance(t, TRecord):
        entries = list(t.row.entries)
        if towards_super:
            entries = [e for e in entries if rng.random() < 0.75]
        else:
            for l in FIELD_LABELS:
                if l not in t.row and rng.random() < 0.3:
                    entries.append((l, random_type(rng, 1)))
        return TRecord(Row.from_pairs((l, mutate(rng, ft, towards_super)) for l, ft in entries))
    if isinstance(t, TFun):
        return TFun(mutate(rng, t.arg, not towards_super), mutate(rng, t.result, towards_super))
    if isinstance(t, TAction):
        return TAction(mutate(rng, t.result, towards_super))
    return t


def random_type_pair(rng: random.Random):
    s = random_type(rng, 3)
    if rng.random() < 0.6:
        return s, mutate(rng, s, True)
    return s, random_type(rng, 3)


# --- random nomination DAGs --------------------------------------------------------------


def random_dag(rng: random.Random, n: int = 8):
    names = [f"N{i}" for i in range(n)]
    parents = {}
    for i, name in enumerate(names):
        earlier = names[:i]
        parents[name] = tuple(p for p in earlier if rng.random() < 0.3)
    g = NominalGraph()
    for name in names:
        g.declare(name, parents[name])
    return g, parents


def closure_oracle(parents: dict) -> set:
    """Reflexive transitive closure of the parent relation by naive fixpoint."""
    rel = {(n, n) for n in parents} | {(c, p) for c, ps in parents.items() for p in ps}
    while True:
        extra = {(a, d) for (a, b) in rel for (c, d) in rel if b == c} - rel
        if not extra:
            return rel
        rel |= extra


# --- narrow/observe commutation ------------------------------------------------------------

OBS_LABELS = ("getX", "getY", "draw", "print", "moveX", "varX")


def random_record_case(rng: random.Random):
    """A record literal, a target record type over a subset of its labels, and one label to observe."""
    labels = rng.sample(OBS_LABELS, rng.randint(1, len(OBS_LABELS)))
    fields, types = [], {}
    for l in labels:
        kind = rng.randrange(4)
        if kind == 0:
            n = rng.randint(-50, 50)
            fields.append(f"{l} = {n}" if n >= 0 else f"{l} = negate {-n}")
            types[l] = "Int"
        elif kind == 1:
            fields.append(f'{l} = "{rng.choice("xyz") * rng.randint(0, 3)}"')
            types[l] = "String"
        elif kind == 2:
            fields.append(f"{l} = {rng.choice(('True', 'False'))}")
            types[l] = "Bool"
        else:
            n = rng.randint(0, 9)
            fields.append(f'{l} = do {{ putStr "{l}{n} "; return {n} }}')
            types[l] = "IO Int"
    keep = [l for l in labels if rng.random() < 0.6] or [labels[0]]
    observed = rng.choice(keep)
    record = "{" + ", ".join(fields) + "}"
    target = "{" + ", ".join(f"{l}: {types[l]}" for l in keep) + "}"
    return record, target, observed


def session_output(lines, prelude_labels=OBS_LABELS) -> tuple[str, str]:
    out, err = io.StringIO(), io.StringIO()
    s = Session(out, err)
    for l in prelude_labels:
        s.feed(f"label {l}")
    for line in lines:
        s.feed(line)
    return out.getvalue(), err.getvalue()
