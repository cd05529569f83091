"""MiniOO program representation.

Spans never take part in equality, so two parses of differently laid out
source compare equal when their structure agrees.
"""
from __future__ import annotations

from dataclasses import dataclass, field, fields

from ..diagnostics import SourceSpan


def _span():
    return field(default=None, compare=False, repr=False, kw_only=True)


class Node:
    span: SourceSpan | None

    def children(self):
        for f in fields(self):
            if f.name == "span":
                continue
            v = getattr(self, f.name)
            if isinstance(v, Node):
                yield v
            elif isinstance(v, tuple):
                for item in v:
                    if isinstance(item, Node):
                        yield item
                    elif isinstance(item, tuple):
                        yield from (x for x in item if isinstance(x, Node))

    def walk(self):
        yield self
        for c in self.children():
            yield from c.walk()


# --- type expressions -------------------------------------------------------

class TypeExpr(Node):
    pass


@dataclass
class TyBase(TypeExpr):
    name: str  # Int Float Bool String ()
    span: SourceSpan | None = _span()


@dataclass
class TyVar(TypeExpr):
    name: str
    span: SourceSpan | None = _span()


@dataclass
class TyIO(TypeExpr):
    inner: TypeExpr
    span: SourceSpan | None = _span()


@dataclass
class TyRef(TypeExpr):
    inner: TypeExpr
    span: SourceSpan | None = _span()


@dataclass
class TyNotFixed(TypeExpr):
    inner: TypeExpr
    span: SourceSpan | None = _span()


@dataclass
class TyList(TypeExpr):
    inner: TypeExpr
    span: SourceSpan | None = _span()


@dataclass
class TyPair(TypeExpr):
    first: TypeExpr
    second: TypeExpr
    span: SourceSpan | None = _span()


@dataclass
class TyFun(TypeExpr):
    arg: TypeExpr
    result: TypeExpr
    span: SourceSpan | None = _span()


@dataclass
class TyRecord(TypeExpr):
    fields: tuple  # ((label, TypeExpr), ...) in source order
    span: SourceSpan | None = _span()


@dataclass
class TyEither(TypeExpr):
    left: TypeExpr
    right: TypeExpr
    span: SourceSpan | None = _span()


@dataclass
class TyNominal(TypeExpr):
    nomination: str
    inner: TypeExpr
    span: SourceSpan | None = _span()


@dataclass
class TyName(TypeExpr):
    name: str
    args: tuple = ()
    span: SourceSpan | None = _span()


# --- expressions ------------------------------------------------------------

class Expr(Node):
    pass


@dataclass
class Lit(Expr):
    value: object  # int, float, str, bool or () for unit
    span: SourceSpan | None = _span()

    def __eq__(self, other):
        # keep 1 and True (and 1 and 1.0) apart
        return isinstance(other, Lit) and type(self.value) is type(other.value) and self.value == other.value


@dataclass
class Var(Expr):
    name: str
    span: SourceSpan | None = _span()


@dataclass
class Builtin(Expr):
    name: str
    span: SourceSpan | None = _span()


@dataclass
class Ctor(Expr):
    """Wraps a value into a declared recursive named type."""
    name: str
    span: SourceSpan | None = _span()


@dataclass
class Lam(Expr):
    params: tuple
    body: Expr
    span: SourceSpan | None = _span()


@dataclass
class App(Expr):
    fn: Expr
    args: tuple
    span: SourceSpan | None = _span()


@dataclass
class LetIn(Expr):
    name: str
    value: Expr
    body: Expr
    span: SourceSpan | None = _span()


@dataclass
class Do(Expr):
    stmts: tuple
    span: SourceSpan | None = _span()


@dataclass
class FieldGet(Expr):
    obj: Expr
    label: str
    span: SourceSpan | None = _span()


@dataclass
class EmptyRec(Expr):
    span: SourceSpan | None = _span()


@dataclass
class Extend(Expr):
    label: str
    value: Expr
    base: Expr
    span: SourceSpan | None = _span()


@dataclass
class Update(Expr):
    label: str
    value: Expr
    base: Expr
    span: SourceSpan | None = _span()


@dataclass
class RecUnion(Expr):
    left: Expr
    right: Expr
    span: SourceSpan | None = _span()


ANNOT_KINDS = ("narrow", "deepNarrow", "downCast", "dynUpCast", "dynDownCast", "nUpCast", "annotate")


@dataclass
class Annot(Expr):
    kind: str
    expr: Expr
    type: TypeExpr  # for nUpCast: TyName naming the target nomination
    span: SourceSpan | None = _span()


@dataclass
class Nominate(Expr):
    nomination: str
    expr: Expr
    span: SourceSpan | None = _span()


@dataclass
class LubNil(Expr):
    span: SourceSpan | None = _span()


@dataclass
class LubCons(Expr):
    head: Expr
    tail: Expr
    span: SourceSpan | None = _span()


@dataclass
class UnionNil(Expr):
    span: SourceSpan | None = _span()


@dataclass
class UnionCons(Expr):
    head: Expr
    tail: Expr
    span: SourceSpan | None = _span()


@dataclass
class If(Expr):
    cond: Expr
    then: Expr
    else_: Expr
    span: SourceSpan | None = _span()


@dataclass
class ListLit(Expr):
    items: tuple
    span: SourceSpan | None = _span()


@dataclass
class PairLit(Expr):
    first: Expr
    second: Expr
    span: SourceSpan | None = _span()


@dataclass
class BinOp(Expr):
    op: str
    left: Expr
    right: Expr
    span: SourceSpan | None = _span()


# --- do-block statements ----------------------------------------------------

class Stmt(Node):
    pass


@dataclass
class Bind(Stmt):
    name: str
    expr: Expr
    span: SourceSpan | None = _span()


@dataclass
class LetStmt(Stmt):
    name: str
    expr: Expr
    span: SourceSpan | None = _span()


@dataclass
class ExprStmt(Stmt):
    expr: Expr
    span: SourceSpan | None = _span()


# --- declarations -----------------------------------------------------------

class Decl(Node):
    pass


@dataclass
class LabelDecl(Decl):
    name: str
    span: SourceSpan | None = _span()


@dataclass
class NominalDecl(Decl):
    name: str
    parents: tuple = ()
    span: SourceSpan | None = _span()


@dataclass
class TypeDecl(Decl):
    name: str
    params: tuple
    body: TypeExpr
    span: SourceSpan | None = _span()


@dataclass
class LetDecl(Decl):
    name: str
    params: tuple
    body: Expr
    span: SourceSpan | None = _span()


@dataclass
class BindDecl(Decl):
    """REPL-only `x <- action`."""
    name: str
    expr: Expr
    span: SourceSpan | None = _span()


@dataclass
class Program(Node):
    decls: tuple
    span: SourceSpan | None = _span()

    def bindings(self):
        return [d for d in self.decls if isinstance(d, LetDecl)]
