"""Source printer.  Output re-parses to a structurally equal program."""
from __future__ import annotations

from decimal import Decimal

from . import ast as A

_ATOMIC_EXPR = (A.Var, A.Builtin, A.Ctor, A.Lit, A.EmptyRec, A.LubNil, A.UnionNil, A.ListLit, A.PairLit, A.Do)


def quote(s: str) -> str:
    return '"' + s.replace("\\", "\\\\").replace('"', '\\"').replace("\n", "\\n") + '"'


def show_literal(v) -> str:
    if isinstance(v, bool):
        return "True" if v else "False"
    if isinstance(v, int):
        return str(v)
    if isinstance(v, float):
        text = repr(v)
        if "e" in text or "E" in text:
            text = format(Decimal(text), "f")
        if "." not in text:
            text += ".0"
        return text
    if isinstance(v, str):
        return quote(v)
    return "()"


def print_type(t: A.TypeExpr) -> str:
    if isinstance(t, A.TyBase):
        return t.name
    if isinstance(t, A.TyVar):
        return t.name
    if isinstance(t, A.TyIO):
        return f"IO {type_atom(t.inner)}"
    if isinstance(t, A.TyRef):
        return f"Ref {type_atom(t.inner)}"
    if isinstance(t, A.TyNotFixed):
        return f"NotFixed {type_atom(t.inner)}"
    if isinstance(t, A.TyList):
        return f"[{print_type(t.inner)}]"
    if isinstance(t, A.TyPair):
        return f"({print_type(t.first)}, {print_type(t.second)})"
    if isinstance(t, A.TyFun):
        arg = print_type(t.arg)
        if isinstance(t.arg, A.TyFun):
            arg = f"({arg})"
        return f"{arg} -> {print_type(t.result)}"
    if isinstance(t, A.TyRecord):
        return "{" + ", ".join(f"{l}: {print_type(ft)}" for l, ft in t.fields) + "}"
    if isinstance(t, A.TyEither):
        return f"Either {type_atom(t.left)} {type_atom(t.right)}"
    if isinstance(t, A.TyNominal):
        return f"N {t.nomination} {type_atom(t.inner)}"
    if isinstance(t, A.TyName):
        return " ".join([t.name] + [type_atom(a) for a in t.args])
    raise TypeError(t)


def type_atom(t: A.TypeExpr) -> str:
    s = print_type(t)
    if isinstance(t, (A.TyBase, A.TyVar, A.TyList, A.TyPair, A.TyRecord)) or (isinstance(t, A.TyName) and not t.args):
        return s
    return f"({s})"


def atom(e: A.Expr) -> str:
    s = print_expr(e)
    if isinstance(e, _ATOMIC_EXPR):
        return s
    return f"({s})"


def print_stmt(st: A.Stmt) -> str:
    if isinstance(st, A.Bind):
        return f"{st.name} <- {print_expr(st.expr)}"
    if isinstance(st, A.LetStmt):
        return f"let {st.name} = {print_expr(st.expr)}"
    return print_expr(st.expr)


def print_expr(e: A.Expr) -> str:
    if isinstance(e, (A.Var, A.Builtin, A.Ctor)):
        return e.name
    if isinstance(e, A.Lit):
        return show_literal(e.value)
    if isinstance(e, A.EmptyRec):
        return "emptyRecord"
    if isinstance(e, A.LubNil):
        return "lubNil"
    if isinstance(e, A.UnionNil):
        return "unionNil"
    if isinstance(e, A.Lam):
        return "\\" + " ".join(e.params) + " -> " + print_expr(e.body)
    if isinstance(e, A.App):
        return " ".join([atom(e.fn)] + [atom(a) for a in e.args])
    if isinstance(e, A.LetIn):
        return f"let {e.name} = {print_expr(e.value)} in {print_expr(e.body)}"
    if isinstance(e, A.Do):
        return "do { " + "; ".join(print_stmt(s) for s in e.stmts) + " }"
    if isinstance(e, A.FieldGet):
        return f"{atom(e.obj)} # {e.label}"
    if isinstance(e, A.Extend):
        return f"({e.label} = {print_expr(e.value)}) .*. {atom(e.base)}"
    if isinstance(e, A.Update):
        return f"({e.label} = {print_expr(e.value)}) .<. {atom(e.base)}"
    if isinstance(e, A.RecUnion):
        return f"{atom(e.left)} .<++. {atom(e.right)}"
    if isinstance(e, A.Annot):
        if e.kind == "annotate":
            return f"({print_expr(e.expr)} : {print_type(e.type)})"
        return f"{e.kind} {atom(e.expr)} : {print_type(e.type)}"
    if isinstance(e, A.Nominate):
        return f"nominate {e.nomination} {atom(e.expr)}"
    if isinstance(e, A.LubCons):
        return f"lubCons {atom(e.head)} {atom(e.tail)}"
    if isinstance(e, A.UnionCons):
        return f"unionCons {atom(e.head)} {atom(e.tail)}"
    if isinstance(e, A.If):
        return f"if {print_expr(e.cond)} then {print_expr(e.then)} else {print_expr(e.else_)}"
    if isinstance(e, A.ListLit):
        return "[" + ", ".join(print_expr(i) for i in e.items) + "]"
    if isinstance(e, A.PairLit):
        return f"({print_expr(e.first)}, {print_expr(e.second)})"
    if isinstance(e, A.BinOp):
        return f"{atom(e.left)} {e.op} {atom(e.right)}"
    raise TypeError(e)


def print_decl(d: A.Decl) -> str:
    if isinstance(d, A.LabelDecl):
        return f"label {d.name}"
    if isinstance(d, A.NominalDecl):
        if d.parents:
            return f"nominal {d.name} extends {{{', '.join(d.parents)}}}"
        return f"nominal {d.name}"
    if isinstance(d, A.TypeDecl):
        head = " ".join(("type", d.name) + tuple(d.params))
        return f"{head} = {print_type(d.body)}"
    if isinstance(d, A.LetDecl):
        head = " ".join(("let", d.name) + tuple(d.params))
        return f"{head} = {print_expr(d.body)}"
    if isinstance(d, A.BindDecl):
        return f"{d.name} <- {print_expr(d.expr)}"
    raise TypeError(d)


def print_program(p: A.Program) -> str:
    return "".join(print_decl(d) + "\n" for d in p.decls)
