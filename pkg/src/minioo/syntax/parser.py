"""Recursive-descent parser for MiniOO.

Precedence, loosest first: ``.<++.``; ``.*.``/``.<.`` (right-assoc); ``==``/``<``;
``++`` (right); ``+``/``-``; ``*``/``/``; ``#`` (postfix, may take arguments);
application.  Lambdas, ``let .. in``, ``if`` and the annotated casts extend as
far right as possible and need parentheses when used as operands.
"""
from __future__ import annotations

from ..diagnostics import ParseError, SourceSpan
from . import ast as A
from .tokens import Token, tokenize

BUILTINS = frozenset(
    [
        "fix", "new", "construct", "concrete", "return",
        "newRef", "readRef", "writeRef", "modifyRef",
        "print", "putStr", "putStrLn", "show", "fail",
        "mapM_", "maybe", "abs", "negate", "fst", "snd", "anonymize",
    ]
)
ANNOT_KEYWORDS = frozenset(["narrow", "deepNarrow", "downCast", "dynUpCast", "dynDownCast", "nUpCast"])
SPECIAL_FORMS = frozenset(["nominate", "lubCons", "unionCons"])
NULLARY_FORMS = frozenset(["emptyRecord", "lubNil", "unionNil", "True", "False"])
RESERVED = BUILTINS | ANNOT_KEYWORDS | SPECIAL_FORMS | NULLARY_FORMS

BASE_TYPES = frozenset(["Int", "Float", "Bool", "String"])
TYPE_OPERATORS = frozenset(["IO", "Ref", "NotFixed", "Either", "N", "Record", "HNil"])
RESERVED_TYPE_NAMES = BASE_TYPES | TYPE_OPERATORS


def is_upper(name: str) -> bool:
    return name[:1].isupper()


def label_display(label: str) -> str:
    return label[:1].upper() + label[1:]


def label_from_display(name: str) -> str:
    return name[:1].lower() + name[1:]


class Parser:
    def __init__(self, tokens: list[Token], labels: set | None = None):
        self.tokens = tokens
        self.pos = 0
        self.labels = labels if labels is not None else set()

    # --- token plumbing -------------------------------------------------------
    def peek(self, k: int = 0) -> Token:
        return self.tokens[min(self.pos + k, len(self.tokens) - 1)]

    def advance(self) -> Token:
        tok = self.tokens[self.pos]
        if tok.kind != "EOF":
            self.pos += 1
        return tok

    @property
    def prev(self) -> Token:
        return self.tokens[self.pos - 1] if self.pos else self.tokens[0]

    def at(self, kind: str, text: str | None = None, k: int = 0) -> bool:
        tok = self.peek(k)
        return tok.kind == kind and (text is None or tok.text == text)

    def accept(self, kind, text=None):
        if self.at(kind, text):
            return self.advance()
        return None

    def expect(self, kind, text=None, what=None) -> Token:
        if self.at(kind, text):
            return self.advance()
        tok = self.peek()
        wanted = what or (repr(text) if text else kind)
        found = repr(tok.text) if tok.text else "end of input"
        raise ParseError(tok.span, f"unexpected {found}", [wanted])

    def span_from(self, start: Token) -> SourceSpan:
        s, e = start.span, self.prev.span
        if e.line == s.line and e.column >= s.column:
            length = e.column + e.length - s.column
        else:
            length = s.length
        return SourceSpan(s.file, s.line, s.column, max(length, 0))

    def ident(self, what="identifier", upper=None) -> Token:
        tok = self.expect("IDENT", what=what)
        if upper is True and not is_upper(tok.text):
            raise ParseError(tok.span, f"{what} must start with an upper-case letter")
        if upper is False and is_upper(tok.text):
            raise ParseError(tok.span, f"{what} must start with a lower-case letter")
        return tok

    def binder(self, what="variable") -> str:
        tok = self.ident(what, upper=False)
        if tok.text in RESERVED:
            raise ParseError(tok.span, f"'{tok.text}' is a reserved name")
        return tok.text

    def label(self) -> str:
        tok = self.ident("label", upper=False)
        if tok.text not in self.labels:
            raise ParseError(tok.span, f"undeclared label '{tok.text}'")
        return tok.text

    # --- declarations ----------------------------------------------------------
    def program(self) -> A.Program:
        start = self.peek()
        decls = []
        while not self.at("EOF"):
            decls.append(self.decl())
        return A.Program(tuple(decls), span=self.span_from(start) if decls else start.span)

    def decl(self) -> A.Decl:
        start = self.peek()
        if self.accept("KEYWORD", "label"):
            name = self.ident("label name", upper=False).text
            self.labels.add(name)
            return A.LabelDecl(name, span=self.span_from(start))
        if self.accept("KEYWORD", "nominal"):
            name = self.ident("nomination name", upper=True).text
            parents = []
            if self.accept("KEYWORD", "extends"):
                self.expect("LBRACE")
                if not self.at("RBRACE"):
                    parents.append(self.ident("nomination name", upper=True).text)
                    while self.accept("COMMA"):
                        parents.append(self.ident("nomination name", upper=True).text)
                self.expect("RBRACE")
            return A.NominalDecl(name, tuple(parents), span=self.span_from(start))
        if self.accept("KEYWORD", "type"):
            tok = self.ident("type name", upper=True)
            if tok.text in RESERVED_TYPE_NAMES:
                raise ParseError(tok.span, f"'{tok.text}' is a built-in type name")
            params = []
            while self.at("IDENT") and not is_upper(self.peek().text):
                params.append(self.advance().text)
            self.expect("EQUALS")
            body = self.type_expr()
            return A.TypeDecl(tok.text, tuple(params), body, span=self.span_from(start))
        if self.accept("KEYWORD", "let"):
            name = self.binder("binding name")
            params = []
            while self.at("IDENT"):
                params.append(self.binder("parameter"))
            self.expect("EQUALS")
            body = self.expr()
            return A.LetDecl(name, tuple(params), body, span=self.span_from(start))
        found = repr(start.text) if start.text else "end of input"
        raise ParseError(start.span, f"unexpected {found}", ["label", "nominal", "type", "let"])

    # --- expressions -----------------------------------------------------------
    def expr(self) -> A.Expr:
        tok = self.peek()
        if tok.kind == "LAMBDA":
            return self.lambda_()
        if tok.kind == "KEYWORD" and tok.text == "let":
            return self.let_in()
        if tok.kind == "KEYWORD" and tok.text == "if":
            return self.if_()
        if tok.kind == "IDENT" and tok.text in ANNOT_KEYWORDS:
            return self.annotated()
        return self.union_expr()

    def lambda_(self):
        start = self.expect("LAMBDA")
        params = [self.binder("parameter")]
        while self.at("IDENT"):
            params.append(self.binder("parameter"))
        self.expect("ARROW")
        body = self.expr()
        return A.Lam(tuple(params), body, span=self.span_from(start))

    def let_in(self):
        start = self.expect("KEYWORD", "let")
        name = self.binder()
        self.expect("EQUALS")
        value = self.expr()
        self.expect("KEYWORD", "in")
        body = self.expr()
        return A.LetIn(name, value, body, span=self.span_from(start))

    def if_(self):
        start = self.expect("KEYWORD", "if")
        cond = self.expr()
        self.expect("KEYWORD", "then")
        then = self.expr()
        self.expect("KEYWORD", "else")
        else_ = self.expr()
        return A.If(cond, then, else_, span=self.span_from(start))

    def annotated(self):
        start = self.advance()
        operand = self.postfix()
        self.expect("COLON")
        if start.text == "nUpCast":
            tok = self.ident("nomination name", upper=True)
            ty = A.TyName(tok.text, (), span=tok.span)
        else:
            ty = self.type_expr()
        return A.Annot(start.text, operand, ty, span=self.span_from(start))

    def union_expr(self):
        start = self.peek()
        left = self.record_expr()
        if self.accept("DOT_UNION"):
            right = self.expr()
            return A.RecUnion(left, right, span=self.span_from(start))
        return left

    def at_pairing(self) -> bool:
        return self.at("LPAREN") and self.at("IDENT", k=1) and self.at("EQUALS", k=2)

    def record_expr(self):
        if not self.at_pairing():
            return self.comparison()
        start = self.advance()
        label = self.label()
        self.expect("EQUALS")
        value = self.expr()
        self.expect("RPAREN")
        op = self.peek()
        if op.kind not in ("DOT_EXTEND", "DOT_UPDATE"):
            raise ParseError(op.span, "a field pair must be followed by a record operator", ["'.*.'", "'.<.'"])
        self.advance()
        tok = self.peek()
        if tok.kind == "LAMBDA" or (tok.kind == "KEYWORD" and tok.text in ("let", "if")) or (
            tok.kind == "IDENT" and tok.text in ANNOT_KEYWORDS
        ):
            base = self.expr()
        else:
            base = self.record_expr()
        node = A.Extend if op.kind == "DOT_EXTEND" else A.Update
        return node(label, value, base, span=self.span_from(start))

    def comparison(self):
        start = self.peek()
        left = self.concat()
        if self.at("EQEQ") or self.at("LESS"):
            op = self.advance().text
            right = self.concat()
            return A.BinOp(op, left, right, span=self.span_from(start))
        return left

    def concat(self):
        start = self.peek()
        left = self.additive()
        if self.accept("CONCAT"):
            right = self.concat()
            return A.BinOp("++", left, right, span=self.span_from(start))
        return left

    def additive(self):
        start = self.peek()
        left = self.multiplicative()
        while self.at("PLUS") or self.at("MINUS"):
            op = self.advance().text
            right = self.multiplicative()
            left = A.BinOp(op, left, right, span=self.span_from(start))
        return left

    def multiplicative(self):
        start = self.peek()
        left = self.postfix()
        while self.at("STAR") or self.at("SLASH"):
            op = self.advance().text
            right = self.postfix()
            left = A.BinOp(op, left, right, span=self.span_from(start))
        return left

    def postfix(self):
        start = self.peek()
        e = self.application()
        while self.at("HASH"):
            self.advance()
            label = self.label()
            e = A.FieldGet(e, label, span=self.span_from(start))
            args = self.atoms()
            if args:
                e = A.App(e, tuple(args), span=self.span_from(start))
        return e

    def can_start_atom(self) -> bool:
        tok = self.peek()
        if tok.kind in ("INT", "FLOAT", "STRING", "LPAREN", "LBRACKET", "LBRACE"):
            return True
        if tok.kind == "KEYWORD":
            return tok.text == "do"
        if tok.kind == "IDENT":
            return tok.text not in ANNOT_KEYWORDS and tok.text not in SPECIAL_FORMS
        return False

    def atoms(self):
        out = []
        while self.can_start_atom():
            out.append(self.atom())
        return out

    def application(self):
        start = self.peek()
        if start.kind == "IDENT" and start.text in ("lubCons", "unionCons"):
            self.advance()
            head = self.atom()
            tail = self.atom()
            node = A.LubCons if start.text == "lubCons" else A.UnionCons
            return node(head, tail, span=self.span_from(start))
        if start.kind == "IDENT" and start.text == "nominate":
            self.advance()
            name = self.ident("nomination name", upper=True).text
            operand = self.atom()
            return A.Nominate(name, operand, span=self.span_from(start))
        head = self.atom()
        args = self.atoms()
        if args:
            return A.App(head, tuple(args), span=self.span_from(start))
        return head

    def atom(self):
        tok = self.peek()
        if tok.kind in ("INT", "FLOAT", "STRING"):
            self.advance()
            return A.Lit(tok.value, span=tok.span)
        if tok.kind == "IDENT":
            self.advance()
            name = tok.text
            if name == "True" or name == "False":
                return A.Lit(name == "True", span=tok.span)
            if name == "emptyRecord":
                return A.EmptyRec(span=tok.span)
            if name == "lubNil":
                return A.LubNil(span=tok.span)
            if name == "unionNil":
                return A.UnionNil(span=tok.span)
            if name in BUILTINS:
                return A.Builtin(name, span=tok.span)
            if name in ANNOT_KEYWORDS or name in SPECIAL_FORMS:
                raise ParseError(tok.span, f"'{name}' needs parentheses when used as an operand")
            if is_upper(name):
                return A.Ctor(name, span=tok.span)
            return A.Var(name, span=tok.span)
        if tok.kind == "KEYWORD" and tok.text == "do":
            return self.do_block()
        if tok.kind == "LPAREN":
            return self.paren()
        if tok.kind == "LBRACKET":
            self.advance()
            items = []
            if not self.at("RBRACKET"):
                items.append(self.expr())
                while self.accept("COMMA"):
                    items.append(self.expr())
            self.expect("RBRACKET")
            return A.ListLit(tuple(items), span=self.span_from(tok))
        if tok.kind == "LBRACE":
            return self.record_literal()
        found = repr(tok.text) if tok.text else "end of input"
        raise ParseError(tok.span, f"unexpected {found}", ["expression"])

    def paren(self):
        start = self.expect("LPAREN")
        if self.accept("RPAREN"):
            return A.Lit((), span=self.span_from(start))
        if self.at("IDENT") and self.at("EQUALS", k=1):
            raise ParseError(self.peek().span, "a field pair must be followed by a record operator", ["'.*.'", "'.<.'"])
        e = self.expr()
        if self.accept("COMMA"):
            second = self.expr()
            self.expect("RPAREN")
            return A.PairLit(e, second, span=self.span_from(start))
        if self.accept("COLON"):
            ty = self.type_expr()
            self.expect("RPAREN")
            return A.Annot("annotate", e, ty, span=self.span_from(start))
        self.expect("RPAREN")
        return e

    def record_literal(self):
        start = self.expect("LBRACE")
        entries = []
        if not self.at("RBRACE"):
            while True:
                ltok = self.peek()
                label = self.label()
                self.expect("EQUALS")
                entries.append((label, self.expr(), ltok))
                if not self.accept("COMMA"):
                    break
        self.expect("RBRACE")
        span = self.span_from(start)
        node = A.EmptyRec(span=span)
        for label, value, ltok in reversed(entries):
            node = A.Extend(label, value, node, span=span)
        return node

    def do_block(self):
        start = self.expect("KEYWORD", "do")
        self.expect("LBRACE")
        stmts = []
        while True:
            while self.accept("SEMI"):
                pass
            if self.at("RBRACE"):
                break
            stmts.append(self.stmt())
            if not self.accept("SEMI"):
                break
        self.expect("RBRACE", what="';' or '}'")
        if not stmts:
            raise ParseError(start.span, "empty do-block")
        if not isinstance(stmts[-1], A.ExprStmt):
            raise ParseError(stmts[-1].span, "the last statement of a do-block must be an expression")
        return A.Do(tuple(stmts), span=self.span_from(start))

    def stmt(self):
        start = self.peek()
        if self.at("IDENT") and self.at("BINDARROW", k=1):
            name = self.binder()
            self.advance()
            return A.Bind(name, self.expr(), span=self.span_from(start))
        if self.at("KEYWORD", "let"):
            self.advance()
            name = self.binder()
            self.expect("EQUALS")
            value = self.expr()
            if self.accept("KEYWORD", "in"):
                body = self.expr()
                e = A.LetIn(name, value, body, span=self.span_from(start))
                return A.ExprStmt(e, span=e.span)
            return A.LetStmt(name, value, span=self.span_from(start))
        e = self.expr()
        return A.ExprStmt(e, span=e.span)

    # --- types -----------------------------------------------------------------
    def type_expr(self) -> A.TypeExpr:
        start = self.peek()
        t = self.type_app()
        if self.accept("ARROW"):
            return A.TyFun(t, self.type_expr(), span=self.span_from(start))
        return t

    def can_start_type_atom(self) -> bool:
        tok = self.peek()
        if tok.kind in ("LPAREN", "LBRACE", "LBRACKET"):
            return True
        return tok.kind == "IDENT" and tok.text not in TYPE_OPERATORS

    def type_app(self):
        start = self.peek()
        if start.kind == "IDENT":
            name = start.text
            if name in ("IO", "Ref", "NotFixed"):
                self.advance()
                inner = self.type_atom()
                cls = {"IO": A.TyIO, "Ref": A.TyRef, "NotFixed": A.TyNotFixed}[name]
                return cls(inner, span=self.span_from(start))
            if name == "Either":
                self.advance()
                left = self.type_atom()
                right = self.type_atom()
                return A.TyEither(left, right, span=self.span_from(start))
            if name == "N":
                self.advance()
                nom = self.ident("nomination").text
                inner = self.type_atom()
                return A.TyNominal(nom, inner, span=self.span_from(start))
            if name == "Record":
                return self.sugared_record()
            if is_upper(name) and name not in BASE_TYPES and name not in TYPE_OPERATORS:
                self.advance()
                args = []
                while self.can_start_type_atom():
                    args.append(self.type_atom())
                return A.TyName(name, tuple(args), span=self.span_from(start))
        return self.type_atom()

    def sugared_record(self):
        start = self.expect("IDENT", "Record")
        self.expect("LPAREN")
        fields = []
        while not self.accept("IDENT", "HNil"):
            tok = self.ident("label", upper=True)
            label = label_from_display(tok.text)
            if label not in self.labels:
                raise ParseError(tok.span, f"undeclared label '{label}'")
            self.expect("TY_FIELD")
            fields.append((label, self.type_expr()))
            self.expect("TY_CONS")
        self.expect("RPAREN")
        return A.TyRecord(tuple(fields), span=self.span_from(start))

    def type_atom(self):
        tok = self.peek()
        if tok.kind == "IDENT":
            if tok.text in TYPE_OPERATORS:
                raise ParseError(tok.span, f"'{tok.text}' needs parentheses here")
            self.advance()
            if tok.text in BASE_TYPES:
                return A.TyBase(tok.text, span=tok.span)
            if is_upper(tok.text):
                return A.TyName(tok.text, (), span=tok.span)
            return A.TyVar(tok.text, span=tok.span)
        if tok.kind == "LPAREN":
            self.advance()
            if self.accept("RPAREN"):
                return A.TyBase("()", span=self.span_from(tok))
            t = self.type_expr()
            if self.accept("COMMA"):
                second = self.type_expr()
                self.expect("RPAREN")
                return A.TyPair(t, second, span=self.span_from(tok))
            self.expect("RPAREN")
            return t
        if tok.kind == "LBRACKET":
            self.advance()
            t = self.type_expr()
            self.expect("RBRACKET")
            return A.TyList(t, span=self.span_from(tok))
        if tok.kind == "LBRACE":
            self.advance()
            fields = []
            if not self.at("RBRACE"):
                while True:
                    label = self.label()
                    self.expect("COLON")
                    fields.append((label, self.type_expr()))
                    if not self.accept("COMMA"):
                        break
            self.expect("RBRACE")
            return A.TyRecord(tuple(fields), span=self.span_from(tok))
        found = repr(tok.text) if tok.text else "end of input"
        raise ParseError(tok.span, f"unexpected {found}", ["type"])


def parse_program(tokens: list[Token], labels: set | None = None) -> A.Program:
    p = Parser(tokens, labels)
    return p.program()


def parse_source(source: str, file: str = "<input>", labels: set | None = None) -> A.Program:
    return parse_program(tokenize(source, file), labels)


def parse_type(source: str, labels: set | None = None, file: str = "<type>") -> A.TypeExpr:
    p = Parser(tokenize(source, file), labels)
    t = p.type_expr()
    p.expect("EOF", what="end of type")
    return t


def parse_repl_input(text: str, labels: set | None = None, file: str = "<repl>"):
    """Returns a Decl (declarations and `x <- e` bindings) or an Expr."""
    tokens = tokenize(text, file)
    labels = labels if labels is not None else set()
    first = tokens[0]
    if first.kind == "KEYWORD" and first.text in ("label", "nominal", "type"):
        p = Parser(tokens, labels)
        d = p.decl()
        p.expect("EOF", what="end of input")
        return d
    if first.kind == "KEYWORD" and first.text == "let":
        trial = set(labels)
        p = Parser(tokens, trial)
        try:
            d = p.decl()
        except ParseError:
            d = None
        if d is not None and p.at("EOF"):
            return d
    if first.kind == "IDENT" and len(tokens) > 1 and tokens[1].kind == "BINDARROW":
        p = Parser(tokens, labels)
        name = p.binder()
        p.advance()
        e = p.expr()
        p.expect("EOF", what="end of input")
        return A.BindDecl(name, e, span=p.span_from(first))
    p = Parser(tokens, labels)
    e = p.expr()
    p.expect("EOF", what="end of input")
    return e
