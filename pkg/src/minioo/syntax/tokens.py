from __future__ import annotations

import re
from dataclasses import dataclass, field

from ..diagnostics import LexError, SourceSpan

KEYWORDS = frozenset(
    ["let", "in", "label", "nominal", "extends", "type", "do", "if", "then", "else"]
)

# longest first: ".<++." must win over ".<."
SYMBOLS = [
    (".<++.", "DOT_UNION"),
    (".*.", "DOT_EXTEND"),
    (".<.", "DOT_UPDATE"),
    (":=:", "TY_FIELD"),
    (":*:", "TY_CONS"),
    ("<-", "BINDARROW"),
    ("->", "ARROW"),
    ("==", "EQEQ"),
    ("++", "CONCAT"),
    ("=", "EQUALS"),
    ("#", "HASH"),
    ("\\", "LAMBDA"),
    ("(", "LPAREN"),
    (")", "RPAREN"),
    ("{", "LBRACE"),
    ("}", "RBRACE"),
    ("[", "LBRACKET"),
    ("]", "RBRACKET"),
    (",", "COMMA"),
    (";", "SEMI"),
    (":", "COLON"),
    ("+", "PLUS"),
    ("-", "MINUS"),
    ("*", "STAR"),
    ("/", "SLASH"),
    ("<", "LESS"),
]

_IDENT = re.compile(r"[A-Za-z_][A-Za-z0-9_']*")
_NUMBER = re.compile(r"[0-9]+(\.[0-9]+)?")
_ESCAPES = {'"': '"', "\\": "\\", "n": "\n", "t": "\t", "&": ""}


@dataclass(frozen=True)
class Token:
    kind: str
    text: str
    span: SourceSpan = field(compare=False)
    value: object = None

    def __repr__(self):
        if self.kind in ("IDENT", "INT", "FLOAT", "STRING", "KEYWORD"):
            return f"{self.kind} {self.value if self.kind == 'STRING' else self.text}"
        return self.kind


def tokenize(source: str, file: str = "<input>") -> list[Token]:
    tokens: list[Token] = []
    i = 0
    line, line_start = 1, 0
    n = len(source)
    while i < n:
        ch = source[i]
        col = i - line_start + 1
        if ch == "\n":
            i += 1
            line, line_start = line + 1, i
            continue
        if ch in " \t\r":
            i += 1
            continue
        if source.startswith("--", i):
            while i < n and source[i] != "\n":
                i += 1
            continue
        if ch == '"':
            j = i + 1
            chars = []
            while True:
                if j >= n or source[j] == "\n":
                    raise LexError(SourceSpan(file, line, col, j - i), "unterminated string literal")
                c = source[j]
                if c == '"':
                    break
                if c == "\\":
                    esc = source[j + 1] if j + 1 < n else ""
                    digits = re.match(r"[0-9]+", source[j + 1 :])
                    if digits and int(digits.group()) <= 0x10FFFF:
                        chars.append(chr(int(digits.group())))
                        j += 1 + len(digits.group())
                        continue
                    if esc not in _ESCAPES:
                        raise LexError(SourceSpan(file, line, j - line_start + 1, 2), f"unknown escape \\{esc}")
                    chars.append(_ESCAPES[esc])
                    j += 2
                    continue
                chars.append(c)
                j += 1
            text = source[i : j + 1]
            tokens.append(Token("STRING", text, SourceSpan(file, line, col, len(text)), "".join(chars)))
            i = j + 1
            continue
        m = _IDENT.match(source, i)
        if m:
            text = m.group()
            kind = "KEYWORD" if text in KEYWORDS else "IDENT"
            tokens.append(Token(kind, text, SourceSpan(file, line, col, len(text)), text))
            i = m.end()
            continue
        m = _NUMBER.match(source, i)
        if m:
            text = m.group()
            if m.group(1):
                tokens.append(Token("FLOAT", text, SourceSpan(file, line, col, len(text)), float(text)))
            else:
                tokens.append(Token("INT", text, SourceSpan(file, line, col, len(text)), int(text)))
            i = m.end()
            continue
        for sym, kind in SYMBOLS:
            if source.startswith(sym, i):
                tokens.append(Token(kind, sym, SourceSpan(file, line, col, len(sym))))
                i += len(sym)
                break
        else:
            raise LexError(SourceSpan(file, line, col, 1), f"illegal character {ch!r}")
    tokens.append(Token("EOF", "", SourceSpan(file, line, i - line_start + 1, 0)))
    return tokens
