"""Source spans and the error hierarchy shared by every stage."""
from __future__ import annotations

import os
from dataclasses import dataclass


@dataclass(frozen=True)
class SourceSpan:
    file: str
    line: int
    column: int
    length: int = 0

    def __post_init__(self):
        if self.line < 1 or self.column < 1 or self.length < 0:
            raise ValueError(f"bad span {self.line}:{self.column}+{self.length}")

    def __str__(self):
        return f"{self.file}:{self.line}:{self.column}"


NO_SPAN = SourceSpan("<builtin>", 1, 1, 0)


class MiniOOError(Exception):
    category = "error"

    def __init__(self, kind: str, message: str, span: SourceSpan | None = None):
        super().__init__(message)
        self.kind = kind
        self.message = message
        self.span = span

    def render(self, color: bool = False) -> str:
        where = str(self.span) if self.span is not None else "<unknown>"
        tag = f"{self.category}[{self.kind}]"
        if color:
            tag = f"\x1b[1;31m{tag}\x1b[0m"
        return f"{where}: {tag}: {self.message}"

    def __str__(self):
        return self.render()


class LexError(MiniOOError):
    def __init__(self, span, message):
        super().__init__("LexError", message, span)


class ParseError(MiniOOError):
    def __init__(self, span, message, expected=()):
        self.expected = tuple(expected)
        if self.expected:
            message = f"{message} (expected {', '.join(self.expected)})"
        super().__init__("ParseError", message, span)


TYPE_ERROR_KINDS = (
    "UnboundName",
    "Mismatch",
    "InfiniteType",
    "MissingField",
    "DuplicateLabel",
    "StupidCast",
    "NotNarrowable",
    "NotDeepSubtype",
    "NotAncestor",
    "NotConcrete",
    "AbstractUse",
    "PrematureSelfAccess",
    "AmbiguousRow",
    "ClassError",
)


class TypeCheckError(MiniOOError):
    def __init__(self, kind, message, span=None):
        assert kind in TYPE_ERROR_KINDS, kind
        super().__init__(kind, message, span)


class RuntimeFault(MiniOOError):
    category = "runtime fault"

    def __init__(self, kind, message, span=None):
        assert kind in ("PrematureSelfAccess", "UserFail", "DivisionByZero"), kind
        super().__init__(kind, message, span)


def color_enabled(stream, flag_off: bool = False) -> bool:
    if flag_off or os.environ.get("MINIOO_COLOR") == "0":
        return False
    return hasattr(stream, "isatty") and stream.isatty()
