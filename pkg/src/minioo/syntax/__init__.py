from .parser import parse_program, parse_repl_input, parse_source, parse_type
from .printer import print_expr, print_program, print_type
from .tokens import Token, tokenize

__all__ = [
    "Token",
    "tokenize",
    "parse_program",
    "parse_repl_input",
    "parse_source",
    "parse_type",
    "print_expr",
    "print_program",
    "print_type",
]
