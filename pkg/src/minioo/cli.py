"""minioo run FILE | check FILE [--binding NAME] | test DIR | repl [FILE]"""
from __future__ import annotations

import argparse
import sys

from . import __version__
from .diagnostics import color_enabled
from .driver import EXIT_OK, EXIT_STATIC, EXIT_USAGE, check_file, render_all, run_file
from .golden import run_directory
from .infer import pretty_scheme
from .repl import repl_loop
from .syntax import ast as A


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--no-color", action="store_true", help="disable ANSI colour in diagnostics")
    common.add_argument("--max-errors", type=int, default=20, metavar="N", help="stop reporting after N errors")
    p = _Parser(prog="minioo", description="MiniOO interpreter and type checker", parents=[common])
    p.add_argument("--version", action="version", version=f"minioo {__version__}")
    sub = p.add_subparsers(dest="command", metavar="COMMAND", parser_class=_Parser)
    sub.required = True
    run = sub.add_parser("run", help="typecheck and run a program", parents=[common])
    run.add_argument("file")
    chk = sub.add_parser("check", help="print the inferred type of each binding", parents=[common])
    chk.add_argument("file")
    chk.add_argument("--binding", metavar="NAME")
    tst = sub.add_parser("test", help="run a golden corpus directory", parents=[common])
    tst.add_argument("dir")
    rpl = sub.add_parser("repl", help="interactive session", parents=[common])
    rpl.add_argument("file", nargs="?", help="load this program first")
    return p


def cmd_run(args, out, err) -> int:
    outcome = run_file(args.file, out, args.max_errors)
    out.flush()
    err.write(render_all(outcome.diagnostics, color_enabled(err, args.no_color)))
    return outcome.code


def cmd_check(args, out, err) -> int:
    outcome = check_file(args.file, args.max_errors)
    if outcome.result is not None:
        own = [d.name for d in outcome.program.decls if isinstance(d, A.LetDecl)]
        for name in own:
            if args.binding and name != args.binding:
                continue
            if name in outcome.result.schemes:
                out.write(f"{name} :: {pretty_scheme(outcome.result.schemes[name])}\n")
        if args.binding and args.binding not in own:
            err.write(f"{args.file}: no binding named {args.binding}\n")
            return EXIT_STATIC
    err.write(render_all(outcome.diagnostics, color_enabled(err, args.no_color)))
    return outcome.code


def main(argv=None, out=None, err=None) -> int:
    out = out or sys.stdout
    err = err or sys.stderr
    try:
        args = build_parser().parse_args(argv)
    except UsageError as e:
        err.write(f"minioo: usage error: {e}\n")
        return EXIT_USAGE
    try:
        if args.command == "run":
            return cmd_run(args, out, err)
        if args.command == "check":
            return cmd_check(args, out, err)
        if args.command == "test":
            return run_directory(args.dir, out, args.max_errors)
        return repl_loop(sys.stdin, out, err, color_enabled(err, args.no_color), args.file)
    except FileNotFoundError as e:
        err.write(f"minioo: usage error: cannot read {e.filename}\n")
        return EXIT_USAGE
    except IsADirectoryError as e:
        err.write(f"minioo: usage error: {e.filename} is a directory\n")
        return EXIT_USAGE
    return EXIT_OK
