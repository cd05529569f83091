"""MiniOO: a small object-oriented expression language with structural typing."""

__version__ = "0.1.0"
