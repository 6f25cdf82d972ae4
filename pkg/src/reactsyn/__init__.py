"""Reactive controller synthesis from imperative specifications.

Pipeline: parse/typecheck/flatten `.tsl` sources into a model, cut process
bodies into atomic segments, bit-blast everything into a symbolic GR(1)
game, solve it, then either debug the counterexample interactively or
extract controller code and emit a C module.
"""

__version__ = "0.1.0"
