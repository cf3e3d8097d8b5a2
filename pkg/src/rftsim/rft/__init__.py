"""Repairable fault trees: abstract syntax, text format, validation."""

from rftsim.rft.model import ElementLabel, FaultTreeDef, Kind, Violation
from rftsim.rft.parser import parse_rft, print_rft
from rftsim.rft.validate import dangling_leaves, validate_rft
from rftsim.rft.rewrite import rewrite_fdep

__all__ = [
    "ElementLabel",
    "FaultTreeDef",
    "Kind",
    "Violation",
    "dangling_leaves",
    "parse_rft",
    "print_rft",
    "rewrite_fdep",
    "validate_rft",
]
