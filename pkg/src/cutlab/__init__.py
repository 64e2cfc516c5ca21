"""Exact lift-and-project cuts and their regularity."""

from .cglp import Cut, CglpSolution, classify_basis, detect_split, generate_cut
from .disjunction import Disjunction, simple_tbranch
from .instance import Model, load_fixture, read_model, to_standard_form
from .intersection import cuts_equivalent, verify_theorem1
from .rcv import RegularityVerdict, is_cut_regular, oracle_extended_regular

__version__ = "0.1.0"

__all__ = [
    "Cut", "CglpSolution", "Disjunction", "Model", "RegularityVerdict", "classify_basis",
    "cuts_equivalent", "detect_split", "generate_cut", "is_cut_regular", "load_fixture",
    "oracle_extended_regular", "read_model", "simple_tbranch", "to_standard_form",
    "verify_theorem1",
]
