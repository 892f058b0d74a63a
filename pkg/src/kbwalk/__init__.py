"""k-bonacci random walks on the integers."""

from .dyadic import Dyadic
from .sequence import (
    AdmissibilityError,
    KBonacciSpec,
    SequenceTable,
    SpecError,
    check_growth_inequalities,
    generate,
    make_spec,
    powers_init,
    tribonacci_spec,
)
from .walk import SignSequence, WalkTrace, partial_sums, simulate, visit_times

__version__ = "0.1.0"

__all__ = [
    "AdmissibilityError",
    "Dyadic",
    "KBonacciSpec",
    "SequenceTable",
    "SignSequence",
    "SpecError",
    "WalkTrace",
    "check_growth_inequalities",
    "generate",
    "make_spec",
    "partial_sums",
    "powers_init",
    "simulate",
    "tribonacci_spec",
    "visit_times",
]
