"""Exact p-adic digit data, F-series convergence frames, Hydra numina and
(p,q)-adic measure identities over the rationals."""

from .digits import (
    DigitStream,
    PAdicRational,
    TailFlag,
    b_ell,
    digit_count,
    digit_length,
    eta2,
    from_rational,
    project,
    to_rational,
)
from .places import FINITE, INFINITE, Place, abs_value, valuation

__all__ = [
    "DigitStream",
    "PAdicRational",
    "TailFlag",
    "b_ell",
    "digit_count",
    "digit_length",
    "eta2",
    "from_rational",
    "project",
    "to_rational",
    "FINITE",
    "INFINITE",
    "Place",
    "abs_value",
    "valuation",
]

__version__ = "0.1.0"
