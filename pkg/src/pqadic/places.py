"""Places of Q with exact absolute values and valuations."""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction

from .digits import check_prime
from .errors import ParseError


@dataclass(frozen=True, order=False)
class Place:
    """A finite prime ``ell`` or the archimedean place (``ell is None``)."""

    ell: int | None = None

    def __post_init__(self):
        if self.ell is not None:
            object.__setattr__(self, "ell", check_prime(self.ell))

    @property
    def is_infinite(self) -> bool:
        return self.ell is None

    @property
    def is_finite(self) -> bool:
        return self.ell is not None

    def sort_key(self):
        # infinity first, then primes ascending
        return (0, 0) if self.ell is None else (1, self.ell)

    def __str__(self):
        return "inf" if self.ell is None else str(self.ell)

    def __repr__(self):
        return "INFINITE" if self.ell is None else f"FINITE({self.ell})"


INFINITE = Place(None)


def FINITE(ell: int) -> Place:
    return Place(ell)


def parse_place(text: str) -> Place:
    s = str(text).strip().lower()
    if s in ("inf", "infinity", "oo"):
        return INFINITE
    try:
        return Place(int(s))
    except ValueError:
        raise ParseError(f"not a place: {text!r}", 0) from None


def sorted_places(places) -> list[Place]:
    return sorted(places, key=Place.sort_key)


def _power_of(ell: int, n: int) -> int:
    k = 0
    while n % ell == 0:
        n //= ell
        k += 1
    return k


def valuation(ell: int, x) -> int | float:
    """``v_ell(x)``; returns ``math.inf`` for ``x = 0``."""
    x = Fraction(x)
    if x == 0:
        return math.inf
    return _power_of(ell, abs(x.numerator)) - _power_of(ell, x.denominator)


def abs_value(v: Place, x) -> Fraction:
    x = Fraction(x)
    if v.is_infinite:
        return abs(x)
    if x == 0:
        return Fraction(0)
    return Fraction(v.ell) ** -valuation(v.ell, x)


def is_nonzero(x) -> bool:
    """The trivial absolute value, as a predicate."""
    return Fraction(x) != 0


def prime_factors(n: int) -> list[int]:
    n = abs(n)
    out = []
    f = 2
    while f * f <= n:
        if n % f == 0:
            out.append(f)
            while n % f == 0:
                n //= f
        f += 1 if f == 2 else 2
    if n > 1:
        out.append(n)
    return out


def support(x) -> list[int]:
    """Primes dividing the numerator or denominator of a nonzero rational."""
    x = Fraction(x)
    return sorted(set(prime_factors(x.numerator)) | set(prime_factors(x.denominator)))
