"""Place-indexed vectors with a declared tail, for multi-place series values."""

from __future__ import annotations

import enum
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Mapping

from .digits import DigitStream, PAdicRational, format_rational
from .errors import DomainError
from .frames import approx_generator, fseries_model
from .fseries import FSeriesSpec, classify_stream, closed_form
from .places import Place, sorted_places, support


class EntryKind(enum.Enum):
    EXACT = "exact"
    APPROX = "approx"
    INFINITY = "infinity"
    INFINITY_ARITHMETIC = "infinity_arithmetic"


@dataclass(frozen=True, eq=False)
class Entry:
    kind: EntryKind
    value: Fraction | None = None
    approx: Callable[[int], Fraction] | None = None

    def __eq__(self, other):
        if not isinstance(other, Entry) or self.kind is not other.kind:
            return False
        if self.kind is EntryKind.EXACT:
            return self.value == other.value
        if self.kind is EntryKind.APPROX:
            return self.approx is other.approx
        return True

    def __hash__(self):
        return hash((self.kind, self.value))

    def __repr__(self):
        if self.kind is EntryKind.EXACT:
            return f"EXACT({format_rational(self.value)})"
        return self.kind.name


def exact(x) -> Entry:
    return Entry(EntryKind.EXACT, Fraction(x))


INFINITY_MARKER = Entry(EntryKind.INFINITY)
INFINITY_ARITHMETIC = Entry(EntryKind.INFINITY_ARITHMETIC)


class TailKind(enum.Enum):
    DIAGONAL = "diagonal"
    ZERO = "zero"
    INFINITY = "infinity"
    INFINITY_ARITHMETIC = "infinity_arithmetic"


@dataclass(frozen=True)
class Tail:
    kind: TailKind
    value: Fraction | None = None

    def entry(self) -> Entry:
        if self.kind is TailKind.DIAGONAL:
            return exact(self.value)
        if self.kind is TailKind.ZERO:
            return exact(0)
        if self.kind is TailKind.INFINITY:
            return INFINITY_MARKER
        return INFINITY_ARITHMETIC

    def __str__(self):
        if self.kind is TailKind.DIAGONAL:
            return f"DIAGONAL({format_rational(self.value)})"
        return self.kind.name


def DIAGONAL(x) -> Tail:
    return Tail(TailKind.DIAGONAL, Fraction(x))


ZERO = Tail(TailKind.ZERO)
INFINITY = Tail(TailKind.INFINITY)


@dataclass(frozen=True)
class AdeleVector:
    """Explicit entries at finitely many places; every other place reads the tail.

    Explicit EXACT entries equal to the tail value are dropped, so equality
    is structural.
    """

    explicit: Mapping = field(default_factory=dict)
    tail: Tail = ZERO
    formal: bool = False

    def __post_init__(self):
        tail_entry = self.tail.entry()
        cleaned = {v: e for v, e in dict(self.explicit).items() if not (e.kind is EntryKind.EXACT and e == tail_entry)}
        object.__setattr__(self, "explicit", cleaned)

    def __hash__(self):
        return hash((frozenset(self.explicit), self.tail))

    def at(self, v: Place) -> Entry:
        return self.explicit.get(v, self.tail.entry())

    @property
    def is_diagonal(self) -> bool:
        return not self.explicit and self.tail.kind is TailKind.DIAGONAL

    def non_integral_places(self) -> set[Place]:
        """Finite places whose entry is an exact non-integral rational."""
        out = set()
        for v, e in self.explicit.items():
            if v.is_finite and e.kind is EntryKind.EXACT and e.value.denominator % v.ell == 0:
                out.add(v)
        if self.tail.kind is TailKind.DIAGONAL:
            for ell in support(Fraction(self.tail.value.denominator)):
                v = Place(ell)
                if v not in self.explicit:
                    out.add(v)
        return out

    def is_restricted(self) -> bool:
        """Whether all but finitely many finite entries are integral.

        Rational tails always qualify.  An infinity tail does not, since it
        puts the marker at infinitely many places.
        """
        if self.tail.kind in (TailKind.INFINITY, TailKind.INFINITY_ARITHMETIC):
            return False
        return True

    def __add__(self, other):
        return add(self, other)

    def __mul__(self, other):
        return mul(self, other)

    def to_json(self, precision: int = 12) -> dict:
        if self.is_diagonal:
            out = {"diagonal": format_rational(self.tail.value)}
            if self.formal:
                out["formal"] = True
            return out
        explicit = {}
        for v in sorted_places(self.explicit):
            e = self.explicit[v]
            if e.kind is EntryKind.EXACT:
                explicit[str(v)] = {"exact": format_rational(e.value)}
            elif e.kind is EntryKind.APPROX:
                explicit[str(v)] = _approx_json(v, e, precision)
            else:
                explicit[str(v)] = e.kind.value
        tail = self.tail.kind.value
        if self.tail.kind is TailKind.DIAGONAL:
            tail = {"diagonal": format_rational(self.tail.value)}
        return {"explicit": explicit, "tail": tail}


def _approx_json(v: Place, e: Entry, precision: int) -> dict:
    x = e.approx(precision)
    if v.is_infinite:
        return {"approx_error": f"2^-{precision}", "value": format_rational(x)}
    mod = v.ell**precision
    if x.denominator % v.ell:
        residue = x.numerator * pow(x.denominator, -1, mod) % mod
        return {"approx_mod": f"{v.ell}^{precision}", "residue": str(residue)}
    return {"approx_error": f"{v.ell}^-{precision}", "value": format_rational(x)}


def embed_rational(x) -> AdeleVector:
    return AdeleVector({}, DIAGONAL(x))


def _combine(a: Entry, b: Entry, op) -> Entry:
    if a.kind in (EntryKind.INFINITY, EntryKind.INFINITY_ARITHMETIC) or b.kind in (
        EntryKind.INFINITY,
        EntryKind.INFINITY_ARITHMETIC,
    ):
        return INFINITY_ARITHMETIC
    if a.kind is EntryKind.EXACT and b.kind is EntryKind.EXACT:
        return exact(op(a.value, b.value))
    fa = (lambda k, x=a.value: x) if a.kind is EntryKind.EXACT else a.approx
    fb = (lambda k, x=b.value: x) if b.kind is EntryKind.EXACT else b.approx
    return Entry(EntryKind.APPROX, approx=lambda k: op(fa(k), fb(k)))


def _combine_tail(s: Tail, t: Tail, op, is_mul: bool) -> Tail:
    bad = (TailKind.INFINITY, TailKind.INFINITY_ARITHMETIC)
    if s.kind in bad or t.kind in bad:
        return Tail(TailKind.INFINITY_ARITHMETIC)
    if s.kind is TailKind.ZERO and t.kind is TailKind.ZERO:
        return ZERO
    if is_mul and TailKind.ZERO in (s.kind, t.kind):
        return ZERO
    x = op(s.entry().value, t.entry().value)
    return DIAGONAL(x)


def _zip(u: AdeleVector, w: AdeleVector, op, is_mul: bool) -> AdeleVector:
    places = set(u.explicit) | set(w.explicit)
    explicit = {v: _combine(u.at(v), w.at(v), op) for v in places}
    return AdeleVector(explicit, _combine_tail(u.tail, w.tail, op, is_mul), u.formal or w.formal)


def add(u: AdeleVector, w: AdeleVector) -> AdeleVector:
    return _zip(u, w, lambda a, b: a + b, False)


def mul(u: AdeleVector, w: AdeleVector) -> AdeleVector:
    return _zip(u, w, lambda a, b: a * b, True)


ring_ops = {"add": add, "mul": mul}


def from_fseries(spec: FSeriesSpec, z, tail_policy: str = "zero") -> AdeleVector:
    """Adelic packaging of ``S(z)``.

    A rational point gives the diagonal of its closed-form value (flagged
    formal when no place sums the series).  An irrational stream gets APPROX
    entries at the places its tail profile forces and ``tail_policy``
    (``"zero"`` or ``"infinity"``) everywhere else.
    """
    policy = {"zero": ZERO, "infinity": INFINITY}.get(str(tail_policy).lower())
    if policy is None:
        raise DomainError(f"unknown tail policy {tail_policy!r}")
    if isinstance(z, PAdicRational):
        cf = closed_form(spec, z)
        return AdeleVector({}, DIAGONAL(cf.value), formal=cf.formal)
    if not isinstance(z, DigitStream):
        raise TypeError("expected a PAdicRational or DigitStream")
    places = classify_stream(spec, z)
    model = fseries_model(spec)
    explicit = {v: Entry(EntryKind.APPROX, approx=approx_generator(model, z, v)) for v in places}
    return AdeleVector(explicit, policy)


def projectively_equal(u: AdeleVector, w: AdeleVector) -> bool:
    """Whether ``w = lam * u`` for a nonzero rational ``lam``.

    Only exact entries are compared; zero vectors are never projective points.
    """
    places = set(u.explicit) | set(w.explicit)
    pairs = [(u.at(v), w.at(v)) for v in places] + [(u.tail.entry(), w.tail.entry())]
    if any(a.kind is not EntryKind.EXACT or b.kind is not EntryKind.EXACT for a, b in pairs):
        raise DomainError("projective comparison needs exact entries")
    lam = None
    for a, b in pairs:
        if (a.value == 0) != (b.value == 0):
            return False
        if a.value:
            r = b.value / a.value
            if lam is None:
                lam = r
            elif r != lam:
                return False
    return lam is not None
