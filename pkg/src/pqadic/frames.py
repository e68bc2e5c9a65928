"""Frames: per-point choices of the completions in which a series is summed.

A :class:`Frame` is intensional.  It holds a classifier from input points
to finite sets of places and never an explicit point table.  Values of
frame-compatible functions at a point live in :class:`FrameValue`, one entry
per assigned place.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Iterable, Mapping, Sequence

from .digits import DigitStream, PAdicRational, TailFlag, check_prime, format_point, format_rational
from .errors import (
    DomainError,
    EmptyInputError,
    EqualPrimesError,
    PlaceSetMismatchError,
    RefusedError,
)
from .fseries import (
    ClosedForm,
    FSeriesSpec,
    classify,
    classify_stream,
    closed_form,
    term,
)
from .places import INFINITE, Place, abs_value, sorted_places


class _Marker:
    """Stand-in place for points where no completion sums the series."""

    is_infinite = False
    is_finite = False
    ell = None

    def sort_key(self):
        return (2, 0)

    def __str__(self):
        return "divergent"

    __repr__ = __str__


DIVERGENT_EVERYWHERE = _Marker()


def _key(v):
    return v.sort_key()


# ---------------------------------------------------------------------------
# Frames
# ---------------------------------------------------------------------------


@dataclass(frozen=True, eq=False)
class Frame:
    p: int
    classifier: Callable[[object], frozenset]
    name: str = "frame"
    dimension: int = 1

    def __post_init__(self):
        object.__setattr__(self, "p", check_prime(self.p))
        if self.dimension < 1:
            raise DomainError("dimension must be at least 1")

    def assign(self, z) -> frozenset:
        if z.p != self.p:
            raise DomainError(f"frame lives on Z_{self.p}, point is {z.p}-adic")
        out = frozenset(self.classifier(z))
        if not out:
            raise DomainError(f"frame {self.name} assigned no place at {z}")
        return out

    def __str__(self):
        return self.name


def standard_frame(p: int, q: int) -> Frame:
    """``{inf}`` on non-negative integers, ``{q}`` everywhere else."""
    p, q = check_prime(p), check_prime(q)
    if p == q:
        raise EqualPrimesError("standard frame needs distinct primes")
    finite = frozenset({Place(q)})
    inf = frozenset({INFINITE})

    def classifier(z):
        if isinstance(z, PAdicRational) and z.is_natural:
            return inf
        return finite

    return Frame(p, classifier, name=f"standard({p},{q})")


def partition_cell(z) -> int:
    """Index ``j`` of the partition cell containing ``z``.

    Cell 0 is the non-negative integers.  Otherwise the smallest non-zero
    digit occurring infinitely often wins.
    """
    if isinstance(z, PAdicRational):
        if z.is_natural:
            return 0
        return min(d for d in z.per if d)
    for j in range(1, z.p):
        flag = z.flag(j)
        if flag is TailFlag.INFINITELY_MANY:
            return j
        if flag is TailFlag.UNKNOWN:
            raise RefusedError(f"tail flag for digit {j} is UNKNOWN")
    return 0


def partition_frame(p: int, places_by_digit: Sequence[Place]) -> Frame:
    """Frame sending cell ``j >= 1`` to ``places_by_digit[j-1]`` and cell 0 to inf."""
    p = check_prime(p)
    if len(places_by_digit) != p - 1:
        raise DomainError(f"need {p - 1} places, got {len(places_by_digit)}")
    table = [frozenset({INFINITE})] + [frozenset({v}) for v in places_by_digit]
    return Frame(p, lambda z: table[partition_cell(z)], name=f"partition(p={p})")


def fseries_frame(spec: FSeriesSpec) -> Frame:
    def classifier(z):
        if isinstance(z, DigitStream):
            places = classify_stream(spec, z)
        else:
            places = classify(spec, z).places
        return places or frozenset({DIVERGENT_EVERYWHERE})

    return Frame(spec.p, classifier, name=f"fseries({spec})")


def constant_frame(p: int, places: Iterable[Place], name: str = "constant") -> Frame:
    fixed = frozenset(places)
    return Frame(p, lambda z: fixed, name=name)


def degree(F: Frame, sample: Iterable) -> tuple[int, list[Place]]:
    """Places used by ``F`` on ``sample``; a lower bound for the true degree."""
    seen = set()
    empty = True
    for x in sample:
        empty = False
        seen |= {v for v in F.assign(x) if v is not DIVERGENT_EVERYWHERE}
    if empty:
        raise EmptyInputError("degree needs a nonempty sample")
    places = sorted_places(seen)
    return len(places), places


# ---------------------------------------------------------------------------
# Frame values
# ---------------------------------------------------------------------------


class Kind(enum.Enum):
    EXACT = "exact"
    APPROX = "approx"
    DIVERGENT = "divergent"


@dataclass(frozen=True, eq=False)
class PlaceValue:
    """One entry of a frame value.

    ``approx`` maps a precision ``k`` to a rational within ``ell^-k`` of the
    limit at a finite place (``2^-k`` at the real place).
    """

    kind: Kind
    value: Fraction | None = None
    approx: Callable[[int], Fraction] | None = None

    def __eq__(self, other):
        if not isinstance(other, PlaceValue) or self.kind is not other.kind:
            return NotImplemented if not isinstance(other, PlaceValue) else False
        if self.kind is Kind.EXACT:
            return self.value == other.value
        if self.kind is Kind.DIVERGENT:
            return True
        return self.approx is other.approx

    def __hash__(self):
        return hash((self.kind, self.value))

    def __repr__(self):
        if self.kind is Kind.EXACT:
            return f"EXACT({format_rational(self.value)})"
        return self.kind.name


def EXACT(x) -> PlaceValue:
    return PlaceValue(Kind.EXACT, Fraction(x))


def APPROX(gen: Callable[[int], Fraction]) -> PlaceValue:
    return PlaceValue(Kind.APPROX, approx=gen)


DIVERGENT = PlaceValue(Kind.DIVERGENT)


def _lift(pv: PlaceValue) -> Callable[[int], Fraction]:
    if pv.kind is Kind.EXACT:
        value = pv.value
        return lambda k: value
    return pv.approx


def _combine(a: PlaceValue, b: PlaceValue, op) -> PlaceValue:
    if a.kind is Kind.DIVERGENT or b.kind is Kind.DIVERGENT:
        return DIVERGENT
    if a.kind is Kind.EXACT and b.kind is Kind.EXACT:
        return EXACT(op(a.value, b.value))
    fa, fb = _lift(a), _lift(b)
    return APPROX(lambda k: op(fa(k), fb(k)))


@dataclass(frozen=True)
class FrameValue:
    entries: Mapping = field(default_factory=dict)

    def __post_init__(self):
        object.__setattr__(self, "entries", dict(self.entries))

    @property
    def places(self) -> frozenset:
        return frozenset(self.entries)

    @classmethod
    def constant(cls, places: Iterable[Place], x) -> "FrameValue":
        return cls({v: EXACT(x) for v in places})

    def _zip(self, other: "FrameValue", op) -> "FrameValue":
        if self.places != other.places:
            raise PlaceSetMismatchError(
                f"place sets differ: {sorted(map(str, self.places))} vs {sorted(map(str, other.places))}"
            )
        return FrameValue({v: _combine(self.entries[v], other.entries[v], op) for v in self.entries})

    def __add__(self, other):
        return add(self, other)

    def __mul__(self, other):
        if isinstance(other, FrameValue):
            return mul(self, other)
        return scale(Fraction(other), self)

    __rmul__ = __mul__

    def __eq__(self, other):
        return isinstance(other, FrameValue) and self.entries == other.entries

    __hash__ = None

    def exact_values(self) -> list[Fraction]:
        return [pv.value for pv in self.entries.values() if pv.kind is Kind.EXACT]

    def to_json(self) -> dict:
        out = {}
        for v in sorted(self.entries, key=_key):
            pv = self.entries[v]
            out[str(v)] = format_rational(pv.value) if pv.kind is Kind.EXACT else pv.kind.value
        return out

    def __repr__(self):
        inner = ", ".join(f"{v}: {self.entries[v]!r}" for v in sorted(self.entries, key=_key))
        return "{" + inner + "}"


def add(f: FrameValue, g: FrameValue) -> FrameValue:
    return f._zip(g, lambda a, b: a + b)


def mul(f: FrameValue, g: FrameValue) -> FrameValue:
    return f._zip(g, lambda a, b: a * b)


def scale(c, f: FrameValue) -> FrameValue:
    return mul(FrameValue.constant(f.places, c), f)


def zero_like(f: FrameValue) -> FrameValue:
    return FrameValue.constant(f.places, 0)


def one_like(f: FrameValue) -> FrameValue:
    return FrameValue.constant(f.places, 1)


pointwise_ring_ops = {"add": add, "mul": mul, "scale": scale}


# ---------------------------------------------------------------------------
# Series and frame limits
# ---------------------------------------------------------------------------


@dataclass(frozen=True, eq=False)
class SeriesModel:
    """Point-indexed term generator with optional exact closed form."""

    p: int
    term: Callable[[object, int], Fraction]
    closed: Callable[[PAdicRational], ClosedForm] | None = None
    name: str = "series"


def fseries_model(spec: FSeriesSpec) -> SeriesModel:
    return SeriesModel(
        spec.p,
        lambda z, n: term(spec, z, n),
        lambda z: closed_form(spec, z),
        name=str(spec),
    )


def approx_generator(series: SeriesModel, x, v: Place, max_terms: int = 100_000):
    """Partial sums truncated where the next term is below the requested size.

    At a finite place this is certified when the term sizes never increase,
    which holds in the stream setting where ``|d|_ell = 1`` and every
    coefficient is ``ell``-integral.
    """

    def gen(k: int) -> Fraction:
        bound = Fraction(1, v.ell**k) if v.is_finite else Fraction(1, 2**k)
        total = Fraction(0)
        for n in range(max_terms):
            t = series.term(x, n)
            if abs_value(v, t) <= bound:
                return total
            total += t
        raise DomainError(f"no term below {bound} at {v} within {max_terms} terms")

    return gen


def frame_limit(F: Frame, series: SeriesModel | FSeriesSpec, x, precision: int | None = None) -> FrameValue:
    """Evaluate a series at ``x`` in every completion ``F`` assigns there.

    ``precision`` is only used to pre-validate APPROX entries; callers query
    the generators themselves.
    """
    if isinstance(series, FSeriesSpec):
        series = fseries_model(series)
    places = F.assign(x)
    entries = {}
    cf = None
    if isinstance(x, PAdicRational) and series.closed is not None:
        try:
            cf = series.closed(x)
        except DomainError:
            cf = None
    for v in places:
        if v is DIVERGENT_EVERYWHERE:
            entries[v] = DIVERGENT
        elif cf is not None:
            entries[v] = EXACT(cf.value) if abs_value(v, cf.r) < 1 else DIVERGENT
        elif isinstance(x, PAdicRational):
            entries[v] = DIVERGENT
        else:
            entries[v] = APPROX(approx_generator(series, x, v))
            if precision is not None:
                entries[v].approx(precision)
    return FrameValue(entries)


# ---------------------------------------------------------------------------
# Extension and norms
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class Target:
    """Either the ``ell``-adic integers (``ring=True``) or the field ``Q_ell``."""

    ell: int
    ring: bool = True


def extension_witness(values: Iterable, target: Target) -> tuple[bool, Fraction | None]:
    """Sample-level check that every exact value lies in ``target``.

    Returns ``(True, None)`` or ``(False, first_violation)``.  Accepts frame
    values or bare rationals.
    """
    if not target.ring:
        return True, None
    for item in values:
        xs = item.exact_values() if isinstance(item, FrameValue) else [Fraction(item)]
        for x in xs:
            if x.denominator % target.ell == 0:
                return False, x
    return True, None


def product_norm(magnitudes: Sequence[Sequence]) -> Fraction:
    """Max over places of the max-norm of each coordinate tuple."""
    if not magnitudes or any(len(row) == 0 for row in magnitudes):
        raise EmptyInputError("product_norm needs nonempty tuples")
    return max(max(Fraction(a) for a in row) for row in magnitudes)


def sample_points(p: int, N: int) -> list[PAdicRational]:
    """Residues ``0..p^N-1`` as integers, plus the same residues with an
    all-``(p-1)`` tail."""
    from .digits import base_digits

    out = []
    for n in range(p**N):
        out.append(PAdicRational.from_int(p, n))
    for n in range(p**N):
        digits = base_digits(n, p)
        digits += [0] * (N - len(digits))
        out.append(PAdicRational(p, tuple(digits), (p - 1,)))
    return out


def sup_norm_estimate(f: Callable[[PAdicRational], Fraction], q: int, p: int, N: int) -> Fraction:
    """Max of ``|f(x)|_q`` over :func:`sample_points`; a lower bound for the sup."""
    v = Place(q)
    return max(abs_value(v, f(x)) for x in sample_points(p, N))


def frame_report(F: Frame, spec: FSeriesSpec, points: Sequence[PAdicRational]) -> dict:
    samples = []
    for z in points:
        places = F.assign(z)
        fv = frame_limit(F, spec, z)
        vals = {pv.value for pv in fv.entries.values() if pv.kind is Kind.EXACT}
        row = {"z": format_point(z), "places": [str(v) for v in sorted(places, key=_key)]}
        row["value"] = format_rational(vals.pop()) if len(vals) == 1 else None
        samples.append(row)
    deg, _ = degree(F, points)
    return {"name": F.name, "samples": samples, "degree_lower_bound": deg}
