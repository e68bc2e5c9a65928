"""Generalized F-series ``S_{d; q_0, ..., q_{p-1}}``.

The n-th term at a point ``z`` is ``d^{-n} * prod_j q_j ** #_{p:j}([z]_{p^n})``.
At a rational point the terms become geometric after the preperiod, so
every such series has an exact rational closed form ``A + B/(1 - r)``.
Whether that rational is the *limit* of the partial sums depends on the
place; :func:`classify` decides this exactly.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Callable, Iterator, Sequence

from .digits import (
    DigitStream,
    PAdicRational,
    TailFlag,
    check_prime,
    format_rational,
    parse_rational,
)
from .errors import (
    DigitRangeError,
    DomainError,
    ParseError,
    PrimeMismatchError,
    RatioOneError,
    RefusedError,
    ZeroAlphaError,
)
from .places import INFINITE, Place, abs_value, sorted_places, support


@dataclass(frozen=True)
class FSeriesSpec:
    p: int
    d: Fraction
    q: tuple[Fraction, ...]

    def __post_init__(self):
        p = check_prime(self.p)
        d = Fraction(self.d)
        q = tuple(Fraction(x) for x in self.q)
        if len(q) != p:
            raise DomainError(f"need {p} digit coefficients, got {len(q)}")
        if d <= 0 or any(x <= 0 for x in q):
            raise DomainError("d and every q_j must be positive")
        object.__setattr__(self, "p", p)
        object.__setattr__(self, "d", d)
        object.__setattr__(self, "q", q)

    @classmethod
    def s_pq(cls, p, q) -> "FSeriesSpec":
        """The binary series ``S_{p,q} = sum q^{#_1([z]_{2^n})} / p^n``."""
        return cls(2, Fraction(p), (Fraction(1), Fraction(q)))

    def to_text(self) -> str:
        q = ",".join(format_rational(x) for x in self.q)
        return f"p={self.p},d={format_rational(self.d)},q={q}"

    def __str__(self):
        return self.to_text()


def parse_spec(text: str) -> FSeriesSpec:
    """Parse ``p=2,d=2,q=1,3``; everything after ``q=`` is the coefficient list."""
    s = text.strip()
    head, sep, qpart = s.partition("q=")
    if not sep:
        raise ParseError("series needs a q= list", len(s))
    fields = {}
    pos = 0
    for chunk in head.split(","):
        if chunk.strip():
            key, eq, value = chunk.partition("=")
            if not eq:
                raise ParseError(f"expected key=value, got {chunk!r}", pos)
            fields[key.strip()] = value.strip()
        pos += len(chunk) + 1
    if "p" not in fields or "d" not in fields:
        raise ParseError("series needs p= and d=", 0)
    try:
        p = int(fields["p"])
    except ValueError:
        raise ParseError(f"bad prime {fields['p']!r}", s.find("p=") + 2) from None
    d = parse_rational(fields["d"])
    q = tuple(parse_rational(x) for x in qpart.split(",") if x.strip())
    return FSeriesSpec(p, d, q)


def _check_prime_match(spec_p: int, z) -> None:
    if z.p != spec_p:
        raise PrimeMismatchError(f"series is {spec_p}-adic but point is {z.p}-adic")


def term(spec: FSeriesSpec, z, n: int) -> Fraction:
    _check_prime_match(spec.p, z)
    if n < 0:
        raise ValueError("n must be non-negative")
    out = Fraction(1) / spec.d**n
    for qj, c in zip(spec.q, z.truncated_counts(n)):
        if c:
            out *= qj**c
    return out


def partial_sums(spec: FSeriesSpec, z, N: int) -> Iterator[Fraction]:
    """Yield ``partial_sum(spec, z, k)`` for ``k = 1..N``."""
    total = Fraction(0)
    for n in range(N):
        total += term(spec, z, n)
        yield total


def partial_sum(spec: FSeriesSpec, z, N: int) -> Fraction:
    total = Fraction(0)
    for total in partial_sums(spec, z, N):
        pass
    return total if N > 0 else Fraction(0)


# ---------------------------------------------------------------------------
# Convergence
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class ConvergenceReport:
    places: frozenset
    ratio: Fraction
    period_length: int

    def sorted_places(self) -> list[Place]:
        return sorted_places(self.places)

    def to_json(self) -> dict:
        return {
            "places": [str(v) for v in self.sorted_places()],
            "ratio": format_rational(self.ratio),
            "period_length": self.period_length,
        }


def period_ratio(spec: FSeriesSpec, z: PAdicRational) -> Fraction:
    """Factor by which the terms shrink over one period of ``z``."""
    _check_prime_match(spec.p, z)
    if z.is_natural:
        return 1 / spec.d
    r = Fraction(1) / spec.d ** z.period_length
    for qj, c in zip(spec.q, z.period_counts()):
        r *= qj**c
    return r


def convergent_places(rho: Fraction) -> frozenset:
    """Places where ``|rho|_v < 1``; only ``inf`` and primes of ``rho`` can qualify."""
    candidates = [INFINITE] + [Place(ell) for ell in support(rho)]
    return frozenset(v for v in candidates if abs_value(v, rho) < 1)


def classify(spec: FSeriesSpec, z: PAdicRational) -> ConvergenceReport:
    rho = period_ratio(spec, z)
    return ConvergenceReport(convergent_places(rho), rho, z.period_length)


def classify_stream(spec: FSeriesSpec, z: DigitStream) -> frozenset:
    """Finite places forced by the declared tail profile of an irrational stream.

    ``ell`` is reported when ``|d|_ell = 1``, every ``|q_i|_ell <= 1`` and some
    digit ``j`` with ``|q_j|_ell < 1`` is declared to occur infinitely often.
    This is a sufficient condition only.  Raises :class:`RefusedError` when no
    place is decided and a digit that could decide it is flagged UNKNOWN.
    """
    _check_prime_match(spec.p, z)
    primes = set(support(spec.d))
    for qj in spec.q:
        primes |= set(support(qj))
    nonzero_inf = any(z.flag(j) is TailFlag.INFINITELY_MANY for j in range(1, spec.p))
    found, undecided = set(), False
    for ell in sorted(primes):
        v = Place(ell)
        if abs_value(v, spec.d) != 1 or any(abs_value(v, qi) > 1 for qi in spec.q):
            continue
        needed = [j for j in range(spec.p) if abs_value(v, spec.q[j]) < 1]
        hit = False
        for j in needed:
            flag = z.flag(j)
            if j == 0 and flag is TailFlag.INFINITELY_MANY and not nonzero_inf:
                # leading zeros never count, so zeros alone decide nothing
                flag = TailFlag.UNKNOWN
            if flag is TailFlag.INFINITELY_MANY:
                hit = True
            elif flag is TailFlag.UNKNOWN:
                undecided = True
        if hit:
            found.add(v)
    if not found and undecided:
        raise RefusedError("tail profile leaves convergence undecided")
    return frozenset(found)


# ---------------------------------------------------------------------------
# Closed forms
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class ClosedForm:
    """``value = A + B/(1 - r)``; ``B`` sums one period of terms from ``tail_start``."""

    A: Fraction
    B: Fraction
    r: Fraction
    tail_start: int
    formal: bool = False

    @property
    def value(self) -> Fraction:
        return self.A + self.B / (1 - self.r)

    def to_json(self) -> dict:
        return {
            "A": format_rational(self.A),
            "B": format_rational(self.B),
            "r": format_rational(self.r),
            "value": format_rational(self.value),
            "formal": self.formal,
        }


def geometric_split(
    term_at: Callable[[int], Fraction], r: Fraction, start: int, period: int
) -> tuple[Fraction, Fraction]:
    """Head sum before ``start`` and one period of terms from ``start``."""
    A = sum((term_at(n) for n in range(start)), Fraction(0))
    B = sum((term_at(start + k) for k in range(period)), Fraction(0))
    return A, B


def tail_start(term_at: Callable[[int], Fraction], r: Fraction, P: int, L: int) -> int:
    """First of ``P`` and ``P + L`` from which the terms are exactly geometric."""
    if all(term_at(P + L + i) == r * term_at(P + i) for i in range(L)):
        return P
    return P + L


def closed_form(spec: FSeriesSpec, z: PAdicRational) -> ClosedForm:
    report = classify(spec, z)
    r = report.ratio
    if r == 1:
        raise RatioOneError(f"period ratio is 1 at {z}; no place sums the series")
    L = 1 if z.is_natural else z.period_length

    def t(n):
        return term(spec, z, n)

    start = tail_start(t, r, z.preperiod_length, L)
    A, B = geometric_split(t, r, start, L)
    return ClosedForm(A, B, r, start, formal=not report.places)


def apply_functional_equation(spec: FSeriesSpec, k: int, s) -> Fraction:
    if not 0 <= k < spec.p:
        raise DigitRangeError(f"digit {k} outside [0, {spec.p})")
    return spec.q[k] / spec.d * Fraction(s) + 1


def conjugate(spec: FSeriesSpec, alpha, beta) -> list[tuple[Fraction, Fraction]]:
    """Branch data ``(q_j/d, gamma_j)`` of ``alpha*S + beta``."""
    alpha, beta = Fraction(alpha), Fraction(beta)
    if alpha == 0:
        raise ZeroAlphaError("alpha must be nonzero")
    out = []
    for qj in spec.q:
        slope = qj / spec.d
        out.append((slope, alpha + beta * (1 - slope)))
    return out


def natural_closed_value(spec: FSeriesSpec, z: PAdicRational) -> Fraction:
    """Value at ``z`` in ``N_0`` as last-term-times-geometric plus head sum."""
    if not z.is_natural:
        raise DomainError("point is not a non-negative integer")
    lam = z.preperiod_length
    head = partial_sum(spec, z, lam)
    return head + term(spec, z, lam) / (1 - 1 / spec.d)
