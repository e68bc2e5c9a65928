"""Rational p-adic integers as eventually periodic digit strings.

A :class:`PAdicRational` stores the Hensel digits of an element of
``Z_p ∩ Q`` least-significant first, split into a finite preperiod and a
repeating period.  The representation is canonicalized on construction, so
two instances are equal exactly when they denote the same p-adic integer.

Digit counts of truncations ``[z]_{p^n}`` are answered in O(p) time from
prefix tables, which lets the series code ask about ``n`` in the thousands
without materializing digits.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field
from fractions import Fraction
from functools import cached_property
from typing import Callable, Mapping, Sequence, Union

from .errors import (
    DenominatorDivisibleByP,
    DigitRangeError,
    NotPrimeError,
    ParseError,
    WrongPrimeError,
)

# Deterministic Miller-Rabin witnesses, valid for n < 3.3e24.
_MR_WITNESSES = (2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37, 41)


def is_prime(n: int) -> bool:
    if n < 2:
        return False
    for q in _MR_WITNESSES:
        if n % q == 0:
            return n == q
    d, s = n - 1, 0
    while d % 2 == 0:
        d //= 2
        s += 1
    for a in _MR_WITNESSES:
        x = pow(a, d, n)
        if x in (1, n - 1):
            continue
        for _ in range(s - 1):
            x = x * x % n
            if x == n - 1:
                break
        else:
            return False
    return True


def check_prime(p) -> int:
    """Return ``p`` as an int, raising :class:`NotPrimeError` if it is not prime."""
    if isinstance(p, bool) or int(p) != p:
        raise NotPrimeError(f"{p!r} is not an integer")
    p = int(p)
    if not is_prime(p):
        raise NotPrimeError(f"{p} is not prime")
    return p


# ---------------------------------------------------------------------------
# Digit functions on non-negative integers
# ---------------------------------------------------------------------------


def base_digits(m: int, p: int) -> list[int]:
    """Base-``p`` digits of ``m >= 0``, least significant first (``[]`` for 0)."""
    if m < 0:
        raise ValueError("m must be non-negative")
    out = []
    while m:
        m, d = divmod(m, p)
        out.append(d)
    return out


def digit_length(p: int, m: int) -> int:
    """Number of base-``p`` digits of ``m``; zero has none."""
    if m < 0:
        raise ValueError("m must be non-negative")
    n = 0
    while m:
        m //= p
        n += 1
    return n


lambda_p = digit_length


def digit_count(p: int, j: int, m: int) -> int:
    """How many times digit ``j`` occurs among the base-``p`` digits of ``m``.

    For ``j = 0`` this is ``digit_length(p, m)`` minus the non-zero digit
    counts, so the (implicit) leading zeros never count.
    """
    if not 0 <= j < p:
        raise DigitRangeError(f"digit {j} outside [0, {p})")
    return base_digits(m, p).count(j)


def b_ell(ell: int, n: int) -> Fraction:
    """The rational whose ``ell``-adic digits are those of ``n`` repeated forever."""
    if n < 0:
        raise ValueError("n must be non-negative")
    if n == 0:
        return Fraction(0)
    return Fraction(n, 1 - ell ** digit_length(ell, n))


# ---------------------------------------------------------------------------
# Canonical eventually periodic digit strings
# ---------------------------------------------------------------------------


def _primitive_root(word: tuple[int, ...]) -> tuple[int, ...]:
    n = len(word)
    for d in range(1, n):
        if n % d == 0 and word[:d] * (n // d) == word:
            return word[:d]
    return word


def _canonical(pre: tuple[int, ...], per: tuple[int, ...]):
    per = _primitive_root(per)
    while pre and pre[-1] == per[-1]:
        per = (pre[-1],) + per[:-1]
        pre = pre[:-1]
    return pre, per


@dataclass(frozen=True)
class PAdicRational:
    """An element of ``Z_p ∩ Q`` given by preperiod and period digits.

    The stored value is
    ``sum(pre[i] p^i) + p^len(pre) * (periodic tail built from per)``.
    Construction validates the digits and rewrites them into canonical form:
    primitive period, shortest preperiod.
    """

    p: int
    pre: tuple[int, ...] = ()
    per: tuple[int, ...] = (0,)

    def __post_init__(self):
        p = check_prime(self.p)
        pre, per = tuple(int(d) for d in self.pre), tuple(int(d) for d in self.per)
        if not per:
            raise ValueError("period must be non-empty")
        for d in pre + per:
            if not 0 <= d < p:
                raise DigitRangeError(f"digit {d} outside [0, {p})")
        pre, per = _canonical(pre, per)
        object.__setattr__(self, "p", p)
        object.__setattr__(self, "pre", pre)
        object.__setattr__(self, "per", per)

    # -- constructors -------------------------------------------------------

    @classmethod
    def from_rational(cls, p: int, x) -> "PAdicRational":
        return from_rational(p, x)

    @classmethod
    def from_int(cls, p: int, n: int) -> "PAdicRational":
        return from_rational(p, Fraction(n))

    # -- structure ----------------------------------------------------------

    @property
    def preperiod_length(self) -> int:
        return len(self.pre)

    @property
    def period_length(self) -> int:
        return len(self.per)

    @property
    def is_natural(self) -> bool:
        """True when the point is a non-negative integer."""
        return self.per == (0,)

    def digit(self, n: int) -> int:
        if n < len(self.pre):
            return self.pre[n]
        return self.per[(n - len(self.pre)) % len(self.per)]

    def period_counts(self) -> list[int]:
        """Occurrences of each digit within one period."""
        return list(self._per_prefix[-1])

    def shift(self, k: int) -> "PAdicRational":
        """The point ``p*z + k``: digit ``k`` prepended."""
        if not 0 <= k < self.p:
            raise DigitRangeError(f"digit {k} outside [0, {self.p})")
        return PAdicRational(self.p, (k,) + self.pre, self.per)

    def valuation(self):
        """Index of the first non-zero digit; ``math.inf`` for zero."""
        if self.is_natural and not any(self.pre):
            return float("inf")
        n = 0
        while self.digit(n) == 0:
            n += 1
        return n

    # -- prefix tables ------------------------------------------------------

    @staticmethod
    def _prefix_counts(p, word):
        rows = [tuple([0] * p)]
        for d in word:
            row = list(rows[-1])
            row[d] += 1
            rows.append(tuple(row))
        return rows

    @staticmethod
    def _prefix_last_nonzero(word):
        out, last = [-1], -1
        for i, d in enumerate(word):
            if d:
                last = i
            out.append(last)
        return out

    @cached_property
    def _pre_prefix(self):
        return self._prefix_counts(self.p, self.pre)

    @cached_property
    def _per_prefix(self):
        return self._prefix_counts(self.p, self.per)

    @cached_property
    def _pre_last(self):
        return self._prefix_last_nonzero(self.pre)

    @cached_property
    def _per_last(self):
        return self._prefix_last_nonzero(self.per)

    @cached_property
    def _per_value(self):
        return sum(d * self.p**i for i, d in enumerate(self.per))

    # -- truncations --------------------------------------------------------

    def raw_counts(self, n: int) -> list[int]:
        """Digit occurrences among the first ``n`` digits, leading zeros included."""
        P, L = len(self.pre), len(self.per)
        if n <= P:
            return list(self._pre_prefix[n])
        k, i = divmod(n - P, L)
        pre, full, part = self._pre_prefix[P], self._per_prefix[L], self._per_prefix[i]
        return [pre[j] + k * full[j] + part[j] for j in range(self.p)]

    def last_nonzero(self, n: int) -> int:
        """Largest index ``< n`` holding a non-zero digit, or -1."""
        P, L = len(self.pre), len(self.per)
        if n <= P:
            return self._pre_last[n]
        k, i = divmod(n - P, L)
        if self._per_last[i] >= 0:
            return P + k * L + self._per_last[i]
        if k >= 1 and self._per_last[L] >= 0:
            return P + (k - 1) * L + self._per_last[L]
        return self._pre_last[P]

    def truncated_length(self, n: int) -> int:
        """``lambda_p([z]_{p^n})``."""
        return self.last_nonzero(n) + 1

    def truncated_counts(self, n: int) -> list[int]:
        """``[#_{p:j}([z]_{p^n}) for j in range(p)]`` without expanding digits."""
        counts = self.raw_counts(n)
        counts[0] -= n - self.truncated_length(n)
        return counts

    def truncated_count(self, j: int, n: int) -> int:
        if not 0 <= j < self.p:
            raise DigitRangeError(f"digit {j} outside [0, {self.p})")
        return self.truncated_counts(n)[j]

    def project(self, n: int) -> int:
        return project(self, n)

    def to_rational(self) -> Fraction:
        return to_rational(self)

    # -- text -----------------------------------------------------------------

    def to_text(self) -> str:
        return format_point(self)

    def __str__(self):
        return format_point(self)


class TailFlag(enum.Enum):
    FINITELY_MANY = "finitely_many"
    INFINITELY_MANY = "infinitely_many"
    UNKNOWN = "unknown"


@dataclass(frozen=True, eq=False)
class DigitStream:
    """A p-adic integer given by a digit generator, typically irrational.

    ``tail_profile`` declares, per digit value, whether it occurs finitely or
    infinitely often.  It is taken on trust: no finite prefix can certify it.
    Missing digits default to ``UNKNOWN``.
    """

    p: int
    generator: Callable[[int], int]
    tail_profile: Mapping[int, TailFlag] = field(default_factory=dict)
    name: str = "stream"

    def __post_init__(self):
        object.__setattr__(self, "p", check_prime(self.p))
        profile = {j: TailFlag.UNKNOWN for j in range(self.p)}
        for j, flag in dict(self.tail_profile).items():
            if not 0 <= j < self.p:
                raise DigitRangeError(f"digit {j} outside [0, {self.p})")
            profile[j] = TailFlag(flag)
        object.__setattr__(self, "tail_profile", profile)
        object.__setattr__(self, "_cache", [])

    def digit(self, n: int) -> int:
        cache = self._cache
        while len(cache) <= n:
            d = int(self.generator(len(cache)))
            if not 0 <= d < self.p:
                raise DigitRangeError(f"generator produced digit {d} at index {len(cache)}")
            cache.append(d)
        return cache[n]

    def digits(self, n: int) -> list[int]:
        self.digit(n - 1) if n else None
        return self._cache[:n]

    def truncated_counts(self, n: int) -> list[int]:
        return [digit_count(self.p, j, project(self, n)) for j in range(self.p)]

    def truncated_count(self, j: int, n: int) -> int:
        return digit_count(self.p, j, project(self, n))

    def flag(self, j: int) -> TailFlag:
        return self.tail_profile[j]

    def __str__(self):
        return f"{self.name}(p={self.p})"


Point = Union[PAdicRational, DigitStream]


# ---------------------------------------------------------------------------
# Module-level operations
# ---------------------------------------------------------------------------


def project(z: Point, n: int) -> int:
    """``[z]_{p^n}``: the integer in ``[0, p^n)`` congruent to ``z``."""
    if n < 0:
        raise ValueError("n must be non-negative")
    p = z.p
    if isinstance(z, DigitStream):
        return sum(d * p**i for i, d in enumerate(z.digits(n)))
    P, L = len(z.pre), len(z.per)
    if n <= P:
        return sum(z.pre[i] * p**i for i in range(n))
    head = sum(d * p**i for i, d in enumerate(z.pre))
    k, i = divmod(n - P, L)
    pL = p**L
    full = z._per_value * (pL**k - 1) // (pL - 1)
    part = sum(z.per[m] * p**m for m in range(i))
    return head + p**P * (full + pL**k * part)


def to_rational(z: PAdicRational) -> Fraction:
    p, P, L = z.p, len(z.pre), len(z.per)
    head = sum(d * p**i for i, d in enumerate(z.pre))
    return head + Fraction(p**P * z._per_value, 1 - p**L)


def from_rational(p: int, x) -> PAdicRational:
    """Hensel digits of a rational with ``p``-free denominator."""
    p = check_prime(p)
    x = Fraction(x)
    num, den = x.numerator, x.denominator
    if den % p == 0:
        raise DenominatorDivisibleByP(f"{x} is not a {p}-adic integer")
    inv = pow(den, -1, p)
    digits, seen = [], {}
    while num not in seen:
        seen[num] = len(digits)
        d = num * inv % p
        digits.append(d)
        num = (num - d * den) // p
    start = seen[num]
    return PAdicRational(p, tuple(digits[:start]), tuple(digits[start:]))


def eta2(z: PAdicRational) -> Fraction:
    """Reflect the binary digits of ``z`` across the point: ``sum d_n / 2^(n+1)``."""
    if z.p != 2:
        raise WrongPrimeError("eta2 is defined on 2-adic points only")
    P, L = len(z.pre), len(z.per)
    head = sum(Fraction(d, 2 ** (n + 1)) for n, d in enumerate(z.pre))
    block = sum(Fraction(d, 2 ** (i + 1)) for i, d in enumerate(z.per))
    return head + Fraction(1, 2**P) * block / (1 - Fraction(1, 2**L))


def b_ell_point(z: PAdicRational) -> PAdicRational:
    """Digit-level extension of :func:`b_ell`: repeat the digits of a natural
    number forever, and fix every point outside ``N_0``."""
    if not z.is_natural:
        return z
    if not z.pre:
        return z
    return PAdicRational(z.p, (), z.pre)


# ---------------------------------------------------------------------------
# Text forms
# ---------------------------------------------------------------------------


def format_rational(x) -> str:
    x = Fraction(x)
    return str(x.numerator) if x.denominator == 1 else f"{x.numerator}/{x.denominator}"


def parse_rational(text: str) -> Fraction:
    s = text.strip()
    try:
        return Fraction(s)
    except (ValueError, ZeroDivisionError):
        raise ParseError(f"not a rational: {text!r}", 0) from None


def _format_digits(p: int, digits: Sequence[int]) -> str:
    if p <= 10:
        return "".join(str(d) for d in digits)
    return ",".join(str(d) for d in digits)


def format_point(z: PAdicRational) -> str:
    return f"p={z.p};pre={_format_digits(z.p, z.pre)};per={_format_digits(z.p, z.per)}"


def _parse_digits(p: int, text: str, offset: int) -> tuple[int, ...]:
    text = text.strip()
    if not text:
        return ()
    if p > 10 or "," in text:
        parts = text.split(",")
    else:
        parts = list(text)
    out = []
    pos = offset
    for part in parts:
        if not part.strip().isdigit():
            raise ParseError(f"bad digit {part!r}", pos)
        out.append(int(part))
        pos += len(part) + (1 if p > 10 else 0)
    return tuple(out)


def parse_point(text: str, p: int | None = None) -> PAdicRational:
    """Parse ``p=<prime>;pre=<digits>;per=<digits>`` or a bare rational.

    A bare rational such as ``-2/3`` needs ``p`` supplied by the caller.
    """
    s = text.strip()
    if "=" not in s:
        if p is None:
            raise ParseError(f"rational point {text!r} needs a prime", 0)
        return from_rational(p, parse_rational(s))
    fields, pos = {}, 0
    for chunk in s.split(";"):
        key, sep, value = chunk.partition("=")
        if not sep:
            raise ParseError(f"expected key=value, got {chunk!r}", pos)
        fields[key.strip()] = (value, pos + len(key) + 1)
        pos += len(chunk) + 1
    if "p" not in fields or "per" not in fields:
        raise ParseError("point needs p= and per= fields", 0)
    try:
        prime = int(fields["p"][0])
    except ValueError:
        raise ParseError(f"bad prime {fields['p'][0]!r}", fields["p"][1]) from None
    if p is not None and prime != p:
        raise ParseError(f"point prime {prime} differs from expected {p}", fields["p"][1])
    pre = _parse_digits(prime, *fields.get("pre", ("", 0)))
    per = _parse_digits(prime, *fields["per"])
    if not per:
        raise ParseError("period must be non-empty", fields["per"][1])
    return PAdicRational(prime, pre, per)
