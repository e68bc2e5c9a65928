"""Characters of Z_p, character sums, and the measure realizing ``|z|_p^alpha``.

Exact rational closed forms live next to floating-point direct sums; the
direct sums serve as independent numerical oracles.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache
from fractions import Fraction
from typing import Sequence

import mpmath
import numpy as np

from .digits import PAdicRational, check_prime, format_rational, from_rational, project
from .errors import BadAlphaError, BadConstantError, DomainError, ParseError, PrimeMismatchError


@dataclass(frozen=True)
class DualPoint:
    """``t = k / p^m`` in ``[0, 1)``, reduced so that ``p`` does not divide ``k``."""

    p: int
    k: int
    m: int

    def __post_init__(self):
        p = check_prime(self.p)
        k, m = self.k, self.m
        if m < 0 or not 0 <= k < p**m:
            raise DomainError(f"{k}/{p}^{m} is not in [0, 1)")
        while m and k % p == 0:
            k //= p
            m -= 1
        object.__setattr__(self, "p", p)
        object.__setattr__(self, "k", k)
        object.__setattr__(self, "m", m)

    @classmethod
    def from_fraction(cls, p: int, t) -> "DualPoint":
        t = Fraction(t) % 1
        m, den = 0, t.denominator
        while den % p == 0:
            den //= p
            m += 1
        if den != 1:
            raise DomainError(f"{t} does not have a power of {p} as denominator")
        return cls(p, t.numerator, m)

    @property
    def value(self) -> Fraction:
        return Fraction(self.k, self.p**self.m)

    def abs(self) -> int:
        """``|t|_p``, which is ``p^m`` (and 0 for ``t = 0``)."""
        return 0 if self.k == 0 else self.p**self.m


def dual_points(p: int, N: int, include_zero: bool = False) -> list[DualPoint]:
    """All ``t`` with ``0 < |t|_p <= p^N`` by level, numerators ascending."""
    out = [DualPoint(p, 0, 0)] if include_zero else []
    for m in range(1, N + 1):
        out.extend(DualPoint(p, k, m) for k in range(1, p**m) if k % p)
    return out


def fractional_part(t: DualPoint, z: PAdicRational) -> Fraction:
    """``{t z}_p``; only ``[z]_{p^m}`` matters."""
    if t.p != z.p:
        raise PrimeMismatchError(f"dual point is {t.p}-adic, z is {z.p}-adic")
    pm = t.p**t.m
    return Fraction(t.k * project(z, t.m) % pm, pm)


def _point_valuation(z) -> float:
    if isinstance(z, PAdicRational):
        return z.valuation()
    raise TypeError("expected a PAdicRational")


def _check_constant(p: int, c: Fraction) -> None:
    if c in (0, 1, -1, p):
        raise BadConstantError(f"c = {c} is excluded")


def character_sum_closed(p: int, c, N: int, z: PAdicRational) -> Fraction:
    """Exact value of ``sum_{0<|t|_p<=p^N} c^{v_p(t)} e^{2 pi i {tz}_p}``."""
    p = check_prime(p)
    c = Fraction(c)
    _check_constant(p, c)
    if N < 1:
        raise DomainError("N must be at least 1")
    if z.p != p:
        raise PrimeMismatchError(f"z is {z.p}-adic, expected {p}")
    ratio = Fraction(p) / c
    v = _point_valuation(z)
    if v == math.inf:
        return Fraction(p - 1) / (p - c) * (ratio**N - 1)
    bracket = ratio**N if N <= v else Fraction(0)
    return bracket + (c - 1) / (p - c) * ratio ** (1 + min(N - 1, v)) - Fraction(p - 1) / (p - c)


@lru_cache(maxsize=None)
def _unit_roots(n: int) -> np.ndarray:
    """``exp(2 pi i j / n)`` for ``j < n``, each entry correctly rounded.

    Working from binary64 ``pi`` leaves a phase bias that grows with ``j``
    and adds up coherently over a full level, so the angles are evaluated
    in extended precision.
    """
    with mpmath.workprec(80):
        step = 2 * mpmath.pi / n
        re = [float(mpmath.cos(step * j)) for j in range(n)]
        im = [float(mpmath.sin(step * j)) for j in range(n)]
    out = np.array(re) + 1j * np.array(im)
    out.setflags(write=False)
    return out


def _level_sums(p: int, m: int, residues: np.ndarray) -> np.ndarray:
    """``sum_{k coprime to p, k < p^m} exp(2 pi i k r / p^m)`` for each residue ``r``.

    Phases are reduced mod ``p^m`` in integer arithmetic before the table
    lookup.  Terms are accumulated over ``k`` with Neumaier compensation,
    vectorized across residues, so the only error left is the rounding of
    the table entries themselves.
    """
    n = p**m
    table = _unit_roots(n)
    re_t, im_t = np.ascontiguousarray(table.real), np.ascontiguousarray(table.imag)
    r = np.asarray(residues, dtype=np.int64) % n
    out = []
    for part in (re_t, im_t):
        total = np.zeros(len(r))
        comp = np.zeros(len(r))
        for k in range(1, n):
            if k % p == 0:
                continue
            x = part[(r * k) % n]
            t = total + x
            big = np.abs(total) >= np.abs(x)
            comp += np.where(big, (total - t) + x, (x - t) + total)
            total = t
        out.append(total + comp)
    return out[0] + 1j * out[1]


def character_sum_direct(p: int, c, N: int, z: PAdicRational) -> complex:
    """Binary64 evaluation of the character sum, level by level in increasing ``m``."""
    p = check_prime(p)
    if z.p != p:
        raise PrimeMismatchError(f"z is {z.p}-adic, expected {p}")
    c = Fraction(c)
    total = 0j
    for m in range(1, N + 1):
        r = np.array([project(z, m)], dtype=np.int64)
        total += float(c ** (-m)) * complex(_level_sums(p, m, r)[0])
    return total


class DirectTable:
    """Direct character sums for every residue mod ``p^depth`` at once.

    ``levels[m][r]`` is the level-``m`` sum at residue ``r`` mod ``p^m``; a
    point's value only depends on ``[z]_{p^N}``.
    """

    def __init__(self, p: int, depth: int):
        self.p = check_prime(p)
        self.depth = depth
        self.levels = {m: _level_sums(p, m, np.arange(p**m)) for m in range(1, depth + 1)}

    def value(self, c, N: int, residue: int) -> complex:
        if N > self.depth:
            raise DomainError(f"table only covers N <= {self.depth}")
        c = Fraction(c)
        total = 0j
        for m in range(1, N + 1):
            # weights rounded once from the exact power
            total += float(c ** (-m)) * complex(self.levels[m][residue % self.p**m])
        return total


# ---------------------------------------------------------------------------
# The |z|^alpha measure
# ---------------------------------------------------------------------------


def _check_alpha(alpha) -> int:
    if isinstance(alpha, bool) or int(alpha) != alpha or alpha in (0, -1):
        raise BadAlphaError(f"alpha must be an integer other than 0 and -1, got {alpha}")
    return int(alpha)


def _mu_prefactor(p: int, alpha: int) -> Fraction:
    pa = Fraction(p) ** alpha
    return pa * (p - p * pa) / (p * pa - 1)


def mu_hat_alpha(p: int, alpha: int, t: DualPoint) -> Fraction:
    p = check_prime(p)
    alpha = _check_alpha(alpha)
    if t.p != p:
        raise PrimeMismatchError("dual point has a different prime")
    pa = Fraction(p) ** alpha
    if t.k == 0:
        return pa * (p - 1) / (p * pa - 1)
    return _mu_prefactor(p, alpha) * Fraction(t.abs()) ** (-alpha - 1)


def mu_alpha_partial(p: int, alpha: int, N: int, z: PAdicRational) -> Fraction:
    """Sum of ``mu_hat(t) e^{2 pi i {tz}}`` over ``0 < |t|_p <= p^N``.

    The ``t = 0`` coefficient is excluded; add ``mu_hat_alpha(p, alpha, 0)``
    for the version that carries the total mass.
    """
    p = check_prime(p)
    alpha = _check_alpha(alpha)
    c = Fraction(p) ** (alpha + 1)
    return _mu_prefactor(p, alpha) * character_sum_closed(p, c, N, z)


def mu_alpha_partial_direct(p: int, alpha: int, N: int, z: PAdicRational) -> complex:
    alpha = _check_alpha(alpha)
    total = 0j
    for t in dual_points(p, N):
        phase = fractional_part(t, z)
        total += float(mu_hat_alpha(p, alpha, t)) * complex(math.cos(2 * math.pi * phase), math.sin(2 * math.pi * phase))
    return total


@dataclass(frozen=True)
class LocallyConstantFn:
    """``z -> values[[z]_{p^M}]``."""

    p: int
    M: int
    values: tuple[Fraction, ...]

    def __post_init__(self):
        p = check_prime(self.p)
        vals = tuple(Fraction(v) for v in self.values)
        if self.M < 0 or len(vals) != p**self.M:
            raise DomainError(f"need {p}^{self.M} values, got {len(vals)}")
        object.__setattr__(self, "p", p)
        object.__setattr__(self, "values", vals)

    def __call__(self, z) -> Fraction:
        if isinstance(z, int):
            return self.values[z % self.p**self.M]
        return self.values[project(z, self.M)]

    @classmethod
    def indicator(cls, p: int, M: int, residue: int) -> "LocallyConstantFn":
        n = p**M
        return cls(p, M, tuple(Fraction(int(i == residue % n)) for i in range(n)))

    @classmethod
    def constant(cls, p: int, x) -> "LocallyConstantFn":
        return cls(p, 0, (Fraction(x),))

    def __add__(self, other):
        if self.p != other.p or self.M != other.M:
            raise DomainError("functions differ in prime or modulus")
        return LocallyConstantFn(self.p, self.M, tuple(a + b for a, b in zip(self.values, other.values)))

    def scale(self, c) -> "LocallyConstantFn":
        return LocallyConstantFn(self.p, self.M, tuple(Fraction(c) * v for v in self.values))

    def to_json(self) -> dict:
        return {"p": self.p, "M": self.M, "values": [format_rational(v) for v in self.values]}

    @classmethod
    def from_json(cls, data: dict) -> "LocallyConstantFn":
        try:
            return cls(int(data["p"]), int(data["M"]), tuple(Fraction(str(v)) for v in data["values"]))
        except KeyError as exc:
            raise ParseError(f"missing field {exc.args[0]!r}", 0) from None
        except (ValueError, ZeroDivisionError) as exc:
            raise ParseError(f"bad value: {exc}", 0) from None


def ramanujan_level(p: int, m: int, n: int) -> int:
    """``sum_{k coprime to p, k < p^m} e^{2 pi i k n / p^m}``, exact.

    Orthogonality of characters mod ``p^m`` minus those mod ``p^{m-1}``.
    """
    if m == 0:
        return 1
    return p**m * (n % p**m == 0) - p ** (m - 1) * (n % p ** (m - 1) == 0)


def parseval_pair(f: LocallyConstantFn, p: int, alpha: int) -> Fraction:
    """``sum_t fhat(-t) mu_hat(t)`` over ``|t|_p <= p^M``.

    Conjugate dual points at the same level share ``mu_hat``, so each level
    contributes ``mu_hat(level) * p^-M * sum_n f(n) * (level character sum at n)``,
    which is rational.
    """
    p = check_prime(p)
    alpha = _check_alpha(alpha)
    if f.p != p:
        raise PrimeMismatchError(f"function is {f.p}-adic, expected {p}")
    total = Fraction(0)
    for m in range(f.M + 1):
        t = DualPoint(p, 1 if m else 0, m)
        weight = sum((v * ramanujan_level(p, m, n) for n, v in enumerate(f.values) if v), Fraction(0))
        total += mu_hat_alpha(p, alpha, t) * weight
    return total / p**f.M


def ball_mass(p: int, M: int, n: int, alpha: int) -> Fraction:
    """``integral of |z|_p^alpha dz`` over ``n + p^M Z_p``."""
    n %= p**M
    if n:
        return Fraction(p) ** (-alpha * _val(p, n)) / p**M
    s = Fraction(p) ** (-(alpha + 1))
    return (1 - Fraction(1, p)) * s**M / (1 - s)


def _val(p: int, n: int) -> int:
    k = 0
    while n % p == 0:
        n //= p
        k += 1
    return k


def integral_oracle(f: LocallyConstantFn, alpha: int) -> Fraction:
    return sum((v * ball_mass(f.p, f.M, n, alpha) for n, v in enumerate(f.values)), Fraction(0))


def fourier_coefficient(f: LocallyConstantFn, t: DualPoint) -> complex:
    """``p^-M sum_n f(n) e^{-2 pi i {t n}_p}`` in binary64; zero beyond ``|t| > p^M``."""
    if t.m > f.M:
        return 0j
    pm = f.p**t.m
    total = 0j
    for n, v in enumerate(f.values):
        phase = (t.k * n % pm) / pm
        total += float(v) * complex(math.cos(2 * math.pi * phase), -math.sin(2 * math.pi * phase))
    return total / f.p**f.M


def mu_partial_fn(p: int, alpha: int, N: int) -> LocallyConstantFn:
    """``mu_{alpha,N}`` tabulated on residues mod ``p^N``."""
    return LocallyConstantFn(
        p, N, tuple(mu_alpha_partial(p, alpha, N, from_rational(p, n)) for n in range(p**N))
    )


def stabilization_index(p: int, c, z: PAdicRational, horizon: int = 8) -> int:
    """Smallest ``N0`` with the closed form constant for ``N0 <= N < N0 + horizon``."""
    v = z.valuation()
    if v == math.inf:
        raise DomainError("the zero point never stabilizes")
    last = v + horizon + 1
    values = [character_sum_closed(p, c, N, z) for N in range(1, last + 1)]
    n0 = last
    while n0 > 1 and values[n0 - 2] == values[-1]:
        n0 -= 1
    return n0


def direct_error(direct: complex, closed: Fraction) -> float:
    """``|direct - closed|`` with the real difference taken exactly."""
    return math.hypot(float(Fraction(direct.real) - closed), direct.imag)


def measure_table(p: int, c, N: int, depth: int | None = None) -> list[dict]:
    """Closed form vs direct sum at every residue mod ``p^depth``.

    Residues are taken both as non-negative integers and with an all-``(p-1)``
    tail (``r - p^depth``).
    """
    depth = N if depth is None else depth
    table = DirectTable(p, N)
    rows = []
    for r in range(p**depth):
        for z in (from_rational(p, r), from_rational(p, r - p**depth)):
            closed = character_sum_closed(p, c, N, z)
            direct = table.value(c, N, project(z, N))
            err = direct_error(direct, closed)
            rows.append({"z": z, "closed": closed, "direct": direct, "error": err})
    return rows
