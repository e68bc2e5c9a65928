"""Collatz-type maps, their numina and a periodic-point search.

A :class:`HydraMap` on ``Z`` has ``p`` affine branches selected by the
residue mod ``p``.  Its numen ``chi`` is the unique rational-valued function
on ``N_0`` with ``chi(p*m + j) = a_j*chi(m) + b_j``.  Extending ``chi`` to
rational p-adic inputs through its series and keeping the inputs where it
takes integer values turns up the periodic orbits of the map.
"""

from __future__ import annotations

import ast
import itertools
import os
import re
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterator, Sequence

from .digits import PAdicRational, base_digits, check_prime, format_rational
from .errors import BranchNotIntegerError, DomainError, ParseError, RatioOneError
from .fseries import ClosedForm, convergent_places, geometric_split

WORKERS_ENV = "PQADIC_WORKERS"


@dataclass(frozen=True)
class HydraMap:
    """Branch data ``(a_j, b_j)`` plus an optional integer map.

    ``integer_map[j] = (s, t)`` encodes the branch ``n -> s*n + t`` applied
    when ``n = j (mod p)``.
    """

    p: int
    a: tuple[Fraction, ...]
    b: tuple[Fraction, ...]
    integer_map: tuple[tuple[Fraction, Fraction], ...] | None = None
    branch_text: tuple[str, ...] | None = field(default=None, compare=False)

    def __post_init__(self):
        p = check_prime(self.p)
        a = tuple(Fraction(x) for x in self.a)
        b = tuple(Fraction(x) for x in self.b)
        if len(a) != p or len(b) != p:
            raise DomainError(f"need {p} branch coefficients")
        if any(x == 0 for x in a):
            raise DomainError("every a_j must be nonzero")
        if b[0] != 0:
            raise DomainError("b_0 must be 0")
        if a[0] == 1:
            raise DomainError("a_0 must differ from 1")
        object.__setattr__(self, "p", p)
        object.__setattr__(self, "a", a)
        object.__setattr__(self, "b", b)
        if self.integer_map is not None:
            im = tuple((Fraction(s), Fraction(t)) for s, t in self.integer_map)
            if len(im) != p:
                raise DomainError(f"integer map needs {p} branches")
            object.__setattr__(self, "integer_map", im)

    def step(self, n: int) -> int:
        if self.integer_map is None:
            raise DomainError("map has no integer form")
        s, t = self.integer_map[n % self.p]
        out = s * n + t
        if out.denominator != 1:
            raise BranchNotIntegerError(f"branch {n % self.p} sends {n} to {out}")
        return out.numerator

    def to_json(self) -> dict:
        out = {
            "p": self.p,
            "a": [format_rational(x) for x in self.a],
            "b": [format_rational(x) for x in self.b],
        }
        if self.branch_text is not None:
            out["integer_map"] = list(self.branch_text)
        elif self.integer_map is not None:
            out["integer_map"] = [_affine_text(s, t) for s, t in self.integer_map]
        return out


def _affine_text(s: Fraction, t: Fraction) -> str:
    return f"({format_rational(s)})*n + ({format_rational(t)})"


def chi3_map() -> HydraMap:
    """The shortened 3x+1 map and its numen data."""
    return HydraMap(
        2,
        (Fraction(1, 2), Fraction(3, 2)),
        (Fraction(0), Fraction(1, 2)),
        ((Fraction(1, 2), Fraction(0)), (Fraction(3, 2), Fraction(1, 2))),
        branch_text=("n/2", "(3n+1)/2"),
    )


# ---------------------------------------------------------------------------
# Affine branch parsing
# ---------------------------------------------------------------------------

_IMPLICIT_MUL = re.compile(r"(\d)\s*(n|\()")


def _eval_affine(node, n: Fraction) -> Fraction:
    if isinstance(node, ast.Expression):
        return _eval_affine(node.body, n)
    if isinstance(node, ast.Constant) and isinstance(node.value, int) and not isinstance(node.value, bool):
        return Fraction(node.value)
    if isinstance(node, ast.Name) and node.id == "n":
        return n
    if isinstance(node, ast.UnaryOp) and isinstance(node.op, (ast.USub, ast.UAdd)):
        v = _eval_affine(node.operand, n)
        return -v if isinstance(node.op, ast.USub) else v
    if isinstance(node, ast.BinOp) and isinstance(node.op, (ast.Add, ast.Sub, ast.Mult, ast.Div)):
        left, right = _eval_affine(node.left, n), _eval_affine(node.right, n)
        if isinstance(node.op, ast.Add):
            return left + right
        if isinstance(node.op, ast.Sub):
            return left - right
        if isinstance(node.op, ast.Mult):
            return left * right
        if right == 0:
            raise ZeroDivisionError
        return left / right
    raise ValueError(getattr(node, "col_offset", 0))


def parse_affine(text: str) -> tuple[Fraction, Fraction]:
    """Parse a branch like ``(3n+1)/2`` into ``(slope, intercept)``."""
    src = _IMPLICIT_MUL.sub(r"\1*\2", text.strip())
    try:
        tree = ast.parse(src, mode="eval")
    except SyntaxError as exc:
        raise ParseError(f"bad branch expression {text!r}", (exc.offset or 1) - 1) from None
    try:
        f0, f1, f2 = (_eval_affine(tree, Fraction(k)) for k in (0, 1, 2))
    except ZeroDivisionError:
        raise ParseError(f"division by zero in {text!r}", 0) from None
    except ValueError as exc:
        raise ParseError(f"unsupported syntax in {text!r}", exc.args[0] if exc.args else 0) from None
    if f2 - f1 != f1 - f0:
        raise ParseError(f"branch {text!r} is not affine in n", 0)
    return f1 - f0, f0


def map_from_json(data: dict) -> HydraMap:
    try:
        p = int(data["p"])
        a = [Fraction(str(x)) for x in data["a"]]
        b = [Fraction(str(x)) for x in data["b"]]
    except KeyError as exc:
        raise ParseError(f"map definition is missing {exc.args[0]!r}", 0) from None
    except (ValueError, ZeroDivisionError) as exc:
        raise ParseError(f"bad map coefficient: {exc}", 0) from None
    texts = data.get("integer_map")
    im = tuple(parse_affine(t) for t in texts) if texts else None
    return HydraMap(p, a, b, im, tuple(texts) if texts else None)


# ---------------------------------------------------------------------------
# Numen
# ---------------------------------------------------------------------------


def numen(H: HydraMap, n: int) -> Fraction:
    if n < 0:
        raise ValueError("n must be non-negative")
    chi = Fraction(0)
    for d in reversed(base_digits(n, H.p)):
        chi = H.a[d] * chi + H.b[d]
    return chi


def numen_term(H: HydraMap, z: PAdicRational, n: int) -> Fraction:
    """``b_{z_n} * prod_{k<n} a_{z_k}``: the n-th term of the numen series."""
    out = H.b[z.digit(n)]
    if out == 0:
        return out
    counts = z.raw_counts(n)
    for aj, c in zip(H.a, counts):
        if c:
            out *= aj**c
    return out


def numen_ratio(H: HydraMap, z: PAdicRational) -> Fraction:
    r = Fraction(1)
    for aj, c in zip(H.a, z.period_counts()):
        if c:
            r *= aj**c
    return r


def numen_closed_form(H: HydraMap, z: PAdicRational) -> ClosedForm:
    if z.p != H.p:
        raise DomainError(f"map is {H.p}-adic but point is {z.p}-adic")
    r = numen_ratio(H, z)
    if r == 1:
        raise RatioOneError(f"branch product over the period of {z} is 1")
    P, L = z.preperiod_length, z.period_length
    A, B = geometric_split(lambda n: numen_term(H, z, n), r, P, L)
    return ClosedForm(A, B, r, P, formal=not convergent_places(r))


def chi3_from_X(x) -> Fraction:
    return (Fraction(x) - 2) / 4


def eta2_inverse(t) -> PAdicRational:
    """2-adic point whose reflected digits give ``t`` in ``[0, 1]``.

    Dyadic ``t`` use the terminating binary expansion; ``t = 1`` is ``-1``.
    """
    t = Fraction(t)
    if not 0 <= t <= 1:
        raise DomainError("t must lie in [0, 1]")
    if t == 1:
        return PAdicRational(2, (), (1,))
    digits, seen = [], {}
    x = t
    while x not in seen:
        seen[x] = len(digits)
        x *= 2
        digits.append(int(x >= 1))
        x -= digits[-1]
    start = seen[x]
    return PAdicRational(2, tuple(digits[:start]), tuple(digits[start:]))


def c3(t) -> Fraction:
    """``chi_3`` read through the binary reflection: ``chi_3(eta2^{-1}(t))``."""
    return numen_closed_form(chi3_map(), eta2_inverse(t)).value


# ---------------------------------------------------------------------------
# Iteration and search
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class Trajectory:
    orbit: tuple[int, ...]
    cycle: tuple[int, ...] | None

    @property
    def found_cycle(self) -> bool:
        return self.cycle is not None


def iterate(H: HydraMap, x: int, max_steps: int) -> Trajectory:
    """Orbit of ``x`` until the first repeated value or ``max_steps`` steps."""
    if max_steps < 1:
        raise ValueError("max_steps must be at least 1")
    orbit = [x]
    index = {x: 0}
    for _ in range(max_steps):
        y = H.step(orbit[-1])
        if y in index:
            return Trajectory(tuple(orbit), tuple(orbit[index[y]:]))
        index[y] = len(orbit)
        orbit.append(y)
    return Trajectory(tuple(orbit), None)


@dataclass(frozen=True)
class CorrespondenceHit:
    z: PAdicRational
    chi_value: int
    kind: str  # "PERIODIC_CONFIRMED" or "INTEGER_UNCONFIRMED"
    cycle: tuple[int, ...] | None
    index: int

    @property
    def confirmed(self) -> bool:
        return self.kind == "PERIODIC_CONFIRMED"

    def csv_row(self) -> list[str]:
        cyc = " ".join(str(c) for c in self.cycle) if self.cycle else ""
        pre = "".join(str(d) for d in self.z.pre) if self.z.p <= 10 else ",".join(map(str, self.z.pre))
        per = "".join(str(d) for d in self.z.per) if self.z.p <= 10 else ",".join(map(str, self.z.per))
        return [format_rational(self.z.to_rational()), pre, per, str(self.chi_value), self.kind, cyc]


@dataclass
class SearchResult:
    hits: list[CorrespondenceHit]
    examined: int = 0
    skipped_no_place: int = 0
    skipped_ratio_one: int = 0
    cursor: int = 0

    def cycles(self) -> set[frozenset]:
        return {frozenset(h.cycle) for h in self.hits if h.confirmed}


def enumerate_candidates(p: int, preperiod_max: int, period_max: int) -> Iterator[tuple[int, PAdicRational]]:
    """Canonical points in search order, each tagged with its cursor index.

    Order: period length, then preperiod length, then digits (preperiod
    first) lexicographically.  Non-canonical digit strings advance the
    cursor but are not yielded, so each point appears exactly once.
    """
    idx = 0
    for L in range(1, period_max + 1):
        for P in range(preperiod_max + 1):
            for pre in itertools.product(range(p), repeat=P):
                for per in itertools.product(range(p), repeat=L):
                    z = PAdicRational(p, pre, per)
                    if z.pre == pre and z.per == per:
                        yield idx, z
                    idx += 1


def _search_block(H: HydraMap, L: int, preperiod_max: int, verify_steps: int, start: int, base: int) -> SearchResult:
    res = SearchResult([])
    idx = base
    for P in range(preperiod_max + 1):
        for pre in itertools.product(range(H.p), repeat=P):
            for per in itertools.product(range(H.p), repeat=L):
                here, idx = idx, idx + 1
                if here < start:
                    continue
                z = PAdicRational(H.p, pre, per)
                if z.pre != pre or z.per != per:
                    continue
                res.examined += 1
                try:
                    cf = numen_closed_form(H, z)
                except RatioOneError:
                    res.skipped_ratio_one += 1
                    continue
                if cf.formal:
                    res.skipped_no_place += 1
                    continue
                value = cf.value
                if value.denominator != 1:
                    continue
                x = value.numerator
                traj = iterate(H, x, verify_steps)
                if traj.cycle is not None and traj.cycle[0] == x:
                    res.hits.append(CorrespondenceHit(z, x, "PERIODIC_CONFIRMED", traj.cycle, here))
                else:
                    res.hits.append(CorrespondenceHit(z, x, "INTEGER_UNCONFIRMED", None, here))
    res.cursor = idx
    return res


def _block_size(p: int, L: int, preperiod_max: int) -> int:
    return sum(p**P for P in range(preperiod_max + 1)) * p**L


def correspondence_search(
    H: HydraMap,
    preperiod_max: int,
    period_max: int,
    verify_steps: int = 2**16,
    start: int = 0,
    workers: int | None = None,
) -> SearchResult:
    """Integer values of the numen at rational points, checked against the map.

    ``start`` resumes from a cursor returned by an earlier run.  ``workers``
    defaults to the ``PQADIC_WORKERS`` environment variable, else 1.  Results
    are merged in enumeration order whatever the worker count.
    """
    if preperiod_max < 0 or period_max < 1:
        raise DomainError("need preperiod_max >= 0 and period_max >= 1")
    if H.integer_map is None:
        raise DomainError("search needs the integer form of the map")
    if workers is None:
        workers = int(os.environ.get(WORKERS_ENV, "1") or 1)
    jobs, base = [], 0
    for L in range(1, period_max + 1):
        size = _block_size(H.p, L, preperiod_max)
        if base + size > start:
            jobs.append((H, L, preperiod_max, verify_steps, start, base))
        base += size
    if workers > 1 and len(jobs) > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            parts = list(pool.map(_search_block, *zip(*jobs)))
    else:
        parts = [_search_block(*job) for job in jobs]
    out = SearchResult([], cursor=max(base, start))
    for part in parts:
        out.hits.extend(part.hits)
        out.examined += part.examined
        out.skipped_no_place += part.skipped_no_place
        out.skipped_ratio_one += part.skipped_ratio_one
    return out
