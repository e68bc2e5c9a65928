from __future__ import annotations

import math
from fractions import Fraction

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import points
from pqadic.adele import (
    DIAGONAL,
    INFINITY,
    INFINITY_ARITHMETIC,
    AdeleVector,
    EntryKind,
    embed_rational,
    exact,
    from_fseries,
    projectively_equal,
)
from pqadic.digits import DigitStream, TailFlag, from_rational
from pqadic.errors import DomainError, RatioOneError, RefusedError
from pqadic.fseries import FSeriesSpec
from pqadic.places import FINITE, INFINITE, abs_value

F = Fraction
S23 = FSeriesSpec.s_pq(2, 3)
S76 = FSeriesSpec.s_pq(7, 6)
rationals = st.fractions(min_value=-(10**6), max_value=10**6, max_denominator=10**4)


def squares_stream():
    return DigitStream(
        2,
        lambda n: int(math.isqrt(n) ** 2 == n),
        {0: TailFlag.INFINITELY_MANY, 1: TailFlag.INFINITELY_MANY},
        name="squares",
    )


class TestExamples:
    def test_embed(self):
        u = embed_rational(F(3, 4))
        assert u.tail == DIAGONAL(F(3, 4)) and u.is_diagonal
        assert u.non_integral_places() == {FINITE(2)}
        assert embed_rational(0).tail == DIAGONAL(0)
        assert embed_rational(-1).non_integral_places() == set()

    def test_ring_ops(self):
        assert embed_rational(2) + embed_rational(3) == embed_rational(5)
        assert embed_rational(2) * embed_rational(F(1, 2)) == embed_rational(1)
        u = AdeleVector({FINITE(2): exact(7)}, DIAGONAL(7))
        assert u + embed_rational(0) == u == embed_rational(7)

    def test_from_fseries(self):
        assert from_fseries(S76, from_rational(2, -1)) == embed_rational(7)
        assert from_fseries(S76, from_rational(2, 1)) == embed_rational(2)
        v = from_fseries(S23, squares_stream(), tail_policy="infinity")
        assert set(v.explicit) == {FINITE(3)}
        assert v.explicit[FINITE(3)].kind is EntryKind.APPROX
        assert v.tail == INFINITY

    def test_stream_refused(self):
        with pytest.raises(RefusedError):
            from_fseries(S23, DigitStream(2, lambda n: 1))

    def test_ratio_one(self):
        with pytest.raises(RatioOneError):
            from_fseries(FSeriesSpec(2, 2, (1, 2)), from_rational(2, -1))

    def test_bad_policy(self):
        with pytest.raises(DomainError):
            from_fseries(S23, from_rational(2, 1), tail_policy="sometimes")

    def test_infinity_arithmetic(self):
        v = from_fseries(S23, squares_stream(), tail_policy="infinity")
        w = v + embed_rational(1)
        assert w.tail.kind.value == "infinity_arithmetic"
        assert w.at(FINITE(5)) == INFINITY_ARITHMETIC
        assert w.at(FINITE(3)).kind is EntryKind.APPROX
        assert not v.is_restricted()
        assert from_fseries(S23, squares_stream()).is_restricted()

    def test_json(self):
        assert embed_rational(7).to_json() == {"diagonal": "7"}
        v = from_fseries(S23, squares_stream(), tail_policy="infinity")
        js = v.to_json(precision=12)
        assert js["tail"] == "infinity"
        assert js["explicit"]["3"]["approx_mod"] == "3^12"
        assert 0 <= int(js["explicit"]["3"]["residue"]) < 3**12

    def test_projective(self):
        assert projectively_equal(embed_rational(2), embed_rational(-6))
        assert not projectively_equal(embed_rational(0), embed_rational(0))
        u = AdeleVector({INFINITE: exact(1)}, DIAGONAL(2))
        assert projectively_equal(u, AdeleVector({INFINITE: exact(3)}, DIAGONAL(6)))
        assert not projectively_equal(u, AdeleVector({INFINITE: exact(3)}, DIAGONAL(4)))
        with pytest.raises(DomainError):
            projectively_equal(from_fseries(S23, squares_stream()), u)


class TestProperties:
    @settings(max_examples=300)
    @given(rationals, rationals)
    def test_homomorphism(self, x, y):
        assert embed_rational(x) + embed_rational(y) == embed_rational(x + y)
        assert embed_rational(x) * embed_rational(y) == embed_rational(x * y)

    @given(rationals)
    def test_restricted(self, x):
        u = embed_rational(x)
        assert u.is_restricted()
        assert {v.ell for v in u.non_integral_places()} == {
            ell for ell in range(2, x.denominator + 1) if x.denominator % ell == 0 and all(ell % k for k in range(2, ell))
        }

    @settings(max_examples=100)
    @given(points(p=2, max_pre=4, max_per=4))
    def test_tail_policy_irrelevant_for_rationals(self, z):
        try:
            a = from_fseries(S23, z, "zero")
        except RatioOneError:
            return
        b = from_fseries(S23, z, "infinity")
        assert a == b and a.is_diagonal and a.is_restricted()

    def test_approx_is_cauchy(self):
        v = from_fseries(S23, squares_stream())
        gen = v.explicit[FINITE(3)].approx
        vals = [gen(k) for k in range(2, 14, 2)]
        for k, (a, b) in enumerate(zip(vals, vals[1:])):
            assert abs_value(FINITE(3), b - a) <= F(1, 3 ** (2 * k + 2))
