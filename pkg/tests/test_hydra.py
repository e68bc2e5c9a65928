from __future__ import annotations

import json
from fractions import Fraction

import pytest
from hypothesis import given, settings

from conftest import points
from oracles import brute_numen
from pqadic.digits import PAdicRational, from_rational
from pqadic.errors import BranchNotIntegerError, DomainError, ParseError, RatioOneError
from pqadic.fseries import FSeriesSpec, closed_form
from pqadic.hydra import (
    HydraMap,
    c3,
    chi3_from_X,
    chi3_map,
    correspondence_search,
    enumerate_candidates,
    eta2_inverse,
    iterate,
    map_from_json,
    numen,
    numen_closed_form,
    parse_affine,
)
from pqadic.places import FINITE, abs_value

F = Fraction
H3 = chi3_map()
S23 = FSeriesSpec.s_pq(2, 3)


class TestNumen:
    def test_examples(self):
        assert [numen(H3, n) for n in range(3)] == [0, F(1, 2), F(1, 4)]
        assert numen(H3, 9) == F(11, 16)

    def test_closed_form_examples(self):
        assert numen_closed_form(H3, from_rational(2, -1)).value == -1
        assert numen_closed_form(H3, from_rational(2, F(-2, 3))).value == 1
        assert numen_closed_form(H3, from_rational(2, 5)).value == numen(H3, 5)

    def test_chi3_from_X(self):
        assert [chi3_from_X(x) for x in (2, 4, -2)] == [0, F(1, 2), -1]

    def test_matches_brute_recursion(self):
        for n in range(512):
            assert numen(H3, n) == brute_numen(H3.a, H3.b, 2, n)

    def test_functional_equations(self):
        for m in range(2**10):
            for j in range(2):
                assert numen(H3, 2 * m + j) == H3.a[j] * numen(H3, m) + H3.b[j]

    def test_powers_of_two(self):
        for n in range(1, 31):
            v = numen(H3, 2 ** (n - 1))
            assert v == F(1, 2**n)
            assert abs_value(FINITE(3), v - numen(H3, 0)) == 1

    def test_truncated_functional_equation(self):
        H = HydraMap(3, (F(1, 3), F(2), F(-5, 7)), (0, F(1, 2), 3))
        for N in range(1, 7):
            for n in range(3**5):
                for j in range(3):
                    lhs = numen(H, (3 * n + j) % 3**N)
                    assert lhs == H.a[j] * numen(H, n % 3 ** (N - 1)) + H.b[j]

    @settings(max_examples=200)
    @given(points(p=2, max_pre=5, max_per=5))
    def test_consistent_with_fseries(self, z):
        try:
            chi = numen_closed_form(H3, z).value
        except RatioOneError:
            return
        assert chi == chi3_from_X(closed_form(S23, z).value)

    @settings(max_examples=200)
    @given(points(p=3, max_pre=4, max_per=4))
    def test_general_map_fixed_point_equation(self, z):
        # the closed form satisfies chi(pz+j) = a_j chi(z) + b_j
        H = HydraMap(3, (F(1, 3), F(2), F(-5, 7)), (0, F(1, 2), 3))
        for j in range(3):
            try:
                lhs = numen_closed_form(H, z.shift(j)).value
                rhs = H.a[j] * numen_closed_form(H, z).value + H.b[j]
            except RatioOneError:
                return
            assert lhs == rhs

    def test_bad_maps(self):
        with pytest.raises(DomainError):
            HydraMap(2, (F(1, 2), 0), (0, 1))
        with pytest.raises(DomainError):
            HydraMap(2, (F(1, 2), 1), (1, 1))
        with pytest.raises(DomainError):
            HydraMap(2, (1, 3), (0, 1))


class TestReflection:
    def test_eta2_inverse(self):
        assert eta2_inverse(1) == from_rational(2, -1)
        assert eta2_inverse(0) == from_rational(2, 0)
        assert eta2_inverse(F(1, 2)) == from_rational(2, 1)
        assert eta2_inverse(F(1, 3)) == PAdicRational(2, (), (0, 1))

    def test_c3_values(self):
        assert c3(1) == -1
        assert c3(0) == 0
        assert c3(F(1, 2)) == F(1, 2)

    # (t, digit string of t): truncations to k binary digits increase to t
    PAIRS = [
        (F(1), "1"),
        (F(1, 3), "01"),
        (F(2, 3), "10"),
        (F(1, 7), "001"),
        (F(3, 7), "011"),
        (F(5, 7), "101"),
        (F(6, 7), "110"),
        (F(1, 5), "0011"),
        (F(2, 5), "0110"),
        (F(3, 5), "1001"),
        (F(4, 5), "1100"),
        (F(1, 15), "0001"),
        (F(7, 15), "0111"),
        (F(11, 15), "1011"),
        (F(13, 15), "1101"),
        (F(14, 15), "1110"),
        (F(1, 9), "000111"),
        (F(5, 9), "100011"),
        (F(1, 31), "00001"),
        (F(21, 31), "10101"),
    ]

    @pytest.mark.parametrize("t,block", PAIRS)
    def test_left_continuity(self, t, block):
        target = c3(t)
        dists = []
        for k in range(4, 40, 4):
            digits = (block * 40)[:k]
            tk = F(int(digits, 2), 2**k)
            assert tk < t
            dists.append(abs_value(FINITE(3), c3(tk) - target))
        assert dists[-1] < dists[0]
        assert dists[-1] <= F(1, 3**4)


class TestIteration:
    def test_examples(self):
        assert iterate(H3, 1, 10).cycle == (1, 2)
        assert iterate(H3, -5, 10).cycle == (-5, -7, -10)
        assert iterate(H3, 0, 10).cycle == (0,)
        assert iterate(H3, 27, 5).cycle is None

    def test_branch_not_integer(self):
        H = HydraMap(2, (F(1, 2), F(3, 2)), (0, F(1, 2)), ((F(1, 2), 0), (F(1, 2), 0)))
        with pytest.raises(BranchNotIntegerError):
            iterate(H, 1, 3)

    def test_parse_affine(self):
        assert parse_affine("n/2") == (F(1, 2), 0)
        assert parse_affine("(3n+1)/2") == (F(3, 2), F(1, 2))
        assert parse_affine("-5*n + 7") == (-5, 7)
        for bad in ["n*n", "n/0", "import os", "(3n+"]:
            with pytest.raises(ParseError):
                parse_affine(bad)

    def test_map_json_round_trip(self):
        text = '{"p":2,"a":["1/2","3/2"],"b":["0","1/2"],"integer_map":["n/2","(3n+1)/2"]}'
        H = map_from_json(json.loads(text))
        assert H == H3
        assert map_from_json(H.to_json()) == H


class TestSearch:
    def test_examples(self):
        hits = correspondence_search(H3, 2, 4, verify_steps=64).hits
        assert any(h.z == from_rational(2, F(-2, 3)) and h.chi_value == 1 and set(h.cycle) == {1, 2} for h in hits)
        hits = correspondence_search(H3, 1, 1, verify_steps=64).hits
        assert any(h.z == from_rational(2, -1) and h.cycle == (-1,) for h in hits)
        hits = correspondence_search(H3, 0, 1, verify_steps=64).hits
        assert any(h.z == from_rational(2, 0) and h.cycle == (0,) for h in hits)

    def test_hits_are_cycles(self):
        res = correspondence_search(H3, 3, 4)
        for h in res.hits:
            assert h.confirmed
            x = h.chi_value
            assert x in h.cycle
            y = x
            for _ in h.cycle:
                y = H3.step(y)
            assert y == x
            assert numen_closed_form(H3, h.z).value == x

    def test_enumeration_is_canonical_and_unique(self):
        seen = set()
        for _, z in enumerate_candidates(2, 3, 4):
            assert z not in seen
            seen.add(z)
        # each rational point with small digits appears once
        assert from_rational(2, F(-2, 3)) in seen

    def test_resume_matches_full(self):
        full = correspondence_search(H3, 3, 5)
        half = correspondence_search(H3, 3, 3)
        rest = correspondence_search(H3, 3, 5, start=half.cursor)
        assert [h.z for h in half.hits + rest.hits] == [h.z for h in full.hits]
        assert half.examined + rest.examined == full.examined

    def test_resume_mid_block(self):
        full = correspondence_search(H3, 2, 4)
        cut = full.hits[len(full.hits) // 2].index
        rest = correspondence_search(H3, 2, 4, start=cut)
        assert [h.index for h in rest.hits] == [h.index for h in full.hits if h.index >= cut]

    def test_workers_deterministic(self):
        one = correspondence_search(H3, 2, 5, workers=1)
        many = correspondence_search(H3, 2, 5, workers=3)
        assert [h.csv_row() for h in one.hits] == [h.csv_row() for h in many.hits]
        assert one.examined == many.examined

    def test_csv_row(self):
        hit = next(h for h in correspondence_search(H3, 0, 2).hits if h.chi_value == 1)
        assert hit.csv_row() == ["-2/3", "", "01", "1", "PERIODIC_CONFIRMED", "1 2"]

    def test_unconfirmed_reported(self):
        # with no room to iterate nothing can close up
        res = correspondence_search(H3, 0, 2, verify_steps=1)
        kinds = {h.chi_value: h.kind for h in res.hits}
        assert kinds[0] == "PERIODIC_CONFIRMED"
        assert kinds[1] == "INTEGER_UNCONFIRMED"
