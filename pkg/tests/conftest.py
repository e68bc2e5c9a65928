from __future__ import annotations

from fractions import Fraction

from hypothesis import settings
from hypothesis import strategies as st

from pqadic.digits import PAdicRational

settings.register_profile("default", deadline=None)
settings.load_profile("default")

PRIMES = [2, 3, 5, 7]


@st.composite
def points(draw, p=None, max_pre=5, max_per=5):
    p = draw(st.sampled_from(PRIMES)) if p is None else p
    digit = st.integers(0, p - 1)
    pre = draw(st.lists(digit, max_size=max_pre))
    per = draw(st.lists(digit, min_size=1, max_size=max_per))
    return PAdicRational(p, tuple(pre), tuple(per))


@st.composite
def p_integral(draw, p):
    num = draw(st.integers(-10**6, 10**6))
    den = draw(st.integers(1, 10**4).filter(lambda d: d % p))
    return Fraction(num, den)


nonzero_rationals = st.builds(
    Fraction,
    st.integers(-10**6, 10**6).filter(lambda n: n != 0),
    st.integers(1, 10**6),
)
