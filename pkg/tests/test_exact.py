import math
from fractions import Fraction

import pytest
from hypothesis import given
from hypothesis import strategies as st

from fourphoton.exact import ExactComplex, I, Surd

fracs = st.fractions(max_denominator=50).filter(lambda q: abs(q) < 100)
surds = st.builds(Surd, fracs, fracs)


def test_inv_sqrt2_powers():
    assert Surd.inv_sqrt2(0) == 1
    assert Surd.inv_sqrt2(2) == Fraction(1, 2)
    assert Surd.inv_sqrt2(1) * Surd.inv_sqrt2(1) == Fraction(1, 2)
    assert float(Surd.inv_sqrt2(3)) == pytest.approx(2**-1.5, abs=1e-15)


def test_i_squared():
    assert I * I == -1
    assert (ExactComplex(1, 1) * ExactComplex(1, -1)) == 2


@given(surds, surds)
def test_surd_mul_matches_float(x, y):
    assert float(x * y) == pytest.approx(float(x) * float(y), rel=1e-9, abs=1e-9)


@given(surds, surds)
def test_surd_division_roundtrip(x, y):
    if not y:
        return
    assert (x / y) * y == x


def test_sqrt2_is_irrational():
    s = Surd(0, 1)
    assert not s.is_rational
    with pytest.raises(ValueError):
        s.to_fraction()
    assert (s * s).to_fraction() == 2


def test_abs2():
    z = ExactComplex(Surd.inv_sqrt2(), Surd.inv_sqrt2())
    assert z.abs2() == 1
    assert complex(z) == pytest.approx(complex(1, 1) / math.sqrt(2))


def test_rejects_floats():
    with pytest.raises(TypeError):
        Surd(0.5)
