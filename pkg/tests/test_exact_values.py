from fractions import Fraction

import mpmath
import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from harmpot.exact_values import (PotentialTable, PotentialValue, bernoulli, diagonal_value,
                                  mccrea_whipple, odd_harmonic_asymptotics)
from harmpot.scalar import SymbolicConstant


@pytest.fixture(scope="module")
def table():
    return PotentialTable().fill(60)


def exact(n, q):
    return (Fraction(n), Fraction(q))


def test_small_values(table):
    assert mccrea_whipple(0, 0, table).exact == exact(0, 0)
    assert mccrea_whipple(1, 1, table).exact == exact(0, 4)
    assert mccrea_whipple(1, 0, table).exact == exact(1, 0)
    assert mccrea_whipple(2, 0, table).exact == exact(4, -8)
    assert mccrea_whipple(2, 1, table).exact == exact(-1, 8)
    assert mccrea_whipple(3, 0, table).exact == exact(17, -48)
    assert str(mccrea_whipple(2, 0, table)) == "4 + (-8)/pi"


def test_table_without_cache():
    assert mccrea_whipple(3, 1).exact == PotentialTable().fill(5).get(3, 1).exact


def test_diagonal_values():
    assert diagonal_value(0).exact == exact(0, 0)
    assert diagonal_value(1).exact == exact(0, 4)
    assert diagonal_value(2).exact == exact(0, Fraction(16, 3))


def test_diagonal_formula(table):
    for m in range(51):
        odd = sum((Fraction(1, 2 * j - 1) for j in range(1, m + 1)), Fraction(0))
        assert mccrea_whipple(m, m, table).exact == exact(0, 4 * odd)


def test_laplacian_identity(table):
    for x in range(-30, 31):
        for y in range(-30, 31):
            centre = table.get(x, y).exact
            nb = [table.get(x + dx, y + dy).exact for dx, dy in ((1, 0), (-1, 0), (0, 1), (0, -1))]
            lap_n = sum(v[0] for v in nb) / 4 - centre[0]
            lap_q = sum(v[1] for v in nb) / 4 - centre[1]
            assert (lap_n, lap_q) == ((1, 0) if (x, y) == (0, 0) else (0, 0))


@settings(max_examples=100, deadline=None)
@given(st.integers(-40, 40), st.integers(-40, 40))
def test_eightfold_symmetry(x, y):
    t = PotentialTable().fill(40)
    v = t.get(x, y).exact
    assert v == t.get(y, x).exact == t.get(-x, y).exact == t.get(x, -y).exact


def test_numeric_value(table):
    v = mccrea_whipple(2, 0, table).value(200)
    with mpmath.workprec(200):
        assert abs(v - (4 - 8 / mpmath.pi)) < mpmath.mpf(2) ** -195


def test_growth(table):
    xs = list(range(5, 41))
    n_bits = [table.get(x, 0).n.numerator.bit_length() for x in xs]
    q_bits = [max(table.get(x, 0).q.numerator.bit_length(), table.get(x, 0).q.denominator.bit_length())
              for x in xs]
    assert all(b2 > b1 for b1, b2 in zip(n_bits, n_bits[1:]))
    # q has occasional cancellations, so compare over windows and by trend
    assert all(q_bits[i + 5] > q_bits[i] for i in range(len(xs) - 5))
    assert np.polyfit(xs, q_bits, 1)[0] > 2


def test_bernoulli():
    assert bernoulli(0) == 1
    assert bernoulli(1) == Fraction(-1, 2)
    assert bernoulli(2) == Fraction(1, 6)
    assert bernoulli(12) == Fraction(-691, 2730)
    assert all(bernoulli(n) == 0 for n in range(3, 30, 2))


def test_series_shape():
    s = odd_harmonic_asymptotics(8)
    assert s.log_coefficient == Fraction(1, 2)
    assert s.constant == SymbolicConstant(0, Fraction(1, 2), 1, over_pi=False)
    assert s.coefficients[1] == 0
    # 4/pi times the constant minus (2/pi) log sqrt 2 gives the additive constant
    lam = s.constant * 4
    lam = SymbolicConstant(0, lam.gamma, lam.log2 - 1, over_pi=True)
    assert lam == SymbolicConstant(0, 2, 3)


def test_log_coefficient_numerically():
    with mpmath.workdps(30):
        S = lambda m: mpmath.fsum(1 / mpmath.mpf(2 * j - 1) for j in range(1, m + 1))  # noqa: E731
        slope = (S(10000) - S(1000)) / mpmath.log(10)
        assert abs(slope - mpmath.mpf(1) / 2) < 1e-6


def test_first_correction():
    s = odd_harmonic_asymptotics(2)
    trunc = odd_harmonic_asymptotics(1)
    for m in (100, 1000):
        exact_sum = diagonal_value(m).value(120) * mpmath.pi / 4
        with mpmath.workprec(120):
            assert abs(exact_sum - trunc.evaluate(m, 120)) < 2 / mpmath.mpf(m) ** 2
            assert abs(exact_sum - s.evaluate(m, 120)) < 1 / mpmath.mpf(m) ** 3


@pytest.mark.parametrize("J", [2, 4, 6])
def test_series_truncation_decay(J):
    s = odd_harmonic_asymptotics(J)
    ms = [20, 40, 80, 160, 320]
    errs = []
    for m in ms:
        with mpmath.workprec(200):
            errs.append(float(abs(diagonal_value(m).value(200) * mpmath.pi / 4 - s.evaluate(m, 200))))
    slope = np.polyfit(np.log(ms), np.log(errs), 1)[0]
    # odd powers vanish, so the first omitted power is m^-(J+2)
    assert slope <= -(J + 1)
    assert slope == pytest.approx(-(J + 2), abs=0.1)


def test_potential_value_requires_data():
    with pytest.raises(ValueError):
        PotentialValue()
