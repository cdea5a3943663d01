"""Truncated Laurent series arithmetic with float and field coefficients."""

import numpy as np
import pytest

from smmsgeom.series import Series, SeriesTruncationError
from smmsgeom.fields import Chart
from smmsgeom.expressions import parse_expression


def coeffs_of(s, lo, hi):
    return [s.coefficient(p) for p in range(lo, hi + 1)]


def test_add_and_scale():
    a = Series([1.0, 2.0], 0, trunc=3)
    b = Series([5.0], 2, trunc=3)
    c = a + b * 2.0
    assert coeffs_of(c, 0, 3) == [1.0, 2.0, 10.0, 0.0]


def test_mul_truncation_order():
    a = Series([1.0, 1.0], 0, trunc=1)       # 1 + x + O(x^2)
    b = Series([1.0, -1.0], 0, trunc=1)      # 1 - x + O(x^2)
    c = a * b
    assert c.trunc == 1
    assert coeffs_of(c, 0, 1) == [1.0, 0.0]
    with pytest.raises(SeriesTruncationError):
        c.coefficient(2)


def test_laurent_shift_product():
    a = Series([1.0], -2)                     # x^-2, exact
    b = Series([3.0, 4.0], 1)                 # 3x + 4x^2, exact
    c = a * b
    assert c.coefficient(-1) == 3.0
    assert c.coefficient(0) == 4.0
    assert c.coefficient(5) == 0.0            # exact: high powers are known zeros


def test_division_geometric():
    one = Series([1.0], 0, trunc=5)
    denom = Series([1.0, 1.0], 0, trunc=5)    # 1 + x
    q = one / denom
    assert coeffs_of(q, 0, 5) == [1.0, -1.0, 1.0, -1.0, 1.0, -1.0]


def test_division_by_monomial_keeps_exactness():
    a = Series([2.0, 4.0], 0)
    q = a / Series([2.0], 2)
    assert q.trunc is None
    assert q.coefficient(-2) == 1.0
    assert q.coefficient(-1) == 2.0


def test_exact_division_by_nonmonomial_rejected():
    a = Series([1.0], 0)
    with pytest.raises(SeriesTruncationError):
        a / Series([1.0, 1.0], 0)


def test_division_with_shifted_divisor():
    # (x + x^2) / (x - x^3) = (1 + x) / (1 - x^2) = 1 + x + x^2 + x^3 + ...
    num = Series([1.0, 1.0], 1, trunc=6)
    den = Series([1.0, 0.0, -1.0], 1, trunc=6)
    q = num / den
    for p in range(0, q.trunc + 1):
        assert q.coefficient(p) == pytest.approx(1.0)


def test_roundtrip_division():
    rng = np.random.default_rng(11)
    a = Series(list(rng.normal(size=6)), -1, trunc=4)
    b = Series(list(rng.normal(size=6)), 0, trunc=5)
    b.coeffs[0] = 1.3
    q = (a * b) / b
    for p in range(-1, q.trunc + 1):
        assert q.coefficient(p) == pytest.approx(a.coefficient(p), rel=1e-12, abs=1e-12)


def test_deriv():
    s = Series([7.0, 1.0, 2.0, 3.0], -2, trunc=2)   # 7x^-2 + x^-1 + 2 + 3x + O(x^3)
    d = s.deriv()
    assert d.coefficient(-3) == -14.0
    assert d.coefficient(-2) == -1.0
    assert d.coefficient(-1) == 0.0
    assert d.coefficient(0) == 3.0
    assert d.trunc == 1


def test_field_coefficients():
    chart = Chart(("x",))
    f = parse_expression("x", chart)
    g = parse_expression("1+x", chart)
    zero = chart.zero()
    s = Series([g, f], 0, trunc=3, zero=zero)
    sq = s * s
    p = (0.5,)
    assert sq.coefficient(0).value(p) == pytest.approx(2.25)
    assert sq.coefficient(1).value(p) == pytest.approx(2 * 1.5 * 0.5)
    assert sq.coefficient(2).value(p) == pytest.approx(0.25)
    d = s.map(lambda c: c.partial(0))
    assert d.coefficient(0).value(p) == pytest.approx(1.0)
    assert d.coefficient(1).value(p) == pytest.approx(1.0)


def test_eval_at():
    s = Series([1.0, 2.0, 3.0], -1)
    assert s.eval_at(2.0) == pytest.approx(0.5 + 2.0 + 6.0)
