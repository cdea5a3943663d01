"""Jet arithmetic against closed forms and finite differences."""

import math

import numpy as np
import pytest

from smmsgeom.jets import Jet, JetDivisionError, JetShapeError, jet_count


def jet_of(fn, point, degree):
    """Jet of a python function built from coordinate jets (same-path helper)."""
    n = len(point)
    xs = [Jet.variable(point[i], i, n, degree) for i in range(n)]
    return fn(*xs)


def test_counts_and_prefix_truncation():
    assert jet_count(2, 3) == 10
    assert jet_count(3, 4) == 35
    j = jet_of(lambda x, y: (x * y + x).exp(), (0.3, -0.2), 5)
    t = j.truncated(3)
    assert t.degree == 3
    np.testing.assert_array_equal(t.coeffs, j.coeffs[: jet_count(2, 3)])


def test_constant_and_coordinate_jets():
    z = Jet.constant(0.0, 2, 2)
    assert np.all(z.coeffs == 0.0)
    x = Jet.variable(0.3, 0, 2, 2)
    assert x.value == 0.3
    assert x.coefficient((1, 0)) == 1.0
    assert x.coefficient((0, 1)) == 0.0
    assert x.coefficient((2, 0)) == 0.0


def test_multiply_binomials():
    # (1 + x)(1 - x) = 1 - x^2 at degree 2
    x = Jet.variable(0.0, 0, 1, 2)
    p = (1.0 + x) * (1.0 - x)
    assert p.coefficient((0,)) == 1.0
    assert p.coefficient((1,)) == 0.0
    assert p.coefficient((2,)) == -1.0


def test_multiply_identity():
    rng = np.random.default_rng(0)
    a = Jet(2, 3, rng.normal(size=jet_count(2, 3)))
    one = Jet.constant(1.0, 2, 3)
    np.testing.assert_array_equal((a * one).coeffs, a.coeffs)


def test_exp_product_closed_form():
    # exp(x) * exp(2x) = exp(3x): coefficients 3^k / k!
    x = Jet.variable(0.0, 0, 1, 4)
    p = x.exp() * (2.0 * x).exp()
    for k in range(5):
        assert p.coefficient((k,)) == pytest.approx(3.0 ** k / math.factorial(k),
                                                    rel=1e-12)


def test_divide_identity_and_geometric_series():
    rng = np.random.default_rng(1)
    a = Jet(2, 3, rng.normal(size=jet_count(2, 3)))
    one = Jet.constant(1.0, 2, 3)
    np.testing.assert_allclose((a / one).coeffs, a.coeffs, rtol=1e-15)
    x = Jet.variable(0.0, 0, 1, 3)
    g = 1.0 / (1.0 + x)
    assert [g.coefficient((k,)) for k in range(4)] == pytest.approx([1, -1, 1, -1])


def test_tangent_from_quotient():
    # sin/cos at 0.4 must match the tan jet built independently below
    x = Jet.variable(0.4, 0, 1, 4)
    q = x.sin() / x.cos()
    t = math.tan(0.4)
    # tan' = 1 + tan^2 and so on, generated by differentiating recursively
    derivs = [t]
    poly = np.array([t, 1.0])  # tan expressed in powers of tan: coefficients
    for _ in range(4):
        # d/dx (sum c_k tan^k) = sum k c_k tan^(k-1) (1 + tan^2)
        k = np.arange(len(poly))
        dpoly = np.zeros(len(poly) + 1)
        dpoly[:-2] += (k * poly)[1:]
        dpoly[2:] += (k * poly)[1:]
        poly = dpoly
        derivs.append(np.polyval(poly[::-1], t))
    for k, d in enumerate(derivs):
        assert q.coefficient((k,)) == pytest.approx(d / math.factorial(k), rel=1e-10)


def test_division_roundtrip_random():
    rng = np.random.default_rng(42)
    for _ in range(25):
        a = Jet(3, 4, rng.normal(size=jet_count(3, 4)))
        b = Jet(3, 4, rng.normal(size=jet_count(3, 4)))
        b.coeffs[0] = rng.uniform(0.5, 2.0) * rng.choice([-1.0, 1.0])
        back = (a * b) / b
        np.testing.assert_allclose(back.coeffs, a.coeffs, rtol=1e-12, atol=1e-12)


def test_division_pivot_floor():
    b = Jet(1, 2, [1e-12, 1.0, 1.0])
    with pytest.raises(JetDivisionError):
        b.reciprocal()


def test_shape_mismatch():
    a = Jet.constant(1.0, 2, 2)
    b = Jet.constant(1.0, 2, 3)
    with pytest.raises(JetShapeError):
        a * b


def test_commutativity_up_to_float():
    rng = np.random.default_rng(3)
    a = Jet(2, 4, rng.normal(size=jet_count(2, 4)))
    b = Jet(2, 4, rng.normal(size=jet_count(2, 4)))
    np.testing.assert_allclose((a * b).coeffs, (b * a).coeffs, rtol=1e-14, atol=1e-14)


def test_determinism_bitwise():
    rng = np.random.default_rng(4)
    a = Jet(3, 5, rng.normal(size=jet_count(3, 5)))
    b = Jet(3, 5, rng.normal(size=jet_count(3, 5)))
    np.testing.assert_array_equal((a * b).coeffs, (a * b).coeffs)


def test_partial_shifts_degree():
    f = jet_of(lambda x, y: x ** 2 * y + y ** 3, (1.5, -0.5), 4)
    fx = f.partial(0)
    assert fx.degree == 3
    assert fx.value == pytest.approx(2 * 1.5 * -0.5)
    fxy = fx.partial(1)
    assert fxy.value == pytest.approx(2 * 1.5)


def test_partials_commute_exactly():
    f = jet_of(lambda x, y, z: (x * y).sin() * z.exp(), (0.2, 0.4, -0.3), 5)
    xy = f.partial(0).partial(1)
    yx = f.partial(1).partial(0)
    np.testing.assert_array_equal(xy.coeffs, yx.coeffs)


def fd_derivative(fn, point, alpha, h=1e-2):
    """4th-order central finite difference for the mixed partial d^alpha fn."""
    point = np.asarray(point, dtype=float)

    def diff(g, axis):
        def out(p):
            p = np.asarray(p, dtype=float)
            e = np.zeros_like(p)
            e[axis] = 1.0
            return (-g(p + 2 * h * e) + 8 * g(p + h * e)
                    - 8 * g(p - h * e) + g(p - 2 * h * e)) / (12 * h)
        return out

    g = fn
    for axis, k in enumerate(alpha):
        for _ in range(k):
            g = diff(g, axis)
    return g(point)


@pytest.mark.parametrize("expr,point", [
    (lambda x, y: x.exp() * y.sin(), (0.2, 0.5)),
    (lambda x, y: (x * y).cos() + x ** 3, (0.4, -0.3)),
    (lambda x, y: (1.0 + x ** 2 + y ** 2).sqrt(), (0.3, 0.6)),
    (lambda x, y: (2.0 + x).log() * y.cosh(), (0.1, 0.2)),
    (lambda x, y: x.sinh() / (2.0 + y ** 2), (-0.2, 0.5)),
])
def test_jets_match_finite_differences(expr, point):
    jet = jet_of(expr, point, 3)

    def numeric(p):
        xs = [Jet.variable(v, i, len(p), 0) for i, v in enumerate(p)]
        return expr(*xs).value

    from smmsgeom.jets import _exponent_table
    exps, _ = _exponent_table(2, 3)
    for alpha in exps:
        want = fd_derivative(numeric, point, alpha)
        fact = math.factorial(alpha[0]) * math.factorial(alpha[1])
        got = jet.coefficient(alpha) * fact
        assert got == pytest.approx(want, rel=1e-6, abs=1e-7)
