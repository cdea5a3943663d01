"""The order-by-order solver: first/second-order formulas, branch logic,
critical orders, obstruction, and closed-form reproduction."""

from fractions import Fraction

import numpy as np
import pytest

from smmsgeom import invariants as inv
from smmsgeom.catalog import (flat_space, hyperbolic_upper_half_space,
                              load_entry, quasi_einstein_entry, random_entry,
                              round_sphere_space)
from smmsgeom.expansion import (Branch, ConsistencyError, OrderError,
                                classify_branch, closed_form_residual_series,
                                expand, obstruction, obstruction_constant,
                                solve_order_step)


def residual_worst(space, e, orders, points):
    G, F = e.series()
    Rt, Ft = closed_form_residual_series(space, G, F)
    d = space.dim
    worst = 0.0
    for k in orders:
        for p in points:
            for i in range(d):
                for j in range(i, d):
                    worst = max(worst, abs(Rt[i][j].coefficient(k).value(p)))
            worst = max(worst, abs(Ft.coefficient(k).value(p)))
    return worst


def test_classify_branch():
    assert classify_branch(3, 0.5)[0] is Branch.NON_INTEGER
    assert classify_branch(3, 1.0)[0] is Branch.EVEN_INTEGER
    assert classify_branch(3, 2.0)[0] is Branch.ODD_INTEGER
    assert classify_branch(3, Fraction(1, 2))[0] is Branch.NON_INTEGER
    assert classify_branch(3, Fraction(3, 1))[0] is Branch.EVEN_INTEGER
    branch, dm, warnings = classify_branch(3, 1.0 + 1e-12)
    assert branch is Branch.EVEN_INTEGER and dm == 4.0 and warnings


def test_flat_expansion_vanishes():
    e = expand(flat_space(d=3, m=2.0, mu=0.0), 4)
    p = (0.1, -0.2, 0.3)
    for k in range(1, 5):
        assert np.allclose(e.g_coeffs[k].matrix_values(p), 0.0, atol=1e-14)
        assert abs(e.f_coeffs[k].value(p)) < 1e-14


def test_first_order_is_schouten_data():
    s = random_entry(d=3, m=1.7, mu=0.3, seed=11).space
    e = expand(s, 1)
    P, _, Y = inv.schouten(s)
    for p in s.sample(5, seed=2):
        assert np.allclose(e.g_coeffs[1].matrix_values(p),
                           2.0 * P.matrix_values(p), atol=1e-11)
        want = s.f.value(p) / s.m * Y.value(p)
        assert e.f_coeffs[1].value(p) == pytest.approx(want, abs=1e-11)


def test_order_step_determinant_value():
    s = random_entry(d=3, m=1.5, mu=0.0, seed=2).space
    step = solve_order_step(s, [s.g], [s.f], 1)
    assert step.trace_system_det == pytest.approx((2 - 4.5) * (1 - 4.5))
    assert step.solvable
    e = expand(s, 2)
    step2 = solve_order_step(s, e.g_coeffs[:2], e.f_coeffs[:2], 2)
    assert step2.trace_system_det == pytest.approx((4 - 4.5) * (2 - 4.5))


def test_second_order_matches_bach_formula():
    for m in (1.5, 2.5):
        s = random_entry(d=3, m=m, mu=0.15, seed=31).space
        e = expand(s, 2)
        B = inv.weighted_bach(s)
        P, _, _ = inv.schouten(s)
        dm4 = 3 + m - 4
        pts = s.sample(4, seed=1)
        scale = max(inv.curvature_scale(s, pts), 1.0)
        for p in pts:
            ginv = np.linalg.inv(s.g.matrix_values(p))
            Pv = P.matrix_values(p)
            gpp = 2.0 * e.g_coeffs[2].matrix_values(p)
            resid = dm4 * gpp + 2.0 * B.matrix_values(p) - 2.0 * dm4 * (Pv @ ginv @ Pv)
            assert np.max(np.abs(resid)) <= 1e-8 * scale


def test_noninteger_branch_residuals_vanish():
    s = random_entry(d=3, m=0.5, mu=0.2, seed=5).space
    e = expand(s, 3)
    assert e.branch is Branch.NON_INTEGER
    pts = s.sample(10, seed=9)
    scale = max(inv.curvature_scale(s, pts), 1.0)
    assert residual_worst(s, e, range(3), pts) <= 1e-9 * scale


def test_even_branch_critical_and_trace_combination():
    s = random_entry(d=3, m=1.0, mu=0.1, seed=21).space
    e = expand(s, 2)
    assert e.branch is Branch.EVEN_INTEGER
    assert any("critical even order" in note for note in e.ambiguity_notes)
    pts = s.sample(5, seed=9)
    scale = max(inv.curvature_scale(s, pts), 1.0)
    # full residual vanishes through coefficient (d+m)/2 - 2 = 0
    assert residual_worst(s, e, [0], pts) <= 1e-9 * scale
    # the trace combination g^{ij} Rt_ij - (m/f^2) Ft improves one order
    G, F = e.series()
    Rt, Ft = closed_form_residual_series(s, G, F)
    worst = 0.0
    for k in (0, 1):
        for p in pts:
            ginv = np.linalg.inv(s.g.matrix_values(p))
            tr = sum(ginv[i, j] * Rt[i][j].coefficient(k).value(p)
                     for i in range(3) for j in range(3))
            combo = tr - s.m / s.f.value(p) ** 2 * Ft.coefficient(k).value(p)
            worst = max(worst, abs(combo))
    assert worst <= 1e-9 * scale


def test_even_branch_blocks_past_obstruction():
    s = random_entry(d=3, m=1.0, mu=0.1, seed=21).space
    with pytest.raises(OrderError, match="obstruction"):
        expand(s, 3)


def test_even_branch_continuation_when_obstruction_vanishes():
    # the round sphere with f = 1, m = 1 has d+m = 4 and zero obstruction
    s = round_sphere_space(d=3, m=1.0, mu=-1.0)
    e = expand(s, 3)
    assert any("continuation" in note for note in e.ambiguity_notes)
    a = 0.5  # Schouten eigenvalue of the unit sphere
    p = (0.1, -0.05, 0.2)
    gm = s.g.matrix_values(p)
    ginv = np.linalg.inv(gm)
    # below the critical order the coefficients are unique: (1 + a rho)^2 g
    assert np.allclose(e.g_coeffs[1].matrix_values(p), 2 * a * gm, atol=1e-9)
    # at the critical order only tr psi / 2 + (m/f) upsilon is determined;
    # compare it against the closed form's value (f_rho = 1 - a rho has f_2 = 0)
    sigma_solver = (0.5 * np.trace(ginv @ e.g_coeffs[2].matrix_values(p))
                    + s.m * e.f_coeffs[2].value(p))
    sigma_closed = 0.5 * np.trace(ginv @ (a * a * gm))
    assert sigma_solver == pytest.approx(sigma_closed, abs=1e-9)
    # the continued expansion keeps killing residuals at its own orders
    pts = s.sample(4, seed=6)
    scale = max(inv.curvature_scale(s, pts), 1.0)
    assert residual_worst(s, e, range(3), pts) <= 1e-9 * scale


def test_obstruction_constant_value():
    # (-2)^(dm/2 - 1) (dm/2 - 1)! / (dm - 2)
    assert obstruction_constant(4) == pytest.approx(-1.0)
    assert obstruction_constant(6) == pytest.approx(2.0)
    assert obstruction_constant(8) == pytest.approx((-2.0) ** 3 * 6 / 6)


def test_obstruction_requires_even_branch():
    s = random_entry(d=3, m=0.5, mu=0.0, seed=1).space
    with pytest.raises(OrderError):
        obstruction(s)


def test_obstruction_flat_zero():
    obs = obstruction(flat_space(d=3, m=1.0, mu=0.0))
    p = (0.2, 0.1, -0.3)
    assert np.allclose(obs.tensor.matrix_values(p), 0.0, atol=1e-14)
    assert abs(obs.scalar_part.value(p)) < 1e-14


def test_obstruction_equals_bach_at_dm4():
    s = random_entry(d=3, m=1.0, mu=0.1, seed=21).space
    obs = obstruction(s)
    B = inv.weighted_bach(s)
    pts = s.sample(5, seed=9)
    scale = max(inv.curvature_scale(s, pts), 1.0)
    for p in pts:
        diff = obs.tensor.matrix_values(p) - B.matrix_values(p)
        assert np.max(np.abs(diff)) <= 1e-8 * scale


def test_obstruction_vanishes_for_catalog_families_at_even_dm():
    # all three closed-form families admit structures with Ric, F = O(rho^inf),
    # so at even d+m their obstruction must vanish
    from smmsgeom.catalog import (conformal_wlcf_space,
                                  hyperbolic_upper_half_space,
                                  round_sphere_space)
    spaces = [hyperbolic_upper_half_space(d=3, m=1.0),
              conformal_wlcf_space(d=3, m=1.0),
              round_sphere_space(d=3, m=1.0, mu=-1.0)]
    for s in spaces:
        obs = obstruction(s)
        pts = s.sample(4, seed=2)
        scale = max(inv.curvature_scale(s, pts), 1.0)
        worst = max(float(np.max(np.abs(obs.tensor.matrix_values(p))))
                    for p in pts)
        assert worst <= 1e-10 * scale
        worst_s = max(abs(obs.scalar_part.value(p)) for p in pts)
        assert worst_s <= 1e-10 * scale


def test_obstruction_trace_and_divergence_identities():
    s = random_entry(d=3, m=1.0, mu=0.1, seed=21).space
    obs = obstruction(s)
    pts = s.sample(5, seed=9)
    scale = max(inv.curvature_scale(s, pts), 1.0)
    # trace: O^i_i = (m/f^2) Fscript
    for p in pts:
        ginv = np.linalg.inv(s.g.matrix_values(p))
        tr = float(np.trace(ginv @ obs.tensor.matrix_values(p)))
        want = s.m / s.f.value(p) ** 2 * obs.scalar_part.value(p)
        assert abs(tr - want) <= 1e-8 * scale
    # divergence: delta_phi O compared against (1/f^2) Fscript dphi
    from smmsgeom import curvature as cv
    mat, ginv_f, _, gamma, derivs, zero = inv._space_geometry(s)
    dphi = cv.phi_gradient(s.f, derivs, s.m)
    div_O = cv.weighted_divergence_sym2(obs.tensor.as_matrix(), ginv_f, dphi,
                                        gamma, derivs, zero)
    for p in pts:
        fv = s.f.value(p)
        for l in range(3):
            want = obs.scalar_part.value(p) / fv ** 2 * dphi[l].value(p)
            assert abs(div_O[l].value(p) - want) <= 1e-8 * scale


def test_odd_branch_consistency_residual():
    s = random_entry(d=3, m=2.0, mu=0.1, seed=41, amplitude=0.04).space
    e = expand(s, 4)
    assert e.branch is Branch.ODD_INTEGER
    from smmsgeom.expansion import _residual_coefficients, _trace_with_base
    Rerr, Ferr = _residual_coefficients(s, e.g_coeffs, e.f_coeffs, 5)
    Rtr = _trace_with_base(s, Rerr)
    pts = s.sample(5, seed=3)
    scale = max(inv.curvature_scale(s, pts), 1.0)
    for p in pts:
        v = s.m / s.f.value(p) ** 2 * Ferr.value(p) - Rtr.value(p)
        assert abs(v) <= 1e-8 * scale


def test_odd_critical_step_solves_and_records():
    # cheap odd-critical exercise: flat space reaches n = d+m = 5 trivially
    s = flat_space(d=3, m=2.0, mu=0.0)
    e = expand(s, 5)
    assert any("critical order n = d+m" in note for note in e.ambiguity_notes)
    p = (0.05, 0.1, -0.1)
    assert np.allclose(e.g_coeffs[5].matrix_values(p), 0.0, atol=1e-12)


def test_quasi_einstein_solver_matches_closed_form():
    entry = quasi_einstein_entry(hyperbolic_upper_half_space(d=3, m=2.0),
                                 ric_eigenvalue=-4.0)
    s = entry.space
    e = expand(s, 4)
    g_want, f_want = entry.closed_form(4)
    pts = s.sample(4, seed=7)
    scale = max(inv.curvature_scale(s, pts), 1.0)
    for p in pts:
        for k in range(5):
            dg = e.g_coeffs[k].matrix_values(p) - g_want[k].matrix_values(p)
            assert np.max(np.abs(dg)) <= 1e-10 * scale
            df = abs(e.f_coeffs[k].value(p) - f_want[k].value(p))
            assert df <= 1e-10 * scale


def test_fefferman_graham_reduction_m0_sphere():
    # m = 0, f = 1 on the unit round sphere: g_rho = (1 + rho/2)^2 g
    s = round_sphere_space(d=3, m=0.0, mu=0.0, f_expr="1")
    e = expand(s, 3)
    assert e.branch is Branch.ODD_INTEGER
    lam = 0.5
    want = [1.0, 2 * lam, lam * lam, 0.0]
    pts = s.sample(4, seed=5)
    scale = max(inv.curvature_scale(s, pts), 1.0)
    for p in pts:
        gm = s.g.matrix_values(p)
        for k in range(4):
            dg = e.g_coeffs[k].matrix_values(p) - want[k] * gm
            assert np.max(np.abs(dg)) <= 1e-10 * scale


def test_determinism_bit_identical():
    s = random_entry(d=3, m=0.5, mu=0.2, seed=5).space
    e1 = expand(s, 2)
    e2 = expand(s, 2)
    for p in s.sample(3, seed=0):
        a = e1.g_coeffs[2].matrix_values(p)
        b = e2.g_coeffs[2].matrix_values(p)
        assert np.array_equal(a, b)
        assert e1.f_coeffs[2].value(p) == e2.f_coeffs[2].value(p)


def test_invalid_order():
    s = flat_space()
    with pytest.raises(OrderError):
        expand(s, 0)


def test_rational_m_matches_float_run():
    from smmsgeom.invariants import MetricMeasureSpace
    ent = random_entry(d=3, m=0.5, mu=0.2, seed=5)
    s_float = ent.space
    s_frac = MetricMeasureSpace(s_float.chart, s_float.g, s_float.f,
                                Fraction(1, 2), 0.2)
    e1 = expand(s_float, 2)
    e2 = expand(s_frac, 2)
    assert e2.branch is Branch.NON_INTEGER
    for p in s_float.sample(2, seed=1):
        assert np.array_equal(e1.g_coeffs[2].matrix_values(p),
                              e2.g_coeffs[2].matrix_values(p))
