"""Conformally compact (asymptotically hyperbolic) form of the expansion.

Substituting rho = -r^2/2 into the deformation turns the ambient
structure into

    g_plus = r^-2 (dr^2 + g_r),        f_plus = r^-1 f_r,

with g_r the even r-series whose r^(2k) coefficient is (-1/2)^k times
the rho^k coefficient.  The structure is weighted-Einstein to the
transported orders:

    Ric_phi(g_plus) + (d+m) g_plus  and  F_phi(g_plus) - (d+m) f_plus^2

vanish as r-series to twice the rho order.  Two independent routes
compute this residual: exact truncated Laurent series in r (poles of
g_plus cleared algebraically, no finite differencing), and an honest
(d+1)-dimensional smooth metric measure space on an (x, r) chart
evaluated at fixed small r, which also drives the cone identity

    Ric_phi(s^2 g_plus - ds^2) = Ric_phi(g_plus) + (d+m) g_plus,
    F(s^2 g_plus - ds^2)       = F_phi(g_plus) - (d+m) f_plus^2.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import curvature as cv
from . import invariants as inv
from .ambient import Graded
from .expansion import RhoExpansion
from .fields import Chart, ScalarField, SymTensor2Field
from .invariants import MetricMeasureSpace
from .series import Series

__all__ = ["PoincareStructure", "PoincareResidual", "to_poincare",
           "poincare_residual", "cone_identity_check", "lift_field"]


class _LiftedField(ScalarField):
    """A base-chart field viewed on a chart with extra trailing coordinates."""

    __slots__ = ("parent", "extra")

    def __init__(self, parent: ScalarField, chart: Chart):
        super().__init__(chart)
        self.parent = parent
        self.extra = chart.dim - parent.chart.dim
        if self.extra < 0 or chart.names[: parent.chart.dim] != parent.chart.names:
            raise ValueError("lift target must extend the parent chart")

    def _jet(self, point, degree):
        return self.parent.jet(point[: self.parent.chart.dim], degree).promote(
            self.extra)

    @property
    def is_zero(self):
        return self.parent.is_zero

    def const_value(self):
        return self.parent.const_value()


def lift_field(field: ScalarField, chart: Chart) -> ScalarField:
    c = field.const_value()
    if c is not None:
        return chart.constant(c)
    return _LiftedField(field, chart)


@dataclass
class PoincareStructure:
    base: MetricMeasureSpace
    expansion: RhoExpansion
    g_r: list          # d x d matrix of even r-series
    f_r: Series
    max_even_order: int

    @property
    def dim(self) -> int:
        return self.base.dim

    def g_plus(self):
        """(d+1) x (d+1) Laurent components, r last; rr entry is r^-2."""
        d = self.dim
        zero = self.base.chart.zero()
        rm2 = Series([self.base.chart.constant(1.0)], -2, None, zero)
        out = [[Series.zero_series(zero)] * (d + 1) for _ in range(d + 1)]
        for i in range(d):
            for j in range(d):
                out[i][j] = rm2 * self.g_r[i][j]
        out[d][d] = rm2
        return out

    def f_plus(self):
        zero = self.base.chart.zero()
        rm1 = Series([self.base.chart.constant(1.0)], -1, None, zero)
        return rm1 * self.f_r

    def boundary_values(self, point):
        """(g_r, f_r) at r = 0: the conformal-infinity representative."""
        d = self.dim
        g0 = np.array([[self.g_r[i][j].coefficient(0).value(point)
                        for j in range(d)] for i in range(d)])
        return g0, self.f_r.coefficient(0).value(point)


def to_poincare(e: RhoExpansion) -> PoincareStructure:
    """Even r-series from the rho-coefficients: r^(2k) picks up (-1/2)^k."""
    base = e.base
    d = base.dim
    chart = base.chart
    zero = chart.zero()
    trunc = 2 * e.order + 1

    def even_series(coeffs):
        out = [zero] * (trunc + 1)
        for k, c in enumerate(coeffs):
            out[2 * k] = c * (-0.5) ** k if k else c
        return Series(out, 0, trunc, zero)

    g_r = [[even_series([g.comp(i, j) for g in e.g_coeffs]) for j in range(d)]
           for i in range(d)]
    f_r = even_series(list(e.f_coeffs))
    return PoincareStructure(base, e, g_r, f_r, 2 * e.order)


@dataclass
class PoincareResidual:
    ricci_blocks: dict     # name -> list of r-series
    f_scalar: Series
    trunc: int

    def block_max(self, name, power, points):
        worst = 0.0
        for s in self.ricci_blocks[name]:
            c = s.coefficient(power)
            for p in points:
                v = c if isinstance(c, float) else c.value(p)
                worst = max(worst, abs(v))
        return worst

    def scalar_max(self, power, points):
        c = self.f_scalar.coefficient(power)
        return max(abs(c if isinstance(c, float) else c.value(p)) for p in points)


def poincare_residual(p: PoincareStructure) -> PoincareResidual:
    """Exact r-Laurent residual of the weighted-Einstein conditions."""
    base = p.base
    d = base.dim
    chart = base.chart
    zero = chart.zero()
    ezero = Series.zero_series(zero)
    n = d + 1
    dm = d + float(base.m)
    gp = p.g_plus()
    fp = p.f_plus()
    derivs = [lambda S, i=i: S.map(lambda c: c.partial(i)) for i in range(d)]
    derivs.append(lambda S: S.deriv())
    ginv, _ = cv.matrix_inverse(gp, ezero)
    gamma = cv.christoffel(gp, ginv, derivs, ezero)
    ric = cv.ricci(gamma, derivs, ezero)
    hess = cv.hessian(fp, gamma, derivs, ezero)
    df = cv.gradient(fp, derivs)
    ric_phi = cv.bakry_emery_ricci(ric, hess, fp, base.m, ezero)
    lap = cv.laplacian(ginv, hess, ezero)
    gn2 = cv.grad_norm_sq(ginv, df, ezero)
    F_phi = cv.f_curvature(fp, lap, gn2, base.m, base.mu, ezero)

    resid = [[ric_phi[a][b] + gp[a][b] * dm for b in range(n)] for a in range(n)]
    resid_F = F_phi - (fp * fp) * dm
    blocks = {
        "ij": [resid[i][j] for i in range(d) for j in range(i, d)],
        "ri": [resid[d][i] for i in range(d)],
        "rr": [resid[d][d]],
    }
    trunc = min([s.trunc for row in resid for s in row if s.trunc is not None]
                + ([resid_F.trunc] if resid_F.trunc is not None else []))
    return PoincareResidual(blocks, resid_F, trunc)


def _xr_chart(base: MetricMeasureSpace, r_box=(0.05, 0.25)) -> Chart:
    box = list(base.chart.box) if base.chart.box else None
    if box is not None:
        box = box + [r_box]
    return Chart(tuple(base.chart.names) + ("r",), box=box)


def fixed_r_space(p: PoincareStructure, r_box=(0.05, 0.25)):
    """The (d+1)-dimensional smooth metric measure space (g_plus, f_plus)
    realized with honest fields on the (x, r) chart, for evaluation at
    fixed small r; reuses the base tensor machinery verbatim."""
    base = p.base
    d = base.dim
    chart = _xr_chart(base, r_box)
    r = chart.coordinate(d)
    rinv2 = 1.0 / (r * r)

    def assemble(series):
        acc = chart.zero()
        for power, c in zip(range(series.shift, series.max_stored + 1),
                            series.coeffs):
            if getattr(c, "is_zero", False):
                continue
            acc = acc + lift_field(c, chart) * (r ** power if power else 1.0)
        return acc

    comps = {}
    for i in range(d):
        for j in range(i, d):
            comps[(i, j)] = assemble(p.g_r[i][j]) * rinv2
    comps[(d, d)] = rinv2
    g_plus = SymTensor2Field(chart, comps)
    f_plus = assemble(p.f_r) / r
    return MetricMeasureSpace(chart, g_plus, f_plus, base.m, base.mu)


def cone_identity_check(p: PoincareStructure, *, points=None, r_values=(0.1,),
                        r_box=(0.05, 0.25)):
    """Verify both cone identities at fixed small r.

    Returns (worst_ricci, worst_F, sides): the worst absolute two-sided
    disagreements and a sample of the individually nonzero side values.
    """
    base = p.base
    d = base.dim
    space_plus = fixed_r_space(p, r_box)
    chart = space_plus.chart
    dm = d + float(base.m)
    if points is None:
        points = base.sample(4, seed=0)
    xr_points = [tuple(pt) + (rv,) for pt in points for rv in r_values]

    ric_plus = inv.weighted_ricci(space_plus)
    F_plus = inv.f_curvature(space_plus)

    # cone side: gc = s^2 g_plus - ds^2 with the s slot graded out
    zero = chart.zero()
    n = d + 2
    gmat = space_plus.g.as_matrix()
    ginv_f, _ = cv.matrix_inverse(gmat, zero)
    zero_g = Graded(0, zero)
    gc = [[zero_g] * n for _ in range(n)]
    gcinv = [[zero_g] * n for _ in range(n)]
    gc[0][0] = Graded(0, chart.constant(-1.0))
    gcinv[0][0] = Graded(0, chart.constant(-1.0))
    for a in range(d + 1):
        for b in range(d + 1):
            gc[a + 1][b + 1] = Graded(2, gmat[a][b])
            gcinv[a + 1][b + 1] = Graded(-2, ginv_f[a][b])
    fc = Graded(1, space_plus.f)
    mu_elem = Graded(0, chart.constant(base.mu))

    def d_s(a):
        if a.deg == 0:
            return zero_g
        return Graded(a.deg - 1, a.val * float(a.deg))

    derivs = [d_s] + [
        (lambda a, i=i: Graded(a.deg, a.val.partial(i))) for i in range(d + 1)]
    ric_cone, F_cone = cv.weighted_ricci_coordinate_formula(
        gc, gcinv, fc, float(base.m), mu_elem, derivs, zero_g)

    worst_ric = 0.0
    worst_F = 0.0
    side_sample = 0.0
    for pt in xr_points:
        for a in range(d + 1):
            for b in range(a, d + 1):
                lhs_c = ric_cone[a + 1][b + 1]
                lhs = 0.0 if lhs_c.is_zero else lhs_c.val.value(pt)
                rhs = (ric_plus.comp(a, b).value(pt)
                       + dm * space_plus.g.comp(a, b).value(pt))
                worst_ric = max(worst_ric, abs(lhs - rhs))
                side_sample = max(side_sample, abs(rhs))
        lhs_F = 0.0 if F_cone.is_zero else F_cone.val.value(pt)
        rhs_F = F_plus.value(pt) - dm * space_plus.f.value(pt) ** 2
        worst_F = max(worst_F, abs(lhs_F - rhs_F))
        side_sample = max(side_sample, abs(rhs_F))
    return worst_ric, worst_F, side_sample
