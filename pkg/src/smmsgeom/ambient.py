"""The assembled (d+2)-dimensional ambient structure and its residuals.

Coordinates are ordered (t, x^1..x^d, rho); the t slot is index 0 and
the rho slot index d+1 (displayed as "oo").  Every component of the
structure

    gt = 2 rho dt^2 + 2 t drho dt + t^2 g_rho,     ft = t f_rho

is homogeneous in t, so t is carried symbolically: an ambient scalar is
a pair (t-power, series in rho over chart fields) and numerics never
sample the t direction.  d/dt multiplies by the power and lowers it;
d/drho differentiates the series; spatial derivatives map through to
the coefficient fields.

Two independent routes to the weighted Ricci tensor are kept: the
closed-form rho-series expression used by the order-by-order solver
(ij block and the F scalar), and the generic second-derivative
coordinate formula evaluated on the graded components (all blocks).
Their agreement is a standing self-test.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

from . import curvature as cv
from .expansion import (Branch, RhoExpansion, closed_form_residual_series)
from .invariants import curvature_scale
from .series import Series, SeriesTruncationError

__all__ = ["Graded", "AmbientMetric", "BlockReport", "ResidualReport",
           "order_report"]


class Graded:
    """A t-homogeneous ambient scalar: t**deg times a rho-series."""

    __slots__ = ("deg", "val")

    def __init__(self, deg: int, val: Series):
        self.deg = deg
        self.val = val

    @property
    def is_zero(self) -> bool:
        return getattr(self.val, "is_zero", False)

    def _coerce(self, other):
        if isinstance(other, Graded):
            return other
        if isinstance(other, (int, float)):
            if other == 0.0:
                return Graded(self.deg, self.val * 0.0)
            raise TypeError("a bare number has no t-grading; wrap it explicitly")
        return NotImplemented

    def __add__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return NotImplemented
        # an exact zero carries no t-degree or truncation information
        if other.is_zero:
            return self
        if self.is_zero:
            return other
        if self.deg != other.deg:
            raise ValueError(
                f"adding ambient scalars of different t-degree "
                f"({self.deg} vs {other.deg}); the structure is homogeneous, "
                f"so this indicates an assembly bug")
        return Graded(self.deg, self.val + other.val)

    __radd__ = __add__

    def __neg__(self):
        return Graded(self.deg, -self.val)

    def __sub__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return NotImplemented
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        if isinstance(other, (int, float)):
            return Graded(self.deg, self.val * other)
        if isinstance(other, Graded):
            return Graded(self.deg + other.deg, self.val * other.val)
        return NotImplemented

    __rmul__ = __mul__

    def __truediv__(self, other):
        if isinstance(other, (int, float)):
            return Graded(self.deg, self.val * (1.0 / other))
        if isinstance(other, Graded):
            return Graded(self.deg - other.deg, self.val / other.val)
        return NotImplemented

    def __repr__(self):
        return f"Graded(t^{self.deg}, {self.val!r})"


class AmbientMetric:
    """gt and ft assembled from a deformation expansion.

    Component indices run 0 (the t slot), 1..d (the chart), d+1 (the
    rho slot).  The normal form is structural: gt[oo][oo] = 0,
    gt[oo][i] = 0 and gt[0][oo] = t exactly.
    """

    def __init__(self, expansion: RhoExpansion):
        self.expansion = expansion
        self.base = expansion.base
        chart = self.base.chart
        d = self.base.dim
        self.d = d
        self.n = d + 2
        self.oo = d + 1
        zero_f = chart.zero()
        self._zero_series = Series.zero_series(zero_f)
        self.zero = Graded(0, self._zero_series)
        one = Series([chart.constant(1.0)], 0, None, zero_f)
        self.rho_series = Series([chart.constant(1.0)], 1, None, zero_f)
        G, F = expansion.series()
        self.G, self.F = G, F
        self.Ginv, _ = cv.matrix_inverse(G, self._zero_series)

        n, oo = self.n, self.oo
        gt = [[self.zero] * n for _ in range(n)]
        gt[0][0] = Graded(0, self.rho_series * 2.0)
        gt[0][oo] = gt[oo][0] = Graded(1, one)
        for i in range(d):
            for j in range(d):
                gt[i + 1][j + 1] = Graded(2, G[i][j])
        self.gt = gt

        gtinv = [[self.zero] * n for _ in range(n)]
        gtinv[0][oo] = gtinv[oo][0] = Graded(-1, one)
        for i in range(d):
            for j in range(d):
                gtinv[i + 1][j + 1] = Graded(-2, self.Ginv[i][j])
        gtinv[oo][oo] = Graded(-2, self.rho_series * (-2.0))
        self.gtinv = gtinv

        self.ft = Graded(1, F)
        self.mu_elem = Graded(0, Series([chart.constant(self.base.mu)], 0,
                                        None, zero_f))

    # -- derivations -------------------------------------------------------

    def derivs(self):
        d = self.d
        exact_zero = self.zero

        def d_t(a):
            if isinstance(a, Graded):
                if a.deg == 0:
                    # degree-0 components are t-independent exactly, whatever
                    # the rho truncation of their value
                    return exact_zero
                return Graded(a.deg - 1, a.val * float(a.deg))
            raise TypeError(a)

        def d_rho(a):
            return Graded(a.deg, a.val.deriv())

        def d_x(i):
            def out(a):
                return Graded(a.deg, a.val.map(lambda c: c.partial(i)))
            return out

        return [d_t] + [d_x(i) for i in range(d)] + [d_rho]

    # -- component access ---------------------------------------------------

    def metric_component(self, I: int, J: int) -> Graded:
        return self.gt[I][J]

    def component_value(self, I: int, J: int, t: float, rho_coeff: int, point):
        """Numeric value of the rho^k coefficient of gt_IJ at (t, point)."""
        comp = self.gt[I][J]
        c = comp.val.coefficient(rho_coeff)
        v = c if isinstance(c, float) else c.value(point)
        return t ** comp.deg * v

    # -- connection ------------------------------------------------------------

    def christoffels_closed(self):
        """The displayed closed forms for the straight-and-normal structure:

            Gam^0_ij   = -(t/2) g'_ij          Gam^k_0j = delta^k_j / t
            Gam^k_ij   = Gam[g_rho]^k_ij       Gam^k_i,oo = g^{kl} g'_il / 2
            Gam^oo_0,oo = 1/t                  Gam^oo_ij  = rho g'_ij - g_ij
        """
        chart = self.base.chart
        d, n, oo = self.d, self.n, self.oo
        zero_f = chart.zero()
        ez = self._zero_series
        one = Series([chart.constant(1.0)], 0, None, zero_f)
        sderivs = [lambda S, i=i: S.map(lambda c: c.partial(i)) for i in range(d)]
        gamma_slice = cv.christoffel(self.G, self.Ginv, sderivs, ez)
        Gp = [[self.G[i][j].deriv() for j in range(d)] for i in range(d)]
        out = [[[self.zero] * n for _ in range(n)] for _ in range(n)]
        for i in range(d):
            for j in range(d):
                out[0][i + 1][j + 1] = Graded(1, Gp[i][j] * (-0.5))
        for k in range(d):
            out[k + 1][0][k + 1] = out[k + 1][k + 1][0] = Graded(-1, one)
            for i in range(d):
                for j in range(d):
                    out[k + 1][i + 1][j + 1] = Graded(0, gamma_slice[k][i][j])
                mixed = cv.acc_sum([self.Ginv[k][l] * Gp[l][i] for l in range(d)],
                                   ez) * 0.5
                out[k + 1][i + 1][oo] = out[k + 1][oo][i + 1] = Graded(0, mixed)
        out[oo][0][oo] = out[oo][oo][0] = Graded(-1, one)
        for i in range(d):
            for j in range(d):
                out[oo][i + 1][j + 1] = Graded(
                    0, self.rho_series * Gp[i][j] - self.G[i][j])
        return out

    def christoffels_generic(self):
        """Levi-Civita coefficients recomputed from the metric components."""
        return cv.christoffel(self.gt, self.gtinv, self.derivs(), self.zero)

    # -- weighted Ricci ----------------------------------------------------------

    def ricci_closed(self):
        """(Rt_ij series matrix, Ft series): the solver's closed-form route."""
        return closed_form_residual_series(self.base, self.G, self.F)

    def ricci_generic(self):
        """All blocks of the weighted Ricci tensor plus the F scalar from the
        generic coordinate formula on the graded components."""
        ric, F = cv.weighted_ricci_coordinate_formula(
            self.gt, self.gtinv, self.ft, float(self.base.m), self.mu_elem,
            self.derivs(), self.zero)
        return ric, F

    # -- curvature ------------------------------------------------------------

    def curvature_closed(self):
        """The displayed component families of the curvature tensor:

            Rt_{IJK0}    = 0   (structural; not returned)
            Rt_{ijkl}    = t^2 [ Rm(g_rho) + g_{i[l} g'_{k]j} + g_{j[k} g'_{l]i}
                                 - rho g'_{i[l} g'_{k]j} ]
            Rt_{oo jkl}  = (t^2/2) [ nabla_l g'_jk - nabla_k g'_jl ]
            Rt_{oo jk oo}= (t^2/2) [ g''_jk - g^{pq} g'_jp g'_kq / 2 ]

        Returns (rm_tangential, rm_mixed, rm_normal) keyed by chart indices.
        """
        d = self.d
        ez = self._zero_series
        sderivs = [lambda S, i=i: S.map(lambda c: c.partial(i)) for i in range(d)]
        gamma_slice = cv.christoffel(self.G, self.Ginv, sderivs, ez)
        rm_slice = cv.riemann_lowered(self.G, gamma_slice, sderivs, ez)
        G, Ginv = self.G, self.Ginv
        Gp = [[G[i][j].deriv() for j in range(d)] for i in range(d)]
        Gpp = [[Gp[i][j].deriv() for j in range(d)] for i in range(d)]

        tang = {}
        for i in range(d):
            for j in range(d):
                for k in range(d):
                    for l in range(d):
                        # brackets antisymmetrize (l, k) across the two factors
                        # with weight 1/2: X_{i[l} Y_{k]j} = (X_il Y_kj - X_ik Y_lj)/2
                        t2 = (G[i][l] * Gp[k][j] - G[i][k] * Gp[l][j]) * 0.5
                        t3 = (G[j][k] * Gp[l][i] - G[j][l] * Gp[k][i]) * 0.5
                        t4 = (Gp[i][l] * Gp[k][j] - Gp[i][k] * Gp[l][j]) * 0.5
                        term = cv.acc_sum([
                            rm_slice[i][j][k][l], t2, t3,
                            -(self.rho_series * t4)], ez)
                        tang[(i, j, k, l)] = Graded(2, term)
        cov_gp = cv.cov_deriv_sym2(Gp, gamma_slice, sderivs, ez)
        mixed = {}
        for j in range(d):
            for k in range(d):
                for l in range(d):
                    mixed[(j, k, l)] = Graded(
                        2, (cov_gp[l][j][k] - cov_gp[k][j][l]) * 0.5)
        normal = {}
        for j in range(d):
            for k in range(d):
                sq = cv.acc_sum([Ginv[p][q] * (Gp[j][p] * Gp[k][q])
                                 for p in range(d) for q in range(d)], ez)
                normal[(j, k)] = Graded(2, (Gpp[j][k] - sq * 0.5) * 0.5)
        return tang, mixed, normal


# -- residual reporting -------------------------------------------------------


@dataclass
class BlockReport:
    name: str
    coeff_max: list
    guaranteed: Optional[int]
    tol_abs: float

    @property
    def first_violation(self) -> Optional[int]:
        for k, v in enumerate(self.coeff_max):
            if v > self.tol_abs:
                return k
        return None

    @property
    def ok(self) -> bool:
        g = self.guaranteed
        if g is None:
            return True
        fv = self.first_violation
        return fv is None or fv > g

    def describe(self) -> str:
        fv = self.first_violation
        vanish = ("all computed coefficients" if fv is None
                  else f"coefficients through {fv - 1}" if fv else "none")
        status = "ok" if self.ok else "VIOLATION"
        want = "-" if self.guaranteed is None else str(self.guaranteed)
        return (f"{self.name}: vanishing {vanish}; guaranteed through {want}; "
                f"{status}; magnitudes "
                + " ".join(f"{v:.2e}" for v in self.coeff_max))


@dataclass
class ResidualReport:
    blocks: dict
    scale: float
    tol: float
    branch: Branch
    order: int

    @property
    def ok(self) -> bool:
        return all(b.ok for b in self.blocks.values())

    def describe(self) -> str:
        head = (f"branch {self.branch.value}, order {self.order}, "
                f"scale {self.scale:.3e}, tol {self.tol:.1e} (relative)")
        return "\n".join([head] + [b.describe() for b in self.blocks.values()])


def _series_block_max(series_list, upto, points):
    out = []
    for k in range(upto + 1):
        worst = 0.0
        for s in series_list:
            try:
                c = s.coefficient(k)
            except SeriesTruncationError:
                return out
            for p in points:
                v = c if isinstance(c, float) else c.value(p)
                worst = max(worst, abs(v))
        out.append(worst)
    return out


def order_report(a: AmbientMetric, tol: float = 1e-9, *, points=None,
                 seed: int = 0, count: int = 10) -> ResidualReport:
    """Measured per-block orders of vanishing of the weighted Ricci tensor
    and the F scalar, against the branch guarantees of the construction."""
    base = a.base
    e = a.expansion
    if points is None:
        points = base.sample(count, seed)
    scale = max(curvature_scale(base, points), 1.0)
    d, oo = a.d, a.oo
    N = e.order

    Rt, Ft = a.ricci_closed()
    ric_g, _ = a.ricci_generic()

    branch = e.branch
    if branch is Branch.EVEN_INTEGER:
        n_c = int(d + float(base.m)) // 2
        solved = min(N, n_c - 1)
        guaranteed_ij = solved - 1 if N < n_c else n_c - 2
        guaranteed_trace = n_c - 1 if N >= n_c else guaranteed_ij
    else:
        guaranteed_ij = N - 1
        guaranteed_trace = N - 1
    # the oo blocks follow from the contracted second Bianchi identity and
    # trail the tangential blocks by one rho order
    guaranteed_oo = max(guaranteed_ij - 1, -1)

    blocks = {}
    tol_abs = tol * scale
    ij_series = [Rt[i][j] for i in range(d) for j in range(i, d)]
    blocks["ij"] = BlockReport("Ric[ij]", _series_block_max(ij_series, N - 1, points),
                               guaranteed_ij, tol_abs)
    blocks["F"] = BlockReport("F", _series_block_max([Ft], N - 1, points),
                              guaranteed_ij, tol_abs)

    trace = cv.acc_sum([a.Ginv[i][j] * Rt[i][j] for i in range(d)
                        for j in range(d)], a._zero_series)
    combo = trace - (Ft * float(base.m)) / (a.F * a.F) if base.m != 0.0 else trace
    blocks["trace_combo"] = BlockReport(
        "g^{ij}Ric_ij - (m/f^2)F", _series_block_max([combo], N - 1, points),
        guaranteed_trace, tol_abs)

    zero_blocks = [ric_g[0][I].val for I in range(a.n)]
    blocks["t_row"] = BlockReport(
        "Ric[0I] (structural zero)",
        _series_block_max(zero_blocks, max(N - 2, 0), points), None, tol_abs)

    oo_i = [ric_g[oo][i + 1].val for i in range(d)]
    blocks["rho_i"] = BlockReport(
        "Ric[oo i]", _series_block_max(oo_i, max(N - 2, 0), points),
        min(guaranteed_oo, N - 2), tol_abs)
    blocks["rho_rho"] = BlockReport(
        "Ric[oo oo]", _series_block_max([ric_g[oo][oo].val], max(N - 2, 0), points),
        min(guaranteed_oo, N - 2), tol_abs)
    return ResidualReport(blocks, scale, tol, branch, N)
