"""Order-by-order construction of the ambient deformation (g_rho, f_rho).

The straight-and-normal ambient structure

    gt = 2 rho dt^2 + 2 t drho dt + t^2 g_rho,      ft = t f_rho

is determined by requiring its weighted Ricci tensor and the companion
scalar Ft = ft Lap ft + (m-1)(|grad ft|^2 - mu) to vanish order by order
in rho.  With the candidate coefficients of rho^n set to (psi_ij,
upsilon), the rho^(n-1) coefficients of the two residuals change by

    n [ (n - (d+m)/2) psi_ij - (tr psi / 2 + (m/f) upsilon) g_ij ]
    n f [ (f/2) tr psi + (d + 2m - 2n) upsilon ]

so each order is a linear solve: the trace-free part carries the factor
(n - (d+m)/2) and the (tr psi, upsilon) pair the 2x2 system whose
determinant is -(2n-d-m)(n-d-m).  Branches on d+m:

  non-integer   every order solvable;
  even integer  at n = (d+m)/2 only the combination
                tr psi / 2 + (m/f) upsilon is determined (the leftover
                rho^(n-1) residual is the obstruction tensor);
  odd integer   at n = d+m the trace system is rank one along
                tr psi / 2 - (d/f) upsilon, solvable exactly when the
                consistency residual (m/f^2) Ft - tr Rt vanishes there.

Undetermined directions at critical orders are set to zero and recorded.
Residuals are recomputed from the closed-form expression of the ambient
blocks (see `closed_form_residual_series`), never from the correction
model, so a transcription error in either would fail the round trip.
"""

from __future__ import annotations

from dataclasses import dataclass, field as dc_field
from enum import Enum
from fractions import Fraction
import math
from typing import Optional

import numpy as np

from . import curvature as cv
from . import invariants as inv
from .fields import ScalarField, SymTensor2Field
from .invariants import MetricMeasureSpace, conformal_change, curvature_scale
from .series import Series

__all__ = [
    "Branch", "RhoExpansion", "OrderStep", "ObstructionData",
    "classify_branch", "expand", "solve_order_step", "obstruction",
    "obstruction_constant", "expansion_series", "closed_form_residual_series",
    "OrderError", "ConsistencyError", "conformal_change",
]

BRANCH_SNAP_TOL = 1e-9
OBSTRUCTION_CONTINUATION_TOL = 1e-10


class OrderError(ValueError):
    """The requested order is not reachable (unresolved obstruction, etc.)."""


class ConsistencyError(ArithmeticError):
    """The odd-order consistency residual exceeded tolerance."""


class Branch(Enum):
    NON_INTEGER = "NonInteger"
    EVEN_INTEGER = "EvenInteger"
    ODD_INTEGER = "OddInteger"


def classify_branch(d: int, m):
    """(branch, d+m as float, warnings).  Rationals classify exactly;
    floats within 1e-9 of an integer are snapped, with a warning."""
    warnings = []
    if isinstance(m, Fraction):
        dm = Fraction(d) + m
        if dm.denominator == 1:
            dm_int = int(dm)
            branch = Branch.EVEN_INTEGER if dm_int % 2 == 0 else Branch.ODD_INTEGER
            return branch, float(dm), warnings
        return Branch.NON_INTEGER, float(dm), warnings
    dm = d + float(m)
    nearest = round(dm)
    if abs(dm - nearest) < BRANCH_SNAP_TOL:
        if dm != nearest:
            warnings.append(
                f"d+m = {dm!r} snapped to the integer {nearest} for branch logic")
        branch = Branch.EVEN_INTEGER if nearest % 2 == 0 else Branch.ODD_INTEGER
        return branch, float(nearest), warnings
    return Branch.NON_INTEGER, dm, warnings


@dataclass
class OrderStep:
    n: int
    psi: SymTensor2Field
    upsilon: ScalarField
    trace_system_det: float
    solvable: bool
    note: Optional[str] = None


@dataclass
class ObstructionData:
    tensor: SymTensor2Field
    scalar_part: ScalarField
    c: float


@dataclass
class RhoExpansion:
    base: MetricMeasureSpace
    order: int
    g_coeffs: list
    f_coeffs: list
    branch: Branch
    obstruction: Optional[ObstructionData] = None
    ambiguity_notes: list = dc_field(default_factory=list)
    warnings: list = dc_field(default_factory=list)

    def series(self, trunc: Optional[int] = None):
        """(G, F): matrix of rho-series and the density rho-series."""
        if trunc is None:
            trunc = self.order
        if trunc > self.order:
            raise OrderError(f"expansion computed to order {self.order}, "
                             f"coefficients to {trunc} requested")
        return _coeffs_to_series(self.base, self.g_coeffs[: trunc + 1],
                                 self.f_coeffs[: trunc + 1])


def _coeffs_to_series(base, g_coeffs, f_coeffs):
    chart = base.chart
    zero = chart.zero()
    trunc = len(g_coeffs) - 1
    d = base.dim
    G = [[Series([g.comp(i, j) for g in g_coeffs], 0, trunc, zero)
          for j in range(d)] for i in range(d)]
    F = Series(list(f_coeffs), 0, trunc, zero)
    return G, F


def _slice_weighted_invariants(base, G, F):
    """Intrinsic Ric_phi and F_phi of the rho-dependent slice, as series."""
    chart = base.chart
    zero = chart.zero()
    exact_zero = Series.zero_series(zero)
    derivs = [lambda S, i=i: S.map(lambda c: c.partial(i))
              for i in range(base.dim)]
    Ginv, _ = cv.matrix_inverse(G, exact_zero)
    gamma = cv.christoffel(G, Ginv, derivs, exact_zero)
    ric = cv.ricci(gamma, derivs, exact_zero)
    hess_F = cv.hessian(F, gamma, derivs, exact_zero)
    dF = cv.gradient(F, derivs)
    lap_F = cv.laplacian(Ginv, hess_F, exact_zero)
    gn2_F = cv.grad_norm_sq(Ginv, dF, exact_zero)
    ric_phi = cv.bakry_emery_ricci(ric, hess_F, F, base.m, exact_zero)
    F_phi = cv.f_curvature(F, lap_F, gn2_F, base.m, base.mu, exact_zero)
    return ric_phi, F_phi, Ginv


def closed_form_residual_series(base, G, F):
    """(Rt_ij, Ft): the ij block of the ambient weighted Ricci tensor and
    the ambient F-scalar, as rho-series over the chart, via the closed form

      Rt_ij = rho g''_ij - rho g^{kl} g'_ik g'_jl + rho (tr g')/2 g'_ij
              + rho (m/f) g'_ij f' - ((d+m)/2 - 1) g'_ij - (tr g')/2 g_ij
              - (m/f) g_ij f' + Ric_phi[g_rho, f_rho]_ij
      Ft    = -2 rho f f'' - rho f f' tr g' - 2(m-1) rho (f')^2
              + (f^2/2) tr g' + (2m+d-2) f f' + F_phi[g_rho, f_rho]

    with all primes rho-derivatives and traces taken in g_rho."""
    d, m = base.dim, float(base.m)
    chart = base.chart
    zero = chart.zero()
    ezero = Series.zero_series(zero)
    rho = Series([1.0], 1, None, zero)
    ric_phi, F_phi, Ginv = _slice_weighted_invariants(base, G, F)
    Gp = [[G[i][j].deriv() for j in range(d)] for i in range(d)]
    Gpp = [[Gp[i][j].deriv() for j in range(d)] for i in range(d)]
    Fp = F.deriv()
    Fpp = Fp.deriv()
    tr_gp = cv.acc_sum([Ginv[k][l] * Gp[k][l] for k in range(d) for l in range(d)],
                       ezero)
    Rt = [[None] * d for _ in range(d)]
    for i in range(d):
        for j in range(i, d):
            sq = cv.acc_sum([Ginv[k][l] * (Gp[i][k] * Gp[j][l])
                             for k in range(d) for l in range(d)], ezero)
            terms = [rho * Gpp[i][j], -(rho * sq), rho * (tr_gp * Gp[i][j]) * 0.5,
                     -(Gp[i][j] * ((d + m) / 2.0 - 1.0)),
                     -(tr_gp * G[i][j]) * 0.5, ric_phi[i][j]]
            if m != 0.0:
                terms.append(rho * ((Gp[i][j] * Fp) * m) / F)
                terms.append(-(((G[i][j] * Fp) * m) / F))
            Rt[i][j] = Rt[j][i] = cv.acc_sum(terms, ezero)
    Ft = cv.acc_sum([
        -(rho * (F * Fpp)) * 2.0,
        -(rho * ((F * Fp) * tr_gp)),
        -(rho * (Fp * Fp)) * (2.0 * (m - 1.0)),
        ((F * F) * tr_gp) * 0.5,
        (F * Fp) * (2.0 * m + d - 2.0),
        F_phi], ezero)
    return Rt, Ft


def _residual_coefficients(base, g_coeffs, f_coeffs, n):
    """rho^(n-1) coefficients of (Rt_ij, Ft) with zero candidate at order n."""
    chart = base.chart
    zero_t = SymTensor2Field.zero(chart)
    zero_f = chart.zero()
    g_ext = list(g_coeffs) + [zero_t] * (n + 1 - len(g_coeffs))
    f_ext = list(f_coeffs) + [zero_f] * (n + 1 - len(f_coeffs))
    G, F = _coeffs_to_series(base, g_ext, f_ext)
    Rt, Ft = closed_form_residual_series(base, G, F)
    d = base.dim
    Rerr = [[Rt[i][j].coefficient(n - 1) for j in range(d)] for i in range(d)]
    Ferr = Ft.coefficient(n - 1)
    return Rerr, Ferr


def _trace_with_base(base, T):
    mat, ginv, _, _, _, zero = inv._space_geometry(base)
    d = base.dim
    return cv.acc_sum([ginv[i][j] * T[i][j] for i in range(d) for j in range(d)],
                      zero)


def solve_order_step(base, g_coeffs, f_coeffs, n, *, branch=None, dm=None,
                     check_points=None, consistency_tol=1e-8) -> OrderStep:
    """Determine the rho^n coefficients given coefficients through n-1."""
    if branch is None or dm is None:
        branch, dm, _ = classify_branch(base.dim, base.m)
    d, m = base.dim, float(base.m)
    f0 = base.f
    chart = base.chart
    zero = chart.zero()
    g0 = base.g.as_matrix()
    Rerr, Ferr = _residual_coefficients(base, g_coeffs, f_coeffs, n)
    Rtrace = _trace_with_base(base, Rerr)
    det = (2 * n - dm) * (n - dm)

    is_even_critical = (branch is Branch.EVEN_INTEGER and 2 * n == int(dm))
    is_odd_critical = ((branch in (Branch.ODD_INTEGER, Branch.EVEN_INTEGER))
                       and n == int(dm) and not is_even_critical)

    if is_even_critical:
        # only tr psi / 2 + (m/f) upsilon is determined (even-order critical
        # solve); trace-free psi and the complementary combination are the
        # canonical zero choice
        combo = (Ferr * m) / (f0 * f0) - Rtrace if m != 0.0 else -Rtrace
        sigma = -(combo * (2.0 / dm ** 2))
        if m > 0.0:
            tau = sigma
            upsilon = (f0 * sigma) * (1.0 / (2.0 * m))
        else:
            tau = sigma * 2.0
            upsilon = zero
        psi = [[(g0[i][j] * tau) * (1.0 / d) for j in range(d)] for i in range(d)]
        note = ("critical even order: trace-free part and the combination "
                "tr psi / 2 - (m/f) upsilon set to zero (canonical choice)")
        return OrderStep(n, SymTensor2Field.from_matrix(chart, psi), upsilon,
                         det, False, note)

    # trace-free part (solvable whenever n != (d+m)/2)
    tf_factor = n * (n - dm / 2.0)
    psi_tf = [[-(Rerr[i][j] - (g0[i][j] * Rtrace) * (1.0 / d)) * (1.0 / tf_factor)
               for j in range(d)] for i in range(d)]

    if is_odd_critical:
        if check_points is None:
            check_points = base.sample(10, seed=0)
        scale = max(curvature_scale(base, check_points), 1.0)
        worst = 0.0
        for p in check_points:
            fv = f0.value(p)
            resid = (m / fv ** 2) * Ferr.value(p) - Rtrace.value(p)
            worst = max(worst, abs(resid))
        if worst > consistency_tol * scale:
            raise ConsistencyError(
                f"consistency residual {worst:.3e} at order n = {n} exceeds "
                f"{consistency_tol:.1e} x scale {scale:.3e}; the inputs are "
                f"outside the construction's hypotheses or precision degraded")
        omega = -(Ferr / (f0 * f0)) * (1.0 / dm)
        tau = omega * (2.0 * m / dm)
        upsilon = -(f0 * omega) * (1.0 / dm)
        psi = [[psi_tf[i][j] + (g0[i][j] * tau) * (1.0 / d) for j in range(d)]
               for i in range(d)]
        note = (f"critical order n = d+m: consistency residual {worst:.2e}; "
                "complementary combination tr psi / 2 + (m/f) upsilon set to "
                "zero (canonical choice)")
        return OrderStep(n, SymTensor2Field.from_matrix(chart, psi), upsilon,
                         det, False, note)

    if det == 0.0:
        raise OrderError(
            f"trace system determinant vanishes at order n = {n} outside the "
            "critical cases; this indicates an internal bug")

    # 2x2 trace system:  A tau - (B/f) upsilon = r1,  (f/2) tau + C upsilon = r2
    A = n - d - m / 2.0
    B = d * m
    C = d + 2.0 * m - 2.0 * n
    r1 = -(Rtrace * (1.0 / n))
    r2 = -(Ferr / (f0 * float(n)))
    denom = -det
    tau = (r1 * C + ((r2 * B) / f0 if B != 0.0 else zero)) * (1.0 / denom)
    upsilon = (r2 * A - (f0 * r1) * 0.5) * (1.0 / denom)
    psi = [[psi_tf[i][j] + (g0[i][j] * tau) * (1.0 / d) for j in range(d)]
           for i in range(d)]
    return OrderStep(n, SymTensor2Field.from_matrix(chart, psi), upsilon,
                     det, True, None)


def obstruction_constant(dm: int) -> float:
    """(-2)^(dm/2 - 1) (dm/2 - 1)! / (dm - 2)."""
    half = dm // 2
    return (-2.0) ** (half - 1) * math.factorial(half - 1) / (dm - 2)


def _measure_obstruction(base, g_coeffs, f_coeffs, n_c, dm):
    """ObstructionData from the completed-through-n_c coefficients."""
    G, F = _coeffs_to_series(base, g_coeffs[: n_c + 1], f_coeffs[: n_c + 1])
    Rt, Ft = closed_form_residual_series(base, G, F)
    d = base.dim
    c = obstruction_constant(int(dm))
    factor = c * math.factorial(n_c - 1)
    tensor = SymTensor2Field.from_matrix(base.chart, [
        [Rt[i][j].coefficient(n_c - 1) * factor for j in range(d)] for i in range(d)])
    scalar_part = Ft.coefficient(n_c - 1) * factor
    return ObstructionData(tensor, scalar_part, c)


def expand(s: MetricMeasureSpace, order: int, *, check_points=None,
           consistency_tol=1e-8) -> RhoExpansion:
    """Solve the ambient deformation through the requested rho order.

    Spatial jets of g and f to degree 2*order + 2 back the computation;
    the degree bookkeeping is automatic in the lazy field evaluation.
    On the even branch, orders past the critical one require the measured
    obstruction to vanish (continuation), and every canonical choice made
    at a critical order is recorded in `ambiguity_notes`.
    """
    if order < 1:
        raise OrderError("expansion order must be at least 1")
    branch, dm, warnings = classify_branch(s.dim, s.m)
    g_coeffs = [s.g]
    f_coeffs = [s.f]
    notes = []
    obst = None
    n_c = int(dm) // 2 if branch is Branch.EVEN_INTEGER else None

    if check_points is None and s.chart.box is not None:
        check_points = s.sample(10, seed=0)

    for n in range(1, order + 1):
        if branch is Branch.EVEN_INTEGER and n == n_c + 1:
            # continuation past the critical order needs a vanishing obstruction
            if obst is None:
                obst = _measure_obstruction(s, g_coeffs, f_coeffs, n_c, dm)
            scale = max(curvature_scale(s, check_points), 1.0)
            worst = max(abs(v) for p in check_points
                        for v in np.ravel(obst.tensor.matrix_values(p)))
            if worst > OBSTRUCTION_CONTINUATION_TOL * scale:
                raise OrderError(
                    f"order {order} requested past the critical order {n_c}, "
                    f"but the obstruction tensor is nonzero (measured "
                    f"{worst:.3e} > {OBSTRUCTION_CONTINUATION_TOL:.1e} x scale "
                    f"{scale:.3e}); the expansion stops at order {n_c}")
            notes.append(
                f"continuation past the critical order {n_c}: measured "
                f"obstruction {worst:.2e} within tolerance")
        step = solve_order_step(s, g_coeffs, f_coeffs, n, branch=branch, dm=dm,
                                check_points=check_points,
                                consistency_tol=consistency_tol)
        g_coeffs.append(step.psi)
        f_coeffs.append(step.upsilon)
        if step.note:
            notes.append(f"order {n}: {step.note}")

    if branch is Branch.EVEN_INTEGER and obst is None and order >= n_c - 1:
        if order >= n_c:
            obst = _measure_obstruction(s, g_coeffs, f_coeffs, n_c, dm)
        else:
            # run the critical step on a scratch copy to read the obstruction
            scratch_g, scratch_f = list(g_coeffs), list(f_coeffs)
            for n in range(order + 1, n_c + 1):
                step = solve_order_step(s, scratch_g, scratch_f, n,
                                        branch=branch, dm=dm,
                                        check_points=check_points,
                                        consistency_tol=consistency_tol)
                scratch_g.append(step.psi)
                scratch_f.append(step.upsilon)
            obst = _measure_obstruction(s, scratch_g, scratch_f, n_c, dm)

    return RhoExpansion(s, order, g_coeffs, f_coeffs, branch, obst,
                        notes, warnings)


def obstruction(s: MetricMeasureSpace, *, check_points=None) -> ObstructionData:
    """The obstruction tensor and scalar at order (d+m)/2 - 1.

    Defined only when d+m is an even integer >= 4.  The rho-jet
    coefficient is converted to a rho-derivative with the factor
    ((d+m)/2 - 1)!.
    """
    branch, dm, _ = classify_branch(s.dim, s.m)
    if branch is not Branch.EVEN_INTEGER:
        raise OrderError(f"obstruction requires d+m an even integer; d+m = {dm}")
    if int(dm) < 4:
        raise OrderError(f"obstruction requires d+m >= 4; d+m = {dm}")
    n_c = int(dm) // 2
    e = expand(s, n_c, check_points=check_points)
    return e.obstruction


def expansion_series(e: RhoExpansion, trunc: Optional[int] = None):
    return e.series(trunc)
