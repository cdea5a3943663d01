"""Truncated multivariate Taylor-coefficient ("jet") arithmetic at a point.

A jet of degree D in n variables stores the coefficients

    coeff(alpha) = d^alpha F(p) / alpha!          for all |alpha| <= D,

densely, in graded lexicographic order (total degree first, then
lexicographic on the exponent tuple).  Grading first means a degree-D'
jet is a prefix slice of a degree-D jet for D' <= D, which is what makes
lazy evaluation caches cheap.

Arithmetic follows the represented functions: sums, truncated Cauchy
products, division by jets with nonzero constant term, composition with
univariate analytic functions, and partial differentiation (which lowers
the degree by one).  Convolution sums always run in ascending graded-lex
order over the left factor so repeated runs are bit-identical.
"""

from __future__ import annotations

from functools import lru_cache
import math

import numpy as np

__all__ = ["Jet", "JetShapeError", "JetDivisionError", "jet_count"]

# Divisor jets whose constant term is at or below PIVOT_REL times the
# magnitude of their largest coefficient (floored at 1) are rejected.
PIVOT_REL = 1e-10


class JetShapeError(ValueError):
    """Operands disagree in variable count or truncation degree."""


class JetDivisionError(ZeroDivisionError):
    """Divisor jet has a (near-)zero constant term."""


def jet_count(nvars: int, degree: int) -> int:
    """Number of multi-indices alpha with |alpha| <= degree."""
    return math.comb(nvars + degree, degree)


@lru_cache(maxsize=None)
def _exponent_table(nvars: int, degree: int):
    """Exponent tuples in graded-lex order, and the tuple -> position map."""
    exps = []
    for total in range(degree + 1):
        level = []

        def fill(prefix, remaining, slots):
            if slots == 1:
                level.append(prefix + (remaining,))
                return
            for k in range(remaining + 1):
                fill(prefix + (k,), remaining - k, slots - 1)

        fill((), total, nvars)
        level.sort()
        exps.extend(level)
    position = {e: i for i, e in enumerate(exps)}
    return tuple(exps), position


@lru_cache(maxsize=None)
def _product_table(nvars: int, degree: int):
    """Index triples (I, J, K) with exps[K] = exps[I] + exps[J].

    Ordered ascending over the left factor index, then the right, which
    fixes the summation order of every convolution.
    """
    exps, pos = _exponent_table(nvars, degree)
    ii, jj, kk = [], [], []
    for i, a in enumerate(exps):
        da = sum(a)
        for j, b in enumerate(exps):
            if da + sum(b) > degree:
                continue
            ii.append(i)
            jj.append(j)
            kk.append(pos[tuple(x + y for x, y in zip(a, b))])
    return (np.asarray(ii, dtype=np.intp),
            np.asarray(jj, dtype=np.intp),
            np.asarray(kk, dtype=np.intp))


@lru_cache(maxsize=None)
def _division_tables(nvars: int, degree: int):
    """Per total-degree level t: index triples (I, J, K) with
    exps[K] = exps[I] + exps[J], |exps[K]| = t and I != 0.

    Drives the graded long-division recursion
        c[K] = (a[K] - sum b[I] c[J]) / b[0],
    where every J referenced at level t lies in a lower level.
    """
    exps, _ = _exponent_table(nvars, degree)
    ii, jj, kk = _product_table(nvars, degree)
    levels = []
    deg_k = np.array([sum(exps[k]) for k in kk])
    for t in range(degree + 1):
        sel = (deg_k == t) & (ii != 0)
        levels.append((ii[sel], jj[sel], kk[sel]))
    return levels


@lru_cache(maxsize=None)
def _level_slices(nvars: int, degree: int):
    """Coefficient-vector slice [start, stop) of each total-degree level."""
    out = []
    for t in range(degree + 1):
        lo = 0 if t == 0 else jet_count(nvars, t - 1)
        out.append((lo, jet_count(nvars, t)))
    return tuple(out)


@lru_cache(maxsize=None)
def _promotion_table(nvars: int, extra: int, degree: int):
    """Positions in the (nvars+extra)-variable table of the multi-indices
    supported on the first nvars variables, in source order."""
    exps, _ = _exponent_table(nvars, degree)
    _, pos_out = _exponent_table(nvars + extra, degree)
    pad = (0,) * extra
    return np.asarray([pos_out[a + pad] for a in exps], dtype=np.intp)


@lru_cache(maxsize=None)
def _partial_table(nvars: int, degree: int, axis: int):
    """Source positions and multipliers for d/dx_axis at this degree.

    Output position of alpha holds (alpha_axis + 1) * coeff(alpha + e_axis),
    read off the degree-`degree` table; the result has degree-1.
    """
    exps_out, _ = _exponent_table(nvars, degree - 1) if degree > 0 else ((), {})
    _, pos_in = _exponent_table(nvars, degree)
    src = np.empty(len(exps_out), dtype=np.intp)
    mult = np.empty(len(exps_out), dtype=np.float64)
    for k, a in enumerate(exps_out):
        shifted = tuple(x + (1 if t == axis else 0) for t, x in enumerate(a))
        src[k] = pos_in[shifted]
        mult[k] = a[axis] + 1
    return src, mult


class Jet:
    """Dense truncated Taylor coefficients of a scalar quantity at a point."""

    __slots__ = ("nvars", "degree", "coeffs")

    def __init__(self, nvars: int, degree: int, coeffs=None):
        self.nvars = nvars
        self.degree = degree
        n = jet_count(nvars, degree)
        if coeffs is None:
            self.coeffs = np.zeros(n)
        else:
            arr = np.asarray(coeffs, dtype=np.float64)
            if arr.shape != (n,):
                raise JetShapeError(
                    f"expected {n} coefficients for nvars={nvars}, "
                    f"degree={degree}, got {arr.shape}")
            self.coeffs = arr

    # -- constructors -------------------------------------------------

    @classmethod
    def constant(cls, value: float, nvars: int, degree: int) -> "Jet":
        out = cls(nvars, degree)
        out.coeffs[0] = value
        return out

    @classmethod
    def variable(cls, value: float, axis: int, nvars: int, degree: int) -> "Jet":
        """Jet of the coordinate function x_axis at x_axis = value."""
        out = cls(nvars, degree)
        out.coeffs[0] = value
        if degree >= 1:
            _, pos = _exponent_table(nvars, degree)
            e = tuple(1 if t == axis else 0 for t in range(nvars))
            out.coeffs[pos[e]] = 1.0
        return out

    # -- basic access -------------------------------------------------

    @property
    def value(self) -> float:
        return float(self.coeffs[0])

    def coefficient(self, alpha) -> float:
        """Taylor coefficient of the multi-index alpha."""
        _, pos = _exponent_table(self.nvars, self.degree)
        return float(self.coeffs[pos[tuple(alpha)]])

    def derivative(self, alpha) -> float:
        """Mixed partial d^alpha F(p) (the coefficient times alpha!)."""
        fact = 1.0
        for a in alpha:
            fact *= math.factorial(a)
        return self.coefficient(alpha) * fact

    def truncated(self, degree: int) -> "Jet":
        if degree > self.degree:
            raise JetShapeError(f"cannot extend degree {self.degree} to {degree}")
        if degree == self.degree:
            return self
        return Jet(self.nvars, degree, self.coeffs[: jet_count(self.nvars, degree)].copy())

    def _check(self, other: "Jet"):
        if self.nvars != other.nvars or self.degree != other.degree:
            raise JetShapeError(
                f"jet shape mismatch: ({self.nvars},{self.degree}) vs "
                f"({other.nvars},{other.degree})")

    # -- ring operations ----------------------------------------------

    def __add__(self, other):
        if isinstance(other, (int, float)):
            out = Jet(self.nvars, self.degree, self.coeffs.copy())
            out.coeffs[0] += other
            return out
        self._check(other)
        return Jet(self.nvars, self.degree, self.coeffs + other.coeffs)

    __radd__ = __add__

    def __neg__(self):
        return Jet(self.nvars, self.degree, -self.coeffs)

    def __sub__(self, other):
        return self + (-other if isinstance(other, Jet) else -float(other))

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        if isinstance(other, (int, float)):
            return Jet(self.nvars, self.degree, self.coeffs * float(other))
        self._check(other)
        ii, jj, kk = _product_table(self.nvars, self.degree)
        out = np.zeros_like(self.coeffs)
        np.add.at(out, kk, self.coeffs[ii] * other.coeffs[jj])
        return Jet(self.nvars, self.degree, out)

    __rmul__ = __mul__

    def _divided_by(self, other: "Jet") -> "Jet":
        """Graded long division: level t of the quotient is solved from the
        convolution contributions of strictly lower levels, which keeps the
        noise floor at machine precision even for high degrees."""
        b = other.coeffs
        b0 = b[0]
        floor = PIVOT_REL * max(1.0, float(np.max(np.abs(b))))
        if abs(b0) <= floor:
            raise JetDivisionError(
                f"constant term {b0:.3e} at or below pivot floor {floor:.3e}")
        c = np.zeros_like(self.coeffs)
        acc = np.zeros_like(self.coeffs)
        slices = _level_slices(self.nvars, self.degree)
        levels = _division_tables(self.nvars, self.degree)
        c[0] = self.coeffs[0] / b0
        for t in range(1, self.degree + 1):
            ii, jj, kk = levels[t]
            if len(kk):
                np.add.at(acc, kk, b[ii] * c[jj])
            lo, hi = slices[t]
            c[lo:hi] = (self.coeffs[lo:hi] - acc[lo:hi]) / b0
        return Jet(self.nvars, self.degree, c)

    def reciprocal(self) -> "Jet":
        return Jet.constant(1.0, self.nvars, self.degree)._divided_by(self)

    def __truediv__(self, other):
        if isinstance(other, (int, float)):
            return Jet(self.nvars, self.degree, self.coeffs / float(other))
        self._check(other)
        return self._divided_by(other)

    def __rtruediv__(self, other):
        return self.reciprocal() * float(other)

    def __pow__(self, k: int):
        if not isinstance(k, int):
            raise TypeError("jet exponents must be integers")
        if k < 0:
            return self.reciprocal() ** (-k)
        out = Jet.constant(1.0, self.nvars, self.degree)
        base = self
        while k:
            if k & 1:
                out = out * base
            base = base * base if k > 1 else base
            k >>= 1
        return out

    # -- composition with univariate analytic functions ----------------

    def compose(self, derivs) -> "Jet":
        """Jet of h(F) from the derivatives h^(k)(F(p)), k = 0..degree."""
        shifted = Jet(self.nvars, self.degree, self.coeffs.copy())
        shifted.coeffs[0] = 0.0
        acc = Jet.constant(float(derivs[0]), self.nvars, self.degree)
        power = Jet.constant(1.0, self.nvars, self.degree)
        fact = 1.0
        for k in range(1, self.degree + 1):
            power = power * shifted
            fact *= k
            acc = acc + power * (float(derivs[k]) / fact)
        return acc

    def exp(self):
        e = math.exp(self.value)
        return self.compose([e] * (self.degree + 1))

    def log(self):
        x = self.value
        if x <= 0.0:
            raise JetDivisionError(f"log of non-positive constant term {x:.3e}")
        derivs = [math.log(x)]
        for k in range(1, self.degree + 1):
            derivs.append(((-1.0) ** (k - 1)) * math.factorial(k - 1) / x ** k)
        return self.compose(derivs)

    def sqrt(self):
        x = self.value
        if x <= 0.0:
            raise JetDivisionError(f"sqrt of non-positive constant term {x:.3e}")
        derivs = [math.sqrt(x)]
        c = 0.5
        for k in range(1, self.degree + 1):
            derivs.append(c * x ** (0.5 - k))
            c *= 0.5 - k
        return self.compose(derivs)

    def sin(self):
        s, c = math.sin(self.value), math.cos(self.value)
        cycle = [s, c, -s, -c]
        return self.compose([cycle[k % 4] for k in range(self.degree + 1)])

    def cos(self):
        s, c = math.sin(self.value), math.cos(self.value)
        cycle = [c, -s, -c, s]
        return self.compose([cycle[k % 4] for k in range(self.degree + 1)])

    def sinh(self):
        s, c = math.sinh(self.value), math.cosh(self.value)
        return self.compose([s if k % 2 == 0 else c for k in range(self.degree + 1)])

    def cosh(self):
        s, c = math.sinh(self.value), math.cosh(self.value)
        return self.compose([c if k % 2 == 0 else s for k in range(self.degree + 1)])

    def promote(self, extra: int) -> "Jet":
        """The same function viewed on a chart with `extra` appended
        variables it does not depend on."""
        if extra == 0:
            return self
        out = Jet(self.nvars + extra, self.degree)
        out.coeffs[_promotion_table(self.nvars, extra, self.degree)] = self.coeffs
        return out

    # -- differentiation ------------------------------------------------

    def partial(self, axis: int) -> "Jet":
        """Jet of dF/dx_axis, one degree lower."""
        if not 0 <= axis < self.nvars:
            raise IndexError(f"axis {axis} out of range for {self.nvars} variables")
        if self.degree == 0:
            raise JetShapeError("cannot differentiate a degree-0 jet")
        src, mult = _partial_table(self.nvars, self.degree, axis)
        return Jet(self.nvars, self.degree - 1, self.coeffs[src] * mult)

    def __repr__(self):
        return f"Jet(nvars={self.nvars}, degree={self.degree}, value={self.value:.6g})"
