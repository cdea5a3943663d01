"""Truncated power/Laurent series whose coefficients live in any ring.

Coefficients may be floats or ScalarFields (anything closed under
+, -, *, / and scaling).  A series stores

    sum_{p = shift}^{trunc} coeffs[p - shift] * X**p  +  O(X**(trunc+1)),

with `trunc = None` meaning the series is exact (all omitted
coefficients are identically zero).  Truncation orders propagate
conservatively through arithmetic, and `coefficient(p)` refuses to
answer past the truncation order, which keeps order-of-vanishing
claims honest.

The expansion coefficient fields produced by the ambient recursion ride
through this class in the deformation variable, and the conformally
compact structures reuse it as Laurent series in the boundary defining
coordinate (negative `shift` clears the poles algebraically).
"""

from __future__ import annotations

__all__ = ["Series", "SeriesTruncationError"]


class SeriesTruncationError(ValueError):
    """A coefficient beyond the known truncation order was requested."""


def _is_zero_elem(c) -> bool:
    if isinstance(c, (int, float)):
        return c == 0.0
    is_zero = getattr(c, "is_zero", None)
    return bool(is_zero) if is_zero is not None else False


def _min_trunc(a, b):
    if a is None:
        return b
    if b is None:
        return a
    return min(a, b)


class Series:
    __slots__ = ("shift", "coeffs", "trunc", "zero")

    def __init__(self, coeffs, shift: int = 0, trunc=None, zero=0.0):
        coeffs = list(coeffs)
        if trunc is not None:
            want = trunc - shift + 1
            if want < 0:
                coeffs, shift = [], trunc + 1
                want = 0
            if len(coeffs) > want:
                raise ValueError("stored coefficients exceed truncation order")
            coeffs = coeffs + [zero] * (want - len(coeffs))
        self.shift = shift
        self.coeffs = coeffs
        self.trunc = trunc
        self.zero = zero

    # -- constructors ---------------------------------------------------

    @classmethod
    def constant(cls, value, zero=0.0, trunc=None) -> "Series":
        return cls([value], 0, trunc, zero)

    @classmethod
    def monomial(cls, value, power: int, zero=0.0, trunc=None) -> "Series":
        return cls([value], power, trunc, zero)

    @classmethod
    def zero_series(cls, zero=0.0, trunc=None) -> "Series":
        return cls([], 1 if trunc is None else trunc + 1, trunc, zero)

    # -- access -----------------------------------------------------------

    @property
    def max_stored(self) -> int:
        return self.shift + len(self.coeffs) - 1

    def coefficient(self, power: int):
        """Coefficient of X**power; errors past the truncation order."""
        if self.trunc is not None and power > self.trunc:
            raise SeriesTruncationError(
                f"coefficient {power} beyond truncation order {self.trunc}")
        k = power - self.shift
        if 0 <= k < len(self.coeffs):
            return self.coeffs[k]
        return self.zero

    def coefficients(self, lo: int, hi: int):
        return [self.coefficient(p) for p in range(lo, hi + 1)]

    def is_structurally_zero(self) -> bool:
        return all(_is_zero_elem(c) for c in self.coeffs)

    @property
    def is_zero(self) -> bool:
        """True only for the exact zero series.

        A truncated series with all stored coefficients zero is O(X^(t+1)),
        not zero, and must keep participating in truncation bookkeeping.
        """
        return self.trunc is None and self.is_structurally_zero()

    def truncated(self, trunc: int) -> "Series":
        if self.trunc is not None and trunc > self.trunc:
            raise SeriesTruncationError(
                f"cannot extend truncation {self.trunc} to {trunc}")
        keep = [c for p, c in self._items() if p <= trunc]
        return Series(keep, self.shift, trunc, self.zero)

    def _items(self):
        return ((self.shift + k, c) for k, c in enumerate(self.coeffs))

    # -- arithmetic ---------------------------------------------------------

    def _as_series(self, other):
        if isinstance(other, Series):
            return other
        return Series.constant(other, self.zero)

    def __add__(self, other):
        other = self._as_series(other)
        trunc = _min_trunc(self.trunc, other.trunc)
        lo = min(self.shift, other.shift)
        hi = max(self.max_stored, other.max_stored)
        if trunc is not None:
            hi = min(hi, trunc)
        out = []
        for p in range(lo, hi + 1):
            ka, kb = p - self.shift, p - other.shift
            a = self.coeffs[ka] if 0 <= ka < len(self.coeffs) else None
            b = other.coeffs[kb] if 0 <= kb < len(other.coeffs) else None
            if a is None and b is None:
                out.append(self.zero)
            elif a is None:
                out.append(b)
            elif b is None:
                out.append(a)
            else:
                out.append(a + b)
        return Series(out, lo, trunc, self.zero)

    __radd__ = __add__

    def __neg__(self):
        return Series([-c for c in self.coeffs], self.shift, self.trunc, self.zero)

    def __sub__(self, other):
        return self + (-self._as_series(other))

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        if not isinstance(other, Series):
            # coefficient-wise scaling by a ring element or number
            return Series([c * other if not _is_zero_elem(c) else c
                           for c in self.coeffs], self.shift, self.trunc, self.zero)
        shift = self.shift + other.shift
        trunc = None
        if self.trunc is not None:
            trunc = self.trunc + other.shift
        if other.trunc is not None:
            t2 = other.trunc + self.shift
            trunc = t2 if trunc is None else min(trunc, t2)
        n = len(self.coeffs) + len(other.coeffs) - 1
        if n <= 0:
            return Series.zero_series(self.zero, trunc)
        if trunc is not None:
            n = min(n, trunc - shift + 1)
        acc = [None] * n
        for i, a in enumerate(self.coeffs):
            if _is_zero_elem(a):
                continue
            for j, b in enumerate(other.coeffs):
                k = i + j
                if k >= n:
                    break
                if _is_zero_elem(b):
                    continue
                term = a * b
                acc[k] = term if acc[k] is None else acc[k] + term
        out = [self.zero if c is None else c for c in acc]
        return Series(out, shift, trunc, self.zero)

    __rmul__ = __mul__

    def __truediv__(self, other):
        if not isinstance(other, Series):
            return Series([c / other for c in self.coeffs],
                          self.shift, self.trunc, self.zero)
        v = 0
        while v < len(other.coeffs) and _is_zero_elem(other.coeffs[v]):
            v += 1
        if v == len(other.coeffs):
            raise ZeroDivisionError("division by a structurally zero series")
        bshift = other.shift + v
        bcoeffs = other.coeffs[v:]
        shift = self.shift - bshift
        trunc = None
        if self.trunc is not None:
            trunc = self.trunc - bshift
        if other.trunc is not None:
            t2 = other.trunc + self.shift - 2 * bshift
            trunc = t2 if trunc is None else min(trunc, t2)
        if trunc is not None:
            n = trunc - shift + 1
        elif len(bcoeffs) == 1:
            n = len(self.coeffs)
        else:
            # an exact quotient by a non-monomial is an infinite series;
            # callers must truncate one operand first
            raise SeriesTruncationError(
                "exact division by a non-monomial series is not representable")
        if n <= 0:
            return Series.zero_series(self.zero, trunc)
        lead = bcoeffs[0]
        out = []
        for k in range(n):
            ka = k
            a_k = self.coeffs[ka] if 0 <= ka < len(self.coeffs) else self.zero
            acc = a_k
            for j in range(max(0, k - len(bcoeffs) + 1), k):
                if _is_zero_elem(out[j]) or _is_zero_elem(bcoeffs[k - j]):
                    continue
                acc = acc - out[j] * bcoeffs[k - j]
            out.append(acc / lead)
        return Series(out, shift, trunc, self.zero)

    def __rtruediv__(self, other):
        return Series.constant(other, self.zero) / self

    def __pow__(self, k: int):
        if not isinstance(k, int) or k < 0:
            raise TypeError("series exponents must be nonnegative integers")
        out = Series.constant(1.0 if isinstance(self.zero, float) else self.zero + 1.0,
                              self.zero)
        for _ in range(k):
            out = out * self
        return out

    # -- calculus ------------------------------------------------------------

    def deriv(self) -> "Series":
        """Derivative with respect to the series variable."""
        out = []
        for p, c in self._items():
            if p == 0:
                continue
            out.append(c * float(p))
        lo = self.shift - 1 if self.shift != 0 else self.shift
        # powers present after differentiation: p-1 for stored p != 0
        powers = [p - 1 for p, _ in self._items() if p != 0]
        if not powers:
            t = None if self.trunc is None else self.trunc - 1
            return Series.zero_series(self.zero, t)
        lo = min(powers)
        trunc = None if self.trunc is None else self.trunc - 1
        coeffs = []
        idx = {p: c for p, c in zip(powers, out)}
        hi = max(powers)
        if trunc is not None:
            hi = min(hi, trunc)
        for p in range(lo, hi + 1):
            coeffs.append(idx.get(p, self.zero))
        return Series(coeffs, lo, trunc, self.zero)

    def map(self, fn) -> "Series":
        """Apply fn to every coefficient (e.g. a spatial partial derivative)."""
        return Series([fn(c) for c in self.coeffs], self.shift, self.trunc, self.zero)

    def eval_at(self, x: float, value_fn=None):
        """Numeric value at X = x, evaluating coefficients via value_fn."""
        total = 0.0
        for p, c in self._items():
            v = c if isinstance(c, (int, float)) else value_fn(c)
            total += v * x ** p
        return total

    def __repr__(self):
        t = "exact" if self.trunc is None else f"O(X^{self.trunc + 1})"
        return f"Series(shift={self.shift}, len={len(self.coeffs)}, {t})"
