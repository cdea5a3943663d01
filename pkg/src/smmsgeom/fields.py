"""Coordinate charts and lazily-evaluated scalar/tensor fields.

A ScalarField is a pure evaluation rule (point, degree) -> Jet.  Fields
are closed under arithmetic, the analytic primitives, and partial
differentiation; they are immutable once built, so evaluations are
cached per point (keeping the highest degree computed so far, of which
every lower degree is a prefix).

Structural zeros and constants are folded at construction time: sums
drop zero terms, products with a zero factor collapse, and so on.  This
keeps the expression DAGs produced by the curvature machinery and the
order-by-order solver from accumulating dead branches.

Concurrency contract: fields are immutable after construction and no
operation mutates shared state beyond the per-field memo caches, whose
entries are pure values keyed by evaluation point; concurrent
evaluations at distinct points are race-free.
"""

from __future__ import annotations

import numpy as np

from .jets import Jet

__all__ = [
    "Chart", "ScalarField", "ConstantField", "sample_points",
    "SymTensor2Field", "Riemann4Field", "Cotton3Field",
]

_ANALYTIC = ("exp", "log", "sin", "cos", "sinh", "cosh", "sqrt")


class Chart:
    """A named coordinate chart, optionally with a sampling box."""

    __slots__ = ("names", "dim", "box")

    def __init__(self, names, box=None):
        self.names = tuple(names)
        self.dim = len(self.names)
        if box is not None:
            box = tuple((float(a), float(b)) for a, b in box)
            if len(box) != self.dim:
                raise ValueError("box must give one interval per coordinate")
        self.box = box

    def coordinate(self, i: int) -> "ScalarField":
        if not 0 <= i < self.dim:
            raise IndexError(f"coordinate index {i} out of range")
        return CoordinateField(self, i)

    def coordinates(self):
        return [self.coordinate(i) for i in range(self.dim)]

    def constant(self, value: float) -> "ScalarField":
        return ConstantField(self, float(value))

    def zero(self) -> "ScalarField":
        return ConstantField(self, 0.0)

    def __eq__(self, other):
        return isinstance(other, Chart) and self.names == other.names

    def __hash__(self):
        return hash(self.names)

    def __repr__(self):
        return f"Chart{self.names}"


def sample_points(chart: Chart, count: int, seed: int):
    """Seeded uniform sample from the chart's declared box."""
    if chart.box is None:
        raise ValueError("chart has no sampling box declared")
    rng = np.random.default_rng(seed)
    lo = np.array([a for a, _ in chart.box])
    hi = np.array([b for _, b in chart.box])
    pts = rng.uniform(lo, hi, size=(count, chart.dim))
    return [tuple(float(v) for v in p) for p in pts]


class ScalarField:
    """Base class: a pure map (point, degree) -> Jet on a fixed chart."""

    __slots__ = ("chart", "_cache", "_partials")

    def __init__(self, chart: Chart):
        self.chart = chart
        self._cache = {}
        self._partials = {}

    # -- evaluation -----------------------------------------------------

    def jet(self, point, degree: int) -> Jet:
        point = tuple(point)
        if len(point) != self.chart.dim:
            raise ValueError(f"point has {len(point)} entries for chart {self.chart}")
        hit = self._cache.get(point)
        if hit is not None and hit.degree >= degree:
            return hit.truncated(degree)
        out = self._jet(point, degree)
        self._cache[point] = out
        return out

    def value(self, point) -> float:
        return self.jet(point, 0).value

    def _jet(self, point, degree: int) -> Jet:
        raise NotImplementedError

    # -- structure ------------------------------------------------------

    @property
    def is_zero(self) -> bool:
        return False

    def const_value(self):
        """Constant value if this field is structurally constant, else None."""
        return None

    # -- arithmetic with folding ----------------------------------------

    def _coerce(self, other):
        if isinstance(other, (int, float)):
            return ConstantField(self.chart, float(other))
        if isinstance(other, ScalarField):
            if other.chart != self.chart:
                raise ValueError("fields live on different charts")
            return other
        return None

    def __add__(self, other):
        other = self._coerce(other)
        if other is None:
            return NotImplemented
        if self.is_zero:
            return other
        if other.is_zero:
            return self
        a, b = self.const_value(), other.const_value()
        if a is not None and b is not None:
            return ConstantField(self.chart, a + b)
        return SumField(self, other)

    __radd__ = __add__

    def __neg__(self):
        c = self.const_value()
        if c is not None:
            return ConstantField(self.chart, -c)
        return ScaledField(self, -1.0)

    def __sub__(self, other):
        other = self._coerce(other)
        if other is None:
            return NotImplemented
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        other = self._coerce(other)
        if other is None:
            return NotImplemented
        if self.is_zero or other.is_zero:
            return ConstantField(self.chart, 0.0)
        a, b = self.const_value(), other.const_value()
        if a is not None and b is not None:
            return ConstantField(self.chart, a * b)
        if a is not None:
            return other if a == 1.0 else ScaledField(other, a)
        if b is not None:
            return self if b == 1.0 else ScaledField(self, b)
        return ProductField(self, other)

    __rmul__ = __mul__

    def __truediv__(self, other):
        other = self._coerce(other)
        if other is None:
            return NotImplemented
        b = other.const_value()
        if b is not None:
            return self * (1.0 / b)
        if self.is_zero:
            return self
        return QuotientField(self, other)

    def __rtruediv__(self, other):
        return ConstantField(self.chart, float(other)) / self

    def __pow__(self, k: int):
        if not isinstance(k, int):
            raise TypeError("field exponents must be integers")
        c = self.const_value()
        if c is not None:
            return ConstantField(self.chart, c ** k)
        return PowerField(self, k)

    # -- analytic primitives ---------------------------------------------

    def apply(self, name: str) -> "ScalarField":
        if name not in _ANALYTIC:
            raise ValueError(f"unknown analytic primitive {name!r}")
        c = self.const_value()
        if c is not None:
            return ConstantField(self.chart, float(getattr(np, name)(c)))
        return ApplyField(self, name)

    def exp(self):
        return self.apply("exp")

    def log(self):
        return self.apply("log")

    def sqrt(self):
        return self.apply("sqrt")

    # -- differentiation ---------------------------------------------------

    def partial(self, axis: int) -> "ScalarField":
        if not 0 <= axis < self.chart.dim:
            raise IndexError(f"axis {axis} out of range for chart {self.chart}")
        hit = self._partials.get(axis)
        if hit is None:
            hit = self._partial(axis)
            self._partials[axis] = hit
        return hit

    def _partial(self, axis: int) -> "ScalarField":
        return PartialField(self, axis)

    def gradient(self):
        return [self.partial(i) for i in range(self.chart.dim)]


class ConstantField(ScalarField):
    __slots__ = ("val",)

    def __init__(self, chart, val: float):
        super().__init__(chart)
        self.val = float(val)

    def _jet(self, point, degree):
        return Jet.constant(self.val, self.chart.dim, degree)

    @property
    def is_zero(self):
        return self.val == 0.0

    def const_value(self):
        return self.val

    def _partial(self, axis):
        return ConstantField(self.chart, 0.0)


class CoordinateField(ScalarField):
    __slots__ = ("axis",)

    def __init__(self, chart, axis: int):
        super().__init__(chart)
        self.axis = axis

    def _jet(self, point, degree):
        return Jet.variable(point[self.axis], self.axis, self.chart.dim, degree)

    def _partial(self, axis):
        return ConstantField(self.chart, 1.0 if axis == self.axis else 0.0)


class SumField(ScalarField):
    __slots__ = ("a", "b")

    def __init__(self, a, b):
        super().__init__(a.chart)
        self.a, self.b = a, b

    def _jet(self, point, degree):
        return self.a.jet(point, degree) + self.b.jet(point, degree)


class ScaledField(ScalarField):
    __slots__ = ("a", "factor")

    def __init__(self, a, factor: float):
        super().__init__(a.chart)
        self.a, self.factor = a, factor

    def _jet(self, point, degree):
        return self.a.jet(point, degree) * self.factor


class ProductField(ScalarField):
    __slots__ = ("a", "b")

    def __init__(self, a, b):
        super().__init__(a.chart)
        self.a, self.b = a, b

    def _jet(self, point, degree):
        return self.a.jet(point, degree) * self.b.jet(point, degree)


class QuotientField(ScalarField):
    __slots__ = ("a", "b")

    def __init__(self, a, b):
        super().__init__(a.chart)
        self.a, self.b = a, b

    def _jet(self, point, degree):
        return self.a.jet(point, degree) / self.b.jet(point, degree)


class PowerField(ScalarField):
    __slots__ = ("a", "k")

    def __init__(self, a, k: int):
        super().__init__(a.chart)
        self.a, self.k = a, k

    def _jet(self, point, degree):
        return self.a.jet(point, degree) ** self.k


class ApplyField(ScalarField):
    __slots__ = ("a", "fn")

    def __init__(self, a, fn: str):
        super().__init__(a.chart)
        self.a, self.fn = a, fn

    def _jet(self, point, degree):
        return getattr(self.a.jet(point, degree), self.fn)()


class PartialField(ScalarField):
    """d(parent)/dx_axis, realized by shifting the degree-(k+1) jet."""

    __slots__ = ("a", "axis")

    def __init__(self, a, axis: int):
        super().__init__(a.chart)
        self.a, self.axis = a, axis

    def _jet(self, point, degree):
        return self.a.jet(point, degree + 1).partial(self.axis)


# ---------------------------------------------------------------------------
# Tensor-valued fields.  Components are ScalarFields; symmetric storage
# keeps one representative per orbit of the symmetry group.
# ---------------------------------------------------------------------------


class SymTensor2Field:
    """Symmetric rank-2 tensor field; stores components with i <= j."""

    __slots__ = ("chart", "comps")

    def __init__(self, chart: Chart, comps):
        self.chart = chart
        self.comps = {}
        for (i, j), field in comps.items():
            key = (min(i, j), max(i, j))
            if key in self.comps and self.comps[key] is not field:
                raise ValueError(f"conflicting components for {key}")
            self.comps[key] = field
        d = chart.dim
        for i in range(d):
            for j in range(i, d):
                self.comps.setdefault((i, j), ConstantField(chart, 0.0))

    @classmethod
    def from_matrix(cls, chart, matrix):
        return cls(chart, {(i, j): matrix[i][j]
                           for i in range(chart.dim) for j in range(i, chart.dim)})

    @classmethod
    def zero(cls, chart):
        return cls(chart, {})

    def comp(self, i: int, j: int) -> ScalarField:
        return self.comps[(min(i, j), max(i, j))]

    def as_matrix(self):
        d = self.chart.dim
        return [[self.comp(i, j) for j in range(d)] for i in range(d)]

    def matrix_values(self, point):
        d = self.chart.dim
        out = np.empty((d, d))
        for i in range(d):
            for j in range(i, d):
                out[i, j] = out[j, i] = self.comp(i, j).value(point)
        return out

    def __add__(self, other):
        return SymTensor2Field(self.chart, {
            k: f + other.comps[k] for k, f in self.comps.items()})

    def __sub__(self, other):
        return SymTensor2Field(self.chart, {
            k: f - other.comps[k] for k, f in self.comps.items()})

    def scale(self, factor):
        return SymTensor2Field(self.chart, {
            k: f * factor for k, f in self.comps.items()})


def _riemann_canonical(i, j, k, l):
    """Canonical key and sign under the pair (anti)symmetries; None if forced zero."""
    if i == j or k == l:
        return None, 0.0
    sign = 1.0
    if i > j:
        i, j, sign = j, i, -sign
    if k > l:
        k, l, sign = l, k, -sign
    if (i, j) > (k, l):
        i, j, k, l = k, l, i, j
    return (i, j, k, l), sign


class Riemann4Field:
    """Rank-4 field with the algebraic pair symmetries of a curvature tensor."""

    __slots__ = ("chart", "comps")

    def __init__(self, chart: Chart, comps):
        self.chart = chart
        self.comps = {}
        for idx, field in comps.items():
            key, sign = _riemann_canonical(*idx)
            if key is None:
                continue
            self.comps[key] = field if sign > 0 else -field

    def comp(self, i, j, k, l) -> ScalarField:
        key, sign = _riemann_canonical(i, j, k, l)
        if key is None:
            return ConstantField(self.chart, 0.0)
        field = self.comps.get(key)
        if field is None:
            return ConstantField(self.chart, 0.0)
        return field if sign > 0 else -field

    def values(self, point):
        d = self.chart.dim
        out = np.zeros((d, d, d, d))
        for (i, j, k, l), field in self.comps.items():
            v = field.value(point)
            out[i, j, k, l] = out[k, l, i, j] = v
            out[j, i, k, l] = out[k, l, j, i] = -v
            out[i, j, l, k] = out[l, k, i, j] = -v
            out[j, i, l, k] = out[l, k, j, i] = v
        return out


class Cotton3Field:
    """Rank-3 field antisymmetric in its first two slots."""

    __slots__ = ("chart", "comps")

    def __init__(self, chart: Chart, comps):
        self.chart = chart
        self.comps = {}
        for (i, j, k), field in comps.items():
            if i == j:
                continue
            if i > j:
                i, j, field = j, i, -field
            self.comps[(i, j, k)] = field

    def comp(self, i, j, k) -> ScalarField:
        if i == j:
            return ConstantField(self.chart, 0.0)
        sign = 1.0
        if i > j:
            i, j, sign = j, i, -sign
        field = self.comps.get((i, j, k))
        if field is None:
            return ConstantField(self.chart, 0.0)
        return field if sign > 0 else -field

    def values(self, point):
        d = self.chart.dim
        out = np.zeros((d, d, d))
        for (i, j, k), field in self.comps.items():
            v = field.value(point)
            out[i, j, k] = v
            out[j, i, k] = -v
        return out
