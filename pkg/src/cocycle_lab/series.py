"""Truncated power series with scalar or square-matrix coefficients.

A series is a center plus coefficients ``c_0 ... c_N`` of the expansion in
``(z - center)``.  Arithmetic truncates to the lower operand order; matrix
coefficients multiply in the order written (nothing here assumes
commutativity except the exponential, see ``series_exp``).
"""

from __future__ import annotations

import numpy as np

from .errors import (
    CenterMismatchError,
    NonzeroConstantTermError,
    NotInvertibleError,
)

_CENTER_ATOL = 1e-12


def _check_centers(a, b):
    if abs(a.center - b.center) > _CENTER_ATOL:
        raise CenterMismatchError(f"centers differ: {a.center} vs {b.center}")


def _coeff_mul(x, y):
    # matrix @ matrix keeps the written order; scalar factors broadcast
    if getattr(x, "ndim", 0) == 2 and getattr(y, "ndim", 0) == 2:
        return x @ y
    return x * y


class _Series:
    """Shared arithmetic for scalar- and matrix-coefficient series."""

    def __init__(self, center, coeffs):
        self.center = complex(center)
        self.coeffs = np.asarray(coeffs, dtype=complex)
        if not np.all(np.isfinite(self.coeffs.view(float))):
            raise ValueError("series has non-finite coefficients")

    @property
    def order(self) -> int:
        return self.coeffs.shape[0] - 1

    def _wrap(self, coeffs):
        return type(self)(self.center, coeffs)

    def truncate(self, order: int):
        if order >= self.order:
            return self
        return self._wrap(self.coeffs[: order + 1])

    def __add__(self, other):
        if isinstance(other, _Series):
            _check_centers(self, other)
            n = min(self.order, other.order) + 1
            return self._wrap(self.coeffs[:n] + other.coeffs[:n])
        out = self.coeffs.copy()
        out[0] = out[0] + other
        return self._wrap(out)

    __radd__ = __add__

    def __neg__(self):
        return self._wrap(-self.coeffs)

    def __sub__(self, other):
        return self + (-other if isinstance(other, _Series) else -1 * other)

    def __mul__(self, other):
        if isinstance(other, _Series):
            return _cauchy(self, other)
        return self._wrap(self.coeffs * other)

    def __rmul__(self, other):
        # scalar prefactor only; series * series goes through __mul__
        return self._wrap(other * self.coeffs)

    def differentiate(self):
        if self.order == 0:
            return self._wrap(np.zeros_like(self.coeffs))
        powers = np.arange(1, self.order + 1)
        shape = (-1,) + (1,) * (self.coeffs.ndim - 1)
        return self._wrap(self.coeffs[1:] * powers.reshape(shape))


class ScalarSeries(_Series):
    """Truncated Taylor series with complex coefficients."""

    def __init__(self, center, coeffs):
        super().__init__(center, coeffs)
        if self.coeffs.ndim != 1:
            raise ValueError("scalar series needs a flat coefficient list")

    @classmethod
    def identity(cls, order: int, center=0.0) -> "ScalarSeries":
        """The identity map z -> z expanded about ``center``."""
        c = np.zeros(order + 1, dtype=complex)
        c[0] = center
        if order >= 1:
            c[1] = 1.0
        return cls(center, c)

    def evaluate(self, z):
        """Horner evaluation; accepts a point or an ndarray of points."""
        u = np.asarray(z, dtype=complex) - self.center
        acc = np.full_like(u, self.coeffs[-1])
        for k in range(self.order - 1, -1, -1):
            acc = acc * u + self.coeffs[k]
        return complex(acc) if acc.shape == () else acc

    __call__ = evaluate


class MatrixSeries(_Series):
    """Truncated Taylor series with n-by-n complex matrix coefficients."""

    def __init__(self, center, coeffs):
        super().__init__(center, coeffs)
        if self.coeffs.ndim != 3 or self.coeffs.shape[1] != self.coeffs.shape[2]:
            raise ValueError("matrix series needs coefficients of shape (N+1, n, n)")

    @property
    def dim(self) -> int:
        return self.coeffs.shape[1]

    @classmethod
    def constant(cls, matrix, order: int, center=0.0) -> "MatrixSeries":
        m = np.asarray(matrix, dtype=complex)
        c = np.zeros((order + 1,) + m.shape, dtype=complex)
        c[0] = m
        return cls(center, c)

    def evaluate(self, z):
        """Horner evaluation; for an array of m points returns (m, n, n)."""
        u = np.asarray(z, dtype=complex) - self.center
        scalar_in = u.shape == ()
        u = np.atleast_1d(u)[:, None, None]
        acc = np.broadcast_to(self.coeffs[-1], u.shape[:1] + self.coeffs.shape[1:]).copy()
        for k in range(self.order - 1, -1, -1):
            acc = acc * u + self.coeffs[k]
        return acc[0] if scalar_in else acc

    __call__ = evaluate


def _cauchy(a: _Series, b: _Series) -> _Series:
    _check_centers(a, b)
    n = min(a.order, b.order)
    matrix = isinstance(a, MatrixSeries) or isinstance(b, MatrixSeries)
    if matrix:
        dim = a.dim if isinstance(a, MatrixSeries) else b.dim
        out = np.zeros((n + 1, dim, dim), dtype=complex)
    else:
        out = np.zeros(n + 1, dtype=complex)
    for k in range(n + 1):
        acc = out[k]
        for l in range(k + 1):
            acc = acc + _coeff_mul(a.coeffs[l], b.coeffs[k - l])
        out[k] = acc
    cls = MatrixSeries if matrix else ScalarSeries
    return cls(a.center, out)


def compose(outer: _Series, inner: ScalarSeries) -> _Series:
    """Taylor coefficients of outer(inner(.)) about inner's center.

    The constant term of ``inner`` must equal the center of ``outer`` so the
    composition is a well-defined formal operation.
    """
    if not isinstance(inner, ScalarSeries):
        raise TypeError("inner series must be scalar")
    if abs(inner.coeffs[0] - outer.center) > _CENTER_ATOL:
        raise CenterMismatchError(
            "inner constant term does not match the outer center"
        )
    n = min(outer.order, inner.order)
    shifted = inner.coeffs[: n + 1].copy()
    shifted[0] = 0.0
    t = ScalarSeries(inner.center, shifted)

    matrix = isinstance(outer, MatrixSeries)
    if matrix:
        acc = MatrixSeries.constant(outer.coeffs[n], n, center=inner.center)
    else:
        c = np.zeros(n + 1, dtype=complex)
        c[0] = outer.coeffs[n]
        acc = ScalarSeries(inner.center, c)
    for k in range(n - 1, -1, -1):
        acc = acc * t + outer.coeffs[k]
    return acc


def _recip_coeffs(c: np.ndarray) -> np.ndarray:
    """Coefficients of 1 / series for scalar coefficients, c[0] != 0."""
    if abs(c[0]) < 1e-300:
        raise NotInvertibleError("reciprocal of a series with zero constant term")
    out = np.zeros_like(c)
    out[0] = 1.0 / c[0]
    for k in range(1, c.shape[0]):
        out[k] = -np.dot(out[:k], c[k:0:-1]) / c[0]
    return out


def reciprocal(s: ScalarSeries) -> ScalarSeries:
    return ScalarSeries(s.center, _recip_coeffs(s.coeffs))


def _compose_coeffs(outer: np.ndarray, inner: np.ndarray) -> np.ndarray:
    """Offset-coefficient composition (inner[0] assumed 0)."""
    n = min(outer.shape[0], inner.shape[0]) - 1
    t = inner[: n + 1].copy()
    t[0] = 0.0
    acc = np.zeros(n + 1, dtype=complex)
    acc[0] = outer[n]
    for k in range(n - 1, -1, -1):
        prod = np.zeros(n + 1, dtype=complex)
        for i in range(n + 1):
            if acc[i] != 0.0:
                top = n - i + 1
                prod[i:] += acc[i] * t[:top]
        prod[0] += outer[k]
        acc = prod
    return acc


def revert(s: ScalarSeries, *, tol: float = 1e-12) -> ScalarSeries:
    """Compositional inverse g with s(g(w)) = w + O(w^{N+1}).

    ``s`` must vanish at its center and have a nonzero linear coefficient.
    The result is centered at 0 with constant term equal to s's center, so
    evaluating it at w returns an actual preimage point.  Newton iteration on
    the truncated series doubles the number of correct coefficients per step.
    """
    c = s.coeffs
    scale = float(np.max(np.abs(c))) if c.size else 0.0
    if abs(c[0]) > 1e-10 * max(scale, 1.0):
        raise NotInvertibleError("series to revert must vanish at its center")
    if s.order < 1 or abs(c[1]) <= tol * max(scale, 1.0):
        raise NotInvertibleError("linear coefficient below tolerance")
    n = s.order
    ident = np.zeros(n + 1, dtype=complex)
    ident[1] = 1.0
    ds = np.zeros(n + 1, dtype=complex)
    ds[: n] = c[1:] * np.arange(1, n + 1)
    g = ident / c[1]
    steps = int(np.ceil(np.log2(n + 1))) + 2
    for _ in range(steps):
        err = _compose_coeffs(c, g) - ident
        slope = _compose_coeffs(ds, g)
        g = g - _mul_coeffs(err, _recip_coeffs(slope))
    g[0] = s.center
    return ScalarSeries(0.0, g)


def _mul_coeffs(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    n = min(a.shape[0], b.shape[0])
    out = np.zeros(n, dtype=complex)
    for k in range(n):
        out[k] = np.dot(a[: k + 1], b[k::-1])
    return out


def series_exp(s: _Series) -> _Series:
    """Exponential of a series with vanishing constant term.

    Uses the derivative recurrence k E_k = sum_j j s_j E_{k-j}, which is the
    exact Taylor recursion in the scalar case and remains valid for matrix
    coefficients that commute; the linearization pipeline only ever calls it
    in those situations.
    """
    c0 = s.coeffs[0]
    size = float(np.max(np.abs(c0))) if getattr(c0, "ndim", 0) else abs(c0)
    if size > 1e-12 * max(1.0, float(np.max(np.abs(s.coeffs)))):
        raise NonzeroConstantTermError("series_exp needs a zero constant term")
    n = s.order
    out = np.zeros_like(s.coeffs)
    if isinstance(s, MatrixSeries):
        out[0] = np.eye(s.dim, dtype=complex)
    else:
        out[0] = 1.0
    for k in range(1, n + 1):
        acc = np.zeros_like(out[0])
        for j in range(1, k + 1):
            acc = acc + j * _coeff_mul(s.coeffs[j], out[k - j])
        out[k] = acc / k
    return s._wrap(out)


def evaluate(s: _Series, z):
    """Module-level alias for Horner evaluation."""
    return s.evaluate(z)
