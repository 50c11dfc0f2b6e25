"""One-parameter semigroups on the unit disk built from rational generators.

A model bundles the generator f, its interior fixed point z0, the rate
lambda = -f'(z0), and the Koenigs series h solving the Schroeder equation
h(F_t(z)) = exp(-lambda t) h(z) with h(z0) = 0, h'(z0) = 1.  Flow evaluation
prefers the Koenigs route and falls back to direct integration of
du/dt = f(u) outside the validated series region.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from . import integrate as _int
from .errors import (
    DomainEscapeError,
    NoInteriorFixedPointError,
    OutOfDomainError,
    ZeroRateError,
)
from .series import ScalarSeries, reciprocal, revert

#: safety factor applied to the ratio-test estimate of a series radius
RADIUS_SAFETY = 0.8

#: how close to the unit circle a "fixed point" stops counting as interior
BOUNDARY_MARGIN = 1e-9


def _shift_poly(coeffs: np.ndarray, center: complex) -> np.ndarray:
    """Coefficients of p(center + u) in powers of u (exact binomial shift)."""
    c = np.asarray(coeffs, dtype=complex)
    d = c.shape[0]
    out = np.zeros(d, dtype=complex)
    for j in range(d):
        acc = 0.0 + 0.0j
        for k in range(d - 1, j - 1, -1):
            acc = acc * center + math.comb(k, j) * c[k]
        out[j] = acc
    return out


def _polyval(coeffs: np.ndarray, z):
    acc = np.full_like(np.asarray(z, dtype=complex), coeffs[-1])
    for k in range(coeffs.shape[0] - 2, -1, -1):
        acc = acc * z + coeffs[k]
    return acc


@dataclass
class RationalMap:
    """Rational function of z given by ascending numerator/denominator
    polynomial coefficients."""

    num: np.ndarray
    den: np.ndarray = field(default_factory=lambda: np.array([1.0 + 0.0j]))

    def __post_init__(self):
        self.num = np.atleast_1d(np.asarray(self.num, dtype=complex))
        self.den = np.atleast_1d(np.asarray(self.den, dtype=complex))
        if not np.any(np.abs(self.den) > 0):
            raise ValueError("denominator is identically zero")

    def __call__(self, z):
        return _polyval(self.num, z) / _polyval(self.den, z)

    def derivative(self) -> "RationalMap":
        def dpoly(c):
            if c.shape[0] == 1:
                return np.zeros(1, dtype=complex)
            return c[1:] * np.arange(1, c.shape[0])

        dn = np.convolve(dpoly(self.num), self.den)
        nd = np.convolve(self.num, dpoly(self.den))
        width = max(dn.shape[0], nd.shape[0])
        dn = np.pad(dn, (0, width - dn.shape[0]))
        nd = np.pad(nd, (0, width - nd.shape[0]))
        return RationalMap(dn - nd, np.convolve(self.den, self.den))

    def taylor(self, center: complex, order: int) -> ScalarSeries:
        """Taylor series about ``center`` (the denominator must not vanish
        there)."""
        den_shift = _shift_poly(self.den, center)
        if abs(den_shift[0]) < 1e-14 * max(1.0, float(np.max(np.abs(self.den)))):
            raise ZeroDivisionError("denominator vanishes at the expansion center")
        num_c = np.zeros(order + 1, dtype=complex)
        den_c = np.zeros(order + 1, dtype=complex)
        ns = _shift_poly(self.num, center)
        num_c[: min(order + 1, ns.shape[0])] = ns[: order + 1]
        den_c[: min(order + 1, den_shift.shape[0])] = den_shift[: order + 1]
        num_s = ScalarSeries(center, num_c)
        den_s = ScalarSeries(center, den_c)
        return num_s * reciprocal(den_s)


def _ratio_radius(coeffs: np.ndarray) -> float:
    """RADIUS_SAFETY / limsup |c_k|^(1/k), estimated from the high-order
    coefficients; infinite when they all vanish."""
    n = coeffs.shape[0] - 1
    lo = max(2, n // 2)
    best = 0.0
    for k in range(lo, n + 1):
        a = abs(coeffs[k])
        if a > 1e-250:
            best = max(best, a ** (1.0 / k))
    if best == 0.0:
        return math.inf
    return RADIUS_SAFETY / best


@dataclass
class SemigroupModel:
    """Semigroup data around an interior fixed point (or a boundary model
    with ``z0 is None``, for which only the ODE flow is available)."""

    f: RationalMap
    z0: Optional[complex]
    rate: Optional[complex]
    koenigs: Optional[ScalarSeries]
    koenigs_inv: Optional[ScalarSeries]
    koenigs_radius: float
    koenigs_inv_radius: float
    order: int

    @property
    def is_interior(self) -> bool:
        return self.z0 is not None

    def koenigs_value(self, z) -> complex:
        if not self.is_interior:
            raise OutOfDomainError("boundary model has no Koenigs series")
        return self.koenigs.evaluate(z)

    def flow(self, t: float, z, *, tol: float = 1e-12):
        """F_t(z); Koenigs route inside the validated region, ODE fallback.

        ``z`` may be a complex scalar or an ndarray of points.
        """
        if t < 0:
            raise ValueError("flow requires t >= 0")
        zs = np.asarray(z, dtype=complex)
        if np.any(np.abs(zs) >= 1.0):
            raise OutOfDomainError("flow point outside the open unit disk")
        if t == 0:
            return zs if zs.shape else complex(zs)
        if self.is_interior and np.all(np.abs(zs - self.z0) <= self.koenigs_radius):
            hz = np.asarray(self.koenigs.evaluate(zs))
            if np.all(np.abs(hz) <= self.koenigs_inv_radius):
                out = self.koenigs_inv.evaluate(np.exp(-self.rate * t) * hz)
                if np.any(np.abs(np.asarray(out)) >= 1.0):
                    raise DomainEscapeError("flow left the unit disk")
                return out if zs.shape else complex(out)
        return flow_ode(self.f, t, z, tol=tol)


def flow_ode(f: RationalMap, t: float, z, *, tol: float = 1e-12):
    """Direct integration of du/dt = f(u), u(0) = z.

    Raises DomainEscapeError if the trajectory reaches the unit circle,
    which signals that ``f`` is not a generator of disk self-maps.
    """
    if t < 0:
        raise ValueError("flow requires t >= 0")
    zs = np.atleast_1d(np.asarray(z, dtype=complex))
    if np.any(np.abs(zs) >= 1.0):
        raise OutOfDomainError("flow point outside the open unit disk")

    def guard(y):
        if np.any(np.abs(y) >= 1.0):
            raise DomainEscapeError("trajectory reached the unit circle")

    out = _int.integrate(lambda _t, y: f(y), (0.0, float(t)), zs, tol=tol, guard=guard)
    out = out.reshape(np.shape(z))
    return out if np.shape(z) else complex(out)


def build_model(f: RationalMap, hint: complex = 0.0, order: int = 24) -> SemigroupModel:
    """Locate the interior fixed point, compute the rate, and assemble the
    Koenigs series and its reversion.

    Raises NoInteriorFixedPointError when Newton iteration fails or lands
    within BOUNDARY_MARGIN of the unit circle, and ZeroRateError when
    |f'(z0)| is numerically zero.
    """
    df = f.derivative()
    z = complex(hint)
    converged = False
    for _ in range(100):
        fz = f(z)
        if abs(fz) < 1e-14:
            converged = True
            break
        dfz = df(z)
        if abs(dfz) < 1e-300:
            break
        z = z - fz / dfz
        if not (math.isfinite(z.real) and math.isfinite(z.imag)):
            break
    if not converged or abs(f(z)) > 1e-12:
        raise NoInteriorFixedPointError("Newton iteration did not locate a fixed point")
    if abs(z) >= 1.0 - BOUNDARY_MARGIN:
        raise NoInteriorFixedPointError(f"fixed point {z} is not interior")
    z0 = z

    lam = -df(z0)
    if abs(lam) < 1e-12:
        raise ZeroRateError("rate -f'(z0) is numerically zero")

    f_c = f.taylor(z0, order + 1).coeffs
    h = np.zeros(order + 1, dtype=complex)
    h[1] = 1.0
    # Schroeder recursion from h' f = -lambda h
    for k in range(2, order + 1):
        acc = 0.0 + 0.0j
        for j in range(1, k):
            acc += j * h[j] * f_c[k + 1 - j]
        h[k] = acc / (lam * (k - 1))
    koenigs = ScalarSeries(z0, h)
    koenigs_inv = revert(koenigs)
    return SemigroupModel(
        f=f,
        z0=z0,
        rate=lam,
        koenigs=koenigs,
        koenigs_inv=koenigs_inv,
        koenigs_radius=_ratio_radius(h),
        koenigs_inv_radius=_ratio_radius(koenigs_inv.coeffs),
        order=order,
    )


def build_boundary_model(f: RationalMap) -> SemigroupModel:
    """Model for a semigroup without an interior fixed point.

    Only the ODE flow is available; the series linearizer is disabled.
    """
    return SemigroupModel(
        f=f,
        z0=None,
        rate=None,
        koenigs=None,
        koenigs_inv=None,
        koenigs_radius=0.0,
        koenigs_inv_radius=0.0,
        order=0,
    )
