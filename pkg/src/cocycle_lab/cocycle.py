"""Semicocycle evolution, axiom verification, generator extraction, and
growth analysis.

A semicocycle over a semigroup {F_t} is a family Gamma_t of matrix-valued
holomorphic maps with Gamma_{t+s}(z) = Gamma_t(F_s(z)) Gamma_s(z) and
Gamma_0 = I.  Every such family solves the coupled evolution problem

    du/dt = f(u),            u(0) = z,
    dG/dt = B(u(t)) G,       G(0) = I,

where B is the cocycle generator; conversely the solver below turns any
holomorphic B into a semicocycle.  Growth is controlled by the logarithmic
norm of B over invariant disks.
"""

from __future__ import annotations

import csv
import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Callable, Optional, Sequence

import numpy as np

from . import integrate as _int
from .algebra import as_matrix, identity_like, log_norm, mat_inv, operator_norm
from .dynamics import RationalMap, SemigroupModel, _shift_poly
from .errors import (
    DomainEscapeError,
    NotInvariantError,
    SamplePointIsFixedPointError,
    VNotInvertibleError,
)
from .series import MatrixSeries, ScalarSeries, reciprocal

#: env var capping the thread pool used for independent grid evaluations
THREADS_ENV = "COCYCLE_LAB_THREADS"


def _pool_size() -> int:
    try:
        return max(1, int(os.environ.get(THREADS_ENV, "1")))
    except ValueError:
        return 1


def grid_map(fn, items):
    """Map over independent grid items, threaded when COCYCLE_LAB_THREADS > 1.

    Results keep the input order, so reports are deterministic either way.
    """
    size = _pool_size()
    items = list(items)
    if size <= 1 or len(items) <= 1:
        return [fn(x) for x in items]
    with ThreadPoolExecutor(max_workers=size) as pool:
        return list(pool.map(fn, items))


@dataclass
class CocycleGenerator:
    """Matrix-valued rational map z -> P(z) / q(z) with square matrix
    polynomial coefficients ``num[k]`` and scalar denominator ``den``."""

    num: np.ndarray
    den: np.ndarray = field(default_factory=lambda: np.array([1.0 + 0.0j]))

    def __post_init__(self):
        self.num = np.asarray(self.num, dtype=complex)
        if self.num.ndim == 2:
            self.num = self.num[None, :, :]
        if self.num.ndim != 3 or self.num.shape[1] != self.num.shape[2]:
            raise ValueError("numerator coefficients must have shape (d+1, n, n)")
        self.den = np.atleast_1d(np.asarray(self.den, dtype=complex))
        if not np.any(np.abs(self.den) > 0):
            raise ValueError("denominator is identically zero")

    @property
    def dim(self) -> int:
        return self.num.shape[1]

    @classmethod
    def constant(cls, b0) -> "CocycleGenerator":
        return cls(as_matrix(b0)[None, :, :])

    @classmethod
    def scalar(cls, num, den=(1.0,)) -> "CocycleGenerator":
        """1x1 generator from scalar polynomial coefficients."""
        n = np.atleast_1d(np.asarray(num, dtype=complex))
        return cls(n[:, None, None], den)

    def __call__(self, z):
        zs = np.asarray(z, dtype=complex)
        scalar_in = zs.shape == ()
        u = np.atleast_1d(zs)[:, None, None]
        acc = np.broadcast_to(self.num[-1], u.shape[:1] + self.num.shape[1:]).copy()
        for k in range(self.num.shape[0] - 2, -1, -1):
            acc = acc * u + self.num[k]
        den = np.full(u.shape[0], self.den[-1], dtype=complex)
        for k in range(self.den.shape[0] - 2, -1, -1):
            den = den * np.atleast_1d(zs) + self.den[k]
        acc = acc / den[:, None, None]
        return acc[0] if scalar_in else acc

    def taylor(self, center: complex, order: int) -> MatrixSeries:
        """Matrix Taylor series about ``center``."""
        n = self.dim
        num_c = np.zeros((order + 1, n, n), dtype=complex)
        d = self.num.shape[0]
        for j in range(min(order + 1, d)):
            acc = np.zeros((n, n), dtype=complex)
            for k in range(d - 1, j - 1, -1):
                acc = acc * center + math.comb(k, j) * self.num[k]
            num_c[j] = acc
        den_shift = _shift_poly(self.den, center)
        den_c = np.zeros(order + 1, dtype=complex)
        den_c[: min(order + 1, den_shift.shape[0])] = den_shift[: order + 1]
        num_s = MatrixSeries(center, num_c)
        return num_s * reciprocal(ScalarSeries(center, den_c))


def _generator_dim(B, probe: complex) -> int:
    if hasattr(B, "dim"):
        return int(B.dim)
    return as_matrix(B(probe)).shape[0]


def _generator_batch(B, u: np.ndarray, n: int) -> np.ndarray:
    """Evaluate a generator on a batch of points, tolerating scalar-only
    callables."""
    try:
        out = np.asarray(B(u), dtype=complex)
        if out.shape == (u.shape[0], n, n):
            return out
    except Exception:
        pass
    return np.stack([as_matrix(B(complex(p))) for p in u])


def evolve_grid(
    model: SemigroupModel,
    B,
    t_values: Sequence[float],
    z_values: Sequence[complex],
    tol: float = 1e-11,
) -> np.ndarray:
    """Gamma_t(z) for every t in ``t_values`` and z in ``z_values``.

    One adaptive integration carries all the z-points simultaneously;
    returns an array of shape (len(t_values), len(z_values), n, n).
    """
    zs = np.asarray(list(z_values), dtype=complex)
    ts = [float(t) for t in t_values]
    n = _generator_dim(B, complex(zs[0]) if zs.size else 0.0)
    m = zs.shape[0]
    f = model.f

    y0 = np.concatenate([zs, np.tile(identity_like(n).ravel(), m)])

    def rhs(_t, y):
        u = y[:m]
        g = y[m:].reshape(m, n, n)
        bu = _generator_batch(B, u, n)
        return np.concatenate([f(u), (bu @ g).ravel()])

    def guard(y):
        if np.any(np.abs(y[:m]) >= 1.0):
            raise DomainEscapeError("trajectory reached the unit circle")

    states = _int.integrate_at(rhs, ts, y0, tol=tol, guard=guard)
    return states[:, m:].reshape(len(ts), m, n, n)


def evolve(model: SemigroupModel, B, t: float, z: complex, tol: float = 1e-11) -> np.ndarray:
    """Solve the evolution problem up to time t at the point z."""
    return evolve_grid(model, B, [float(t)], [complex(z)], tol=tol)[0, 0]


def make_evolve_oracle(model: SemigroupModel, B, tol: float = 1e-11):
    """Wrap (model, B) as a sampler Gamma(t, z) with a fast ``grid`` method."""
    return _EvolveOracle(model, B, tol)


class _EvolveOracle:
    def __init__(self, model, B, tol):
        self.model = model
        self.B = B
        self.tol = tol

    def __call__(self, t, z):
        return evolve(self.model, self.B, t, z, tol=self.tol)

    def grid(self, t_values, z_values):
        return evolve_grid(self.model, self.B, t_values, z_values, tol=self.tol)


def gamma_grid(gamma, t_values, z_values) -> np.ndarray:
    """Sample any Gamma(t, z) evaluator on a (t, z) grid."""
    if hasattr(gamma, "grid"):
        return gamma.grid(t_values, z_values)
    rows = grid_map(
        lambda t: np.stack([as_matrix(gamma(t, z)) for z in z_values]), t_values
    )
    return np.stack(rows)


@dataclass
class AxiomCheckReport:
    """Sampled residuals of the semicocycle axioms plus the invertibility
    margin (smallest singular value seen)."""

    chain_residual: float
    identity_residual: float
    min_singular_value: float
    tol: float

    @property
    def passed(self) -> bool:
        return (
            self.chain_residual <= self.tol
            and self.identity_residual <= self.tol
            and self.min_singular_value > 0.0
        )

    def as_dict(self) -> dict:
        return {
            "chain_residual": self.chain_residual,
            "identity_residual": self.identity_residual,
            "min_singular_value": self.min_singular_value,
            "tol": self.tol,
            "passed": self.passed,
        }


def check_axioms(
    model: SemigroupModel,
    gamma,
    t_values: Sequence[float],
    z_values: Sequence[complex],
    tol: float = 1e-7,
    *,
    flow_tol: float = 1e-12,
) -> AxiomCheckReport:
    """Verify the chain rule, the identity at t = 0, and invertibility on a
    sample grid.  ``gamma`` is any (t, z) -> matrix evaluator (closed form or
    an evolve-backed oracle)."""
    zs = np.asarray(list(z_values), dtype=complex)
    ts = sorted(float(t) for t in t_values)

    ident_vals = gamma_grid(gamma, [0.0], zs)[0]
    n = ident_vals.shape[-1]
    identity_residual = max(
        operator_norm(g - identity_like(n)) for g in ident_vals
    )

    min_sv = math.inf
    chain = 0.0
    for s in ts:
        gs = gamma_grid(gamma, [s], zs)[0]
        fs = np.atleast_1d(model.flow(s, zs, tol=flow_tol))
        at_fs = gamma_grid(gamma, ts, fs)
        at_sums = gamma_grid(gamma, [t + s for t in ts], zs)
        for i, _t in enumerate(ts):
            for j in range(zs.shape[0]):
                lhs = at_sums[i, j]
                rhs = at_fs[i, j] @ gs[j]
                chain = max(chain, operator_norm(lhs - rhs))
                min_sv = min(min_sv, float(np.linalg.svd(lhs, compute_uv=False)[-1]))
    return AxiomCheckReport(chain, identity_residual, min_sv, tol)


def _cauchy_derivative(values: np.ndarray, radius: float, thetas: np.ndarray):
    """First derivative at the circle center from boundary samples."""
    weights = np.exp(-1j * thetas) / (radius * thetas.shape[0])
    return np.tensordot(weights, values, axes=(0, 0))


def spatial_derivative_check(
    model: SemigroupModel,
    B,
    t: float,
    z: complex,
    *,
    gamma=None,
    nodes: int = 64,
    ode_tol: float = 1e-11,
    fixed_point_tol: float = 1e-8,
) -> float:
    """Residual of the identity f(z) Gamma_t'(z) = B(F_t z) Gamma_t(z)
    - Gamma_t(z) B(z).

    The z-derivative is computed by a Cauchy integral over a small circle
    (trapezoid rule is spectrally accurate for holomorphic data).
    """
    f = model.f
    fz = complex(f(z))
    if abs(fz) < fixed_point_tol:
        raise SamplePointIsFixedPointError(f"|f(z)| = {abs(fz):.2e} at z = {z}")
    if gamma is None:
        gamma = make_evolve_oracle(model, B, tol=ode_tol)
    radius = 0.1 * (1.0 - abs(z))
    thetas = 2.0 * np.pi * np.arange(nodes) / nodes
    ring = z + radius * np.exp(1j * thetas)
    vals = gamma_grid(gamma, [t], np.concatenate([[z], ring]))[0]
    g_z = vals[0]
    g_prime = _cauchy_derivative(vals[1:], radius, thetas)
    n = g_z.shape[0]
    ftz = complex(model.flow(t, z))
    b_ftz = _generator_batch(B, np.array([ftz]), n)[0]
    b_z = _generator_batch(B, np.array([complex(z)]), n)[0]
    return operator_norm(fz * g_prime - b_ftz @ g_z + g_z @ b_z)


def extract_generator(
    gamma,
    f: RationalMap,
    z: complex,
    t0: float = 0.1,
    *,
    quad_tol: float = 1e-10,
    nodes: int = 64,
    sv_rtol: float = 1e-8,
) -> np.ndarray:
    """Recover B(z) from samples of a semicocycle.

    Uses the time average V(t0, z) = integral of Gamma_s(z) over [0, t0]:

        B(z) = V^{-1} [Gamma_{t0}(z) - I - f(z) dV/dz],

    with V by refined composite Simpson quadrature and dV/dz by a Cauchy
    integral.  Raises VNotInvertibleError when V is numerically singular;
    callers retry with a smaller t0 (see ``extract_generator_auto``).
    """
    if t0 <= 0:
        raise ValueError("t0 must be positive")
    radius = 0.1 * (1.0 - abs(z))
    thetas = 2.0 * np.pi * np.arange(nodes) / nodes
    points = np.concatenate([[complex(z)], z + radius * np.exp(1j * thetas)])

    prev = None
    v_vals = None
    gamma_t0 = None
    m = 16
    while m <= 256:
        s_nodes = np.linspace(0.0, t0, m + 1)
        vals = gamma_grid(gamma, s_nodes, points)  # (m+1, nodes+1, n, n)
        h = t0 / m
        weights = np.full(m + 1, 2.0)
        weights[1::2] = 4.0
        weights[0] = weights[-1] = 1.0
        v_vals = (h / 3.0) * np.tensordot(weights, vals, axes=(0, 0))
        gamma_t0 = vals[-1, 0]
        if prev is not None:
            delta = float(np.max(np.abs(v_vals - prev)))
            if delta <= quad_tol * max(1.0, float(np.max(np.abs(v_vals)))):
                break
        prev = v_vals
        m *= 2

    v_z = v_vals[0]
    sv = np.linalg.svd(v_z, compute_uv=False)
    # V ~ t0 * I for small t0, so t0 is the natural singularity scale
    if sv[-1] <= sv_rtol * max(sv[0], t0):
        raise VNotInvertibleError(f"V(t0={t0}, z={z}) is numerically singular")
    dv = _cauchy_derivative(v_vals[1:], radius, thetas)
    n = v_z.shape[0]
    return mat_inv(v_z) @ (gamma_t0 - identity_like(n) - complex(f(z)) * dv)


def extract_generator_auto(gamma, f, z, t0: float = 0.1, retries: int = 6, **kw):
    """extract_generator with the halving-t0 retry policy."""
    last = None
    for _ in range(retries):
        try:
            return extract_generator(gamma, f, z, t0, **kw)
        except VNotInvertibleError as exc:
            last = exc
            t0 /= 2.0
    raise last


@dataclass
class GrowthReport:
    """Exponential-growth verification on an invariant disk.

    ``k_mu`` is the sampled supremum of the logarithmic norm of B over the
    disk boundary (subharmonicity makes boundary sampling exact in the
    limit); the bound exp(k_used * t) is then checked against sampled
    cocycle norms.
    """

    radius: float
    k_mu: float
    k_used: float
    max_violation: float
    samples: list  # rows (t, z, gamma_norm, bound, violation)

    def as_dict(self) -> dict:
        return {
            "radius": self.radius,
            "k_mu": self.k_mu,
            "k_used": self.k_used,
            "max_violation": self.max_violation,
            "samples": [
                {
                    "t": t,
                    "z": [z.real, z.imag],
                    "gamma_norm": g,
                    "bound": b,
                    "violation": v,
                }
                for (t, z, g, b, v) in self.samples
            ],
        }

    def write_csv(self, path) -> None:
        with open(path, "w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(["t", "z_re", "z_im", "gamma_norm", "bound", "violation"])
            for (t, z, g, b, v) in self.samples:
                writer.writerow([t, z.real, z.imag, g, b, v])


def growth_report(
    model: SemigroupModel,
    B,
    r: float,
    *,
    K: Optional[float] = None,
    t_values: Sequence[float] = (0.25, 0.5, 1.0, 2.0, 3.0),
    boundary_nodes: int = 256,
    sample_nodes: int = 16,
    gamma=None,
    ode_tol: float = 1e-10,
    invariance_margin: float = 1e-7,
) -> GrowthReport:
    """Logarithmic-norm growth bound on the disk |z - z0| <= r.

    Checks forward invariance on sampled trajectories (NotInvariantError on
    failure), computes k_mu = sup of log_norm(B) over the boundary circle,
    and records any excess of sampled ||Gamma_t(z)|| over exp(K t) with
    K = ``K`` or k_mu.
    """
    if not model.is_interior:
        raise ValueError("growth_report needs an interior fixed point model")
    z0 = model.z0
    thetas = 2.0 * np.pi * np.arange(boundary_nodes) / boundary_nodes
    ring = z0 + r * np.exp(1j * thetas)
    if np.any(np.abs(ring) >= 1.0):
        raise ValueError("disk is not contained in the unit disk")

    n = _generator_dim(B, complex(ring[0]))
    b_ring = _generator_batch(B, ring, n)
    k_mu = max(grid_map(log_norm, b_ring))
    k_used = float(K) if K is not None else float(k_mu)

    step = max(1, boundary_nodes // sample_nodes)
    sample_ring = ring[::step]
    for t in t_values:
        moved = np.atleast_1d(model.flow(float(t), sample_ring))
        drift = np.max(np.abs(moved - z0)) - r
        if drift > invariance_margin:
            raise NotInvariantError(
                f"trajectory left the disk by {drift:.2e} at t = {t}"
            )

    if gamma is None:
        gamma = make_evolve_oracle(model, B, tol=ode_tol)
    vals = gamma_grid(gamma, list(t_values), sample_ring)
    samples = []
    max_violation = 0.0
    for i, t in enumerate(t_values):
        bound = math.exp(k_used * float(t))
        for j, z in enumerate(sample_ring):
            g_norm = operator_norm(vals[i, j])
            violation = max(0.0, g_norm - bound)
            max_violation = max(max_violation, violation)
            samples.append((float(t), complex(z), g_norm, bound, violation))
    return GrowthReport(r, float(k_mu), k_used, max_violation, samples)


@dataclass
class BoundednessFit:
    """Affine fit of log sup-norms against t: log M + K t.

    ``kind`` is "bounded" when the fit residual stays under the threshold,
    else "unbounded" (super-exponential growth of the sampled suprema).
    """

    kind: str
    log_m: float
    rate: float
    residual: float
    sups: list  # rows (t, sup_norm)

    @property
    def m_const(self) -> float:
        return math.exp(self.log_m)

    def as_dict(self) -> dict:
        return {
            "kind": self.kind,
            "M": self.m_const,
            "K": self.rate,
            "residual": self.residual,
            "sups": [[t, s] for (t, s) in self.sups],
        }


def boundedness_classify(
    gamma,
    t_values: Sequence[float],
    z_points: Sequence[complex],
    *,
    residual_threshold: float = 1.0,
) -> BoundednessFit:
    """Fit sup-norm growth over ``z_points`` to M exp(K t).

    The points may be a boundary circle (sup over a disk, by the maximum
    principle) or trajectory samples.  A residual above the threshold flags
    super-exponential growth.
    """
    zs = np.asarray(list(z_points), dtype=complex)
    ts = np.asarray([float(t) for t in t_values])
    vals = gamma_grid(gamma, list(ts), zs)
    sups = np.array(
        [max(operator_norm(vals[i, j]) for j in range(zs.shape[0])) for i in range(len(ts))]
    )
    logs = np.log(sups)
    design = np.stack([np.ones_like(ts), ts], axis=1)
    coef, *_ = np.linalg.lstsq(design, logs, rcond=None)
    residual = float(np.max(np.abs(logs - design @ coef)))
    kind = "bounded" if residual <= residual_threshold else "unbounded"
    return BoundednessFit(kind, float(coef[0]), float(coef[1]), residual, list(zip(ts.tolist(), sups.tolist())))
