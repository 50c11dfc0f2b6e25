"""Linearization pipeline tests: condition checks, the recursion, the
quadrature linearizers, reconstruction, gauge freedom, sharpness."""

import math

import numpy as np
import pytest

from cocycle_lab.algebra import ad_matrix, mat_exp, mat_inv, operator_norm
from cocycle_lab.cocycle import CocycleGenerator, evolve
from cocycle_lab.demos import demo_by_name
from cocycle_lab.dynamics import RationalMap, build_model
from cocycle_lab.errors import (
    NotResonantError,
    OutsideConvergenceRegionError,
    PoleOnPathError,
    TailNotConvergingError,
)
from cocycle_lab.linearize import (
    commutative_linearize_interior,
    commutative_linearize_nofix,
    condition_check,
    conjugated_generator,
    linearize,
    reconstruct_error,
    sharpness_witness,
)

RNG = np.random.default_rng(91)

LINEAR_MODEL = build_model(RationalMap([0.0, -1.0]))
JORDAN = demo_by_name("jordan-obstruction")
SCALAR = demo_by_name("linear-scalar-rational")
E12 = np.array([[0, 1], [0, 0]], dtype=complex)


def random_unitary(n):
    q, r = np.linalg.qr(RNG.standard_normal((n, n)) + 1j * RNG.standard_normal((n, n)))
    return q * (np.diag(r) / np.abs(np.diag(r)))


class TestConditionCheck:
    def test_resonant_diagonal(self):
        rep = condition_check(np.diag([1.0, 2.0]).astype(complex), 1.0)
        diffs = sorted(np.round(rep.difference_set.real, 9))
        assert diffs == [-1.0, 0.0, 0.0, 1.0]
        assert rep.violated_k == [1]
        assert rep.k_bound == 1
        assert not rep.condition_holds
        assert rep.rank_route_agrees

    def test_central_element(self):
        rep = condition_check(np.zeros((2, 2), dtype=complex), 1.0)
        assert rep.violated_k == []
        assert rep.k_bound == 0
        assert rep.condition_holds

    def test_half_integer_gap(self):
        alpha = 0.3 - 0.2j
        rep = condition_check(np.diag([alpha, alpha + 0.5]).astype(complex), 1.0)
        assert rep.violated_k == []
        assert rep.condition_holds

    def test_violated_within_k_bound(self):
        for _ in range(20):
            n = int(RNG.integers(2, 5))
            b0 = RNG.standard_normal((n, n)) + 1j * RNG.standard_normal((n, n))
            lam = complex(0.3 + RNG.random(), 0.5 * RNG.standard_normal())
            rep = condition_check(b0, lam)
            assert all(1 <= k <= rep.k_bound for k in rep.violated_k)

    def test_routes_agree_for_separated_spectra(self):
        for _ in range(20):
            n = int(RNG.integers(2, 5))
            eigs = RNG.standard_normal(n) + 1j * RNG.standard_normal(n)
            # keep pairwise differences at least 1e-3 away from the positive integers
            diffs = (eigs[:, None] - eigs[None, :]).ravel()
            ks = np.round(diffs.real).astype(int)
            bad = (
                (np.abs(diffs - ks) < 1e-3) & (ks >= 1) & (np.abs(diffs.imag) < 1e-3)
            )
            if np.any(bad):
                continue
            u = random_unitary(n)
            rep = condition_check(u @ np.diag(eigs) @ u.conj().T, 1.0)
            assert rep.rank_route_agrees

    def test_requires_positive_real_rate(self):
        with pytest.raises(ValueError):
            condition_check(np.eye(2, dtype=complex), -1.0)


class TestConjugatedGenerator:
    def test_identity_koenigs(self):
        b = conjugated_generator(LINEAR_MODEL, JORDAN.generator, 8)
        assert np.allclose(b.coeffs[0], np.diag([1.0, 2.0]))
        assert np.allclose(b.coeffs[1], E12)
        assert np.allclose(b.coeffs[2:], 0.0)

    def test_constant_generator(self):
        gen = CocycleGenerator.constant(np.array([[0.3, 0.1], [0.0, -0.5]]))
        b = conjugated_generator(LINEAR_MODEL, gen, 10)
        assert np.allclose(b.coeffs[0], gen(0.0))
        assert np.allclose(b.coeffs[1:], 0.0)

    def test_nontrivial_koenigs_inverse(self):
        # B(z) = diag(0, z) conjugated through h^{-1}(w) = w/(1+w)
        model = build_model(RationalMap([0.0, -1.0, 1.0]))
        num = np.zeros((2, 2, 2), dtype=complex)
        num[1] = np.diag([0.0, 1.0])
        b = conjugated_generator(model, CocycleGenerator(num), 6)
        for k in range(1, 6):
            assert np.allclose(
                b.coeffs[k], np.diag([0.0, (-1.0) ** (k - 1)]), atol=1e-12
            )


class TestLinearize:
    def test_jordan_obstructed_at_one(self):
        out = linearize(LINEAR_MODEL, JORDAN.generator)
        assert out.status == "obstructed"
        assert out.obstructed_at == 1
        assert out.violated_k == [1]
        assert out.m.coeffs.shape[0] == 1  # truncated before the failing order
        assert out.radius_estimate == 0.0

    def test_resonant_solvable_coefficient(self):
        entry = demo_by_name("resonant-solvable")
        out = linearize(LINEAR_MODEL, entry.generator)
        assert out.status == "resonant_solvable"
        assert out.violated_k == [1]
        assert np.allclose(out.m.coeffs[1], [[0.0, 0.0], [0.5, 0.0]], atol=1e-12)
        assert out.radius_estimate == 0.0
        # resonant chains carry no uniform resolvent bound
        assert out.diagnostics["C1"] == math.inf

    def test_resonant_polynomial_transfer_map_reconstructs(self):
        # the resonant demo's transfer map is exactly I + z E21 / 2
        entry = demo_by_name("resonant-solvable")
        out = linearize(LINEAR_MODEL, entry.generator)
        assert np.allclose(out.m.coeffs[2:], 0.0, atol=1e-12)
        for t in (0.5, 1.5):
            for z in (0.4, -0.3 + 0.2j):
                m_z = out.m.evaluate(LINEAR_MODEL.koenigs.evaluate(z))
                m_ftz = out.m.evaluate(np.exp(-t) * z)
                recon = mat_inv(m_ftz) @ mat_exp(t * out.b0) @ m_z
                assert operator_norm(recon - entry.oracle(t, z)) <= 1e-12

    def test_diagonal_gap_linearizable(self):
        gen = CocycleGenerator(
            np.stack([np.diag([0.25, 0.75]), np.diag([1.0, 0.0])]).astype(complex)
        )
        out = linearize(LINEAR_MODEL, gen)
        assert out.status == "linearizable"
        assert np.allclose(out.m.coeffs[1], np.diag([1.0, 0.0]), atol=1e-12)

    def test_scalar_rational_transfer_map(self):
        out = linearize(LINEAR_MODEL, SCALAR.generator)
        assert out.status == "linearizable"
        assert np.allclose(out.m.coeffs[:, 0, 0], 1.0)
        assert out.radius_estimate == pytest.approx(0.5)

    def test_recursion_residual(self):
        for _ in range(10):
            n = int(RNG.integers(1, 4))
            coeffs = 0.4 * (
                RNG.standard_normal((3, n, n)) + 1j * RNG.standard_normal((3, n, n))
            )
            coeffs[0] += np.diag(0.2 * RNG.standard_normal(n))
            gen = CocycleGenerator(coeffs)
            out = linearize(LINEAR_MODEL, gen, order=16)
            if out.status == "obstructed":
                continue
            b = conjugated_generator(LINEAR_MODEL, gen, 16)
            lam = LINEAR_MODEL.rate
            b0 = b.coeffs[0]
            for k in range(1, out.m.coeffs.shape[0]):
                mk = out.m.coeffs[k]
                rhs = sum(out.m.coeffs[l] @ b.coeffs[k - l] for l in range(k))
                res = operator_norm(k * lam * mk - (mk @ b0 - b0 @ mk) - rhs)
                assert res <= 1e-9

    def test_coefficient_growth_bound(self):
        # the certificate ||m_k|| <= ((C3+1)/r)^k from the geometric fit
        for _ in range(10):
            n = int(RNG.integers(2, 4))
            eigs = 0.4 * RNG.random(n) + 0.3j * RNG.standard_normal(n)
            u = random_unitary(n)
            b0 = u @ np.diag(eigs) @ u.conj().T
            coeffs = np.stack(
                [
                    b0,
                    0.5 * (RNG.standard_normal((n, n)) + 1j * RNG.standard_normal((n, n))),
                    0.5 * (RNG.standard_normal((n, n)) + 1j * RNG.standard_normal((n, n))),
                ]
            )
            out = linearize(LINEAR_MODEL, CocycleGenerator(coeffs), order=20)
            assert out.status == "linearizable"
            d = out.diagnostics
            growth = (d["C3"] + 1.0) / d["r"]
            for k in range(out.m.coeffs.shape[0]):
                assert operator_norm(out.m.coeffs[k]) <= growth**k * (1 + 1e-9)

    def test_coboundary_detection(self):
        # B(0) = 0 <=> coboundary status
        gen = CocycleGenerator.scalar([0.0, 0.3], [1.0, 0.3])  # 0.3 z / (1 + 0.3 z)
        out = linearize(LINEAR_MODEL, gen)
        assert out.status == "coboundary"
        assert operator_norm(out.b0) <= 1e-10
        shifted = CocycleGenerator.scalar([0.2, 0.3], [1.0, 0.3])
        assert linearize(LINEAR_MODEL, shifted).status == "linearizable"

    def test_near_resonance_flagged(self):
        b0 = np.diag([0.0, 1.0 + 5e-5]).astype(complex)
        gen = CocycleGenerator(np.stack([b0, 0.1 * E12]))
        out = linearize(LINEAR_MODEL, gen)
        assert out.status == "linearizable"
        assert 1 in out.diagnostics["near_resonant_k"]
        assert out.diagnostics["C1"] > 1e3


class TestReconstruction:
    def test_diagonal_demo(self):
        entry = demo_by_name("diagonal-linearizable")
        model = entry.model()
        out = linearize(model, entry.generator)
        samples = [(t, z) for t in (0.0, 0.5, 1.0, 2.0) for z in (0.25, -0.2 + 0.1j, 0.2j)]
        err = reconstruct_error(
            model, entry.generator, out, samples, guard_radius=min(out.radius_estimate, 0.6)
        )
        assert err <= 1e-6

    def test_beta_power_closed_form(self):
        entry = demo_by_name("beta-power")
        model = entry.model()
        out = linearize(model, entry.generator)
        assert out.status == "linearizable"
        assert out.b0[0, 0] == pytest.approx(-0.5, abs=1e-12)
        # transfer map is exactly 1 + c z
        assert out.m.coeffs[1, 0, 0] == pytest.approx(0.3, abs=1e-10)
        assert np.allclose(out.m.coeffs[2:], 0.0, atol=1e-10)
        err = reconstruct_error(
            model, entry.generator, out, [(0.7, 0.3), (1.5, -0.2j)], guard_radius=0.6
        )
        assert err <= 1e-8

    def test_guard_region_enforced(self):
        out = linearize(LINEAR_MODEL, SCALAR.generator)
        with pytest.raises(OutsideConvergenceRegionError):
            reconstruct_error(LINEAR_MODEL, SCALAR.generator, out, [(0.5, 0.9)])

    def test_gauge_covariance(self):
        # conjugating (M, B0) by any invertible A leaves the cocycle unchanged
        entry = demo_by_name("diagonal-linearizable")
        model = entry.model()
        out = linearize(model, entry.generator)
        a = np.array([[1.2, 0.4 - 0.2j], [0.1j, 0.9]], dtype=complex)
        b0_t = a @ out.b0 @ mat_inv(a)
        for t, z in ((0.6, 0.25), (1.2, -0.2 + 0.1j)):
            hz = model.koenigs.evaluate(z)
            wt = np.exp(-model.rate * t) * hz
            m_z, m_ftz = out.m.evaluate(hz), out.m.evaluate(wt)
            plain = mat_inv(m_ftz) @ mat_exp(t * out.b0) @ m_z
            gauged = mat_inv(a @ m_ftz) @ mat_exp(t * b0_t) @ (a @ m_z)
            assert operator_norm(plain - gauged) <= 1e-8


class TestCommutativeInterior:
    def test_constant_generator(self):
        gen = CocycleGenerator.scalar([0.7])
        assert commutative_linearize_interior(LINEAR_MODEL, gen, 0.4) == pytest.approx(1.0)

    def test_matches_series_pipeline(self):
        out = linearize(LINEAR_MODEL, SCALAR.generator)
        m_series = out.m.evaluate(LINEAR_MODEL.koenigs.evaluate(0.3))[0, 0]
        m_quad = commutative_linearize_interior(LINEAR_MODEL, SCALAR.generator, 0.3)
        assert abs(m_series - m_quad) <= 1e-6
        assert m_quad == pytest.approx(1.0 / 0.7, abs=1e-7)

    def test_normalization_at_fixed_point(self):
        assert commutative_linearize_interior(LINEAR_MODEL, SCALAR.generator, 0.0) == 1.0

    def test_rejects_expanding_rate(self):
        model = build_model(RationalMap([0.0, 1.0]), order=2)
        gen = CocycleGenerator.scalar([0.5])
        with pytest.raises(TailNotConvergingError):
            commutative_linearize_interior(model, gen, 0.3)


class TestCommutativeNoFix:
    AFFINE = RationalMap([1.0, -1.0])

    def test_zero_generator(self):
        gen = CocycleGenerator.scalar([0.0])
        assert commutative_linearize_nofix(self.AFFINE, gen, 0.4) == pytest.approx(1.0)

    def test_affine_closed_form(self):
        gen = CocycleGenerator.scalar([1.0], [1.0, -1.0])
        for z in (0.0, 0.3, -0.2 + 0.4j):
            out = commutative_linearize_nofix(self.AFFINE, gen, z)
            assert out == pytest.approx(np.exp(1.0 - 1.0 / (1.0 - z)), abs=1e-9)

    def test_constant_integrand(self):
        c = 0.8 - 0.3j
        gen = CocycleGenerator.scalar([c, -c])  # c (1 - z)
        z = 0.35 + 0.1j
        out = commutative_linearize_nofix(self.AFFINE, gen, z)
        assert out == pytest.approx(np.exp(-c * z), abs=1e-10)

    def test_pole_on_path(self):
        f = RationalMap([-0.25, 1.0])  # vanishes at 0.25
        gen = CocycleGenerator.scalar([1.0])
        with pytest.raises(PoleOnPathError):
            commutative_linearize_nofix(f, gen, 0.5)


class TestSharpnessWitness:
    def test_jordan_structure(self):
        b0 = np.diag([1.0, 2.0]).astype(complex)
        gen = sharpness_witness(b0, 1.0, 1)
        direction = gen.num[1]
        assert abs(direction[0, 1]) == pytest.approx(1.0, abs=1e-12)
        assert operator_norm(direction - direction[0, 1] * E12) <= 1e-12
        out = linearize(LINEAR_MODEL, gen)
        assert out.status == "obstructed"
        assert out.obstructed_at == 1

    def test_gap_three(self):
        b0 = np.diag([0.0, 3.0]).astype(complex)
        gen = sharpness_witness(b0, 1.0, 3)
        out = linearize(LINEAR_MODEL, gen)
        assert out.status == "obstructed"
        assert out.obstructed_at == 3

    def test_not_resonant(self):
        with pytest.raises(NotResonantError):
            sharpness_witness(np.zeros((2, 2), dtype=complex), 1.0, 1)


def test_complex_rate_spiral_semigroup():
    # spiral flow: the resonance lattice k*lam leaves the real axis
    lam = 1 + 0.5j
    model = build_model(RationalMap([0.0, -lam]))
    assert model.rate == pytest.approx(lam)
    z = 0.4
    assert model.flow(1.2, z) == pytest.approx(z * np.exp(-lam * 1.2), abs=1e-12)

    resonant = np.diag([0.1, 0.1 + 2 * lam]).astype(complex)
    rep = condition_check(resonant, lam)
    assert rep.violated_k == [2]
    assert rep.rank_route_agrees
    witness = sharpness_witness(resonant, lam, 2)
    out = linearize(model, witness)
    assert out.status == "obstructed" and out.obstructed_at == 2

    clear = np.diag([0.2, 0.6 + 0.2j]).astype(complex)
    gen = CocycleGenerator(
        np.stack([clear, 0.3 * np.array([[0.5, 1.0], [0.4, -0.2]], dtype=complex)])
    )
    outcome = linearize(model, gen)
    assert outcome.status == "linearizable"
    guard = min(outcome.radius_estimate, 0.4)
    samples = [
        (t, 0.7 * guard * np.exp(2j * np.pi * a / 3))
        for t in (0.5, 1.3)
        for a in range(3)
    ]
    err = reconstruct_error(model, gen, outcome, samples, guard_radius=guard)
    assert err <= 1e-6


def test_series_pipeline_requires_interior_fixed_point():
    from cocycle_lab.dynamics import build_boundary_model

    boundary = build_boundary_model(RationalMap([1.0, -1.0]))
    with pytest.raises(ValueError):
        linearize(boundary, SCALAR.generator)
    with pytest.raises(ValueError):
        conjugated_generator(boundary, SCALAR.generator, 8)


def test_obstructed_outcome_cannot_reconstruct():
    out = linearize(LINEAR_MODEL, JORDAN.generator)
    with pytest.raises(ValueError):
        reconstruct_error(LINEAR_MODEL, JORDAN.generator, out, [(0.5, 0.1)])


def test_round_trip_with_shifted_fixed_point():
    # everything above is centered at 0; exercise z0 != 0 end to end
    model = build_model(RationalMap([0.2, -1.0]))  # f(z) = 0.2 - z
    assert model.z0 == pytest.approx(0.2)
    num = np.zeros((2, 2, 2), dtype=complex)
    num[0] = np.diag([0.3, 0.65])
    num[1] = np.array([[0.2, 0.5], [0.1, -0.3]])
    gen = CocycleGenerator(num)
    b = conjugated_generator(model, gen, 8)
    assert np.allclose(b.coeffs[0], gen(0.2))
    out = linearize(model, gen)
    assert out.status == "linearizable"
    guard = min(out.radius_estimate, 0.4)
    samples = [
        (t, 0.2 + 0.7 * guard * np.exp(2j * np.pi * a / 3))
        for t in (0.5, 1.2)
        for a in range(3)
    ]
    err = reconstruct_error(model, gen, out, samples, guard_radius=guard)
    assert err <= 1e-6


def test_round_trip_with_nontrivial_koenigs():
    # reconstruction through h(z) = z/(1-z) exercises the conjugation path
    model = build_model(RationalMap([0.0, -1.0, 1.0]), order=32)
    coeffs = np.stack(
        [np.diag([0.2, -0.1]).astype(complex), 0.3 * np.array([[0.5, 1.0], [-0.3, 0.2]])]
    )
    gen = CocycleGenerator(coeffs)
    out = linearize(model, gen, order=32)
    assert out.status == "linearizable"
    samples = [(t, z) for t in (0.5, 1.0) for z in (0.1, -0.08 + 0.05j)]
    err = reconstruct_error(model, gen, out, samples, guard_radius=min(out.radius_estimate, 0.4))
    assert err <= 1e-5
