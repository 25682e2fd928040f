import cmath
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

import cmvspec as cs
from cmvspec.cocycle import (CAYLEY_M, CAYLEY_M_INV, CocycleError,
                             constant_step_generator)

from conftest import random_su11


class TestSzegoStep:
    def test_free_coefficient_is_diagonal(self):
        theta = 1.3
        m = cs.szego_step(0.0, theta)
        assert m.a == pytest.approx(cmath.exp(0.5j * theta))
        assert m.b == 0

    def test_half_alpha_at_pi(self):
        m = cs.szego_step(0.5, math.pi)
        assert m.a == pytest.approx(1.1547005j, abs=1e-7)
        assert m.b == pytest.approx(0.5773503j, abs=1e-7)
        assert abs(m.a) ** 2 - abs(m.b) ** 2 == pytest.approx(1.0, abs=1e-12)

    @given(st.floats(0, 0.95), st.floats(0, 2 * math.pi - 1e-9),
           st.floats(0, 2 * math.pi))
    @settings(max_examples=60, deadline=None)
    def test_unimodular_determinant(self, r, phase, theta):
        m = cs.szego_step(r * cmath.exp(1j * phase), theta)
        assert m.det() == pytest.approx(1.0, abs=1e-12)

    def test_disc_boundary_rejected(self):
        with pytest.raises(Exception):
            cs.szego_step(1.0, 0.3)


class TestTwoStep:
    def test_lambda2_zero_reduction(self, h_cos, golden):
        m = cs.period_two_model(0.5, 0.0, h_cos, golden, delta=0.0)
        theta = 0.9
        t = cs.two_step(m, theta)
        pref = 1.0 / math.sqrt(1.0 - 0.25)
        assert t.a == pytest.approx(pref * cmath.exp(1j * theta), abs=1e-12)
        assert t.b == pytest.approx(-pref * 0.5 * cmath.exp(-1j * theta), abs=1e-12)

    def test_free_case(self, h_cos, golden):
        m = cs.period_two_model(1e-12, 0.0, h_cos, golden)
        t = cs.two_step(m, 1.1)
        assert t.a == pytest.approx(cmath.exp(1.1j), abs=1e-9)

    def test_matches_product_of_steps(self, h_cos, golden):
        m = cs.period_two_model(0.5, 0.3, h_cos, golden, delta=0.7)
        x = np.array([0.123])
        theta = 1.1
        seq = m.alpha_sequence(2, x0=x)
        product = cs.szego_step(seq[0], theta) @ cs.szego_step(seq[1], theta)
        t = cs.two_step(m, theta, x=x)
        assert np.max(np.abs(t.array - product.array)) < 1e-10

    def test_wrong_kind_rejected(self, qp_half):
        with pytest.raises(CocycleError):
            cs.two_step(qp_half, 0.5)


class TestIterate:
    def test_zero_steps_identity(self, golden):
        m = cs.iterate(lambda x: cs.szego_step(0.3, 1.0), [0.0], [golden], 0)
        assert m.a == 1.0 and m.b == 0.0

    def test_constant_cocycle_is_power(self, golden):
        m0 = cs.SU11Matrix(math.cosh(0.4) * cmath.exp(0.3j),
                           math.sinh(0.4) * cmath.exp(-0.2j))
        acc = cs.iterate(lambda x: m0, [0.0], [golden], 3)
        expect = m0 @ m0 @ m0
        assert np.max(np.abs(acc.array - expect.array)) < 1e-12

    def test_two_szego_steps_equal_two_step(self, h_cos, golden):
        # the ordered two-step cocycle product is conjugate to the closed
        # form (factors in swapped order), so all invariants coincide
        m = cs.period_two_model(0.4, 0.2, h_cos, golden, delta=0.3)
        theta = 2.2
        seq = m.alpha_sequence(200)

        def step(x):
            n = step.count
            step.count += 1
            return cs.szego_step(seq[n], theta)

        step.count = 0
        acc = cs.iterate(step, m.base_point, m.omega.vector, 2)
        t = cs.two_step(m, theta)
        assert acc.trace() == pytest.approx(t.trace(), abs=1e-10)
        assert acc.det() == pytest.approx(t.det(), abs=1e-10)
        ev_acc = sorted(np.linalg.eigvals(acc.array), key=lambda z: z.imag)
        ev_t = sorted(np.linalg.eigvals(t.array), key=lambda z: z.imag)
        assert np.max(np.abs(np.array(ev_acc) - np.array(ev_t))) < 1e-10

    def test_long_product_drift_controlled(self, h_cos, golden):
        # band-interior products stay bounded, so the group constraint is the
        # only thing at risk; renormalization keeps it to 1e-6 over 2e5 factors
        m = cs.quasiperiodic_model(0.5, h_cos, golden, delta=0.1)
        seq = m.alpha_sequence(200_000)
        theta = math.pi  # band center

        def step(x):
            n = step.count
            step.count += 1
            return cs.szego_step(seq[n], theta)

        step.count = 0
        acc = cs.iterate(step, m.base_point, m.omega.vector, 200_000)
        assert abs(acc.det() - 1.0) < 1e-6


class TestToSL2:
    def test_identity(self):
        s = cs.to_sl2(cs.SU11Matrix.identity())
        assert np.allclose(s.array, np.eye(2))

    def test_diagonal_becomes_rotation(self):
        phi = 0.7
        s = cs.to_sl2(cs.SU11Matrix(cmath.exp(1j * phi), 0.0))
        # conjugation oracle evaluated symbolically: M^-1 diag M
        oracle = CAYLEY_M_INV @ np.diag([cmath.exp(1j * phi),
                                         cmath.exp(-1j * phi)]) @ CAYLEY_M
        assert np.max(np.abs(s.array - oracle.real)) < 1e-12
        assert s.array[0, 0] == pytest.approx(math.cos(phi))

    def test_product_homomorphism(self):
        rng = np.random.default_rng(3)
        for _ in range(20):
            a, b = random_su11(rng), random_su11(rng)
            lhs = cs.to_sl2(a @ b).array
            rhs = cs.to_sl2(a).array @ cs.to_sl2(b).array
            assert np.max(np.abs(lhs - rhs)) < 1e-12

    def test_preserves_trace_and_det(self):
        rng = np.random.default_rng(4)
        for _ in range(20):
            m = random_su11(rng)
            s = cs.to_sl2(m)
            assert s.trace() == pytest.approx(m.trace(), abs=1e-12)
            assert s.det() == pytest.approx(1.0, abs=1e-12)


class TestDiagonalize:
    def test_already_diagonal(self):
        u, rho = cs.diagonalize_su11(cs.SU11Generator(1.0, 0.0))
        assert rho == 1.0
        assert u.a == 1.0 and u.b == 0.0

    def test_reference_point(self):
        # t=2, z=1: rho = sqrt(3) and the conjugator norm satisfies
        # norm(U)^2 = (|t|+|z|)/rho = 3/sqrt(3) = sqrt(3)
        g = cs.SU11Generator(2.0, 1.0)
        u, rho = cs.diagonalize_su11(g)
        assert rho == pytest.approx(math.sqrt(3.0))
        conj = np.linalg.inv(u.array) @ g.array @ u.array
        assert np.max(np.abs(conj - np.diag([1j * rho, -1j * rho]))) < 1e-10
        norm2 = np.linalg.norm(u.array, 2) ** 2
        assert norm2 == pytest.approx(math.sqrt(3.0), abs=1e-8)

    def test_random_elliptic_residuals(self):
        rng = np.random.default_rng(5)
        for _ in range(200):
            z = rng.normal() + 1j * rng.normal()
            t = abs(z) + rng.uniform(0.05, 3.0)
            g = cs.SU11Generator(t, z)
            u, rho = cs.diagonalize_su11(g)
            conj = np.linalg.inv(u.array) @ g.array @ u.array
            assert np.max(np.abs(conj - np.diag([1j * rho, -1j * rho]))) < 1e-10
            norm2 = np.linalg.norm(u.array, 2) ** 2
            assert norm2 == pytest.approx((abs(t) + abs(z)) / rho, abs=1e-8)

    def test_non_elliptic_rejected(self):
        with pytest.raises(CocycleError, match="not elliptic"):
            cs.diagonalize_su11(cs.SU11Generator(0.5, 1.0))

    def test_negative_rotation_direction_rejected(self):
        with pytest.raises(CocycleError, match="t < 0"):
            cs.diagonalize_su11(cs.SU11Generator(-2.0, 1.0))


class TestConstantEigenvalues:
    def test_qp_band_center(self):
        lo, hi = cs.eigenvalues_qp_constant(0.5, math.pi)
        assert lo == pytest.approx(1j) and hi == pytest.approx(-1j)

    def test_qp_gap_pair(self):
        lo, hi = cs.eigenvalues_qp_constant(0.5, 0.0)
        assert lo == pytest.approx(1.7320508, abs=1e-7)
        assert hi == pytest.approx(0.5773503, abs=1e-7)
        assert lo * hi == pytest.approx(1.0, abs=1e-12)

    def test_free_case(self):
        theta = 0.9
        lo, hi = cs.eigenvalues_qp_constant(0.0, theta)
        assert lo == pytest.approx(cmath.exp(0.5j * theta))
        assert hi == pytest.approx(cmath.exp(-0.5j * theta))

    def test_matches_actual_matrix(self):
        for lam, theta in [(0.3, 1.0), (0.5, 2.8), (0.7, 0.2)]:
            ev = np.linalg.eigvals(cs.szego_step(lam, theta).array)
            expect = cs.eigenvalues_qp_constant(lam, theta)
            got = sorted(ev, key=lambda z: (round(z.imag, 9), z.real))
            want = sorted(expect, key=lambda z: (round(z.imag, 9), z.real))
            assert np.max(np.abs(np.array(got) - np.array(want))) < 1e-10

    def test_p2_free(self):
        lo, hi = cs.eigenvalues_p2_constant(0.0, 0.0, math.pi / 2)
        assert lo == pytest.approx(1j) and hi == pytest.approx(-1j)

    def test_p2_real_pair(self):
        lo, hi = cs.eigenvalues_p2_constant(0.5, 0.3, 0.0)
        c = 1.15 / math.sqrt(0.75 * 0.91)
        assert c == pytest.approx(1.3921, abs=1e-4)
        assert lo.imag == 0 and lo * hi == pytest.approx(1.0, abs=1e-12)

    def test_p2_lambda2_zero_consistency(self, h_cos, golden):
        # with the odd modulus off, the double-step matrix of the model has
        # exactly these eigenvalues
        m = cs.period_two_model(0.6, 0.0, h_cos, golden, delta=0.0)
        theta = 2.0
        ev = np.linalg.eigvals(cs.two_step(m, theta).array)
        expect = cs.eigenvalues_p2_constant(0.6, 0.0, theta)
        assert abs(sum(ev) - sum(expect)) < 1e-10
        c = math.cos(theta) / math.sqrt(1 - 0.36)
        assert sum(expect).real / 2 == pytest.approx(c, abs=1e-12)


class TestGroupInvariants:
    @given(st.integers(0, 10 ** 6))
    @settings(max_examples=30, deadline=None)
    def test_structure_preserved_by_products(self, seed):
        rng = np.random.default_rng(seed)
        acc = cs.SU11Matrix.identity()
        for _ in range(20):
            acc = acc @ random_su11(rng, scale=0.5)
        assert abs(acc.det() - 1.0) < 1e-10 * max(1.0, abs(acc.a) ** 2)

    def test_generator_matches_step_eigenvectors(self):
        step = cs.szego_step(0.5, 2.0)
        gen = constant_step_generator(step)
        u, rho = cs.diagonalize_su11(gen)
        conj = np.linalg.inv(u.array) @ step.array @ u.array
        assert abs(conj[0, 1]) < 1e-10 and abs(conj[1, 0]) < 1e-10
        assert conj[0, 0].imag > 0
