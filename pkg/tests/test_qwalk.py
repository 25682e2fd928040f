import cmath
import math

import numpy as np
import pytest

import cmvspec as cs
from cmvspec.qwalk import CoinStructureError, WalkError, _coin_sigmas


def random_symmetric_coin(rng):
    return cs.Coin.su2(rng.normal() + 1j * rng.normal(),
                       rng.normal() + 1j * rng.normal())


def random_u2_coin(rng):
    base = random_symmetric_coin(rng).array
    return cs.Coin.from_array(cmath.exp(1j * rng.uniform(0, 2 * math.pi)) * base)


@pytest.fixture(scope="module")
def simple_window():
    coins = [cs.Coin.phase_coin(0.5, 0.0) for _ in range(24)]
    return cs.build_walk(coins, (-12, 11))


class TestCoin:
    def test_non_unitary_rejected(self):
        with pytest.raises(CoinStructureError):
            cs.Coin(1.0, 0.0, 0.0, 0.5)

    def test_symmetric_class(self):
        rng = np.random.default_rng(2)
        assert random_symmetric_coin(rng).symmetric
        # a generic U(2) phase breaks the pattern
        c = cs.Coin.from_array(1j * random_symmetric_coin(rng).array)
        assert not c.symmetric

    def test_reflecting_is_symmetric_and_unitary(self):
        r = cs.Coin.reflecting()
        assert r.symmetric
        assert abs(r.c12) == 1.0 and r.c11 == 0.0

    def test_phase_coin_entries(self):
        c = cs.Coin.phase_coin(0.5, 0.7)
        assert abs(c.c12) == pytest.approx(0.5)
        assert np.conj(c.c21) == pytest.approx(0.5 * cmath.exp(0.7j))


class TestStepState:
    def test_permutation_coin_shifts_up_spin(self):
        # identity-like coin c11 = 1 transports |0, up> to |1, up>
        coins = [cs.Coin(1.0, 0.0, 0.0, 1.0) for _ in range(10)]
        w = cs.build_walk(coins, (0, 9))
        psi = w.basis_state(4, spin_up=True)
        out = cs.step_state(psi, w)
        expect = w.basis_state(5, spin_up=True)
        assert np.max(np.abs(out - expect)) == 0.0

    def test_three_steps_match_matrix_power(self, simple_window):
        w = simple_window
        psi = w.basis_state(0, spin_up=True)
        by_rules = psi.copy()
        for _ in range(3):
            by_rules = cs.step_state(by_rules, w)
        op = w.matrix.T
        by_matrix = np.linalg.matrix_power(op, 3) @ psi
        assert np.max(np.abs(by_rules - by_matrix)) < 1e-12

    def test_norm_preserved_long_run(self):
        coins = [cs.Coin.phase_coin(0.3, 0.2 * n) for n in range(2200)]
        w = cs.build_walk(coins, (-1100, 1099))
        psi = w.basis_state(0, spin_up=True)
        for _ in range(1000):
            psi = cs.step_state(psi, w)
        assert abs(np.linalg.norm(psi) - 1.0) < 1e-10

    def test_boundary_support_rejected(self, simple_window):
        psi = np.zeros(simple_window.dim, dtype=complex)
        psi[0] = 1.0
        with pytest.raises(WalkError, match="boundary"):
            cs.step_state(psi, simple_window)


class TestBuildWalk:
    def test_pattern_matches_update_rules(self, simple_window):
        # nonzeros exactly where the update rules put amplitudes: the stored
        # row-source matrix has (2n, 2n+2), (2n, 2n-1), (2n+1, 2n+2),
        # (2n+1, 2n-1) and nothing else
        w = simple_window
        lo = w.lo
        mask = np.zeros((w.dim, w.dim), dtype=bool)
        for n in range(w.n_lo, w.n_hi + 1):
            for (i, j) in [(2 * n, 2 * n + 2), (2 * n, 2 * n - 1),
                           (2 * n + 1, 2 * n + 2), (2 * n + 1, 2 * n - 1)]:
                if 0 <= i - lo < w.dim and 0 <= j - lo < w.dim:
                    mask[i - lo, j - lo] = True
        assert not np.any(w.matrix[~mask])

    def test_action_equivalence_random_states(self):
        rng = np.random.default_rng(8)
        coins = [random_symmetric_coin(rng) for _ in range(40)]
        w = cs.build_walk(coins, (0, 39))
        worst = 0.0
        for _ in range(100):
            psi = np.zeros(w.dim, dtype=complex)
            psi[4:-4] = rng.normal(size=w.dim - 8) + 1j * rng.normal(size=w.dim - 8)
            psi /= np.linalg.norm(psi)
            worst = max(worst, float(np.max(np.abs(
                w.apply(psi) - cs.step_state(psi, w)))))
        assert worst < 1e-12

    def test_unitary(self, simple_window):
        assert simple_window.unitarity_residual() < 1e-12

    def test_too_small_window(self):
        with pytest.raises(WalkError):
            cs.build_walk([cs.Coin.reflecting()] * 2, (0, 1))


class TestCgmvMap:
    def test_constant_real_coin_collapses(self):
        # c21 = lam real: all sigma vanish and alpha_{2n} = lam
        lam = 0.4
        coins = [cs.Coin.su2(math.sqrt(1 - lam ** 2), -lam) for _ in range(16)]
        w = cs.build_walk(coins, (0, 15))
        data = cs.cgmv_map(w)
        for n in range(1, 15):
            assert data.alphas[2 * n] == pytest.approx(lam)
            if n < 15:
                assert data.alphas[2 * n + 1] == 0.0

    def test_phases_unimodular(self):
        rng = np.random.default_rng(9)
        coins = [random_symmetric_coin(rng) for _ in range(20)]
        w = cs.build_walk(coins, (-10, 9))
        data = cs.cgmv_map(w)
        for lam in data.lambdas.values():
            assert abs(abs(lam) - 1.0) < 1e-14

    def test_recursion_rebuild(self):
        # rebuilding the phases from the coin arguments reproduces them
        rng = np.random.default_rng(10)
        coins = [random_symmetric_coin(rng) for _ in range(20)]
        w = cs.build_walk(coins, (0, 19))
        data = cs.cgmv_map(w)
        for n in range(1, 19):
            s1, s2 = _coin_sigmas(w.coin_at(n), n)
            if 2 * n + 1 in data.lambdas and 2 * n - 1 in data.lambdas:
                assert abs(data.lambdas[2 * n + 1]
                           - cmath.exp(1j * s2) * data.lambdas[2 * n - 1]) < 1e-14
            if 2 * n + 2 in data.lambdas and 2 * n in data.lambdas:
                assert abs(data.lambdas[2 * n + 2]
                           - cmath.exp(-1j * s1) * data.lambdas[2 * n]) < 1e-14

    def test_moduli_match_coin_entry(self):
        rng = np.random.default_rng(11)
        coins = [random_symmetric_coin(rng) for _ in range(16)]
        w = cs.build_walk(coins, (0, 15))
        data = cs.cgmv_map(w)
        for n in range(16):
            assert abs(data.alphas[2 * n]) == pytest.approx(
                abs(w.coin_at(n).c21), abs=1e-14)

    def test_vanishing_diagonal_named(self):
        coins = [cs.Coin.phase_coin(0.5, 0.0) for _ in range(10)]
        coins[4] = cs.Coin.reflecting()
        w = cs.build_walk(coins, (0, 9))
        with pytest.raises(WalkError, match="site 4"):
            cs.cgmv_map(w)

    def test_theorem_coin_model_matches_period_two_alphas(self, h_cos, golden):
        # coin with c21 = lam * e^{-i d h(x + n w)}: the CMV image is the
        # period-two family over the halved frequency
        lam, delta = 0.5, 0.3
        coins = cs.coin_sequence(lam, h_cos, [golden], delta, 0, 19)
        w = cs.build_walk(coins, (0, 19))
        data = cs.cgmv_map(w)
        model = cs.period_two_model(lam, 0.0, h_cos, [golden / 2], delta=delta)
        expect = model.alpha_sequence(39)
        for n in range(1, 19):
            assert data.alphas[2 * n] == pytest.approx(expect[2 * n], abs=1e-12)


class TestVerifyCgmv:
    def test_constant_coin(self):
        coins = [cs.Coin.phase_coin(0.5, 0.0) for _ in range(32)]
        w = cs.build_walk(coins, (0, 31))
        assert cs.verify_cgmv(w) < 1e-12

    def test_quasiperiodic_coin_model(self, h_cos, golden):
        coins = cs.coin_sequence(0.5, h_cos, [golden], 0.4, -16, 15)
        w = cs.build_walk(coins, (-16, 15))
        assert cs.verify_cgmv(w) < 1e-12

    def test_general_u2_coins_also_conjugate(self):
        rng = np.random.default_rng(13)
        coins = [random_u2_coin(rng) for _ in range(24)]
        w = cs.build_walk(coins, (0, 23))
        assert cs.verify_cgmv(w) < 1e-12

    def test_broken_phase_recursion_detected(self):
        rng = np.random.default_rng(14)
        coins = [random_symmetric_coin(rng) for _ in range(24)]
        w = cs.build_walk(coins, (0, 23))
        data = cs.cgmv_map(w)
        lam = data.phase_diagonal()
        bad = dict(data.lambdas)
        mid = 2 * 12 + 1
        bad[mid] = bad[mid] * cmath.exp(0.3j)  # corrupt one phase
        lam_bad = np.diag([bad[p] for p in range(w.lo, w.hi + 1)])
        cmv = cs.extended_cmv_block(data.alphas, w.lo, w.hi)
        resid = lam_bad.conj().T @ w.matrix @ lam_bad - cmv
        inner = np.max(np.abs(resid[4:-4, 4:-4]))
        assert inner > 1e-2

    def test_window_spectrum_equals_cmv_spectrum(self):
        rng = np.random.default_rng(15)
        coins = [random_symmetric_coin(rng) for _ in range(24)]
        w = cs.build_walk(coins, (0, 23))
        data = cs.cgmv_map(w)
        cmv = cs.extended_cmv_block(data.alphas, w.lo, w.hi)
        ev_w = np.sort_complex(np.linalg.eigvals(w.matrix))
        ev_c = np.sort_complex(np.linalg.eigvals(cmv))
        assert np.max(np.abs(ev_w - ev_c)) < 1e-10


class TestWalkSpectrum:
    def test_flat_phase_gaps(self, golden):
        # lam = 1/2, h = 0: gaps around 0 and pi with edges pi/6 off
        sc, gaps, meta = cs.walk_spectrum(0.5, cs.FourierPoly.zero(1), [golden],
                                          0.0, n_points=256, n_iter=50_000)
        assert meta["frequency_realignment"] == "omega_cmv = omega_walk / 2"
        assert len(gaps) == 2
        zero_gap = min(gaps, key=lambda g: abs(g.theta_minus + g.theta_plus) / 2)
        pi_gap = max(gaps, key=lambda g: (g.theta_minus + g.theta_plus) / 2)
        assert zero_gap.theta_plus == pytest.approx(math.pi / 6, abs=1e-3)
        assert pi_gap.theta_minus == pytest.approx(math.pi - math.pi / 6, abs=1e-3)
        assert pi_gap.half_shift and not zero_gap.half_shift

    def test_small_modulus_spectrum_fills_circle(self, golden):
        sc, gaps, _ = cs.walk_spectrum(0.02, cs.FourierPoly.zero(1), [golden],
                                       0.0, n_points=128, n_iter=20_000)
        assert gaps == []

    def test_quasiperiodic_phases_open_labelled_gaps(self, h_cos, golden):
        sc, gaps, _ = cs.walk_spectrum(0.5, h_cos, [golden], 0.05,
                                       n_points=256, n_iter=100_000)
        assert any(not g.half_shift for g in gaps)
        assert any(g.half_shift for g in gaps)
