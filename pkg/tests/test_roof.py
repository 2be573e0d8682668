import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from nonclassical import fock as F
from nonclassical import measures as M
from nonclassical import roof as R
from nonclassical.checks import pure_battery, random_diagonal, random_isometry
from nonclassical.errors import (
    DimensionMismatchError,
    DimensionTooLargeError,
    NoSignChangeError,
    NotADistributionError,
    NotIsometryError,
    TailMassExceededError,
)


class TestTypes:
    def test_mixture_validation(self):
        with pytest.raises(NotADistributionError):
            R.DiagonalFockMixture([0.5, 0.4])
        with pytest.raises(NotADistributionError):
            R.DiagonalFockMixture([1.5, -0.5])
        p = R.DiagonalFockMixture([0.25, 0.75])
        assert p.L == 1 and p.nbar == 0.75
        assert p.density().cutoff == 4

    def test_isometry_check(self):
        with pytest.raises(NotIsometryError):
            R.check_isometry(np.ones((2, 3)))
        with pytest.raises(NotIsometryError):
            R.check_isometry(np.eye(3, 2))
        R.check_isometry(np.eye(2, 5))

    def test_decompose_shape_mismatch(self):
        with pytest.raises(DimensionMismatchError):
            R.decompose(R.two_fock(1, 0.5), np.eye(2, 4))


class TestDecomposition:
    def test_identity_is_eigen_ensemble(self):
        p = R.DiagonalFockMixture([0.2, 0.5, 0.3])
        ens = R.decompose(p, np.eye(3))
        np.testing.assert_allclose(ens.weights, [0.2, 0.5, 0.3])
        assert R.objective(ens) == pytest.approx(p.nbar, abs=1e-14)

    @pytest.mark.parametrize("n,p", [(1, 0.3), (2, 0.3), (3, 0.8)])
    def test_isometry_attains_closed_form(self, n, p):
        ens = R.decompose(R.two_fock(n, p), R.two_fock_isometry(n))
        assert len(ens) == 4
        assert R.objective(ens) == pytest.approx(R.closed_form_two_fock(n, p), abs=1e-12)

    def test_known_value(self):
        assert R.closed_form_two_fock(2, 0.3) == pytest.approx(2.07)
        assert R.objective(R.decompose(R.two_fock(2, 0.3), R.two_fock_isometry(2))) == pytest.approx(2.07)

    def test_other_angles_are_worse(self):
        n, p = 2, 0.4
        best = R.closed_form_two_fock(n, p)
        for th in (0.1, 0.5, 1.2):
            val = R.objective(R.decompose(R.two_fock(n, p), R.two_fock_isometry(n, th)))
            assert val >= best - 1e-12

    def test_reconstruction_of_full_rank_state(self, rng):
        rho = F.DensityMatrix.mixture([0.4, 0.6], [F.make_cat(1.0, "even"), F.make_squeezed_vacuum(0.3)])
        lam, _ = R._eigen(rho)
        U = random_isometry(rng, lam.size, lam.size + 3)
        rec = R.decompose(rho, U).reconstruct()
        D = rho.cutoff
        np.testing.assert_allclose(rec[:D, :D], rho.entries, atol=1e-10)

    @given(st.integers(1, 6), st.integers(0, 6), st.integers(0, 2**31 - 1))
    @settings(max_examples=30)
    def test_sum_rules(self, L, extra, seed):
        rng = np.random.default_rng(seed)
        p = random_diagonal(rng, L)
        U = random_isometry(rng, L + 1, L + 1 + extra)
        sn, sa, sx = R.diagonal_sum_rules(p, U)
        assert abs(sn - p.nbar) < 1e-10
        assert abs(sa) < 1e-10
        assert abs(sx) < 1e-10

    @given(st.integers(0, 2**31 - 1))
    @settings(max_examples=20)
    def test_any_ensemble_bounds_the_average_energy(self, seed):
        rng = np.random.default_rng(seed)
        p = random_diagonal(rng, 4)
        val = R.objective(R.decompose(p, random_isometry(rng, 5, 8)))
        assert val <= p.nbar + 1e-10
        assert val >= 0


class TestMinimize:
    @pytest.mark.parametrize("n,p", [(1, 0.2), (2, 0.5), (3, 0.9)])
    def test_two_fock(self, n, p):
        res = R.minimize(R.two_fock(n, p), K=7, restarts=8, seed=3)
        assert res.n_upper == pytest.approx(R.closed_form_two_fock(n, p), abs=1e-4)
        assert res.ensemble.reconstruct()[: n + 2, : n + 2] == pytest.approx(np.diag(R.two_fock(n, p).p), abs=1e-9)

    def test_unpacking(self):
        n_upper, ens = R.minimize(R.two_fock(1, 0.5), K=3, restarts=2)
        assert R.objective(ens) == pytest.approx(n_upper, abs=1e-9)

    def test_seed_determinism(self):
        a = R.minimize(R.two_fock(2, 0.4), K=5, restarts=4, seed=11)
        b = R.minimize(R.two_fock(2, 0.4), K=5, restarts=4, seed=11)
        assert a.restart_values == b.restart_values
        assert a.n_upper == b.n_upper

    def test_more_members_never_hurt(self):
        vals = [R.minimize(R.two_fock(1, 0.5), K=K, restarts=8, seed=0).n_upper for K in (1, 3, 7)]
        assert vals[1] <= vals[0] + 1e-6 and vals[2] <= vals[1] + 1e-6

    def test_upper_bound_chain(self, rng):
        battery = pure_battery()
        for _ in range(4):
            i, j = rng.choice(len(battery), size=2, replace=False)
            w = float(rng.uniform(0.1, 0.9))
            rho = F.DensityMatrix.mixture([w, 1 - w], [battery[i][1], battery[j][1]])
            res = R.minimize(rho, restarts=4, seed=0)
            W = M.metrological_power(rho)
            assert W <= res.n_upper + 1e-6
            # the eigen-ensemble is a feasible point, so the optimum can only be lower
            assert res.n_upper <= res.restart_values[0] + 1e-12

    def test_pure_state_has_measure(self):
        s = F.make_cat(1.3, "odd")
        res = R.minimize(s.projector(), restarts=2)
        assert res.n_upper == pytest.approx(M.ort_pure(F.moments_pure(s)), abs=1e-9)

    def test_gapped_state_is_trivial(self):
        p = np.zeros(9)
        p[[0, 4, 8]] = [0.3, 0.3, 0.4]
        res = R.minimize(R.DiagonalFockMixture(p), restarts=2)
        assert res.n_upper == pytest.approx(0.3 * 4 + 0.4 * 8, abs=1e-12)
        assert res.n_evals == 0

    def test_too_few_members(self):
        with pytest.raises(DimensionMismatchError):
            R.minimize(R.two_fock(1, 0.5), K=0)

    def test_support_cap(self):
        with pytest.raises(DimensionTooLargeError):
            R.minimize(R.thermal(3.0, D=96, tail_tol=1.0), restarts=1)

    def test_trimmed_support(self):
        res = R.minimize(R.thermal(0.2), restarts=1, cap=6, support_tol=1e-3)
        assert res.support > 6
        assert 0 < res.trimmed_mass < 1e-3
        # thermal states are classical, so the bound sits near zero
        assert res.n_upper < 1e-3

    def test_bad_restarts(self):
        with pytest.raises(ValueError):
            R.minimize(R.two_fock(1, 0.5), restarts=0)


class TestExamples:
    def test_photon_added_thermal_distribution(self):
        p = R.photon_added_thermal(0.7)
        assert p.p[0] == 0
        assert p.nbar == pytest.approx(2 * 0.7 + 1, abs=1e-10)

    def test_phase_damped_vacuum(self):
        p = R.phase_damped_squeezed_vacuum(0.0)
        assert p.p[0] == 1.0

    def test_phase_damped_energy(self):
        p = R.phase_damped_squeezed_vacuum(0.5)
        assert np.all(p.p[1::2] == 0)
        assert p.nbar == pytest.approx(math.sinh(0.5) ** 2, abs=1e-9)

    def test_tail_guard(self):
        with pytest.raises(TailMassExceededError):
            R.phase_damped_squeezed_vacuum(1.0, D=20)

    def test_bad_parameters(self):
        with pytest.raises(ValueError):
            R.photon_added_thermal(0.0)
        with pytest.raises(ValueError):
            R.closed_form_two_fock(1, 1.5)


class TestThreshold:
    def test_value(self):
        assert R.w_threshold() == pytest.approx(0.456692983603066, abs=1e-7)

    def test_frozen_sums(self):
        assert R.photon_added_thermal_w_sum(0.3) == pytest.approx(0.156467548536111911, abs=1e-12)
        assert R.photon_added_thermal_w_sum(0.6) == pytest.approx(-0.0913743196599884367, abs=1e-12)

    def test_no_sign_change(self):
        with pytest.raises(NoSignChangeError):
            R.w_threshold((0.6, 0.9))

    def test_tolerance(self):
        coarse = R.w_threshold(tol=1e-3)
        assert abs(coarse - 0.456692983603066) < 1e-3
