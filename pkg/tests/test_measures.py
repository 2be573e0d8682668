import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from nonclassical import fock as F
from nonclassical import measures as M
from nonclassical.checks import pure_battery, random_moments, scan_max_variance
from nonclassical.errors import InternalConsistencyError, NotADistributionError
from nonclassical.roof import photon_added_thermal

coord = st.floats(-2.0, 2.0, allow_nan=False)


def qfi_grid(rho, mus):
    """Brute-force F(mu) from the spectral formula with an explicit X_mu."""
    D = rho.cutoff + 2
    lam, V = np.linalg.eigh(rho.padded(D).entries)
    a = F.annihilation(D)
    out = []
    for mu in mus:
        X = 1j * (np.exp(-1j * mu) * a.conj().T - np.exp(1j * mu) * a) / math.sqrt(2)
        Xe = V.conj().T @ X @ V
        tot = 0.0
        for k in range(D):
            for l in range(D):
                s = lam[k] + lam[l]
                if s > 1e-12:
                    tot += 2 * (lam[k] - lam[l]) ** 2 / s * abs(Xe[k, l]) ** 2
        out.append(tot)
    return np.array(out)


class TestPureMeasure:
    def test_coherent_is_zero(self):
        assert M.ort_pure(F.Moments(2.25, 1.5, 2.25)) == 0.0

    def test_fock_like(self):
        assert M.ort_pure(F.Moments(3, 0, 0)) == 3.0

    def test_squeezed_vacuum_r1(self):
        m = F.moments_pure(F.make_squeezed_vacuum(1.0))
        assert M.ort_pure(m) == pytest.approx(3.1945280494653251, abs=1e-9)

    def test_clamp(self):
        assert M.clamp_nonnegative(-1e-12) == 0.0
        with pytest.raises(InternalConsistencyError):
            M.clamp_nonnegative(-1e-6)

    def test_vacuum_variance(self):
        m = F.Moments(0, 0, 0)
        assert M.quadrature_variance(m, 0.7) == pytest.approx(0.5)

    def test_anti_squeezed_variance(self):
        r, th = 0.9, 0.6
        m = F.Moments(math.sinh(r) ** 2, 0, -np.exp(1j * th) * math.cosh(r) * math.sinh(r))
        mu = M.optimal_quadrature_angle(m)
        assert M.quadrature_variance(m, mu) == pytest.approx(math.exp(2 * r) / 2, rel=1e-12)

    def test_grid_scan_oracle(self, rng):
        for _ in range(25):
            m = random_moments(rng)
            assert abs(scan_max_variance(m) - (M.ort_pure(m) + 0.5)) < 1e-9

    @given(coord, coord)
    def test_displacement_invariance(self, br, bi):
        m = F.moments_pure(F.make_cat(1.1, "odd"))
        assert M.ort_pure(m.displaced(complex(br, bi))) == pytest.approx(M.ort_pure(m), abs=1e-9)

    def test_q_measure(self):
        assert M.measure_Q_pure(F.moments_pure(F.make_coherent(1.2))) == pytest.approx(0, abs=1e-9)
        assert M.measure_Q_pure(F.moments_pure(F.make_fock(3))) == pytest.approx(6)
        sv = F.make_squeezed_vacuum(math.asinh(math.sqrt(3)))
        assert M.measure_Q_pure(F.moments_pure(sv)) == pytest.approx(6, abs=1e-9)
        cat = F.moments_pure(F.make_cat(2, "even"))
        assert M.measure_Q_pure(cat) == pytest.approx(2 * cat.nbar, abs=1e-12)


class TestQFI:
    def test_coherent_saturates_sql(self):
        F_X, _ = M.qfi_quadrature(F.make_coherent(1 + 1j).projector())
        assert F_X == pytest.approx(2.0, abs=1e-9)

    def test_fock_one(self):
        F_X, _ = M.qfi_quadrature(F.make_fock(1).projector())
        assert F_X == pytest.approx(6.0, abs=1e-12)

    def test_thermal(self):
        nth = 1.0
        p = (nth / (nth + 1)) ** np.arange(80) / (nth + 1)
        F_X, _ = M.qfi_quadrature(F.DensityMatrix.diagonal(p / p.sum()))
        assert F_X == pytest.approx(2 / (2 * nth + 1), abs=1e-9)
        assert M.metrological_power(F.DensityMatrix.diagonal(p / p.sum())) == 0.0

    @pytest.mark.parametrize("name,state", pure_battery())
    def test_pure_qfi_is_four_times_max_variance(self, name, state):
        F_X, _ = M.qfi_quadrature(state.projector())
        m = F.moments_pure(state)
        assert F_X == pytest.approx(4 * (M.ort_pure(m) + 0.5), abs=1e-8)

    def test_closed_form_angle_dependence(self, rng):
        rho = F.DensityMatrix.mixture([0.3, 0.7], [F.make_squeezed_vacuum(0.4, 1.0), F.make_cat(0.9, "odd")])
        mus = rng.uniform(0, np.pi, 6)
        ref = qfi_grid(rho, mus)
        got = [M.qfi_quadrature_at(rho, mu) for mu in mus]
        np.testing.assert_allclose(got, ref, atol=1e-10)
        F_X, mu = M.qfi_quadrature(rho)
        assert qfi_grid(rho, [mu])[0] == pytest.approx(F_X, abs=1e-10)
        assert F_X >= ref.max() - 1e-10

    def test_optimal_angle_range(self):
        _, mu = M.qfi_quadrature(F.make_squeezed_vacuum(0.5, 2.0).projector())
        assert 0 <= mu < 2 * np.pi


class TestMetrologicalPower:
    @pytest.mark.parametrize("name,state", pure_battery())
    def test_equals_measure_on_pure_states(self, name, state):
        rep = M.measure_pure(state)
        assert abs(rep.W - rep.N) < 1e-8

    def test_coherent_zero(self):
        assert M.metrological_power(F.make_coherent(0.7j)) == pytest.approx(0, abs=1e-9)

    def test_diagonal_fock(self):
        p = np.zeros(8)
        p[5] = 1
        assert M.metrological_power_diagonal(p) == pytest.approx(5)

    def test_diagonal_thermal_is_zero(self):
        p = 0.5 ** np.arange(60)
        assert M.metrological_power_diagonal(p / p.sum()) == 0.0

    def test_diagonal_rejects_bad_input(self):
        with pytest.raises(NotADistributionError):
            M.metrological_power_diagonal([0.5, 0.6])
        with pytest.raises(NotADistributionError):
            M.metrological_power_diagonal([1.2, -0.2])

    def test_photon_added_thermal_sides(self):
        assert M.metrological_power_diagonal(photon_added_thermal(0.3).p) > 0
        assert M.metrological_power_diagonal(photon_added_thermal(0.6).p) == 0

    @given(st.lists(st.floats(0, 1), min_size=2, max_size=40))
    def test_diagonal_formula_matches_qfi(self, weights):
        p = np.array(weights)
        if p.sum() < 1e-3:
            return
        p = p / p.sum()
        diag = M.metrological_power_diagonal(p)
        full = M.metrological_power(F.DensityMatrix.diagonal(p))
        assert diag == pytest.approx(full, abs=1e-8)


class TestMZI:
    def test_no_reference(self):
        rho = F.make_squeezed_vacuum(0.8).projector()
        z = M.mzi_qfi(rho, 0)
        assert z.F_theta == pytest.approx(math.sinh(0.8) ** 2, abs=1e-10)

    def test_coherent_is_sql(self):
        rho = F.make_coherent(1.3).projector()
        z = M.mzi_qfi(rho, 2.0)
        assert z.F_theta == pytest.approx(z.N_total, abs=1e-9)

    def test_squeezed_beats_sql_and_grows(self):
        ratios = []
        for r in (0.5, 1.0, 1.5):
            z = M.mzi_qfi(F.make_squeezed_vacuum(r).projector(), math.sqrt(10))
            assert z.F_theta > z.N_total
            ratios.append(z.F_theta / z.N_total)
        assert ratios == sorted(ratios)

    @given(st.floats(0.0, 20.0))
    def test_monotone_in_reference_power(self, ar2):
        rho = F.make_cat(1.2, "even").projector()
        F_X, _ = M.qfi_quadrature(rho)
        lo = M.mzi_qfi(rho, math.sqrt(ar2), F_X=F_X).F_theta
        hi = M.mzi_qfi(rho, math.sqrt(ar2 + 1.0), F_X=F_X).F_theta
        assert hi > lo

    def test_slope_one_at_sql(self):
        rho = F.make_coherent(0.9).projector()
        a = M.mzi_qfi(rho, 1.0, F_X=2.0)
        b = M.mzi_qfi(rho, 2.0, F_X=2.0)
        assert (b.F_theta - a.F_theta) == pytest.approx(b.N_total - a.N_total)
