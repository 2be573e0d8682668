import math

import numpy as np
import numpy.testing as npt
import pytest
from hypothesis import given
from hypothesis import strategies as st
from scipy.linalg import expm

from nonclassical import fock as F
from nonclassical.errors import (
    CutoffCapExceededError,
    CutoffTooSmallError,
    NotADensityMatrixError,
    NotNormalizedError,
    TailMassExceededError,
    ZeroNormError,
)

amplitude = st.floats(-2.0, 2.0, allow_nan=False)


def dense_displace(c, beta, work):
    """Dense expm oracle on a large working space."""
    a = F.annihilation(work)
    v = np.zeros(work, dtype=complex)
    v[: c.size] = c
    return expm(beta * a.conj().T - np.conj(beta) * a) @ v


class TestContainers:
    def test_pure_state_requires_unit_norm(self):
        with pytest.raises(NotNormalizedError):
            F.PureFockState(np.array([1.0, 1.0]))

    def test_from_unnormalized(self):
        s = F.PureFockState.from_unnormalized([3, 4j])
        npt.assert_allclose(s.amplitudes, [0.6, 0.8j])

    def test_zero_norm(self):
        with pytest.raises(ZeroNormError):
            F.PureFockState.from_unnormalized([0, 0, 0])

    def test_amplitudes_are_read_only(self):
        s = F.make_fock(1)
        with pytest.raises(ValueError):
            s.amplitudes[0] = 1.0

    def test_density_rejects_non_hermitian(self):
        with pytest.raises(NotADensityMatrixError):
            F.DensityMatrix(np.array([[0.5, 0.1], [0.0, 0.5]]))

    def test_density_rejects_bad_trace_and_negative(self):
        with pytest.raises(NotADensityMatrixError):
            F.DensityMatrix(np.diag([0.5, 0.6]))
        with pytest.raises(NotADensityMatrixError):
            F.DensityMatrix(np.diag([1.2, -0.2]))

    def test_mixture_pads_to_common_cutoff(self):
        rho = F.DensityMatrix.mixture([0.5, 0.5], [F.make_fock(0), F.make_fock(3)])
        assert rho.cutoff == 6
        npt.assert_allclose(np.diag(rho.entries).real, [0.5, 0, 0, 0.5, 0, 0])

    def test_moments_cauchy_schwarz(self):
        with pytest.raises(ValueError):
            F.Moments(1.0, 2.0, 0.0)


class TestConstructors:
    def test_fock_default_cutoff_and_guard(self):
        assert F.make_fock(4).cutoff == 7
        with pytest.raises(CutoffTooSmallError):
            F.make_fock(4, D=5)

    def test_coherent_vacuum(self):
        s = F.make_coherent(0)
        assert s.cutoff == F.D_MIN
        npt.assert_allclose(s.amplitudes, [1, 0, 0])

    @pytest.mark.parametrize("alpha", [0.3, 1.0, 1.5 - 0.5j, 3.0])
    def test_coherent_moments(self, alpha):
        m = F.moments_pure(F.make_coherent(alpha))
        assert m.nbar == pytest.approx(abs(alpha) ** 2, abs=1e-10)
        assert m.alpha == pytest.approx(alpha, abs=1e-10)
        assert m.xi == pytest.approx(alpha**2, abs=1e-10)

    def test_coherent_tail_below_tolerance(self):
        s = F.make_coherent(2.0)
        assert s.tail_mass() < F.TAIL_TOL

    def test_explicit_cutoff_too_small_raises(self):
        with pytest.raises(TailMassExceededError):
            F.make_coherent(3.0, D=10)

    def test_cutoff_cap(self):
        with pytest.raises(CutoffCapExceededError):
            F.auto_cutoff(lambda d: F.coherent_amplitudes(40.0, d), d_max=256)

    @pytest.mark.parametrize("variant", F.CAT_VARIANTS)
    def test_cat_norm_matches_vector_norm(self, variant):
        amps = sum(c * F.coherent_amplitudes(a, 120) for c, a in F.cat_terms(1.3, variant))
        assert F.cat_norm(1.3, variant) == pytest.approx(np.vdot(amps, amps).real, rel=1e-12)

    def test_four_headed_norm_small_alpha_is_stable(self):
        # series branch vs direct vector sum
        amps = sum(c * F.coherent_amplitudes(a, 40) for c, a in F.cat_terms(0.2, "four-headed"))
        assert F.cat_norm(0.2, "four-headed") == pytest.approx(np.vdot(amps, amps).real, rel=1e-10)

    def test_odd_cat_at_zero(self):
        with pytest.raises(ZeroNormError):
            F.make_cat(0.0, "odd")

    def test_unknown_cat_variant(self):
        with pytest.raises(ValueError):
            F.make_cat(1.0, "five-headed")

    def test_squeezed_vacuum_moments(self):
        r, th = 0.8, 0.4
        m = F.moments_pure(F.make_squeezed_vacuum(r, th))
        assert m.nbar == pytest.approx(math.sinh(r) ** 2, abs=1e-10)
        assert m.xi == pytest.approx(-np.exp(1j * th) * math.cosh(r) * math.sinh(r), abs=1e-10)
        assert abs(m.alpha) < 1e-14

    def test_squeezed_coherent_matches_recurrence(self):
        s = F.make_squeezed_coherent(2.0, 1.0, 0.0)
        ref = F.squeezed_coherent_amplitudes(2.0, 1.0, 0.0, s.cutoff)
        npt.assert_allclose(s.amplitudes, ref / np.linalg.norm(ref), atol=1e-13)

    def test_squeezed_coherent_cutoff_80_is_too_small(self):
        # the exact state keeps ~2e-10 in its top levels at D=80
        with pytest.raises(TailMassExceededError):
            F.make_squeezed_coherent(2.0, 1.0, 0.0, D=80)
        assert F.make_squeezed_coherent(2.0, 1.0, 0.0, D=80, tail_tol=1e-9).cutoff == 80

    def test_squeezed_coherent_moments(self):
        alpha, r, th = 0.7 - 0.4j, 0.6, 1.1
        m = F.moments_pure(F.make_squeezed_coherent(alpha, r, th))
        sv = F.Moments(math.sinh(r) ** 2, 0.0, -np.exp(1j * th) * math.cosh(r) * math.sinh(r))
        ref = sv.displaced(alpha)
        assert m.nbar == pytest.approx(ref.nbar, abs=1e-10)
        assert m.alpha == pytest.approx(ref.alpha, abs=1e-10)
        assert m.xi == pytest.approx(ref.xi, abs=1e-10)


class TestOperations:
    def test_photon_add_fock(self):
        s = F.photon_add(F.make_fock(2))
        npt.assert_allclose(np.abs(s.amplitudes[3]), 1.0)
        assert s.cutoff == 6

    def test_photon_add_rejects_heavy_tail(self):
        with pytest.raises(TailMassExceededError):
            F.photon_add(F.make_coherent(1.0, D=12, tail_tol=1e-6))

    def test_photon_added_coherent_nbar(self):
        x = 1.7
        s = F.photon_add(F.make_coherent(math.sqrt(x), tail_tol=1e-15))
        assert F.moments_pure(s).nbar == pytest.approx((x * x + 3 * x + 1) / (1 + x), abs=1e-10)

    @pytest.mark.parametrize("beta", [0.5, 1 - 1j, 2.5j])
    def test_displace_matches_dense_oracle(self, beta):
        s = F.make_cat(1.0, "odd")
        out = F.displace(s, beta)
        ref = dense_displace(s.amplitudes, beta, out.cutoff + 60)[: out.cutoff]
        npt.assert_allclose(out.amplitudes, ref, atol=1e-10)

    def test_displace_vacuum_is_coherent(self):
        out = F.displace(F.make_fock(0), 1.2 + 0.3j)
        ref = F.coherent_amplitudes(1.2 + 0.3j, out.cutoff)
        npt.assert_allclose(out.amplitudes, ref, atol=1e-12)

    @given(amplitude, amplitude)
    def test_displacement_moment_map(self, br, bi):
        beta = complex(br, bi)
        s = F.make_squeezed_vacuum(0.4, 0.3)
        lhs = F.moments_pure(F.displace(s, beta))
        rhs = F.moments_pure(s).displaced(beta)
        assert lhs.nbar == pytest.approx(rhs.nbar, abs=1e-9)
        assert lhs.alpha == pytest.approx(rhs.alpha, abs=1e-9)
        assert lhs.xi == pytest.approx(rhs.xi, abs=1e-9)

    @given(st.lists(st.complex_numbers(max_magnitude=1.0, allow_nan=False, allow_infinity=False),
                    min_size=3, max_size=8))
    def test_mixed_moments_of_projector_equal_pure(self, amps):
        amps = np.array(amps + [0, 0], dtype=complex)
        if np.linalg.norm(amps) < 1e-3:
            return
        s = F.PureFockState.from_unnormalized(amps)
        a, b = F.moments_pure(s), F.moments_mixed(s.projector())
        assert a.nbar == pytest.approx(b.nbar, abs=1e-12)
        assert a.alpha == pytest.approx(b.alpha, abs=1e-12)
        assert a.xi == pytest.approx(b.xi, abs=1e-12)

    def test_moments_against_operator_expectations(self, rng):
        c = rng.normal(size=9) + 1j * rng.normal(size=9)
        c[-2:] = 0
        s = F.PureFockState.from_unnormalized(c)
        a = F.annihilation(9)
        v = s.amplitudes
        m = F.moments_pure(s)
        assert m.nbar == pytest.approx(np.vdot(v, F.number(9) @ v).real, abs=1e-12)
        assert m.alpha == pytest.approx(np.vdot(v, a @ v), abs=1e-12)
        assert m.xi == pytest.approx(np.vdot(v, a @ a @ v), abs=1e-12)
