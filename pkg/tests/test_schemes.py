import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from msstirap.experiments import reference_drive
from msstirap.hermitian import eig_hermitian
from msstirap.schemes import (
    NAC_ORDER,
    GaussianDrive,
    SingularPointError,
    UndefinedAngleError,
    UnsupportedSchemeError,
    analytic_nac,
    analytic_spectrum,
    build_hamiltonian,
    chain_dark_state,
    dark_state,
    drive_mixing,
    evaluate_drive,
    generic_chain,
    get_scheme,
    mixing_state,
)
from msstirap.verify import nac_comparison

thetas = st.floats(0.0, np.pi / 2)


def test_unknown_scheme():
    with pytest.raises(UnsupportedSchemeError):
        get_scheme("lambda")


def test_even_chain_rejected():
    with pytest.raises(ValueError):
        generic_chain([1.0, 1.0, 1.0])


class TestDrive:
    def test_pump_peak(self):
        d = GaussianDrive(3.0, delay=1.0)
        P, _, dP, _ = evaluate_drive(d, 0.5)
        assert P == pytest.approx(3.0) and dP == pytest.approx(0.0)

    def test_symmetry_point(self):
        d = GaussianDrive(2.0, delay=1.0)
        P, S, _, _ = evaluate_drive(d, 0.0)
        assert P == pytest.approx(2.0 * np.exp(-0.25)) and S == pytest.approx(P)

    def test_area(self):
        d = reference_drive()
        assert d.peak == pytest.approx(10 * np.sqrt(np.pi))
        t = np.linspace(-12, 12, 200001)
        P, S, _, _ = evaluate_drive(d, t)
        assert np.trapezoid(P, t) == pytest.approx(10 * np.pi, rel=1e-10)
        assert d.area == pytest.approx(10 * np.pi)

    def test_negative_peak_rejected(self):
        with pytest.raises(ValueError):
            GaussianDrive(-1.0)


class TestMixing:
    def test_limits(self):
        assert mixing_state(0.0, 2.0, 0.0, 0.0).theta == 0.0
        assert mixing_state(2.0, 0.0, 0.0, 0.0).theta == pytest.approx(np.pi / 2)

    def test_fields_off(self):
        with pytest.raises(UndefinedAngleError):
            mixing_state(0.0, 0.0, 0.0, 0.0)

    @pytest.mark.parametrize("tau", [0.5, 1.0, 2.0])
    def test_theta_dot_sech(self, tau):
        d = GaussianDrive(5.0, delay=tau)
        t = np.linspace(-3, 3, 61)
        ms = drive_mixing(d, t)
        assert np.allclose(ms.theta_dot, tau / np.cosh(2 * tau * t), atol=1e-13)
        h = 1e-5
        fd = (drive_mixing(d, t + h).theta - drive_mixing(d, t - h).theta) / (2 * h)
        assert np.allclose(fd, ms.theta_dot, atol=1e-8)

    def test_mirror(self):
        d = reference_drive()
        t = np.linspace(-5, 5, 1001)
        a, b = drive_mixing(d, t), drive_mixing(d, -t)
        assert np.max(np.abs(b.theta - (np.pi / 2 - a.theta))) < 1e-12
        assert np.max(np.abs(b.theta_dot - a.theta_dot)) < 1e-12


class TestHamiltonian:
    def test_three_state_stokes_only(self):
        H = build_hamiltonian(get_scheme("three"), 0.0, 1.0)
        ref = np.zeros((3, 3))
        ref[1, 2] = ref[2, 1] = 0.5
        assert np.array_equal(H, ref)

    @pytest.mark.parametrize(
        "tag, cg",
        [
            ("m21", [np.sqrt(3 / 5), np.sqrt(1 / 10), np.sqrt(1 / 10), np.sqrt(3 / 5)]),
            ("m22", [-np.sqrt(1 / 3), np.sqrt(1 / 2), -np.sqrt(1 / 2), np.sqrt(1 / 3)]),
        ],
    )
    def test_m_couplings(self, tag, cg):
        P, S = 0.7, 1.3
        H = build_hamiltonian(get_scheme(tag), P, S)
        fields = [P, S, P, S]
        for k in range(4):
            assert H[k, k + 1] == pytest.approx(0.5 * cg[k] * fields[k])
        assert np.allclose(H, H.conj().T)

    def test_vectorised(self):
        H = build_hamiltonian(get_scheme("m21"), np.ones(7), np.zeros(7))
        assert H.shape == (7, 5, 5)


class TestSpectrum:
    def test_m21_theta_zero(self):
        lam, r = analytic_spectrum(get_scheme("m21"), 0.0, 1.0)
        assert r == pytest.approx(5.0)
        assert lam[3] == pytest.approx(np.sqrt(2) / (4 * np.sqrt(5)))
        assert lam[3] == pytest.approx(0.1581, abs=1e-4)

    def test_m21_quarter(self):
        lam, r = analytic_spectrum(get_scheme("m21"), np.pi / 4, 1.0)
        assert r == pytest.approx(1.0)
        assert lam[4] == pytest.approx(np.sqrt(8) / (4 * np.sqrt(5)))

    def test_m22_quarter(self):
        lam, s = analytic_spectrum(get_scheme("m22"), np.pi / 4, 1.0)
        assert s == pytest.approx(3.0)
        assert lam[3] == pytest.approx(np.sqrt(2) / (4 * np.sqrt(3)))

    @settings(max_examples=100, deadline=None)
    @given(thetas, st.floats(1e-3, 1e3), st.sampled_from(["m21", "m22"]))
    def test_matches_numeric(self, th, rms, tag):
        s = get_scheme(tag)
        lam, _ = analytic_spectrum(s, th, rms)
        ev = eig_hermitian(build_hamiltonian(s, rms * np.sin(th), rms * np.cos(th))).eigenvalues
        assert np.max(np.abs(ev - lam)) <= 1e-12 * np.max(np.abs(lam))


class TestDarkState:
    @pytest.mark.parametrize("tag", ["three", "m21", "m22"])
    def test_endpoints(self, tag):
        s = get_scheme(tag)
        e0 = np.zeros(s.dim)
        e0[0] = 1
        eN = np.zeros(s.dim)
        eN[-1] = 1
        assert np.allclose(dark_state(s, 0.0), e0)
        assert np.allclose(np.abs(dark_state(s, np.pi / 2)), eN, atol=1e-15)

    def test_m21_quarter(self):
        v = dark_state(get_scheme("m21"), np.pi / 4)
        a = 1 / (2 * np.sqrt(2))
        assert np.allclose(v, [a, 0, -np.sqrt(3) / 2, 0, a])

    @settings(max_examples=100, deadline=None)
    @given(thetas, st.floats(1e-3, 1e3), st.sampled_from(["three", "m21", "m22"]))
    def test_nullity(self, th, rms, tag):
        s = get_scheme(tag)
        H = build_hamiltonian(s, rms * np.sin(th), rms * np.cos(th))
        v = dark_state(s, th)
        assert np.linalg.norm(H @ v) <= 1e-12 * rms
        assert np.linalg.norm(v) == pytest.approx(1.0)

    @pytest.mark.parametrize("tag", ["three", "m21", "m22"])
    def test_product_form_agrees(self, tag):
        s = get_scheme(tag)
        th = np.linspace(0, np.pi / 2, 50)
        ref = np.array([dark_state(s, x) for x in th])
        assert np.allclose(chain_dark_state(s, th), ref, atol=1e-14)

    @pytest.mark.parametrize("tag", ["sp22", "sp3212"])
    def test_sigma_pi_kernel(self, tag):
        s = get_scheme(tag)
        for th in np.linspace(0, np.pi / 2, 20):
            v = chain_dark_state(s, th)
            assert np.linalg.norm(build_hamiltonian(s, np.sin(th), np.cos(th)) @ v) < 1e-15

    def test_seven_state_chain(self):
        s = generic_chain([0.3, 0.8, 0.5, 0.9, 0.4, 0.7])
        v = chain_dark_state(s, 0.7)
        assert np.linalg.norm(build_hamiltonian(s, np.sin(0.7), np.cos(0.7)) @ v) < 1e-15


class TestNAC:
    def test_m21_quarter(self):
        chi = analytic_nac(get_scheme("m21"), np.pi / 4, 1.0)
        assert chi["--"] == pytest.approx(-1j * np.sqrt(2) / 2)

    def test_scales_with_theta_dot(self):
        s = get_scheme("m22")
        a, b = analytic_nac(s, 0.4, 1.0), analytic_nac(s, 0.4, 2.5)
        for k in a:
            assert b[k] == pytest.approx(2.5 * a[k])

    def test_singular_point(self):
        # 0/0 at theta = pi/2: the cos(theta) prefactor does not make it vanish
        with pytest.raises(SingularPointError):
            analytic_nac(get_scheme("m21"), np.pi / 2, 1.0)

    def test_limit_near_pi_half(self):
        chi = analytic_nac(get_scheme("m21"), np.pi / 2 - 1e-4, 1.0)
        assert abs(chi["--"]) == pytest.approx(np.sqrt(3), rel=1e-6)

    def test_unsupported(self):
        with pytest.raises(UnsupportedSchemeError):
            analytic_nac(get_scheme("sp22"), 0.3, 1.0)

    @pytest.mark.parametrize("tag", ["m21", "m22"])
    def test_finite_difference(self, tag):
        _, an, num, err = nac_comparison(tag)
        assert err < 1e-5
        # dark column carries no self-coupling
        assert np.max(np.abs(num[:, NAC_ORDER.index("0")])) < 1e-6

    def test_m22_quarter_point(self):
        # tau chosen so theta(0) = pi/4 with theta_dot(0) = tau = 1
        d = reference_drive()
        _, an, num, _ = nac_comparison("m22", times=[-0.01, 0.0, 0.01])
        assert np.allclose(num[1], an[1], atol=1e-6)
        ms = drive_mixing(d, 0.0)
        assert ms.theta == pytest.approx(np.pi / 4) and ms.theta_dot == pytest.approx(1.0)
