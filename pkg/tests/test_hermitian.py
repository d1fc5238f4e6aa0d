import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from hypothesis.extra.numpy import arrays

from msstirap.hermitian import (
    DegeneracyError,
    EigenFrame,
    NonHermitianError,
    eig_hermitian,
    eigvec_derivative,
    expm_hermitian,
    gauge_align,
    magnus4_generator,
    unitary_step,
)
from msstirap.schemes import build_hamiltonian, drive_mixing, get_scheme, unit_hamiltonian
from msstirap.experiments import reference_drive
from msstirap.shortcuts import unit_frame


def random_hermitian(rng, n):
    A = rng.normal(size=(n, n)) + 1j * rng.normal(size=(n, n))
    return 0.5 * (A + A.conj().T)


finite = st.floats(-10, 10, allow_nan=False, allow_infinity=False)


@st.composite
def hermitian_matrices(draw, max_n=6):
    n = draw(st.integers(1, max_n))
    re = draw(arrays(float, (n, n), elements=finite))
    im = draw(arrays(float, (n, n), elements=finite))
    A = re + 1j * im
    return 0.5 * (A + A.conj().T)


def test_diagonal_input():
    f = eig_hermitian(np.diag([-1.0, 0.0, 2.0]))
    assert np.allclose(f.eigenvalues, [-1, 0, 2])
    assert np.allclose(f.vectors, np.eye(3))


def test_two_level():
    f = eig_hermitian(np.array([[0, 0.5], [0.5, 0]]))
    assert np.allclose(f.eigenvalues, [-0.5, 0.5])


def test_m21_at_theta_zero():
    H = build_hamiltonian(get_scheme("m21"), 0.0, 1.0)
    ev = eig_hermitian(H).eigenvalues
    d = 4 * np.sqrt(5)
    ref = np.array([-np.sqrt(12), -np.sqrt(2), 0, np.sqrt(2), np.sqrt(12)]) / d
    assert np.allclose(ev, ref, atol=1e-14)
    assert np.allclose(ev, [-0.3873, -0.1581, 0, 0.1581, 0.3873], atol=1e-4)


def test_rejects_non_hermitian():
    with pytest.raises(NonHermitianError):
        eig_hermitian(np.array([[0, 1], [0, 0]]))
    with pytest.raises(NonHermitianError):
        eig_hermitian(np.ones((2, 3)))


def test_frame_is_read_only():
    f = eig_hermitian(np.diag([1.0, 2.0]))
    with pytest.raises(ValueError):
        f.vectors[0, 0] = 3


def test_gauge_largest_component_real_positive():
    rng = np.random.default_rng(1)
    V = eig_hermitian(random_hermitian(rng, 5)).vectors
    idx = np.argmax(np.abs(V), axis=0)
    lead = V[idx, np.arange(5)]
    assert np.allclose(lead.imag, 0, atol=1e-14)
    assert np.all(lead.real > 0)


@settings(max_examples=60, deadline=None)
@given(hermitian_matrices())
def test_reconstruction(H):
    f = eig_hermitian(H)
    R = f.vectors @ np.diag(f.eigenvalues) @ f.vectors.conj().T
    assert np.max(np.abs(R - H)) <= 1e-10 * max(1.0, np.linalg.norm(H))


class TestGaugeAlign:
    def frame(self):
        H = build_hamiltonian(get_scheme("m21"), 0.4, 0.9)
        return eig_hermitian(H)

    def test_identity(self):
        f = self.frame()
        g = gauge_align(f, f)
        assert np.array_equal(g.vectors, f.vectors)

    def test_sign_flip_removed(self):
        f = self.frame()
        V = f.vectors.copy()
        V[:, 2] *= -1
        g = gauge_align(f, EigenFrame(f.eigenvalues.copy(), V))
        assert np.allclose(g.vectors, f.vectors, atol=1e-15)

    def test_phase_removed(self):
        f = self.frame()
        V = f.vectors.copy()
        V[:, 1] *= np.exp(0.3j)
        g = gauge_align(f, EigenFrame(f.eigenvalues.copy(), V))
        ov = f.vectors[:, 1].conj() @ g.vectors[:, 1]
        assert abs(np.angle(ov)) < 1e-12 and ov.real > 0

    def test_reordering_followed(self):
        f = self.frame()
        perm = [1, 0, 2, 4, 3]
        g = gauge_align(f, EigenFrame(f.eigenvalues[perm], f.vectors[:, perm]))
        assert np.allclose(g.vectors, f.vectors)

    def test_degenerate_raises(self):
        f = eig_hermitian(np.eye(2))
        rot = np.array([[1, 1], [1, -1]]) / np.sqrt(2)
        with pytest.raises(DegeneracyError):
            gauge_align(f, EigenFrame(np.ones(2), rot))

    def test_smooth_along_gaussian_path(self):
        s, d = get_scheme("m21"), reference_drive()
        t = np.linspace(-3, 3, 601)
        h = t[1] - t[0]
        prev = None
        worst = 0.0
        for tk in t:
            ms = drive_mixing(d, tk)
            cur = eig_hermitian(build_hamiltonian(s, ms.rms * np.sin(ms.theta), ms.rms * np.cos(ms.theta)))
            if prev is not None:
                cur = gauge_align(prev, cur)
                worst = max(worst, np.linalg.norm(cur.vectors - prev.vectors) / h)
            prev = cur
        ms = drive_mixing(d, t)
        _, W, dW = unit_frame(s, ms.theta)
        bound = np.max(np.linalg.norm(dW, axis=(1, 2)) * np.abs(ms.theta_dot))
        # a sign or phase jump would show up as ~2/h = 200
        assert worst <= 1.01 * bound


def test_eigvec_derivative_matches_finite_difference():
    s = get_scheme("m22")
    th, h = 0.6, 1e-6
    H, dH = unit_hamiltonian(s, th)
    f = eig_hermitian(H)
    dW = eigvec_derivative(f.eigenvalues, f.vectors, dH)
    lo = gauge_align(f, eig_hermitian(unit_hamiltonian(s, th - h)[0]))
    hi = gauge_align(f, eig_hermitian(unit_hamiltonian(s, th + h)[0]))
    assert np.allclose(dW, (hi.vectors - lo.vectors) / (2 * h), atol=1e-8)


def test_eigvec_derivative_degenerate():
    with pytest.raises(DegeneracyError):
        eigvec_derivative(np.zeros(2), np.eye(2), np.array([[0, 1], [1, 0]]))


class TestUnitaryStep:
    def test_zero_hamiltonian(self):
        c = np.array([0.6, 0.8j])
        assert np.allclose(unitary_step(np.zeros((2, 2)), 0.1, c), c)

    def test_pi_pulse(self):
        omega = 2.0
        H = 0.5 * omega * np.array([[0, 1], [1, 0]])
        c = unitary_step(H, np.pi / omega, np.array([1, 0]))
        assert np.allclose(c, [0, -1j], atol=1e-14)

    def test_norm_random_draws(self):
        rng = np.random.default_rng(7)
        for _ in range(100):
            H = random_hermitian(rng, 5)
            c = rng.normal(size=5) + 1j * rng.normal(size=5)
            out = unitary_step(H, rng.uniform(0.01, 3), c)
            assert abs(np.linalg.norm(out) - np.linalg.norm(c)) < 1e-13 * np.linalg.norm(c) * 10

    def test_rejects_bad_dt(self):
        with pytest.raises(ValueError):
            unitary_step(np.eye(2), 0.0, np.array([1, 0]))


@settings(max_examples=50, deadline=None)
@given(hermitian_matrices(max_n=5), st.floats(0.001, 5))
def test_expm_unitary(H, dt):
    U = expm_hermitian(H * dt)
    assert np.allclose(U @ U.conj().T, np.eye(len(H)), atol=1e-12)


def test_magnus_generator_hermitian_and_reversible():
    rng = np.random.default_rng(3)
    H1, H2 = random_hermitian(rng, 4), random_hermitian(rng, 4)
    K = magnus4_generator(H1, H2, 0.05)
    assert np.allclose(K, K.conj().T)
    back = magnus4_generator(H2, H1, -0.05)
    U = expm_hermitian(K) @ expm_hermitian(back)
    assert np.allclose(U, np.eye(4), atol=1e-14)
