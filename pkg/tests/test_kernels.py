import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from tubelab.errors import InvalidArgument, TruncationError
from tubelab.harmonics import HarmonicMode, harmonic_log, log_tube_l2_norm, normalized_husimi
from tubelab.sphere_tube import TubePoint, from_angles, geodesic_flow, liouville_mass, liouville_quadrature
from tubelab.spectral import (
    SpectralWindow,
    auto_degree,
    projector_kernel,
    short_window_kernel,
    short_window_shells,
    tempered_kernel,
    window_chi,
)
from tubelab.spectral.kernels import degree_for_frequency, frequencies


def random_point(seed, tau=1.0):
    rng = np.random.default_rng(seed)
    return from_angles(rng.uniform(0, 6.3), rng.uniform(0.2, 2.9), rng.uniform(0, 6.3), tau)


def random_rotation(seed):
    q, r = np.linalg.qr(np.random.default_rng(seed).standard_normal((3, 3)))
    q = q @ np.diag(np.sign(np.diag(r)))
    return q if np.linalg.det(q) > 0 else -q


def test_frequency_helpers():
    assert frequencies(3).tolist() == pytest.approx([0, np.sqrt(2), np.sqrt(6), np.sqrt(12)])
    assert degree_for_frequency(0) == 0
    assert degree_for_frequency(np.sqrt(6)) == 2
    assert degree_for_frequency(np.sqrt(6) + 1e-9) == 3


def test_degree_zero_term():
    a = random_point(0, 0.7)
    w = SpectralWindow(0.2, center=0.0)
    val = projector_kernel(w, a, a, n_max=0, threshold=None)
    assert val.real == pytest.approx(window_chi(w, 0.0) / liouville_mass(0.7))
    t = tempered_kernel(w, a, a, n_max=0, threshold=None)
    assert t.real == pytest.approx(window_chi(w, 0.0) / (4 * np.pi))


@pytest.mark.parametrize("lam", [3.0, 12.0])
def test_addition_theorem_matches_mode_sum(lam):
    a, b = random_point(1, 0.8), random_point(2, 0.8)
    w = SpectralWindow(0.5, center=lam)
    n = 30
    x = projector_kernel(w, a, b, n_max=n, threshold=None)
    y = projector_kernel(w, a, b, n_max=n, threshold=None, method="modes")
    assert x == pytest.approx(y, rel=1e-10)
    x = tempered_kernel(w, a, b, n_max=n, threshold=None)
    y = tempered_kernel(w, a, b, n_max=n, threshold=None, method="modes")
    assert x == pytest.approx(y, rel=1e-10)


@settings(max_examples=25)
@given(s1=st.integers(0, 10**6), s2=st.integers(0, 10**6), lam=st.floats(5, 80))
def test_hermitian_and_positive(s1, s2, lam):
    a, b = random_point(s1), random_point(s2)
    w = SpectralWindow(0.2, center=lam)
    x = projector_kernel(w, a, b)
    y = projector_kernel(w, b, a)
    assert abs(x - np.conj(y)) <= 1e-10 * max(abs(x), 1e-300)
    assert projector_kernel(w, a, a).real > 0


def test_cutoff_stability():
    a, b = random_point(3), random_point(4)
    b = geodesic_flow(a, 0.05)
    w = SpectralWindow(0.2, center=60.0)
    n = auto_degree(w)
    x = projector_kernel(w, a, b)
    y = projector_kernel(w, a, b, n_max=2 * n)
    assert abs(x - y) < 1e-10 * abs(x)


def test_flow_and_rotation_covariance():
    a, b = random_point(5), random_point(6)
    b = geodesic_flow(a, 0.07)
    w = SpectralWindow(0.2, center=40.0)
    ref = abs(projector_kernel(w, a, b))
    for t in (0.3, 2.0):
        assert abs(projector_kernel(w, geodesic_flow(a, t), geodesic_flow(b, t))) == pytest.approx(ref, rel=1e-8)
    r = random_rotation(7)
    ra, rb = TubePoint(r @ a.x, r @ a.v, a.tau), TubePoint(r @ b.x, r @ b.v, b.tau)
    assert abs(projector_kernel(w, ra, rb)) == pytest.approx(ref, rel=1e-8)


def test_approximate_reproducing():
    # with an exact rule and a degree-limited kernel, Pi f = chi(0) f for f a normalised mode
    tau, N, m = 1.0, 3, 2
    rule = liouville_quadrature(tau, 28, 28, 28)
    w = SpectralWindow(0.5, center=np.sqrt(N * (N + 1)))
    lm, ph = harmonic_log(N, m, rule.zeta)
    f = np.exp(lm - log_tube_l2_norm(N, tau) + 1j * ph)
    zs = [random_point(s).zeta for s in (8, 9)]
    for z in zs:
        k = projector_kernel(w, z[None, :], rule.zeta, tau=tau, n_max=10, threshold=None)
        pf = rule.integrate(k * f)
        fz = np.exp(harmonic_log(N, m, z[None, :])[0][0] - log_tube_l2_norm(N, tau)
                    + 1j * harmonic_log(N, m, z[None, :])[1][0])
        assert abs(pf - window_chi(w, 0.0) * fz) < 1e-8 * abs(fz)


def test_short_window():
    assert short_window_shells(1.42) == ()
    a = random_point(10)
    v = short_window_kernel(1.42, a, a)
    assert v.empty and v.value == 0
    N = 9
    lam = np.sqrt(N * (N + 1)) - 0.01
    v = short_window_kernel(lam, a, a)
    assert v.shells == (N,)
    direct = sum(abs(normalized_husimi(HarmonicMode(N, m), a)) ** 2 for m in range(-N, N + 1))
    assert v.value.real == pytest.approx(direct, rel=1e-10)
    # generically nonempty
    assert all(short_window_shells(l) for l in np.linspace(2.5, 50, 40) if not (1.4 < l % 1 < 1.5))
    with pytest.raises(InvalidArgument):
        short_window_shells(-1.0)


def test_truncation_errors():
    a = random_point(11)
    with pytest.raises(TruncationError):
        projector_kernel(SpectralWindow(0.2, "fejer", 30.0), a, a)
    with pytest.raises(TruncationError):
        projector_kernel(SpectralWindow(0.2, center=30.0), a, a, n_max=40)
    with pytest.raises(InvalidArgument):
        projector_kernel(SpectralWindow(0.2, center=30.0), a.zeta, a.zeta)
    with pytest.raises(InvalidArgument):
        projector_kernel(SpectralWindow(0.2, center=3.0), a, a, n_max=10, threshold=None, method="nope")


def test_array_evaluation_matches_scalar():
    a = random_point(12)
    bs = [random_point(s) for s in (13, 14, 15)]
    w = SpectralWindow(0.2, center=20.0)
    arr = projector_kernel(w, a, np.array([b.zeta for b in bs]), tau=1.0)
    assert np.allclose(arr, [projector_kernel(w, a, b) for b in bs])


def test_relative_tail_criterion():
    w = SpectralWindow(0.2, center=60.0)
    n = auto_degree(w)
    mu = frequencies(4 * n)
    mass = window_chi(w, w.center - mu) * (2 * np.arange(4 * n + 1) + 1.0)
    assert mass[n + 1:].sum() < 1e-12 * mass.sum()
    assert mass[n:].sum() >= 0.5e-12 * mass.sum()
    # algebraically decaying windows only reach looser tails
    fs = SpectralWindow(0.2, "fejer_squared", 60.0)
    with pytest.raises(TruncationError):
        auto_degree(fs)
    assert auto_degree(fs, threshold=1e-4) > 60
