import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from scipy.special import eval_legendre, sph_harm_y

from tubelab.errors import ChartDegenerate, InvalidArgument, ResolutionError
from tubelab.harmonics import (
    HarmonicMode,
    LogComplex,
    c_N,
    complex_angles,
    complexified_harmonic,
    gram_matrix,
    harmonic_log,
    harmonic_log_all_degrees,
    harmonic_values,
    highest_weight_closed_form,
    legendre_log_real,
    legendre_weighted_sum,
    log_c_N,
    log_tube_l2_norm,
    normalized_husimi,
    tube_lp_norm,
)
from tubelab.numerics import fit_loglog
from tubelab.sphere_tube import (
    TubePoint,
    from_angles,
    liouville_mass,
    liouville_quadrature,
    reduced_liouville_quadrature,
)


def rot_z(d):
    c, s = np.cos(d), np.sin(d)
    return np.array([[c, -s, 0], [s, c, 0], [0, 0, 1]])


def test_log_complex():
    a = LogComplex.from_complex(2 - 1j)
    b = LogComplex.from_complex(-0.5 + 3j)
    assert (a * b).to_complex() == pytest.approx((2 - 1j) * (-0.5 + 3j))
    assert (a / b).to_complex() == pytest.approx((2 - 1j) / (-0.5 + 3j))
    assert a.conj().to_complex() == pytest.approx(2 + 1j)
    assert abs(a) == pytest.approx(np.sqrt(5))
    assert LogComplex.from_complex(0).log_mag == -np.inf


def test_c_N_examples():
    assert c_N(0) == pytest.approx(1 / np.sqrt(4 * np.pi))
    assert c_N(1) == pytest.approx(0.5 * np.sqrt(6 / (4 * np.pi)))
    ns = np.arange(50, 301, 10)
    assert fit_loglog([(n, c_N(n)) for n in ns]).slope == pytest.approx(0.25, abs=0.01)
    with pytest.raises(InvalidArgument):
        log_c_N(-1)


def test_legendre_helpers():
    x = 1.7
    assert np.allclose(np.exp(legendre_log_real(30, x)), eval_legendre(np.arange(31), x), rtol=1e-12)
    t = np.array([0.3 + 0.9j, 2.0 - 0.4j])
    coeffs = np.log(np.arange(1, 12, dtype=float))
    direct = sum(np.exp(c) * eval_legendre(n, t) for n, c in enumerate(coeffs))
    assert np.allclose(legendre_weighted_sum(coeffs, t), direct, rtol=1e-12)
    # large degrees stay finite through the rescaling
    big = legendre_log_real(2000, np.cosh(2.0))
    assert np.all(np.isfinite(big))


def test_degree_zero_is_constant(rng):
    p = from_angles(0.4, 1.1, 2.0, 0.7)
    assert abs(complexified_harmonic(HarmonicMode(0, 0, 0.7), p)) == pytest.approx(1 / np.sqrt(4 * np.pi))


def test_highest_weight_on_equator():
    # x on the equator and v = -e_theta: zeta_x + i zeta_y = e^{tau} e^{i theta}
    tau, N, th = 1.0, 7, 0.6
    p = from_angles(th, np.pi / 2, np.pi, tau)
    val = harmonic_values(N, N, p.zeta[None, :])[0]
    assert val == pytest.approx((-1) ** N * c_N(N) * np.exp(1j * N * th) * np.exp(N * tau), rel=1e-12)
    assert val == pytest.approx(highest_weight_closed_form(N, p), rel=1e-10)


@pytest.mark.parametrize("N,m", [(0, 0), (1, 1), (3, -2), (5, 0), (12, 7), (20, -20), (40, 13)])
def test_real_limit_matches_scipy(N, m):
    rng = np.random.default_rng(N * 100 + m)
    phi, th = rng.uniform(0.2, 3.0), rng.uniform(0, 2 * np.pi)
    p = from_angles(th, phi, rng.uniform(0, 2 * np.pi), 1e-10)
    ours = harmonic_values(N, m, p.zeta[None, :])[0]
    ref = sph_harm_y(N, m, phi, th)
    assert abs(ours - ref) < 1e-8 * max(1.0, abs(ref))


def test_closed_form_agreement_random_points(rng):
    for _ in range(100):
        N = int(rng.integers(1, 201))
        p = from_angles(rng.uniform(0, 2 * np.pi), rng.uniform(0.3, 2.8), rng.uniform(0, 2 * np.pi),
                        rng.uniform(0.1, 1.0))
        a = harmonic_values(N, N, p.zeta[None, :])[0]
        b = highest_weight_closed_form(N, p)
        assert abs(a - b) <= 1e-8 * abs(b)


@given(N=st.integers(0, 40), data=st.data(), delta=st.floats(-np.pi, np.pi), seed=st.integers(0, 10**6))
def test_theta_equivariance(N, data, delta, seed):
    m = data.draw(st.integers(-N, N))
    rng = np.random.default_rng(seed)
    p = from_angles(rng.uniform(0, 6.3), rng.uniform(0.2, 2.9), rng.uniform(0, 6.3), rng.uniform(0.1, 1.0))
    q = TubePoint(rot_z(delta) @ p.x, rot_z(delta) @ p.v, p.tau)
    a = harmonic_values(N, m, p.zeta[None, :])[0]
    b = harmonic_values(N, m, q.zeta[None, :])[0]
    assert abs(b - np.exp(1j * m * delta) * a) <= 1e-9 * max(abs(a), 1e-300)


def test_all_degrees_matches_single():
    z = np.array([from_angles(0.1, 1.3, 0.4, 0.9).zeta, from_angles(2.1, 0.5, -1.0, 0.9).zeta])
    lm, ph = harmonic_log_all_degrees(-3, z, 10)
    for i, N in enumerate(range(3, 11)):
        l1, p1 = harmonic_log(N, -3, z)
        assert np.allclose(lm[i], l1) and np.allclose(np.exp(1j * ph[i]), np.exp(1j * p1))


def test_complex_angles_chart():
    # zeta_z = 1 exactly, so the complexified polar angle vanishes
    tau = 0.5
    p = TubePoint(np.array([np.tanh(tau), 0, 1 / np.cosh(tau)]), np.array([0, 1.0, 0]), tau)
    with pytest.raises(ChartDegenerate):
        complex_angles(p.zeta)


def test_invalid_modes():
    with pytest.raises(InvalidArgument):
        HarmonicMode(3, 4)
    with pytest.raises(InvalidArgument):
        HarmonicMode(301, 0)
    with pytest.raises(InvalidArgument):
        harmonic_log(2, -3, np.zeros((1, 3)))


def test_l2_norm_closed_form_against_full_quadrature():
    tau = 0.8
    rule = liouville_quadrature(tau, 12, 14, 15)
    for N, m in [(0, 0), (2, 1), (5, -3), (6, 6)]:
        lm, _ = harmonic_log(N, m, rule.zeta)
        q = 0.5 * np.log(rule.integrate(np.exp(2 * lm)))
        assert q == pytest.approx(log_tube_l2_norm(N, tau), abs=1e-10)
    # Y_1^0 = sqrt(3/4pi) zeta_z: the norm squared is mass P_1(cosh 2tau)/4pi
    assert np.exp(2 * log_tube_l2_norm(1, 1.0)) == pytest.approx(2 * np.pi * np.cosh(2.0))


def test_lp_norm_degree_zero():
    for p in (2.0, 4.0, np.inf):
        val = np.exp(tube_lp_norm(HarmonicMode(0, 0, 1.0), p))
        expected = (4 * np.pi) ** -0.5 * (1.0 if np.isinf(p) else liouville_mass(1.0) ** (1 / p))
        assert val == pytest.approx(expected, rel=1e-8)


def test_lp_norm_resolution_error():
    coarse = reduced_liouville_quadrature(1.0, 5, 5)
    with pytest.raises(ResolutionError):
        tube_lp_norm(HarmonicMode(100, 100, 1.0), 4.0, rule=coarse)


def test_l2_envelope_and_p4_slope():
    ns = [40, 60, 90, 140]
    env = [0.25 * np.log(n) - n + tube_lp_norm(HarmonicMode(n, n, 1.0), 2.0) for n in ns]
    assert np.ptp(np.exp(env)) / np.mean(np.exp(env)) < 0.1
    ratio = [(n, np.exp(tube_lp_norm(HarmonicMode(n, n, 1.0), 4.0) - log_tube_l2_norm(n, 1.0))) for n in ns]
    assert fit_loglog(ratio).slope == pytest.approx(0.25, abs=0.05)


def test_normalized_husimi_unit_norm():
    tau = 1.0
    rule = reduced_liouville_quadrature(tau, 61, 62)
    for N, m in [(0, 0), (7, 3), (30, 30)]:
        pts = rule.zeta
        lm, _ = harmonic_log(N, m, pts)
        assert rule.integrate(np.exp(2 * (lm - log_tube_l2_norm(N, tau)))) == pytest.approx(1.0, abs=1e-6)
    p = from_angles(0.2, 1.0, 0.3, tau)
    assert abs(normalized_husimi(HarmonicMode(0, 0), p)) == pytest.approx(liouville_mass(tau) ** -0.5)


def test_husimi_peaks_on_complexified_equator():
    N = 80
    phis = np.linspace(0.3, np.pi - 0.3, 201)
    vals = [abs(normalized_husimi(HarmonicMode(N, N), from_angles(0.0, ph, np.pi, 1.0))) for ph in phis]
    assert phis[int(np.argmax(vals))] == pytest.approx(np.pi / 2, abs=1e-9)


def test_gram_diagonal():
    tau = 1.0
    g, modes = gram_matrix(12, tau, liouville_quadrature(tau, 28, 30, 29))
    off = np.abs(g - np.diag(np.diag(g)))
    assert np.max(off) < 1e-4
    assert np.allclose(np.diag(g), 1.0, atol=1e-6)
    assert len(modes) == 169


def test_sup_norm_growth_envelope():
    for N in (10, 40, 100):
        excess = tube_lp_norm(HarmonicMode(N, N, 1.0), np.inf) - N
        assert abs(excess) <= 0.5 * np.log(N) + 2.0
