import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from tubelab.errors import InvalidArgument, TruncationError
from tubelab.spectral import SpectralWindow, tail_cutoff, window_chi, window_hat

KINDS = ("fejer", "fejer_squared", "bump")

# bump window, epsilon = 0.2: chi(s) = g_hat(s)^2 / (2 pi int g^2) evaluated with mpmath at 30 digits
BUMP_ORACLE = {0.0: 0.0235744303837400059756, 5.0: 0.0226581334755268722596, 100.0: 2.55720457221588186066e-5}


def numeric_hat(w, t):
    # the bump window decays faster than any power, the Fejer kinds only algebraically
    smax, n = (1500.0, 75001) if w.kind == "bump" else (4000.0, 400001)
    s = np.linspace(-smax, smax, n)
    chi = window_chi(w, s)
    return np.trapezoid(chi * np.cos(s * t), s)


def test_fejer_value_at_zero():
    w = SpectralWindow(0.3, "fejer")
    assert window_chi(w, 0.0) == pytest.approx(0.3 / (2 * np.pi))


def test_bump_frozen_oracle():
    w = SpectralWindow(0.2, "bump")
    for s, v in BUMP_ORACLE.items():
        assert window_chi(w, s) == pytest.approx(v, rel=1e-10)


@pytest.mark.parametrize("kind", KINDS)
def test_hat_normalisation_and_support(kind):
    w = SpectralWindow(0.25, kind)
    assert window_hat(w, 0.0) == pytest.approx(1.0, rel=1e-12)
    assert np.all(window_hat(w, np.array([0.25, 0.3, 1.0])) == 0)
    assert window_hat(w, 0.1) == pytest.approx(window_hat(w, -0.1))


@pytest.mark.parametrize("kind", KINDS)
def test_numeric_fourier_transform(kind):
    w = SpectralWindow(0.25, kind)
    for t in (0.0, 0.08, 0.17):
        tol = 2e-3 if kind == "fejer" else 1e-6
        assert numeric_hat(w, t) == pytest.approx(float(window_hat(w, t)), abs=tol)


def test_hat_vanishes_beyond_epsilon_numerically():
    assert abs(numeric_hat(SpectralWindow(0.25, "fejer_squared"), 0.4)) < 1e-8
    assert abs(numeric_hat(SpectralWindow(0.25, "fejer"), 0.4)) < 1e-3
    assert abs(numeric_hat(SpectralWindow(0.25, "bump"), 0.4)) < 1e-8


@given(kind=st.sampled_from(KINDS), eps=st.floats(0.05, 0.5), s=st.floats(-500, 500))
def test_window_even_and_nonnegative(kind, eps, s):
    w = SpectralWindow(eps, kind)
    a, b = window_chi(w, s), window_chi(w, -s)
    assert a >= 0
    assert a == pytest.approx(b, rel=1e-12, abs=1e-300)


def test_tail_cutoff():
    w = SpectralWindow(0.2, "bump")
    cut = tail_cutoff(w)
    s = np.linspace(cut, cut + 400, 4001)
    assert np.all(window_chi(w, s) < 1e-12)
    assert window_chi(w, 0.8 * cut) > 1e-14
    with pytest.raises(TruncationError):
        tail_cutoff(SpectralWindow(0.2, "fejer"))
    fs = SpectralWindow(0.2, "fejer_squared")
    c2 = tail_cutoff(fs)
    assert np.all(window_chi(fs, np.linspace(c2, 3 * c2, 1000)) < 1e-12)
    assert tail_cutoff(w, power=2) < cut


def test_window_validation():
    with pytest.raises(InvalidArgument):
        SpectralWindow(0.0)
    with pytest.raises(InvalidArgument):
        SpectralWindow(0.2, "gaussian")
    with pytest.raises(InvalidArgument):
        SpectralWindow(0.2, center=-1.0)
    assert SpectralWindow(0.2).at(30.0).center == 30.0
