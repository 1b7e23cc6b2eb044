"""Smoothed spectral projector kernels built from continued spherical harmonics.

Two evaluation routes are provided.  ``method="modes"`` sums
chi(lambda - mu_N) Yt_N^m(a) conj(Yt_N^m(b)) over all modes directly.
``method="addition"`` (the default) collapses the m-sum with the addition
theorem

    sum_m Y_N^m(a) conj(Y_N^m(b)) = (2N+1)/(4 pi) P_N(zeta_a . conj(zeta_b)),

which holds for the holomorphic continuation because both sides are
holomorphic in zeta_a and antiholomorphic in zeta_b.  Together with
||Y_N^m||^2 = mass P_N(cosh 2tau)/(4pi) this gives

    Pi(a, b) = sum_N chi(lambda - mu_N) (2N+1)/mass * P_N(t)/P_N(cosh 2tau).
"""
from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from ..errors import InvalidArgument, TruncationError
from ..harmonics import harmonic_log_all_degrees, legendre_log_real, legendre_weighted_sum
from ..sphere_tube import TubePoint, liouville_mass
from .windows import SpectralWindow, tail_cutoff, window_chi

DEFAULT_TAIL = 1e-12
MAX_DEGREE_CAP = 20000
METHODS = ("addition", "modes")


def frequencies(n_max: int) -> np.ndarray:
    n = np.arange(n_max + 1)
    return np.sqrt(n * (n + 1.0))


def degree_for_frequency(mu: float) -> int:
    """Smallest N with sqrt(N(N+1)) >= mu."""
    if mu <= 0:
        return 0
    n = int(np.ceil(-0.5 + np.sqrt(0.25 + mu * mu)))
    while np.sqrt(n * (n + 1.0)) < mu:
        n += 1
    return n


def auto_degree(w: SpectralWindow, threshold: float = DEFAULT_TAIL, power: int = 1) -> int:
    """Smallest N_max whose omitted tail is below ``threshold`` in relative mass.

    The tail is measured as sum_{N > N_max} chi(lambda - mu_N)**power (2N+1)
    against the same sum over all N.  Each term bounds the corresponding
    shell's contribution to |Pi(a, b)|, and the full sum is the on-diagonal
    value, so the criterion controls the relative truncation error on the
    diagonal and the absolute error everywhere.
    """
    return _auto_degree(w, float(threshold), int(power))


@lru_cache(maxsize=256)
def _auto_degree(w, threshold, power):
    # per-term cutoff far enough out that the remaining terms are negligible
    term = max(threshold * 1e-6, 1e-300)
    cut = tail_cutoff(w, term, cap=float(MAX_DEGREE_CAP), power=power)
    n_big = degree_for_frequency(w.center + cut)
    if n_big > MAX_DEGREE_CAP:
        raise TruncationError(f"window tail needs degree {n_big} > {MAX_DEGREE_CAP}")
    n = np.arange(n_big + 1)
    mass = window_chi(w, w.center - frequencies(n_big), power) * (2 * n + 1.0)
    tail = np.cumsum(mass[::-1])[::-1]  # tail[k] = sum_{N >= k}
    # half the budget covers the terms beyond n_big
    ok = np.nonzero(tail < 0.5 * threshold * tail[0])[0]
    if len(ok) == 0:
        raise TruncationError("window tail does not decay below the threshold")
    return int(max(ok[0] - 1, 0))


def _resolve_degree(w, n_max, threshold, power):
    if n_max is None:
        return auto_degree(w, threshold, power)
    if threshold is not None:
        tail = window_chi(w, w.center - np.sqrt(n_max * (n_max + 1.0)), power)
        if tail >= threshold and n_max < degree_for_frequency(w.center):
            raise TruncationError(f"N_max={n_max} lies below the window center")
        if tail >= threshold:
            raise TruncationError(
                f"chi(lambda - mu_Nmax) = {float(tail):.3e} is not below {threshold:g}"
            )
    return int(n_max)


def _zeta(p) -> np.ndarray:
    return p.zeta if isinstance(p, TubePoint) else np.asarray(p, dtype=complex)


def pairing(a, b) -> np.ndarray:
    """t = zeta_a . conj(zeta_b), broadcasting over leading axes."""
    return np.sum(_zeta(a) * np.conj(_zeta(b)), axis=-1)


def _mode_sum(log_coeffs: np.ndarray, za: np.ndarray, zb: np.ndarray, log_norms: np.ndarray) -> np.ndarray:
    """sum_N sum_m exp(log_coeffs[N] - 2 log_norms[N]) Y_N^m(za) conj Y_N^m(zb)."""
    n_max = len(log_coeffs) - 1
    za = np.atleast_2d(za)
    zb = np.atleast_2d(zb)
    za, zb = np.broadcast_arrays(za, zb)
    total = np.zeros(za.shape[:-1], dtype=complex)
    for m in range(-n_max, n_max + 1):
        la, pa = harmonic_log_all_degrees(m, za, n_max)
        lb, pb = harmonic_log_all_degrees(m, zb, n_max)
        ns = np.arange(abs(m), n_max + 1)
        c = log_coeffs[ns] - 2 * log_norms[ns]
        ok = np.isfinite(c)
        if not np.any(ok):
            continue
        expo = c[ok, None] + la[ok] + lb[ok]
        total += np.sum(np.exp(expo + 1j * (pa[ok] - pb[ok])), axis=0)
    return total


def _log_norms_sq_half(n_max, tau):
    # log ||Y_N||_{L^2} for N = 0..n_max
    return 0.5 * (np.log(liouville_mass(tau)) + legendre_log_real(n_max, np.cosh(2 * tau)) - np.log(4 * np.pi))


def _projector_log_coeffs(weights: np.ndarray, n_max: int, tau: float) -> tuple[np.ndarray, np.ndarray]:
    n = np.arange(n_max + 1)
    with np.errstate(divide="ignore"):
        log_w = np.log(weights)
    coeffs = log_w + np.log(2 * n + 1.0) - np.log(liouville_mass(tau))
    return coeffs, legendre_log_real(n_max, np.cosh(2 * tau))


def _projector_from_weights(weights, a, b, tau, method):
    n_max = len(weights) - 1
    if method == "addition":
        coeffs, norms = _projector_log_coeffs(weights, n_max, tau)
        return legendre_weighted_sum(coeffs, pairing(a, b), norms)
    if method == "modes":
        with np.errstate(divide="ignore"):
            lw = np.log(weights)
        out = _mode_sum(lw, _zeta(a), _zeta(b), _log_norms_sq_half(n_max, tau))
        return out if out.size > 1 else out.reshape(())
    raise InvalidArgument(f"unknown method {method!r}")


def projector_kernel(
    w: SpectralWindow,
    a,
    b,
    tau: float | None = None,
    n_max: int | None = None,
    method: str = "addition",
    power: int = 1,
    threshold: float | None = DEFAULT_TAIL,
):
    """Pi_{chi,lambda}(a, b) with lambda = w.center.

    a and b are TubePoints or arrays of quadric points (..., 3).  With
    ``power=2`` the window chi^2 is used, which is the kernel of
    Pi_{chi,lambda}^* Pi_{chi,lambda}.
    """
    tau = _tau(a, b, tau)
    n_max = _resolve_degree(w, n_max, threshold, power)
    weights = window_chi(w, w.center - frequencies(n_max), power)
    val = _projector_from_weights(weights, a, b, tau, method)
    return complex(val) if np.ndim(val) == 0 else val


def tempered_kernel(
    w: SpectralWindow,
    a,
    b,
    tau: float | None = None,
    n_max: int | None = None,
    method: str = "addition",
    threshold: float | None = DEFAULT_TAIL,
):
    """P_{chi,mu}(a, b) = sum chi(mu - mu_N) e^{-2 tau mu_N} Y_N^m(a) conj Y_N^m(b) (unnormalised modes)."""
    tau = _tau(a, b, tau)
    n_max = _resolve_degree(w, n_max, threshold, 1)
    mu = frequencies(n_max)
    with np.errstate(divide="ignore"):
        lw = np.log(window_chi(w, w.center - mu)) - 2 * tau * mu
    n = np.arange(n_max + 1)
    if method == "addition":
        val = legendre_weighted_sum(lw + np.log((2 * n + 1) / (4 * np.pi)), pairing(a, b))
    elif method == "modes":
        val = _mode_sum(lw, _zeta(a), _zeta(b), np.zeros(n_max + 1))
        val = val if val.size > 1 else val.reshape(())
    else:
        raise InvalidArgument(f"unknown method {method!r}")
    return complex(val) if np.ndim(val) == 0 else val


@dataclass(frozen=True)
class ShortWindowValue:
    value: complex | np.ndarray
    shells: tuple
    empty: bool


def short_window_shells(lam: float) -> tuple:
    """Degrees N with lam <= mu_N <= lam + 1."""
    if lam < 0:
        raise InvalidArgument("lambda must be nonnegative")
    lo = degree_for_frequency(lam)
    out = []
    n = lo
    while np.sqrt(n * (n + 1.0)) <= lam + 1:
        out.append(n)
        n += 1
    return tuple(out)


def short_window_kernel(lam: float, a, b, tau: float | None = None, method: str = "addition") -> ShortWindowValue:
    """Sharp spectral window sum over mu_N in [lam, lam + 1]."""
    tau = _tau(a, b, tau)
    shells = short_window_shells(lam)
    if not shells:
        shape = np.broadcast_shapes(np.shape(_zeta(a))[:-1], np.shape(_zeta(b))[:-1])
        zero = 0j if shape == () else np.zeros(shape, dtype=complex)
        return ShortWindowValue(zero, shells, True)
    weights = np.zeros(shells[-1] + 1)
    weights[list(shells)] = 1.0
    val = _projector_from_weights(weights, a, b, tau, method)
    val = complex(val) if np.ndim(val) == 0 else val
    return ShortWindowValue(val, shells, False)


def _tau(a, b, tau):
    if tau is not None:
        return float(tau)
    for p in (a, b):
        if isinstance(p, TubePoint):
            return p.tau
    raise InvalidArgument("tau must be given when points are raw quadric arrays")
