"""Spectral localisation windows chi with compactly supported Fourier transform.

Fourier convention: chi_hat(t) = int chi(s) exp(-i s t) ds, so chi_hat(0) = 1
means int chi = 1, and chi(s) = (1/2pi) int chi_hat(t) exp(i s t) dt.
"""
from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from ..errors import InvalidArgument, TruncationError

WINDOW_KINDS = ("fejer", "fejer_squared", "bump")

# Gauss-Legendre order for the bump transform; the integrand is smooth and
# compactly supported, so this resolves frequencies far beyond the cutoff.
_BUMP_ORDER = 600


@dataclass(frozen=True)
class SpectralWindow:
    epsilon: float
    kind: str = "bump"
    center: float = 0.0

    def __post_init__(self):
        if not self.epsilon > 0:
            raise InvalidArgument("epsilon must be positive")
        if self.kind not in WINDOW_KINDS:
            raise InvalidArgument(f"unknown window kind {self.kind!r}; choose from {WINDOW_KINDS}")
        if self.center < 0:
            raise InvalidArgument("window center must be nonnegative")

    def at(self, center: float) -> "SpectralWindow":
        return SpectralWindow(self.epsilon, self.kind, float(center))

    def __call__(self, s):
        return window_chi(self, s)


@lru_cache(maxsize=32)
def _bump_nodes(order: int):
    y, w = np.polynomial.legendre.leggauss(order)
    g = np.exp(-1.0 / (1.0 - y * y))
    return y, w, g


def _bump_profile_norm(eps: float) -> float:
    # int g^2 over |t| < eps/2
    y, w, g = _bump_nodes(_BUMP_ORDER)
    return 0.5 * eps * np.sum(w * g * g)


def _bump_transform(eps: float, s: np.ndarray) -> np.ndarray:
    """g_hat(s) for g(t) = exp(-1/(1 - (2t/eps)^2)) on |t| < eps/2."""
    s = np.asarray(s, dtype=float)
    # the cosine runs through eps*|s|/2 radians on [-1, 1]; keep enough nodes per period
    smax = float(np.max(np.abs(s))) if s.size else 0.0
    order = max(_BUMP_ORDER, 200 * int(np.ceil((0.75 * eps * smax + 200) / 200)))
    y, w, g = _bump_nodes(order)
    flat = s.ravel()
    out = np.empty_like(flat)
    # chunk to bound memory of the (len(s), order) cosine table
    for start in range(0, len(flat), 4096):
        chunk = flat[start:start + 4096]
        out[start:start + 4096] = 0.5 * eps * np.cos(np.outer(chunk, 0.5 * eps * y)) @ (w * g)
    return out.reshape(s.shape)


def window_chi(w: SpectralWindow, s, power: int = 1):
    """chi(s) (or chi(s)**power); nonnegative and even."""
    s = np.asarray(s, dtype=float)
    eps = w.epsilon
    if w.kind == "fejer":
        val = eps / (2 * np.pi) * np.sinc(eps * s / (2 * np.pi)) ** 2
    elif w.kind == "fejer_squared":
        val = 3 * eps / (8 * np.pi) * np.sinc(eps * s / (4 * np.pi)) ** 4
    else:
        gh = _bump_transform(eps, s)
        val = gh * gh / (2 * np.pi * _bump_profile_norm(eps))
    return val**power if power != 1 else val


def window_hat(w: SpectralWindow, t):
    """chi_hat(t), supported in [-epsilon, epsilon] with chi_hat(0) = 1."""
    t = np.abs(np.asarray(t, dtype=float))
    eps = w.epsilon
    if w.kind == "fejer":
        return np.clip(1 - t / eps, 0, None)
    if w.kind == "fejer_squared":
        # normalised self-convolution of the triangle of half-width eps/2 (cubic B-spline)
        y = t / (eps / 2)
        inner = (4 - 6 * y**2 + 3 * y**3) / 4
        outer = np.clip(2 - y, 0, None) ** 3 / 4
        return np.where(y <= 1, inner, outer)
    # (g * g)(t) / int g^2 by Gauss-Legendre over the overlap of the supports
    flat = t.ravel()
    out = np.zeros_like(flat)
    yq, wq = np.polynomial.legendre.leggauss(200)
    half = eps / 2
    g = lambda x: np.where(np.abs(x) < half, np.exp(-1.0 / np.clip(1 - (x / half) ** 2, 1e-300, None)), 0.0)
    for i, ti in enumerate(flat):
        if ti >= eps:
            continue
        lo, hi = ti - half, half
        x = 0.5 * (lo + hi) + 0.5 * (hi - lo) * yq
        out[i] = 0.5 * (hi - lo) * np.sum(wq * g(x) * g(ti - x))
    return (out / _bump_profile_norm(eps)).reshape(t.shape)


def tail_cutoff(w: SpectralWindow, threshold: float = 1e-12, cap: float = 2.0e4, power: int = 1) -> float:
    """Smallest S with chi(s)**power < threshold for every |s| >= S.

    Raises TruncationError when S would exceed ``cap``.
    """
    eps = w.epsilon
    if w.kind == "fejer":
        # chi(s) <= (eps/2pi) (2/(eps s))^2
        bound = lambda s: eps / (2 * np.pi) * (2 / (eps * s)) ** 2
    elif w.kind == "fejer_squared":
        bound = lambda s: 3 * eps / (8 * np.pi) * (4 / (eps * s)) ** 4
    else:
        bound = None
    if bound is not None:
        # closed-form envelope, monotone in s
        lo, hi = 1e-6, cap
        if bound(hi) ** power >= threshold:
            raise TruncationError(
                f"{w.kind} window needs a cutoff beyond {cap:g} for threshold {threshold:g}"
            )
        for _ in range(200):
            mid = 0.5 * (lo + hi)
            if bound(mid) ** power < threshold:
                hi = mid
            else:
                lo = mid
        return hi
    return _bump_cutoff(eps, threshold, cap, power)


@lru_cache(maxsize=64)
def _bump_cutoff(eps: float, threshold: float, cap: float, power: int) -> float:
    # scan outward in blocks; the envelope decays monotonically, so the first
    # block lying entirely below the threshold ends the search
    w = SpectralWindow(eps, "bump")
    step = min(1.0, np.pi / eps / 8)
    block = 64 * step + 4 * np.pi / eps
    start = 0.0
    last_above = 0.0
    while start < cap:
        grid = np.arange(start, start + block, step)
        vals = window_chi(w, grid, power)
        above = np.nonzero(vals >= threshold)[0]
        if len(above) == 0:
            return float(last_above + step)
        last_above = grid[above[-1]]
        start += block
    raise TruncationError(f"bump window needs a cutoff beyond {cap:g}")
