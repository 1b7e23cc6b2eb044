"""Complexified spherical harmonics on the tube boundary.

Y_N^m continues holomorphically to the quadric as the homogeneous-harmonic
polynomial

    Y_N^m(zeta) = Qbar_N^m(zeta_z) (zeta_x + i zeta_y)^m            (m >= 0)
    Y_N^{-m}(zeta) = (-1)^m Qbar_N^m(zeta_z) (zeta_x - i zeta_y)^m

where Qbar_N^m(cos phi) sin^m phi is the fully normalised associated Legendre
function with the Condon-Shortley phase.  The degree recurrence for Qbar is
run with a per-point log scale so that values of size e^{N tau} never
overflow.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.optimize import minimize
from scipy.special import gammaln

from .errors import ChartDegenerate, InvalidArgument, ResolutionError
from .sphere_tube import (
    LiouvilleRule,
    TubePoint,
    embed,
    liouville_mass,
    reduced_liouville_quadrature,
    tangent_frame,
)

MAX_DEGREE = 300
_RESCALE = 1e150


@dataclass(frozen=True)
class LogComplex:
    """The complex number exp(log_mag + i phase)."""

    log_mag: float
    phase: float

    def __post_init__(self):
        ph = float(np.angle(np.exp(1j * self.phase))) if np.isfinite(self.phase) else 0.0
        if ph == -np.pi:
            ph = np.pi
        object.__setattr__(self, "phase", ph)
        object.__setattr__(self, "log_mag", float(self.log_mag))

    @classmethod
    def from_complex(cls, z: complex) -> "LogComplex":
        z = complex(z)
        return cls(np.log(abs(z)) if z != 0 else -np.inf, np.angle(z))

    def to_complex(self) -> complex:
        return complex(np.exp(self.log_mag + 1j * self.phase))

    def __mul__(self, other: "LogComplex") -> "LogComplex":
        return LogComplex(self.log_mag + other.log_mag, self.phase + other.phase)

    def __truediv__(self, other: "LogComplex") -> "LogComplex":
        return LogComplex(self.log_mag - other.log_mag, self.phase - other.phase)

    def conj(self) -> "LogComplex":
        return LogComplex(self.log_mag, -self.phase)

    def __abs__(self):
        return float(np.exp(self.log_mag))


def log_c_N(N: int) -> float:
    """log |c_N| with c_N = (-1)^N sqrt((2N+1)!/4pi) / (2^N N!)."""
    if N < 0:
        raise InvalidArgument("N must be nonnegative")
    return 0.5 * (gammaln(2 * N + 2) - np.log(4 * np.pi)) - N * np.log(2.0) - gammaln(N + 1)


def c_N(N: int) -> float:
    """|c_N|, the normalising constant of the highest-weight harmonic Y_N^N."""
    return float(np.exp(log_c_N(N)))


# ---------------------------------------------------------------------------
# Legendre polynomials with log scaling


def legendre_log_real(n_max: int, x: float) -> np.ndarray:
    """log P_N(x) for N = 0..n_max and real x > 1."""
    if x <= 1:
        raise InvalidArgument("legendre_log_real expects x > 1")
    out = np.empty(n_max + 1)
    out[0] = 0.0
    if n_max == 0:
        return out
    p_prev, p_cur, scale = 1.0, x, 0.0
    out[1] = np.log(x)
    for n in range(1, n_max):
        p_next = ((2 * n + 1) * x * p_cur - n * p_prev) / (n + 1)
        p_prev, p_cur = p_cur, p_next
        if p_cur > _RESCALE:
            p_prev /= p_cur
            scale += np.log(p_cur)
            p_cur = 1.0
        out[n + 1] = scale + np.log(p_cur)
    return out


def legendre_weighted_sum(log_coeffs: np.ndarray, t, log_normalizers: np.ndarray | None = None) -> np.ndarray:
    """sum_N exp(log_coeffs[N] - log_normalizers[N]) P_N(t) for complex t (vectorised).

    Entries of log_coeffs equal to -inf are skipped (the recurrence still
    passes through them).
    """
    t = np.asarray(t, dtype=complex)
    shape = t.shape
    t = t.ravel()
    n_max = len(log_coeffs) - 1
    norm = np.zeros(n_max + 1) if log_normalizers is None else np.asarray(log_normalizers)
    active = np.isfinite(log_coeffs)
    total = np.zeros_like(t)
    p_prev = np.zeros_like(t)
    p_cur = np.ones_like(t)
    scale = np.zeros(t.shape)
    for n in range(n_max + 1):
        if active[n]:
            total += np.exp(log_coeffs[n] - norm[n] + scale) * p_cur
        if n == n_max:
            break
        p_next = ((2 * n + 1) * t * p_cur - n * p_prev) / (n + 1)
        p_prev, p_cur = p_cur, p_next
        big = np.abs(p_cur) > _RESCALE
        if np.any(big):
            f = np.abs(p_cur[big])
            p_cur[big] /= f
            p_prev[big] /= f
            scale[big] += np.log(f)
    return total.reshape(shape)


# ---------------------------------------------------------------------------
# evaluation


def harmonic_log(N: int, m: int, zeta) -> tuple[np.ndarray, np.ndarray]:
    """(log |Y_N^m(zeta)|, arg Y_N^m(zeta)) for an array of quadric points (..., 3)."""
    if N < 0 or abs(m) > N:
        raise InvalidArgument(f"invalid mode (N={N}, m={m})")
    zeta = np.asarray(zeta, dtype=complex)
    am = abs(m)
    t = zeta[..., 2]
    w = zeta[..., 0] + 1j * zeta[..., 1] if m >= 0 else zeta[..., 0] - 1j * zeta[..., 1]
    log_pref = 0.5 * (gammaln(2 * am + 2) - np.log(4 * np.pi)) - am * np.log(2.0) - gammaln(am + 1)
    sign = (-1.0) ** am  # Condon-Shortley factor of Qbar_m^m
    if m < 0:
        sign *= (-1.0) ** am
    q_prev = np.zeros_like(t)
    q_cur = np.ones_like(t)
    scale = np.zeros(t.shape)
    for l in range(am + 1, N + 1):
        a = np.sqrt((4.0 * l * l - 1) / (l * l - am * am))
        b = np.sqrt(((l - 1.0) ** 2 - am * am) / (4.0 * (l - 1) ** 2 - 1))
        q_prev, q_cur = q_cur, a * (t * q_cur - b * q_prev)
        big = np.abs(q_cur) > _RESCALE
        if np.any(big):
            f = np.abs(q_cur[big])
            q_cur[big] /= f
            q_prev[big] /= f
            scale[big] += np.log(f)
    with np.errstate(divide="ignore"):
        log_mag = log_pref + scale + np.log(np.abs(q_cur)) + (am * np.log(np.abs(w)) if am else 0.0)
    phase = np.angle(sign * q_cur) + (am * np.angle(w) if am else 0.0)
    return log_mag, phase


def harmonic_values(N: int, m: int, zeta) -> np.ndarray:
    lm, ph = harmonic_log(N, m, zeta)
    return np.exp(lm + 1j * ph)


@dataclass(frozen=True)
class HarmonicMode:
    N: int
    m: int
    tau: float = 1.0

    def __post_init__(self):
        if self.N < 0 or abs(self.m) > self.N:
            raise InvalidArgument(f"invalid mode (N={self.N}, m={self.m})")
        if self.N > MAX_DEGREE:
            raise InvalidArgument(f"degree {self.N} exceeds the supported maximum {MAX_DEGREE}")
        if not self.tau > 0:
            raise InvalidArgument("tau must be positive")

    @property
    def mu(self) -> float:
        return float(np.sqrt(self.N * (self.N + 1)))

    @property
    def log_l2_norm(self) -> float:
        return log_tube_l2_norm(self.N, self.tau)

    @property
    def l2_norm_on_tube(self) -> float:
        return float(np.exp(self.log_l2_norm))


def log_tube_l2_norm(N: int, tau: float) -> float:
    """log of the L^2 norm of Y_N^m on the tube boundary (independent of m).

    Rotation invariance makes the norm the same for every m, and the addition
    theorem sum_m |Y_N^m(zeta)|^2 = (2N+1)/(4pi) P_N(cosh 2tau) holds at every
    boundary point, so ||Y_N^m||^2 = mass * P_N(cosh 2tau) / (4pi).
    """
    log_p = legendre_log_real(N, np.cosh(2 * tau))[N]
    return 0.5 * (np.log(liouville_mass(tau)) + log_p - np.log(4 * np.pi))


def complexified_harmonic(mode: HarmonicMode, p: TubePoint) -> LogComplex:
    lm, ph = harmonic_log(mode.N, mode.m, p.zeta[None, :])
    return LogComplex(lm[0], ph[0])


def normalized_husimi(mode: HarmonicMode, p: TubePoint) -> LogComplex:
    """The continued harmonic divided by its L^2 norm on the boundary of radius p.tau."""
    lm, ph = harmonic_log(mode.N, mode.m, p.zeta[None, :])
    return LogComplex(lm[0] - log_tube_l2_norm(mode.N, p.tau), ph[0])


def complex_angles(zeta, tol: float = 1e-12):
    """Recover (theta + i xi_theta, phi + i xi_phi) with zeta = (sin Phi cos Th, sin Phi sin Th, cos Phi)."""
    zeta = np.asarray(zeta, dtype=complex)
    big_phi = np.arccos(zeta[..., 2])
    s = np.sin(big_phi)
    if np.any(np.abs(s) < tol):
        raise ChartDegenerate("point lies on the pole of the complexified chart; rotate the frame")
    big_theta = -1j * np.log((zeta[..., 0] + 1j * zeta[..., 1]) / s)
    return big_theta.real, big_theta.imag, big_phi.real, big_phi.imag


def highest_weight_closed_form(N: int, p: TubePoint) -> complex:
    """c_N sin(phi + i xi_phi)^N e^{iN(theta + i xi_theta)} via complex angles."""
    th, xth, ph, xph = complex_angles(p.zeta)
    base = np.sin(ph + 1j * xph)
    sign = (-1.0) ** N
    return complex(sign * c_N(N) * base**N * np.exp(1j * N * (th + 1j * xth)))


# ---------------------------------------------------------------------------
# norms


def default_resolution(N: int, p_exponent: float) -> int:
    """Nodes per angle: at least 8 sqrt(N), and enough to resolve |Y|^p peaks."""
    pe = 64.0 if np.isinf(p_exponent) else max(p_exponent, 2.0)
    n = int(max(8 * np.sqrt(max(N, 1)), 6 * np.sqrt(max(N, 1) * pe), 16))
    return n + (n % 2 == 0)  # odd, so cos(phi) = 0 is a node


def _log_lp_on_rule(mode: HarmonicMode, p_exponent: float, rule: LiouvilleRule) -> float:
    lm, _ = harmonic_log(mode.N, mode.m, rule.zeta)
    if np.isinf(p_exponent):
        return float(np.max(lm))
    vals = p_exponent * lm + np.log(rule.weights)
    top = np.max(vals)
    return float((top + np.log(np.sum(np.exp(vals - top)))) / p_exponent)


def _refine_max(mode: HarmonicMode, tau: float, rule: LiouvilleRule, lm_best: float) -> float:
    """Polish the node maximum of log|Y| by a local search in (phi, alpha) at theta = 0."""
    lm, _ = harmonic_log(mode.N, mode.m, rule.zeta)
    i = int(np.argmax(lm))

    def neg(x):
        xx, et, ep = tangent_frame(0.0, x[0])
        v = np.cos(x[1]) * et + np.sin(x[1]) * ep
        return -harmonic_log(mode.N, mode.m, embed(xx, v, tau)[None, :])[0][0]

    res = minimize(neg, [rule.phi[i], rule.alpha[i]], method="Nelder-Mead",
                   options={"xatol": 1e-10, "fatol": 1e-13})
    return max(lm_best, -float(res.fun))


def tube_lp_norm(
    mode: HarmonicMode,
    p_exponent: float,
    tau: float | None = None,
    rule: LiouvilleRule | None = None,
    check: bool = True,
    rtol: float = 1e-4,
) -> float:
    """log ||Y||_{L^p} on the tube boundary (Liouville measure); p may be np.inf.

    Harmonic moduli do not depend on theta, so the default rule is the theta
    slice carrying mass 2 pi.  With ``check`` the value is recomputed at double
    resolution and a ResolutionError is raised if the norm moves by more
    than ``rtol``.
    """
    tau = mode.tau if tau is None else tau
    if not (p_exponent >= 1):
        raise InvalidArgument("p must be >= 1")
    if rule is None:
        n = default_resolution(mode.N, p_exponent)
        rule = reduced_liouville_quadrature(tau, n, n + 1)
    value = _log_lp_on_rule(mode, p_exponent, rule)
    if np.isinf(p_exponent):
        return _refine_max(mode, tau, rule, value)
    if check:
        n_phi, n_alpha = rule.shape[1], rule.shape[2]
        finer = reduced_liouville_quadrature(tau, 2 * n_phi + 1, 2 * n_alpha)
        finer_value = _log_lp_on_rule(mode, p_exponent, finer)
        if abs(np.expm1(finer_value - value)) > rtol:
            raise ResolutionError(
                f"L^{p_exponent} norm of Y_{mode.N}^{mode.m} changed by "
                f"{abs(np.expm1(finer_value - value)):.2e} on refinement"
            )
        value = finer_value
    return value


def husimi_lp_norm(mode: HarmonicMode, p_exponent: float, **kw) -> float:
    """log ||Y / ||Y||_2||_{L^p}."""
    return tube_lp_norm(mode, p_exponent, **kw) - mode.log_l2_norm


def gram_matrix(n_max: int, tau: float, rule: LiouvilleRule) -> tuple[np.ndarray, list]:
    """Gram matrix of the normalised continued harmonics with N <= n_max."""
    modes = [(N, m) for N in range(n_max + 1) for m in range(-N, N + 1)]
    zeta = rule.zeta
    cols = []
    for N, m in modes:
        lm, ph = harmonic_log(N, m, zeta)
        cols.append(np.exp(lm - log_tube_l2_norm(N, tau) + 1j * ph))
    a = np.array(cols)
    g = (a * rule.weights) @ a.conj().T
    return g, modes


def harmonic_log_all_degrees(m: int, zeta, n_max: int):
    """log-modulus and phase of Y_N^m(zeta) for N = |m|..n_max, stacked on axis 0."""
    zeta = np.asarray(zeta, dtype=complex)
    am = abs(m)
    if am > n_max:
        shape = (0,) + zeta.shape[:-1]
        return np.empty(shape), np.empty(shape)
    t = zeta[..., 2]
    w = zeta[..., 0] + 1j * zeta[..., 1] if m >= 0 else zeta[..., 0] - 1j * zeta[..., 1]
    log_pref = 0.5 * (gammaln(2 * am + 2) - np.log(4 * np.pi)) - am * np.log(2.0) - gammaln(am + 1)
    sign = 1.0 if m < 0 else (-1.0) ** am
    with np.errstate(divide="ignore"):
        log_w = am * np.log(np.abs(w)) if am else 0.0
    arg_w = am * np.angle(w) if am else 0.0
    q_prev = np.zeros_like(t)
    q_cur = np.ones_like(t)
    scale = np.zeros(t.shape)
    logs, phases = [], []
    for l in range(am, n_max + 1):
        if l > am:
            a = np.sqrt((4.0 * l * l - 1) / (l * l - am * am))
            b = np.sqrt(((l - 1.0) ** 2 - am * am) / (4.0 * (l - 1) ** 2 - 1))
            q_prev, q_cur = q_cur, a * (t * q_cur - b * q_prev)
            big = np.abs(q_cur) > _RESCALE
            if np.any(big):
                f = np.abs(q_cur[big])
                q_cur[big] /= f
                q_prev[big] /= f
                scale[big] += np.log(f)
        with np.errstate(divide="ignore"):
            logs.append(log_pref + scale + np.log(np.abs(q_cur)) + log_w)
        phases.append(np.angle(sign * q_cur) + arg_w)
    return np.array(logs), np.array(phases)
