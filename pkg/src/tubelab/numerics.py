"""Quadrature rules, log-log fitting, random symplectic matrices and the
exact check of the stationary-phase Hessian."""
from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Sequence

import numpy as np
from scipy.linalg import expm

from .errors import ConsistencyError, InsufficientData, InvalidArgument
from .symplectic import SymplecticMatrix, standard_form

DEFAULT_HERMITE_ORDER = 60

DOMAIN_TAGS = ("interval", "periodic_circle", "gauss_hermite_line")


@dataclass(frozen=True)
class QuadratureRule:
    nodes: np.ndarray
    weights: np.ndarray
    domain_tag: str

    def __post_init__(self):
        nodes = np.asarray(self.nodes, dtype=float)
        weights = np.asarray(self.weights, dtype=float)
        if self.domain_tag not in DOMAIN_TAGS:
            raise InvalidArgument(f"unknown domain tag {self.domain_tag!r}")
        if len(nodes) != len(weights):
            raise InvalidArgument("nodes and weights differ in length")
        if np.any(weights <= 0):
            raise InvalidArgument("quadrature weights must be positive")
        object.__setattr__(self, "nodes", nodes)
        object.__setattr__(self, "weights", weights)

    def __len__(self):
        return len(self.weights)

    def integrate(self, f) -> complex:
        return np.sum(self.weights * f(self.nodes))


def gauss_hermite(order: int) -> QuadratureRule:
    """Gauss-Hermite rule for the weight exp(-x^2) on the real line."""
    if order < 1:
        raise InvalidArgument("Gauss-Hermite order must be >= 1")
    x, w = np.polynomial.hermite.hermgauss(order)
    return QuadratureRule(x, w, "gauss_hermite_line")


def gauss_legendre(order: int, a: float = -1.0, b: float = 1.0) -> QuadratureRule:
    if order < 1:
        raise InvalidArgument("Gauss-Legendre order must be >= 1")
    x, w = np.polynomial.legendre.leggauss(order)
    half = 0.5 * (b - a)
    return QuadratureRule(0.5 * (a + b) + half * x, half * w, "interval")


def periodic_trapezoid(n: int, period: float = 2 * np.pi, offset: float = 0.0) -> QuadratureRule:
    """Equispaced rule, exact for trigonometric polynomials of degree < n."""
    if n < 1:
        raise InvalidArgument("number of nodes must be >= 1")
    nodes = offset + period * np.arange(n) / n
    return QuadratureRule(nodes, np.full(n, period / n), "periodic_circle")


@dataclass(frozen=True)
class LogLogFit:
    slope: float
    intercept: float
    r_squared: float

    def predict(self, x):
        return np.exp(self.intercept) * np.asarray(x, dtype=float) ** self.slope


def fit_loglog(series: Iterable[Sequence[float]]) -> LogLogFit:
    """Unweighted least-squares line through (log x, log y)."""
    pts = np.asarray(list(series), dtype=float)
    if pts.ndim != 2 or pts.shape[1] != 2:
        raise InvalidArgument("series must be a list of (x, y) pairs")
    if len(pts) < 3:
        raise InsufficientData(f"need at least 3 points, got {len(pts)}")
    x, y = pts[:, 0], pts[:, 1]
    if np.any(x <= 0) or np.any(y <= 0):
        raise InvalidArgument("log-log fit needs positive x and y")
    if len(np.unique(x)) < 3:
        raise InsufficientData("need at least 3 distinct x values")
    lx, ly = np.log(x), np.log(y)
    slope, intercept = np.polyfit(lx, ly, 1)
    resid = ly - (slope * lx + intercept)
    ss_tot = np.sum((ly - ly.mean()) ** 2)
    r2 = 1.0 if ss_tot == 0 else 1.0 - np.sum(resid**2) / ss_tot
    return LogLogFit(float(slope), float(intercept), float(min(max(r2, 0.0), 1.0)))


def fit_linear(x, y) -> tuple[float, float]:
    """Least-squares slope and intercept of y against x."""
    slope, intercept = np.polyfit(np.asarray(x, float), np.asarray(y, float), 1)
    return float(slope), float(intercept)


def random_symplectic(k: int, seed: int, scale: float = 0.5) -> SymplecticMatrix:
    """exp(J S) for a random symmetric S with entries in [-scale, scale]."""
    if k < 1:
        raise InvalidArgument("k must be >= 1")
    if scale < 0:
        raise InvalidArgument("scale must be nonnegative")
    rng = np.random.default_rng(seed)
    a = rng.uniform(-scale, scale, size=(2 * k, 2 * k))
    s = np.triu(a) + np.triu(a, 1).T
    return SymplecticMatrix(expm(standard_form(k) @ s))


# ---------------------------------------------------------------------------
# stationary phase data

PHASE_VARIABLES = ("r", "sigma1", "sigma2", "re_w0")


@dataclass(frozen=True)
class PhaseCriticalData:
    hessian: np.ndarray
    hessian_inverse: np.ndarray
    critical_point: tuple
    tau: float
    exact_hessian: list = field(repr=False, default=None)
    exact_inverse: list = field(repr=False, default=None)


def _as_fraction(x) -> Fraction:
    # Fraction(float) is the exact binary value, so irrational tau such as
    # float(pi) are still handled in exact rational arithmetic.
    return x if isinstance(x, Fraction) else Fraction(x)


def phase_function(tau, r, sigma1, sigma2, re_w0):
    """Reduced phase -r - (sigma2/2) Re w0 + (sigma1/2)(Re w0 + 2 tau r)."""
    return -r - sigma2 / 2 * re_w0 + sigma1 / 2 * (re_w0 + 2 * tau * r)


def phase_hessian_matrices(tau) -> tuple[list, list]:
    """The Hessian at the critical point and its inverse, ordered (r, s1, s2, Re w0)."""
    t = _as_fraction(tau)
    z, h = Fraction(0), Fraction(1, 2)
    hess = [
        [z, t, z, z],
        [t, z, z, h],
        [z, z, z, -h],
        [z, h, -h, z],
    ]
    inv = [
        [z, 1 / t, 1 / t, z],
        [1 / t, z, z, z],
        [1 / t, z, z, Fraction(-2)],
        [z, z, Fraction(-2), z],
    ]
    return hess, inv


def _matmul_exact(a, b):
    n = len(a)
    return [[sum(a[i][l] * b[l][j] for l in range(n)) for j in range(n)] for i in range(n)]


def _exact_gradient(tau, point):
    """Central differences; exact for a quadratic in rational arithmetic."""
    h = Fraction(1)
    grad = []
    for i in range(4):
        up = list(point)
        dn = list(point)
        up[i] += h
        dn[i] -= h
        grad.append((phase_function(tau, *up) - phase_function(tau, *dn)) / (2 * h))
    return grad


def _exact_second_derivatives(tau, point):
    h = Fraction(1)
    out = [[Fraction(0)] * 4 for _ in range(4)]
    for i in range(4):
        for j in range(4):
            vals = []
            for si, sj in ((1, 1), (1, -1), (-1, 1), (-1, -1)):
                q = list(point)
                q[i] += si * h
                q[j] += sj * h
                vals.append(phase_function(tau, *q))
            out[i][j] = (vals[0] - vals[1] - vals[2] + vals[3]) / (4 * h * h)
    return out


def verify_phase_hessian(tau) -> PhaseCriticalData:
    """Check the tabulated Hessian/inverse pair and the critical point exactly."""
    if not tau > 0:
        raise InvalidArgument("tau must be positive")
    t = _as_fraction(tau)
    hess, inv = phase_hessian_matrices(t)
    eye = [[Fraction(int(i == j)) for j in range(4)] for i in range(4)]
    if _matmul_exact(hess, inv) != eye or _matmul_exact(inv, hess) != eye:
        raise ConsistencyError("Hessian times its tabulated inverse is not the identity")
    if any(hess[i][j] != hess[j][i] for i in range(4) for j in range(4)):
        raise ConsistencyError("Hessian is not symmetric")
    crit = (Fraction(0), 1 / t, 1 / t, Fraction(0))
    if any(g != 0 for g in _exact_gradient(t, crit)):
        raise ConsistencyError("critical point does not annihilate the phase gradient")
    if _exact_second_derivatives(t, crit) != hess:
        raise ConsistencyError("tabulated Hessian differs from the phase's second derivatives")
    as_float = lambda m: np.array([[float(e) for e in row] for row in m])
    # critical point ordered as (Re w0, r, sigma1, sigma2)
    return PhaseCriticalData(
        hessian=as_float(hess),
        hessian_inverse=as_float(inv),
        critical_point=(0.0, 0.0, float(1 / t), float(1 / t)),
        tau=float(tau),
        exact_hessian=hess,
        exact_inverse=inv,
    )
