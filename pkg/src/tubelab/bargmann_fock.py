"""Bargmann-Fock reproducing kernel, the metaplectic kernel of a linear
symplectic map, and its lift to the reduced Heisenberg group."""
from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .errors import ConsistencyError, InvalidArgument, NearSingularBlock
from .numerics import QuadratureRule, gauss_hermite
from .symplectic import as_symplectic, complexify

DET_P_FLOOR = 1e-12


def _vec(z, k=None) -> np.ndarray:
    z = np.atleast_1d(np.asarray(z, dtype=complex))
    if k is not None and z.shape[-1] != k:
        raise InvalidArgument(f"expected vectors of length {k}, got {z.shape[-1]}")
    return z


def bf_kernel(z, w) -> complex:
    """(2 pi)^{-k} exp(-|z|^2/2 - |w|^2/2 + z . conj(w)); broadcasts over leading axes."""
    z = _vec(z)
    w = _vec(w)
    if z.shape[-1] != w.shape[-1]:
        raise InvalidArgument("z and w have different dimensions")
    k = z.shape[-1]
    expo = (
        -0.5 * np.sum(np.abs(z) ** 2, axis=-1)
        - 0.5 * np.sum(np.abs(w) ** 2, axis=-1)
        + np.sum(z * w.conj(), axis=-1)
    )
    return (2 * np.pi) ** (-k) * np.exp(expo)


def analytic_measure_constant(k: int) -> float:
    # int_C exp(-|v|^2 + z conj(v) + v conj(w)) dv = pi exp(z conj(w)) gives
    # int bf(z,v) bf(v,w) dv = (2 pi)^{-2k} pi^k exp(...) = (2 pi)^{-k} 2^{-k} exp(...),
    # so the reproducing measure is 2^k times Lebesgue measure.
    return 2.0**k


def complex_gaussian_integral(f, k: int, order: int = 40, cov=None, center=None):
    """Integrate f(v) over C^k (Lebesgue measure) by tensor Gauss-Hermite.

    f must be vectorised over an (n, k) array of points.  Nodes are placed at
    x = center + L y with L L^T = cov, and the Hermite weight exp(-|y|^2) is
    divided back out, so the rule is accurate when |f| is close to a
    Gaussian of that shape.
    """
    rule = gauss_hermite(order)
    dim = 2 * k
    chol = np.eye(dim) if cov is None else np.linalg.cholesky(np.asarray(cov, dtype=float))
    shift = np.zeros(dim) if center is None else np.asarray(center, dtype=float)
    grids = np.meshgrid(*([rule.nodes] * dim), indexing="ij")
    y = np.stack([g.ravel() for g in grids])
    wts = np.ones(y.shape[1])
    for g in np.meshgrid(*([rule.weights] * dim), indexing="ij"):
        wts = wts * g.ravel()
    x = shift[:, None] + chol @ y
    v = (x[:k] + 1j * x[k:]).T
    vals = f(v)
    return np.sum(wts * np.exp(np.sum(y**2, axis=0)) * vals) * np.linalg.det(chol)


def _log_modulus_quadratic(f, k: int, h: float = 0.5):
    """Gradient and Hessian of log|f| at 0, assuming log|f| is quadratic in (Re v, Im v)."""
    dim = 2 * k
    basis = np.eye(dim)

    def logf(x):
        x = np.atleast_2d(x)
        return np.log(np.abs(f(x[:, :k] + 1j * x[:, k:])))

    f0 = logf(np.zeros(dim))[0]
    grad = np.zeros(dim)
    hess = np.zeros((dim, dim))
    for i in range(dim):
        fp, fm = logf(h * basis[i])[0], logf(-h * basis[i])[0]
        grad[i] = (fp - fm) / (2 * h)
        hess[i, i] = (fp - 2 * f0 + fm) / h**2
        for j in range(i):
            pts = h * np.array([basis[i] + basis[j], basis[i] - basis[j],
                                -basis[i] + basis[j], -basis[i] - basis[j]])
            vals = logf(pts)
            hess[i, j] = hess[j, i] = (vals[0] - vals[1] - vals[2] + vals[3]) / (4 * h**2)
    return grad, hess


def adapted_gaussian_integral(f, k: int, order: int = 40):
    """Integrate a Gaussian-times-phase integrand with nodes fitted to |f|."""
    grad, hess = _log_modulus_quadratic(f, k)
    neg = -hess
    center = np.linalg.solve(neg, grad)
    cov = 2.0 * np.linalg.inv(neg)
    return complex_gaussian_integral(f, k, order, cov=0.5 * (cov + cov.T), center=center)


def fit_measure_constant(k: int, order: int = 40, n_test: int = 6, seed: int = 0) -> float:
    """Fit c with c * int bf(z,v) bf(v,w) dv = bf(z,w) over a grid of (z, w)."""
    if not 1 <= k <= 3:
        raise InvalidArgument("fit_measure_constant supports 1 <= k <= 3")
    order = min(order, {1: 40, 2: 24, 3: 10}[k])
    rng = np.random.default_rng(seed)
    zs = rng.uniform(-0.8, 0.8, (n_test, k)) + 1j * rng.uniform(-0.8, 0.8, (n_test, k))
    ws = rng.uniform(-0.8, 0.8, (n_test, k)) + 1j * rng.uniform(-0.8, 0.8, (n_test, k))
    zs[0] = 0
    ws[0] = 0
    ratios = []
    for z, w in zip(zs, ws):
        integral = complex_gaussian_integral(
            lambda v: bf_kernel(z[None, :], v) * bf_kernel(v, w[None, :]), k, order,
        )
        ratios.append(bf_kernel(z, w) / integral)
    ratios = np.array(ratios)
    c = float(np.mean(ratios.real))
    if np.max(np.abs(ratios - c)) > 1e-8 * c:
        raise ConsistencyError("no single measure constant reproduces the kernel")
    expected = analytic_measure_constant(k)
    if abs(c - expected) > 1e-10 * expected:
        raise ConsistencyError(f"fitted constant {c!r} differs from analytic {expected!r}")
    return c


# ---------------------------------------------------------------------------
# metaplectic kernel

BRANCHES = ("principal", "continued")


@dataclass(frozen=True)
class MetaplecticKernelValue:
    value: complex
    sign_branch: str

    def __abs__(self):
        return abs(self.value)

    def __complex__(self):
        return complex(self.value)


def _det_p_sqrt_inverse(P: np.ndarray, branch: str, path: Sequence | None) -> complex:
    det = np.linalg.det(P)
    if abs(det) < DET_P_FLOOR:
        raise NearSingularBlock(f"|det P| = {abs(det):.3e} is below {DET_P_FLOOR}")
    if branch == "principal":
        return det ** (-0.5)
    if branch != "continued":
        raise InvalidArgument(f"unknown branch {branch!r}")
    if not path:
        raise InvalidArgument("the continued branch needs a matrix path ending at M")
    # follow sqrt(det P_t) continuously from the identity along the path
    root = 1.0 + 0j
    for m in list(path) + [None]:
        d = det if m is None else np.linalg.det(complexify(m).P)
        cand = np.sqrt(complex(d))
        if abs(cand - root) > abs(-cand - root):
            cand = -cand
        root = cand
    return 1.0 / root


def metaplectic_kernel_closed(
    M, z, w, branch: str = "principal", path: Sequence | None = None
) -> MetaplecticKernelValue:
    """(2pi)^{-k} (det P)^{-1/2} exp(1/2(z Qbar P^{-1} z + 2 wbar P^{-1} z - wbar P^{-1} Q wbar))
    times exp(-|z|^2/2 - |w|^2/2).

    ``z`` and ``w`` may carry leading batch axes.
    """
    sm = as_symplectic(M)
    blocks = complexify(sm)
    k = sm.k
    z = _vec(z, k)
    w = _vec(w, k)
    pre = _det_p_sqrt_inverse(blocks.P, branch, path)
    pinv = np.linalg.inv(blocks.P)
    a = blocks.Q.conj() @ pinv  # z^T (Qbar P^{-1}) z
    b = pinv @ blocks.Q  # wbar^T (P^{-1} Q) wbar
    wb = w.conj()
    quad_z = np.einsum("...i,ij,...j->...", z, a, z)
    cross = np.einsum("...i,ij,...j->...", wb, pinv, z)
    quad_w = np.einsum("...i,ij,...j->...", wb, b, wb)
    expo = 0.5 * (quad_z + 2 * cross - quad_w)
    expo = expo - 0.5 * np.sum(np.abs(z) ** 2, -1) - 0.5 * np.sum(np.abs(w) ** 2, -1)
    val = (2 * np.pi) ** (-k) * pre * np.exp(expo)
    return MetaplecticKernelValue(val, branch)


PREFACTORS = ("conjugate_root", "printed")


def metaplectic_kernel_quadrature(
    M, z, w, rule: QuadratureRule | None = None, prefactor: str = "conjugate_root"
) -> complex:
    """Evaluate the kernel as a Gaussian integral over C^k.

    The integral c * int bf(z, M v) bf(v, w) dv, with M v = P v + Q conj(v)
    and c the reproducing measure constant, equals the closed-form kernel
    divided by conj(det P)^{1/2}.  The default prefactor therefore
    multiplies by conj(det P)^{1/2}.  ``prefactor="printed"`` uses
    (det P)^{-1/2} instead, which reproduces the closed form only up to the
    factor |det P|; it is kept for reporting that discrepancy.
    """
    sm = as_symplectic(M)
    k = sm.k
    if k > 2:
        raise InvalidArgument("quadrature definition is limited to k <= 2")
    if rule is None:
        rule = gauss_hermite(40 if k == 1 else 20)
    if rule.domain_tag != "gauss_hermite_line":
        raise InvalidArgument("expected a Gauss-Hermite rule")
    blocks = complexify(sm)
    z = _vec(z, k)
    w = _vec(w, k)
    # the integrand's Gaussian envelope is exp(-x^T G x / 2) with
    # G = (I + M^T M)/2, so nodes are placed with covariance G^{-1}
    g = 0.5 * (np.eye(2 * k) + sm.entries.T @ sm.entries)
    cov = np.linalg.inv(g)

    def integrand(v):
        mv = v @ blocks.P.T + v.conj() @ blocks.Q.T
        return bf_kernel(z[None, :], mv) * bf_kernel(v, w[None, :])

    integral = analytic_measure_constant(k) * complex_gaussian_integral(
        integrand, k, len(rule), cov=cov
    )
    det = np.linalg.det(blocks.P)
    if abs(det) < DET_P_FLOOR:
        raise NearSingularBlock(f"|det P| = {abs(det):.3e} is below {DET_P_FLOOR}")
    if prefactor == "conjugate_root":
        return complex(np.sqrt(complex(det.conjugate())) * integral)
    if prefactor == "printed":
        return complex(complex(det) ** (-0.5) * integral)
    raise InvalidArgument(f"unknown prefactor {prefactor!r}")


def composed_kernel(M1, M2, z, w, order: int = 40) -> complex:
    """c * int K_{M1}(z, v) K_{M2}(v, w) dv by Gauss-Hermite (k = 1 or 2)."""
    s1, s2 = as_symplectic(M1), as_symplectic(M2)
    k = s1.k
    z = _vec(z, k)
    w = _vec(w, k)

    def integrand(v):
        return (
            metaplectic_kernel_closed(s1, np.broadcast_to(z, v.shape), v).value
            * metaplectic_kernel_closed(s2, v, np.broadcast_to(w, v.shape)).value
        )

    return analytic_measure_constant(k) * adapted_gaussian_integral(integrand, k, order)


def unitarity_integral(M, z, w, order: int = 40) -> complex:
    """c * int K_M(z, v) conj(K_M(w, v)) dv, which equals bf_kernel(z, w) for a unitary lift."""
    sm = as_symplectic(M)
    k = sm.k
    z = _vec(z, k)
    w = _vec(w, k)

    def integrand(v):
        a = metaplectic_kernel_closed(sm, np.broadcast_to(z, v.shape), v).value
        b = metaplectic_kernel_closed(sm, np.broadcast_to(w, v.shape), v).value
        return a * b.conj()

    return analytic_measure_constant(k) * adapted_gaussian_integral(integrand, k, order)


# ---------------------------------------------------------------------------
# Heisenberg lift


@dataclass(frozen=True)
class BFPoint:
    theta: float
    z: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "z", np.atleast_1d(np.asarray(self.z, dtype=complex)))


def lifted_kernel(M, a: BFPoint, b: BFPoint, branch: str = "principal", path=None) -> complex:
    """e^{i(theta_a - theta_b)} K_M(z_a, z_b)."""
    val = metaplectic_kernel_closed(M, a.z, b.z, branch=branch, path=path).value
    return complex(np.exp(1j * (a.theta - b.theta)) * val)


def heisenberg_model(u, v, theta: float = 0.0, phi: float = 0.0, m: int = 2) -> complex:
    """pi^{-(m-1)} e^{i(theta - phi) + u.conj(v) - |u|^2/2 - |v|^2/2}, the identity-map model."""
    u = _vec(u)
    v = _vec(v)
    expo = (
        1j * (theta - phi)
        + np.sum(u * v.conj(), -1)
        - 0.5 * np.sum(np.abs(u) ** 2, -1)
        - 0.5 * np.sum(np.abs(v) ** 2, -1)
    )
    return np.pi ** (-(m - 1)) * np.exp(expo)
