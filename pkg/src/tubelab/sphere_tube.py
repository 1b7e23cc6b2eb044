"""Geometry of the boundary of the Grauert tube of radius tau over the round S^2.

A boundary point is a unit vector x on S^2 with a unit tangent vector v,
embedded in the complex quadric {zeta . zeta = 1} as
zeta = cosh(tau) x + i sinh(tau) v.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import FrameConstructionError, InvalidArgument
from .numerics import gauss_legendre, periodic_trapezoid
from .symplectic import SymplecticMatrix

QUADRIC_TOL = 1e-8


@dataclass(frozen=True)
class TubePoint:
    x: np.ndarray
    v: np.ndarray
    tau: float

    def __post_init__(self):
        x = np.asarray(self.x, dtype=float).reshape(3)
        v = np.asarray(self.v, dtype=float).reshape(3)
        if not self.tau > 0:
            raise InvalidArgument("tau must be positive")
        if abs(np.linalg.norm(x) - 1) > 1e-10 or abs(np.linalg.norm(v) - 1) > 1e-10:
            raise InvalidArgument("x and v must be unit vectors")
        if abs(x @ v) > 1e-10:
            raise InvalidArgument("v must be tangent to the sphere at x")
        x.setflags(write=False)
        v.setflags(write=False)
        object.__setattr__(self, "x", x)
        object.__setattr__(self, "v", v)
        object.__setattr__(self, "tau", float(self.tau))

    @property
    def zeta(self) -> np.ndarray:
        return np.cosh(self.tau) * self.x + 1j * np.sinh(self.tau) * self.v

    @property
    def normal(self) -> np.ndarray:
        """x cross v, the real direction spanning the complex tangent line H."""
        return np.cross(self.x, self.v)

    @classmethod
    def from_zeta(cls, zeta, tau: float | None = None) -> "TubePoint":
        zeta = np.asarray(zeta, dtype=complex)
        tau = tube_function(zeta) if tau is None else tau
        return cls(zeta.real / np.cosh(tau), zeta.imag / np.sinh(tau), tau)


def tangent_frame(theta, phi):
    """Unit vectors (x, e_theta, e_phi) of spherical coordinates; phi is the polar angle."""
    theta = np.asarray(theta, dtype=float)
    phi = np.asarray(phi, dtype=float)
    st, ct = np.sin(theta), np.cos(theta)
    sp, cp = np.sin(phi), np.cos(phi)
    x = np.stack([sp * ct, sp * st, cp], axis=-1)
    e_theta = np.stack([-st, ct, np.zeros_like(st * sp)], axis=-1)
    e_phi = np.stack([cp * ct, cp * st, -sp], axis=-1)
    return x, e_theta, e_phi


def from_angles(theta: float, phi: float, alpha: float, tau: float) -> TubePoint:
    """Point over (theta, phi) with v = cos(alpha) e_theta + sin(alpha) e_phi."""
    x, et, ep = tangent_frame(theta, phi)
    return TubePoint(x, np.cos(alpha) * et + np.sin(alpha) * ep, tau)


def embed(x, v, tau):
    """Vectorised quadric embedding cosh(tau) x + i sinh(tau) v."""
    return np.cosh(tau) * np.asarray(x) + 1j * np.sinh(tau) * np.asarray(v)


def tube_function(zeta) -> float:
    """arcsinh |Im zeta| for zeta on the quadric zeta . zeta = 1."""
    zeta = np.asarray(zeta, dtype=complex)
    if np.any(np.abs(np.sum(zeta * zeta, axis=-1) - 1) > QUADRIC_TOL):
        raise InvalidArgument("point is not on the quadric zeta . zeta = 1")
    return np.arcsinh(np.linalg.norm(zeta.imag, axis=-1))


def geodesic_flow(p: TubePoint, t: float) -> TubePoint:
    """Great-circle flow (x, v) -> (cos t x + sin t v, -sin t x + cos t v)."""
    c, s = np.cos(t), np.sin(t)
    return TubePoint(c * p.x + s * p.v, -s * p.x + c * p.v, p.tau)


def flow_arrays(x, v, t):
    c, s = np.cos(t), np.sin(t)
    return c * x + s * v, -s * x + c * v


def reeb_vector(p: TubePoint) -> np.ndarray:
    """d/dt of the embedded flow at t=0, as a complex 3-vector."""
    return np.cosh(p.tau) * p.v - 1j * np.sinh(p.tau) * p.x


def _as_real6(w: np.ndarray) -> np.ndarray:
    return np.concatenate([w.real, w.imag])


@dataclass(frozen=True)
class HeisenbergFrame:
    """Real 6-vectors (Re, Im parts) T, e1, Je1 at a boundary point."""

    T: np.ndarray
    e1: np.ndarray
    Je1: np.ndarray

    @property
    def e1_complex(self) -> np.ndarray:
        return self.e1[:3] + 1j * self.e1[3:]


def heisenberg_frame(p: TubePoint, seeds=None) -> HeisenbergFrame:
    """Reeb direction T and a unit vector e1 of the complex tangent line H.

    e1 is obtained from an ambient seed by projecting onto the tangent space
    of the quadric and removing the complex span of T.  The first seed is the
    normal x cross v, which lies in H already, so the default frame has
    e1 = x cross v; the standard basis vectors are fallbacks.
    """
    zeta = p.zeta
    t_c = reeb_vector(p)
    if seeds is None:
        seeds = [p.normal, np.eye(3)[0], np.eye(3)[1], np.eye(3)[2]]
    for seed in seeds:
        w = np.asarray(seed, dtype=complex)
        w = w - (zeta @ w) / np.vdot(zeta, zeta).real * zeta.conj()
        w = w - np.vdot(t_c, w) / np.vdot(t_c, t_c).real * t_c
        norm = np.linalg.norm(w)
        if norm > 1e-8:
            e1 = w / norm
            return HeisenbergFrame(_as_real6(t_c), _as_real6(e1), _as_real6(1j * e1))
    raise FrameConstructionError("every seed vector projected to zero")


def heisenberg_scale(tau: float) -> float:
    """Ambient length of a unit Heisenberg displacement in H.

    The Levi form of (arcsinh |Im zeta|)^2 restricted to H equals
    tau / sinh(2 tau) in ambient units; a Heisenberg coordinate of unit size
    therefore has ambient length sqrt(sinh(2 tau) / tau).
    """
    return np.sqrt(np.sinh(2 * tau) / tau)


def project_to_boundary(zeta, tau: float) -> TubePoint:
    """Nearest-point style retraction: normalise Re zeta, then the orthogonal part of Im zeta."""
    re = np.asarray(zeta).real
    im = np.asarray(zeta).imag
    x = re / np.linalg.norm(re)
    v = im - (im @ x) * x
    return TubePoint(x, v / np.linalg.norm(v), tau)


def displace(p: TubePoint, theta: float, u: complex, lam: float, frame: HeisenbergFrame | None = None) -> TubePoint:
    """Move by theta/lam along the Reeb direction and by u/sqrt(lam) inside H.

    The Reeb part is the flow for time theta / (2 tau lam).  The transverse
    part is an ambient straight step of Heisenberg length |u|/sqrt(lam)
    along Re(u) e1 + Im(u) J e1, followed by projection back to the boundary.
    """
    if lam < 1:
        raise InvalidArgument("lambda must be >= 1")
    q = geodesic_flow(p, theta / (2 * p.tau * lam)) if theta else p
    if u == 0:
        return q
    f = heisenberg_frame(q) if frame is None else frame
    step = heisenberg_scale(p.tau) / np.sqrt(lam) * complex(u) * f.e1_complex
    return project_to_boundary(q.zeta + step, p.tau)


def jacobi_linearization(s: float) -> SymplecticMatrix:
    """Linearised flow in (normal Jacobi displacement, momentum): rotation by s."""
    c, sn = np.cos(s), np.sin(s)
    return SymplecticMatrix(np.array([[c, sn], [-sn, c]]))


def heisenberg_linearization(s: float, tau: float) -> SymplecticMatrix:
    """Linearised flow on H in the (Re u, Im u) coordinates used by ``displace``.

    Conjugate to the Jacobi rotation by diag(cosh tau, sinh tau).
    """
    c, sn = np.cos(s), np.sin(s)
    return SymplecticMatrix(
        np.array([[c, sn / np.tanh(tau)], [-np.tanh(tau) * sn, c]])
    )


def integrate_jacobi(s: float, j0: float, dj0: float) -> tuple[float, float]:
    """Numerically solve J'' + J = 0 (unit curvature) up to time s."""
    from scipy.integrate import solve_ivp

    if s == 0:
        return j0, dj0
    sol = solve_ivp(lambda t, y: [y[1], -y[0]], (0, s), [j0, dj0], rtol=1e-12, atol=1e-13)
    return float(sol.y[0, -1]), float(sol.y[1, -1])


# ---------------------------------------------------------------------------
# Liouville quadrature


def liouville_mass(tau: float) -> float:
    """Total mass of the boundary under tau sin(phi) dtheta dphi dalpha."""
    return 8 * np.pi**2 * tau


@dataclass(frozen=True)
class LiouvilleRule:
    """Product rule on the boundary: trapezoid in theta and alpha, Gauss-Legendre in cos(phi)."""

    tau: float
    theta: np.ndarray
    phi: np.ndarray
    alpha: np.ndarray
    weights: np.ndarray

    def __len__(self):
        return len(self.weights)

    @property
    def shape(self):
        return (len(np.unique(self.theta)), len(np.unique(self.phi)), len(np.unique(self.alpha)))

    def frames(self):
        x, et, ep = tangent_frame(self.theta, self.phi)
        v = np.cos(self.alpha)[:, None] * et + np.sin(self.alpha)[:, None] * ep
        return x, v

    @property
    def zeta(self) -> np.ndarray:
        x, v = self.frames()
        return embed(x, v, self.tau)

    def points(self):
        x, v = self.frames()
        return [TubePoint(a, b, self.tau) for a, b in zip(x, v)]

    def integrate(self, values) -> complex:
        return np.sum(self.weights * np.asarray(values))


def _product_rule(tau, n_theta, n_phi, n_alpha) -> LiouvilleRule:
    rt = periodic_trapezoid(n_theta)
    rc = gauss_legendre(n_phi)
    ra = periodic_trapezoid(n_alpha)
    th, cp, al = np.meshgrid(rt.nodes, rc.nodes, ra.nodes, indexing="ij")
    w = np.einsum("i,j,k->ijk", rt.weights, rc.weights, ra.weights) * tau
    return LiouvilleRule(
        tau=float(tau),
        theta=th.ravel(),
        phi=np.arccos(cp.ravel()),
        alpha=al.ravel(),
        weights=w.ravel(),
    )


def liouville_quadrature(tau: float, n_theta: int, n_phi: int, n_alpha: int) -> LiouvilleRule:
    """Rule for the measure tau sin(phi) dtheta dphi dalpha (total mass 8 pi^2 tau)."""
    if not tau > 0:
        raise InvalidArgument("tau must be positive")
    if min(n_theta, n_phi, n_alpha) < 4:
        raise InvalidArgument("resolutions must be at least 4")
    return _product_rule(tau, n_theta, n_phi, n_alpha)


def reduced_liouville_quadrature(tau: float, n_phi: int, n_alpha: int) -> LiouvilleRule:
    """The theta = 0 slice carrying the full theta mass 2 pi.

    Exact for integrands whose modulus does not depend on theta, such as
    |Y_N^m|^p for complexified harmonics.
    """
    if not tau > 0:
        raise InvalidArgument("tau must be positive")
    if min(n_phi, n_alpha) < 4:
        raise InvalidArgument("resolutions must be at least 4")
    return _product_rule(tau, 1, n_phi, n_alpha)
