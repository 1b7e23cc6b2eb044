"""Real symplectic matrices and their complexification into (P, Q) blocks.

Conventions: phase-space vectors are ordered (x_1..x_k, y_1..y_k), the
symplectic form is J = [[0, I], [-I, 0]], and a point is identified with the
complex vector z = x + i y.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import InvalidArgument

SYMPLECTIC_TOL = 1e-8


def standard_form(k: int) -> np.ndarray:
    """The 2k x 2k matrix J = [[0, I], [-I, 0]]."""
    eye = np.eye(k)
    zero = np.zeros((k, k))
    return np.block([[zero, eye], [-eye, zero]])


def w_matrix(k: int) -> np.ndarray:
    """Unitary change of basis W = (1/sqrt 2) [[I, I], [-iI, iI]].

    W maps (z, conj z) coordinates to real (x, y) coordinates.
    """
    eye = np.eye(k)
    return np.block([[eye, eye], [-1j * eye, 1j * eye]]) / np.sqrt(2.0)


@dataclass(frozen=True)
class SymplecticMatrix:
    """A real 2k x 2k matrix M with M^T J M = J."""

    entries: np.ndarray

    def __post_init__(self):
        m = np.array(self.entries, dtype=float)
        if m.ndim != 2 or m.shape[0] != m.shape[1] or m.shape[0] % 2:
            raise InvalidArgument(f"expected a 2k x 2k matrix, got shape {m.shape}")
        m.setflags(write=False)
        object.__setattr__(self, "entries", m)

    @property
    def k(self) -> int:
        return self.entries.shape[0] // 2

    @property
    def blocks(self):
        k = self.k
        m = self.entries
        return m[:k, :k], m[:k, k:], m[k:, :k], m[k:, k:]

    def symplectic_defect(self) -> float:
        j = standard_form(self.k)
        return float(np.max(np.abs(self.entries.T @ j @ self.entries - j)))

    def is_symplectic(self, tol: float = SYMPLECTIC_TOL) -> bool:
        return self.symplectic_defect() < tol

    def __matmul__(self, other: "SymplecticMatrix") -> "SymplecticMatrix":
        return SymplecticMatrix(self.entries @ other.entries)

    def inverse(self) -> "SymplecticMatrix":
        # M^{-1} = -J M^T J for symplectic M
        j = standard_form(self.k)
        return SymplecticMatrix(-j @ self.entries.T @ j)

    @classmethod
    def identity(cls, k: int) -> "SymplecticMatrix":
        return cls(np.eye(2 * k))


def as_symplectic(m, tol: float = SYMPLECTIC_TOL) -> SymplecticMatrix:
    """Coerce an array or SymplecticMatrix, validating the symplectic identity."""
    sm = m if isinstance(m, SymplecticMatrix) else SymplecticMatrix(np.asarray(m))
    defect = sm.symplectic_defect()
    if defect >= tol:
        raise InvalidArgument(f"matrix is not symplectic (max |M^T J M - J| = {defect:.3e})")
    return sm


@dataclass(frozen=True)
class ComplexSymplecticBlocks:
    """Holomorphic block P and antiholomorphic block Q of a symplectic map.

    The real map acts on z = x + iy as z -> P z + Q conj(z).
    """

    P: np.ndarray
    Q: np.ndarray

    @property
    def k(self) -> int:
        return self.P.shape[0]

    def reassemble(self) -> np.ndarray:
        """Return the complex 2k x 2k matrix [[P, Q], [conj Q, conj P]]."""
        return np.block([[self.P, self.Q], [self.Q.conj(), self.P.conj()]])

    def to_real(self) -> np.ndarray:
        """Conjugate back by W to the real symplectic matrix."""
        w = w_matrix(self.k)
        return np.real_if_close(w @ self.reassemble() @ w.conj().T, tol=1e6).real


def complexify(M, tol: float = 1e-10) -> ComplexSymplecticBlocks:
    """Split M into (P, Q) with P = (A + D + i(C - B))/2 and Q read off W^{-1} M W."""
    sm = as_symplectic(M)
    a, b, c, d = sm.blocks
    k = sm.k
    p_closed = 0.5 * (a + d + 1j * (c - b))
    w = w_matrix(k)
    conj = w.conj().T @ sm.entries @ w
    p_conj = conj[:k, :k]
    q = conj[:k, k:]
    if np.max(np.abs(p_closed - p_conj)) > tol * max(1.0, np.max(np.abs(p_closed))):
        raise AssertionError("closed-form P disagrees with the W-conjugation")
    return ComplexSymplecticBlocks(P=p_closed, Q=q.copy())


def apply_complexified(blocks: ComplexSymplecticBlocks, v) -> np.ndarray:
    """Return P v + Q conj(v)."""
    v = np.atleast_1d(np.asarray(v, dtype=complex))
    if v.shape[-1] != blocks.k:
        raise InvalidArgument(f"vector of length {v.shape[-1]} does not match k={blocks.k}")
    return v @ blocks.P.T + v.conj() @ blocks.Q.T


def apply_real(M, v) -> np.ndarray:
    """Apply the real matrix to z = x + iy and return x' + iy'."""
    sm = M if isinstance(M, SymplecticMatrix) else SymplecticMatrix(np.asarray(M))
    v = np.atleast_1d(np.asarray(v, dtype=complex))
    k = sm.k
    xy = np.concatenate([v.real, v.imag], axis=-1)
    out = xy @ sm.entries.T
    return out[..., :k] + 1j * out[..., k:]


def rotation(alpha: float) -> SymplecticMatrix:
    """The k=1 rotation [[cos a, sin a], [-sin a, cos a]]."""
    c, s = np.cos(alpha), np.sin(alpha)
    return SymplecticMatrix(np.array([[c, s], [-s, c]]))
