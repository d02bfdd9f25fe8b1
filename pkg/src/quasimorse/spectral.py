"""Splitting of the second differential relative to the H-metric."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.linalg

DEFAULT_ZERO_TOL = 1e-6


@dataclass
class Splitting:
    """Generalized eigendecomposition hess(ubar) x = mu * Hgram x.

    ``eigenvectors`` are H-orthonormal columns sorted by ascending ``mu``.
    ``zero_tol`` is absolute; eigenvalues with |mu| <= zero_tol are null.
    """

    eigenvalues: np.ndarray
    eigenvectors: np.ndarray
    gram: np.ndarray
    hessian: np.ndarray
    zero_tol: float
    morse_index: int
    null_count: int
    projector_minus: np.ndarray
    projector_plus: np.ndarray

    @property
    def N(self):
        return len(self.eigenvalues)

    @property
    def coindex(self):
        return self.N - self.morse_index - self.null_count

    @property
    def degenerate(self):
        return self.null_count > 0

    @property
    def minus_basis(self):
        return self.eigenvectors[:, : self.morse_index]

    @property
    def plus_basis(self):
        return self.eigenvectors[:, self.morse_index + self.null_count:]

    def h_norm(self, v):
        return float(np.sqrt(max(v @ self.gram @ v, 0.0)))

    def eigen_residual(self):
        """Largest ||(A - mu B) x||, measured in the dual H-norm."""
        R = self.hessian @ self.eigenvectors - (self.gram @ self.eigenvectors) * self.eigenvalues
        sol = scipy.linalg.cho_solve(scipy.linalg.cho_factor(self.gram), R)
        return float(np.sqrt(np.max(np.sum(R * sol, axis=0))))

    def to_dict(self, head=10):
        return {
            "eigenvalues": [float(m) for m in self.eigenvalues[:head]],
            "morse_index": self.morse_index,
            "null_count": self.null_count,
            "coindex": self.coindex,
            "margin": injectivity_margin(self),
            "zero_tol": self.zero_tol,
            "degenerate": self.degenerate,
        }


def splitting_from_matrices(A, B, zero_tol=None, rel_tol=DEFAULT_ZERO_TOL):
    A = 0.5 * (A + A.T)
    mu, X = scipy.linalg.eigh(A, B)
    if zero_tol is None:
        zero_tol = rel_tol * max(float(np.max(np.abs(mu))), np.finfo(float).tiny)
    index = int(np.sum(mu < -zero_tol))
    null = int(np.sum(np.abs(mu) <= zero_tol))
    Xm, Xp = X[:, :index], X[:, index + null:]
    Pm = Xm @ Xm.T @ B
    Pp = Xp @ Xp.T @ B
    return Splitting(mu, X, B, A, float(zero_tol), index, null, Pm, Pp)


def splitting(F, cp, zero_tol=None, rel_tol=DEFAULT_ZERO_TOL):
    """Splitting at a critical point; a non-definite Gram matrix propagates AssemblyError."""
    u = cp.coefficients if hasattr(cp, "coefficients") else np.asarray(cp, dtype=float)
    return splitting_from_matrices(F.hessian(u), F.h_gram(u), zero_tol, rel_tol)


def morse_index(s: Splitting) -> int:
    return s.morse_index


def injectivity_margin(s: Splitting) -> float:
    return float(np.min(np.abs(s.eigenvalues)))


def accumulation_check(s: Splitting, window: float) -> float:
    """Fraction of eigenvalues strictly within ``window`` of 1."""
    return float(np.mean(np.abs(s.eigenvalues - 1.0) < window))
