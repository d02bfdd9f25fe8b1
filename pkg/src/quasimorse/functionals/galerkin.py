"""P1 Galerkin discretization of f(u) = int Psi(grad u) - int G(x, u)."""
from __future__ import annotations

import numpy as np

from ..errors import AssemblyError, EmptySpaceError, InvalidInputError
from .mesh import Mesh
from .nonlinearity import GModel
from .psi import PsiModel


def sobolev_conjugate(p, n):
    return n * p / (n - p) if p < n else np.inf


def critical_exponent(p, n):
    """2 p* / n, infinite whenever p* is."""
    return 2.0 * sobolev_conjugate(p, n) / n


class DiscreteFunctional:
    """Common surface of the galerkin and explicit backends."""

    backend = "abstract"
    N: int
    sobolev_conjugate = np.inf
    critical_exponent = np.inf

    def _check(self, u):
        u = np.asarray(u, dtype=float)
        if u.shape != (self.N,):
            raise InvalidInputError(f"expected a coefficient vector of length {self.N}, got shape {u.shape}")
        if not np.all(np.isfinite(u)):
            raise InvalidInputError("coefficient vector must be finite")
        return u

    def value(self, u):
        raise NotImplementedError

    def gradient(self, u):
        raise NotImplementedError

    def hessian(self, u):
        raise NotImplementedError

    def h_gram(self, ubar):
        raise NotImplementedError

    def ambient_gram(self):
        """Fixed metric for distances, balls and steepest descent."""
        return self.h_gram(np.zeros(self.N))

    def describe(self):
        return {"backend": self.backend, "N": self.N}


class GalerkinFunctional(DiscreteFunctional):
    backend = "galerkin"

    def __init__(self, psi: PsiModel, g: GModel, mesh: Mesh):
        if mesh.n_dofs == 0:
            raise EmptySpaceError("mesh has no interior nodes")
        self.psi, self.g, self.mesh = psi, g, mesh
        self.N = mesh.n_dofs
        self.sobolev_conjugate = sobolev_conjugate(psi.p, mesh.dim)
        self.critical_exponent = critical_exponent(psi.p, mesh.dim)
        self._ambient = None
        e, nn = mesh.elements, mesh.n_nodes
        self._pair_index = (e[:, :, None] * nn + e[:, None, :]).ravel()

    def _fields(self, u):
        m = self.mesh
        ue = m.full(u)[m.elements]                                   # (nel, k)
        gradu = np.einsum("eki,ek->ei", m.grad_basis, ue)
        uq = ue @ m.basis_q.T                                        # (nel, nq)
        return gradu, uq

    def _scatter_vec(self, local):
        m = self.mesh
        full = np.bincount(m.elements.ravel(), weights=local.ravel(), minlength=m.n_nodes)
        return full[m.interior]

    def _scatter_mat(self, local):
        m = self.mesh
        nn = m.n_nodes
        full = np.bincount(self._pair_index, weights=local.ravel(), minlength=nn * nn).reshape(nn, nn)
        A = full[np.ix_(m.interior, m.interior)]
        return 0.5 * (A + A.T)

    def value(self, u):
        u = self._check(u)
        m = self.mesh
        gradu, uq = self._fields(u)
        val, _, _ = self.psi.evaluate(gradu)
        return float(m.measure @ val - np.sum(m.qweights * self.g.G(m.qpoints, uq)))

    def gradient(self, u):
        u = self._check(u)
        m = self.mesh
        gradu, uq = self._fields(u)
        _, dpsi, _ = self.psi.evaluate(gradu)
        local = m.measure[:, None] * np.einsum("eki,ei->ek", m.grad_basis, dpsi)
        local -= np.einsum("eq,qk->ek", m.qweights * self.g.g(m.qpoints, uq), m.basis_q)
        return self._scatter_vec(local)

    def _stiffness_local(self, gradu):
        _, _, d2psi = self.psi.evaluate(gradu)
        m = self.mesh
        return m.measure[:, None, None] * np.einsum("eki,eij,elj->ekl", m.grad_basis, d2psi, m.grad_basis)

    def hessian(self, u):
        u = self._check(u)
        m = self.mesh
        gradu, uq = self._fields(u)
        local = self._stiffness_local(gradu)
        wdg = m.qweights * self.g.dg(m.qpoints, uq)
        local -= np.einsum("eq,qk,ql->ekl", wdg, m.basis_q, m.basis_q)
        return self._scatter_mat(local)

    def h_gram(self, ubar):
        """Gram matrix of <v, w>_H = int Psi''(grad ubar)[grad v, grad w]."""
        ubar = self._check(ubar)
        gradu, _ = self._fields(ubar)
        A = self._scatter_mat(self._stiffness_local(gradu))
        lo = float(np.linalg.eigvalsh(A)[0])
        if not lo > 0:
            raise AssemblyError(f"H-metric Gram matrix is not positive definite (smallest eigenvalue {lo:.3e})", lo)
        return A

    def ambient_gram(self):
        if self._ambient is None:
            self._ambient = self.h_gram(np.zeros(self.N))
        return self._ambient

    def nodes(self):
        return self.mesh.nodes[self.mesh.interior]

    def describe(self):
        return {
            "backend": self.backend,
            "N": self.N,
            "dim": self.mesh.dim,
            "psi": {"kind": self.psi.kind, "p": self.psi.p, "kappa": self.psi.kappa,
                    "mu1": self.psi.mu1, "mu2": self.psi.mu2},
            "g": {"kind": self.g.name, "params": self.g.params, "scale": self.g.scale},
            "sobolev_conjugate": self.sobolev_conjugate,
            "critical_exponent": self.critical_exponent,
        }

    def with_g(self, g):
        return GalerkinFunctional(self.psi, g, self.mesh)


def assemble(psi: PsiModel, g: GModel, mesh: Mesh) -> GalerkinFunctional:
    return GalerkinFunctional(psi, g, mesh)
