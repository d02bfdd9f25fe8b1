"""Structured P1 meshes on intervals and rectangles with Dirichlet elimination."""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from ..errors import InvalidInputError


def _gauss_01(npts):
    t, w = np.polynomial.legendre.leggauss(npts)
    return 0.5 * (t + 1.0), 0.5 * w


def reference_quadrature(dim, order):
    """Points and weights (summing to 1) on the reference simplex, exact to ``order``."""
    if order < 1:
        raise InvalidInputError("quadrature order must be >= 1")
    if dim == 1:
        t, w = _gauss_01(max(1, math.ceil((order + 1) / 2)))
        return t[:, None], w
    # collapsed (Duffy) Gauss product rule on the unit triangle
    n = max(1, math.ceil((order + 2) / 2))
    u, wu = _gauss_01(n)
    v, wv = _gauss_01(n)
    U, V = np.meshgrid(u, v, indexing="ij")
    W = np.outer(wu, wv) * (1.0 - U)
    pts = np.stack([U.ravel(), (V * (1.0 - U)).ravel()], axis=-1)
    w = 2.0 * W.ravel()
    return pts, w


def _barycentric(dim, pts):
    if dim == 1:
        return np.stack([1.0 - pts[:, 0], pts[:, 0]], axis=-1)
    return np.stack([1.0 - pts[:, 0] - pts[:, 1], pts[:, 0], pts[:, 1]], axis=-1)


@dataclass
class Mesh:
    dim: int
    domain: tuple
    nodes: np.ndarray
    elements: np.ndarray
    boundary: np.ndarray
    quad_order: int = 4

    def __post_init__(self):
        self.nodes = np.asarray(self.nodes, dtype=float).reshape(len(self.nodes), self.dim)
        self.elements = np.asarray(self.elements, dtype=np.int64)
        self.boundary = np.asarray(self.boundary, dtype=bool)
        self.interior = np.flatnonzero(~self.boundary)
        verts = self.nodes[self.elements]                      # (nel, dim+1, dim)
        J = np.swapaxes(verts[:, 1:, :] - verts[:, :1, :], 1, 2)  # columns = edges
        det = np.linalg.det(J)
        if np.any(det <= 0):
            raise InvalidInputError("mesh has elements with non-positive measure")
        self.measure = det / math.factorial(self.dim)
        ref_grad = np.vstack([-np.ones((1, self.dim)), np.eye(self.dim)])  # (dim+1, dim)
        invJT = np.swapaxes(np.linalg.inv(J), 1, 2)
        self.grad_basis = np.einsum("eij,kj->eki", invJT, ref_grad)
        self.ref_points, self.ref_weights = reference_quadrature(self.dim, self.quad_order)
        self.basis_q = _barycentric(self.dim, self.ref_points)      # (nq, dim+1)
        self.qpoints = np.einsum("qk,ekd->eqd", self.basis_q, verts)
        self.qweights = self.measure[:, None] * self.ref_weights[None, :]
        if np.any(self.qweights <= 0):
            raise InvalidInputError("quadrature weights must be positive")

    @property
    def n_nodes(self):
        return len(self.nodes)

    @property
    def n_dofs(self):
        return len(self.interior)

    @property
    def domain_measure(self):
        if self.dim == 1:
            return float(self.domain[1] - self.domain[0])
        x0, x1, y0, y1 = self.domain
        return float((x1 - x0) * (y1 - y0))

    def interpolate(self, fn):
        """Interior nodal values of ``fn`` evaluated at node coordinates."""
        x = self.nodes[self.interior]
        return np.asarray(fn(x[:, 0]) if self.dim == 1 else fn(x[:, 0], x[:, 1]), dtype=float)

    def full(self, u):
        out = np.zeros(self.n_nodes)
        out[self.interior] = u
        return out


def interval_mesh(a=0.0, b=1.0, n_elements=16, quad_order=4):
    if not b > a or n_elements < 1:
        raise InvalidInputError("interval mesh needs a < b and at least one element")
    x = np.linspace(a, b, n_elements + 1)
    elements = np.stack([np.arange(n_elements), np.arange(1, n_elements + 1)], axis=-1)
    boundary = np.zeros(n_elements + 1, dtype=bool)
    boundary[[0, -1]] = True
    return Mesh(1, (float(a), float(b)), x[:, None], elements, boundary, quad_order)


def rectangle_mesh(domain=(0.0, 1.0, 0.0, 1.0), resolution=(8, 8), quad_order=4):
    x0, x1, y0, y1 = map(float, domain)
    nx, ny = resolution
    if not (x1 > x0 and y1 > y0) or nx < 1 or ny < 1:
        raise InvalidInputError("rectangle mesh needs a non-empty box and positive resolution")
    X, Y = np.meshgrid(np.linspace(x0, x1, nx + 1), np.linspace(y0, y1, ny + 1), indexing="ij")
    nodes = np.stack([X.ravel(), Y.ravel()], axis=-1)
    idx = np.arange((nx + 1) * (ny + 1)).reshape(nx + 1, ny + 1)
    a, b = idx[:-1, :-1].ravel(), idx[1:, :-1].ravel()
    c, d = idx[1:, 1:].ravel(), idx[:-1, 1:].ravel()
    elements = np.concatenate([np.stack([a, b, c], -1), np.stack([a, c, d], -1)])
    boundary = np.zeros(len(nodes), dtype=bool)
    boundary[idx[0, :]] = boundary[idx[-1, :]] = True
    boundary[idx[:, 0]] = boundary[idx[:, -1]] = True
    return Mesh(2, (x0, x1, y0, y1), nodes, elements, boundary, quad_order)


def from_config(dim, domain, resolution, quad_order=4):
    if dim == 1:
        a, b = domain
        n = resolution[0] if isinstance(resolution, (list, tuple)) else resolution
        return interval_mesh(a, b, int(n), quad_order)
    if dim == 2:
        res = resolution if isinstance(resolution, (list, tuple)) else (resolution, resolution)
        return rectangle_mesh(tuple(domain), tuple(int(r) for r in res), quad_order)
    raise InvalidInputError(f"mesh.dim must be 1 or 2, got {dim}")
