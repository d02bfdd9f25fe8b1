"""Gradient-part integrands and their first two derivatives.

All evaluators are vectorized over a trailing axis of length ``n``: an
array of gradients with shape ``(..., n)`` yields values ``(...)``,
gradients ``(..., n)`` and Hessians ``(..., n, n)``.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np

from ..errors import InvalidInputError

KINDS = ("area-kappa", "p-power-plus-quadratic", "custom")


def _area_kappa(xi, p, kappa):
    r2 = np.sum(xi * xi, axis=-1)
    s = kappa**2 + r2
    # expm1/log1p keeps Psi accurate for |xi| << kappa
    val = kappa**p * np.expm1(0.5 * p * np.log1p(r2 / kappa**2)) / p
    a = s ** (0.5 * (p - 2.0))
    grad = a[..., None] * xi
    b = (p - 2.0) * s ** (0.5 * (p - 4.0))
    n = xi.shape[-1]
    hess = a[..., None, None] * np.eye(n) + b[..., None, None] * xi[..., :, None] * xi[..., None, :]
    return val, grad, hess


def _power_plus_quadratic(xi, p):
    r2 = np.sum(xi * xi, axis=-1)
    r = np.sqrt(r2)
    rp2 = r ** (p - 2.0)
    val = r**p / p + 0.5 * r2
    a = rp2 + 1.0
    grad = a[..., None] * xi
    with np.errstate(invalid="ignore", divide="ignore"):
        unit = np.where(r[..., None] > 0, xi / np.where(r > 0, r, 1.0)[..., None], 0.0)
    n = xi.shape[-1]
    hess = (a[..., None, None] * np.eye(n)
            + ((p - 2.0) * rp2)[..., None, None] * unit[..., :, None] * unit[..., None, :])
    return val, grad, hess


@dataclass
class PsiModel:
    """Convex integrand Psi with the sandwich constants against Psi_kappa.

    ``kappa`` is the parameter of the reference integrand Psi_kappa; for
    ``area-kappa`` it is also the model's own parameter. When ``mu1`` /
    ``mu2`` are omitted for the built-in kinds they are computed by
    :func:`sandwich_constants`.
    """

    kind: str = "area-kappa"
    p: float = 3.0
    kappa: float = 1.0
    mu1: Optional[float] = None
    mu2: Optional[float] = None
    value_fn: Optional[Callable] = None
    grad_fn: Optional[Callable] = None
    hess_fn: Optional[Callable] = None

    def __post_init__(self):
        if self.kind not in KINDS:
            raise InvalidInputError(f"unknown psi kind {self.kind!r}; expected one of {KINDS}")
        if not np.isfinite(self.p) or self.p <= 2:
            raise InvalidInputError(f"psi.p must satisfy p > 2, got {self.p}")
        if not self.kappa > 0:
            raise InvalidInputError(f"psi.kappa must be > 0, got {self.kappa}")
        if self.kind == "custom":
            if None in (self.value_fn, self.grad_fn, self.hess_fn):
                raise InvalidInputError("custom psi needs value_fn, grad_fn and hess_fn")
            if self.mu1 is None or self.mu2 is None:
                raise InvalidInputError("custom psi needs explicit mu1 and mu2")
        if self.mu1 is None or self.mu2 is None:
            lo, hi = sandwich_constants(self)
            self.mu1 = lo if self.mu1 is None else self.mu1
            self.mu2 = hi if self.mu2 is None else self.mu2
        if not (0 < self.mu1 <= self.mu2):
            raise InvalidInputError(f"need 0 < mu1 <= mu2, got mu1={self.mu1}, mu2={self.mu2}")

    def evaluate(self, xi):
        xi = np.asarray(xi, dtype=float)
        if self.kind == "area-kappa":
            return _area_kappa(xi, self.p, self.kappa)
        if self.kind == "p-power-plus-quadratic":
            return _power_plus_quadratic(xi, self.p)
        return self.value_fn(xi), self.grad_fn(xi), self.hess_fn(xi)

    def reference(self, xi):
        """Psi_kappa with this model's (p, kappa)."""
        return _area_kappa(np.asarray(xi, dtype=float), self.p, self.kappa)

    def validate(self, dim=2, atol=1e-12):
        val, grad, _ = self.evaluate(np.zeros(dim))
        if abs(float(val)) > atol or np.max(np.abs(grad)) > atol:
            raise InvalidInputError("Psi(0) and grad Psi(0) must vanish")
        return True


def sandwich_constants(model, margin=0.01):
    """Bounds mu1, mu2 with mu1*Psi_kappa'' <= Psi'' <= mu2*Psi_kappa''.

    Both built-in kinds are radial, so their Hessians share the radial and
    transverse eigendirections and the quadratic-form inequalities reduce to
    ratios of the two eigenvalue pairs, scanned over |xi|.
    """
    if model.kind == "area-kappa":
        return 1.0, 1.0
    r = np.concatenate([[0.0], np.logspace(-6, 6, 4001)])
    xi = np.stack([r, np.zeros_like(r)], axis=-1)
    _, _, h = model.evaluate(xi)
    _, _, h_ref = model.reference(xi)
    ratios = np.concatenate([h[:, 0, 0] / h_ref[:, 0, 0], h[:, 1, 1] / h_ref[:, 1, 1]])
    return float(ratios.min() * (1.0 - margin)), float(ratios.max() * (1.0 + margin))


def check_sandwich(model, xis):
    """Smallest eigenvalue of both sandwich differences over the samples."""
    _, _, h = model.evaluate(xis)
    _, _, h_ref = model.reference(xis)
    lo = np.linalg.eigvalsh(h - model.mu1 * h_ref).min()
    hi = np.linalg.eigvalsh(model.mu2 * h_ref - h).min()
    return float(min(lo, hi))


def psi_derivatives(model: PsiModel, xi):
    """Value, gradient and Hessian of Psi at a single gradient vector."""
    xi = np.asarray(xi, dtype=float)
    if xi.ndim != 1 or not np.all(np.isfinite(xi)):
        raise InvalidInputError("xi must be a finite 1-D vector")
    val, grad, hess = model.evaluate(xi)
    return float(val), np.asarray(grad), np.asarray(hess)
