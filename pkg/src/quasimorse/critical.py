"""Critical points by damped Newton on the gradient, with deflation for multiplicity."""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .errors import InvalidInputError, NoConvergenceError

ARMIJO = 1e-4
CONTRACTION = 0.5
MAX_BACKTRACKS = 30


@dataclass
class CriticalPoint:
    coefficients: np.ndarray
    value: float
    residual: float
    id: int = -1
    iterations: int = 0
    morse_index: Optional[int] = None
    degenerate: bool = False
    extra: dict = field(default_factory=dict)

    def to_dict(self, with_coefficients=True):
        out = {
            "id": self.id,
            "value": self.value,
            "residual": self.residual,
            "iterations": self.iterations,
            "morse_index": self.morse_index,
            "degenerate": self.degenerate,
            "norm": float(np.linalg.norm(self.coefficients)),
        }
        if with_coefficients:
            out["coefficients"] = [float(c) for c in self.coefficients]
        return out


class Deflation:
    """M(u) = prod_k (1 / ||u - u_k|| + shift), exponent 1."""

    def __init__(self, roots=(), shift=1.0):
        self.roots = [np.asarray(r, dtype=float) for r in roots]
        self.shift = shift

    def __call__(self, u):
        """Operator value and its gradient at ``u``."""
        M = 1.0
        dlog = np.zeros_like(u)
        for r in self.roots:
            d = u - r
            dist = np.linalg.norm(d)
            if dist == 0.0:
                return np.inf, dlog
            factor = 1.0 / dist + self.shift
            M *= factor
            dlog += (-d / dist**3) / factor
        return M, M * dlog


def merge_radius(u):
    return 1e-6 * (1.0 + np.linalg.norm(u))


def newton_refine(F, u0, tol=1e-10, max_iter=100, deflation: Optional[Deflation] = None):
    """Damped Newton iteration for grad F(u) = 0.

    Steps are Armijo-backtracked on the (deflated) residual norm. When the
    Newton system is singular or its direction fails the line search, the
    steepest-descent direction of the squared residual is tried instead;
    failure of both raises :class:`NoConvergenceError` (stagnation).
    """
    if not tol > 0:
        raise InvalidInputError("tol must be positive")
    u = np.array(u0, dtype=float)
    if u.shape != (F.N,):
        raise InvalidInputError(f"initial guess must have length {F.N}")

    def merit(v):
        g = F.gradient(v)
        M = deflation(v)[0] if deflation else 1.0
        return M * M * float(g @ g), g

    phi, g = merit(u)
    for it in range(max_iter + 1):
        res = float(np.linalg.norm(g))
        if res <= tol:
            return CriticalPoint(u, F.value(u), res, iterations=it)
        if it == max_iter:
            break
        H = F.hessian(u)
        directions = []
        try:
            d0 = np.linalg.solve(H, -g)
            if np.all(np.isfinite(d0)):
                if deflation and deflation.roots:
                    M, dM = deflation(u)
                    denom = M - float(dM @ d0)
                    if denom != 0.0 and np.isfinite(denom):
                        d0 = d0 * (M / denom)
                directions.append((d0, -2.0 * phi))
        except np.linalg.LinAlgError:
            pass
        sd = -(H @ g)
        directions.append((sd, -2.0 * float(g @ (H @ (H @ g)))))
        for d, slope in directions:
            alpha = 1.0
            accepted = False
            for _ in range(MAX_BACKTRACKS + 1):
                trial = u + alpha * d
                if np.all(np.isfinite(trial)):
                    phi_t, g_t = merit(trial)
                    bound = phi + ARMIJO * alpha * min(slope, 0.0) if slope < 0 else phi * (1.0 - 1e-12)
                    if np.isfinite(phi_t) and phi_t <= bound:
                        accepted = True
                        break
                alpha *= CONTRACTION
            if accepted:
                u, phi, g = trial, phi_t, g_t
                break
        else:
            raise NoConvergenceError("Newton iteration stagnated", u, it)
    raise NoConvergenceError(f"no convergence within {max_iter} iterations", u, max_iter)


def deflated_search(F, seeds, tol=1e-10, max_iter=100, max_per_seed=16):
    """Distinct critical points reachable from ``seeds``, ordered by value.

    Each seed is re-run with all known roots deflated until the iteration
    fails or rediscovers a known root. Accepted points are re-checked on the
    undeflated gradient.
    """
    found: list[CriticalPoint] = []

    def known(u):
        return any(np.linalg.norm(u - c.coefficients) < merge_radius(c.coefficients) for c in found)

    for seed in seeds:
        seed = np.asarray(seed, dtype=float)
        for _ in range(max_per_seed):
            if known(seed) and found:
                # starting on a deflated root gives an infinite residual
                break
            try:
                cp = newton_refine(F, seed, tol, max_iter, Deflation([c.coefficients for c in found]))
            except NoConvergenceError:
                break
            if known(cp.coefficients):
                break
            res = float(np.linalg.norm(F.gradient(cp.coefficients)))
            if res > tol:
                break
            cp.residual = res
            found.append(cp)
    found.sort(key=lambda c: (c.value, tuple(np.round(c.coefficients, 12))))
    for i, c in enumerate(found):
        c.id = i
    return found


def make_seeds(F, spec=None):
    """Initial guesses for :func:`deflated_search`.

    Explicit backend: tensor grid ``n`` points per axis on ``[lo, hi]``.
    Galerkin backend: zero plus ``amplitude * sin(k pi x)``-type modes.
    """
    spec = dict(spec or {})
    if F.backend == "galerkin":
        amps = spec.get("amplitudes", [-2.0, -1.0, -0.5, 0.5, 1.0, 2.0])
        modes = int(spec.get("modes", 3))
        mesh = F.mesh
        seeds = [np.zeros(F.N)]
        if mesh.dim == 1:
            a, b = mesh.domain
            shapes = [mesh.interpolate(lambda x, k=k: np.sin(k * np.pi * (x - a) / (b - a)))
                      for k in range(1, modes + 1)]
        else:
            x0, x1, y0, y1 = mesh.domain
            shapes = [mesh.interpolate(lambda x, y, k=k, j=j: np.sin(k * np.pi * (x - x0) / (x1 - x0))
                                       * np.sin(j * np.pi * (y - y0) / (y1 - y0)))
                      for k in range(1, modes + 1) for j in range(1, modes + 1)]
        for s in shapes:
            for a_ in amps:
                seeds.append(a_ * s)
        return seeds
    lo, hi, n = spec.get("lo", -2.0), spec.get("hi", 2.0), int(spec.get("n", 3))
    axes = [np.linspace(lo, hi, n)] * F.N
    grid = np.meshgrid(*axes, indexing="ij")
    return [np.array(pt) for pt in np.stack([g.ravel() for g in grid], axis=-1)]
