"""Counting connecting orbits by shooting from the unstable sphere."""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .._rng import substream
from ..errors import PreconditionError
from .integrate import integrate

# bisection stops at the first width where the midpoint path visibly passes a
# lower-index point; the finest width is the refinement cap
BISECT_WIDTHS = (1e-4, 1e-8, 1e-12)


@dataclass
class OrbitCount:
    hi: int
    lo: int
    count: int
    reliable: bool = True
    n_shoot: int = 0
    warnings: list = field(default_factory=list)

    @property
    def parity(self):
        return self.count % 2

    def to_dict(self):
        return {
            "hi": self.hi,
            "lo": self.lo,
            "count": self.count,
            "parity": self.parity,
            "reliable": self.reliable,
            "n_shoot": self.n_shoot,
            "warnings": list(self.warnings),
        }


@dataclass
class SphereShot:
    """Classified samples of the unstable sphere of one critical point.

    ``items`` lists, in angular order, the destination of each sample and,
    between two samples with different destinations, the lower-index point
    the boundary orbit runs into (None when unresolved).
    """

    hi: int
    dim: int
    n_shoot: int
    items: list
    reliable: bool
    warnings: list

    def count(self, lo_id):
        hits = [it == lo_id for it in self.items]
        if self.dim == 1:
            return sum(hits)
        if all(hits):
            return 1
        # cyclic runs
        return sum(1 for k in range(len(hits)) if hits[k] and not hits[k - 1])


def _index(V, cp):
    if cp.morse_index is not None:
        return cp.morse_index
    return V.neighborhood_of(cp.id).L.unstable_dim


def unstable_frame(V, cp):
    """Ambient-orthonormal basis of the unstable space of L at ``cp``."""
    L = V.neighborhood_of(cp.id).L
    if L.splitting is not None:
        X = L.splitting.minus_basis
    else:
        U, sv, _ = np.linalg.svd(L.projector_minus)
        X = U[:, : int(np.sum(sv > 0.5))]
    if X.shape[1] == 0:
        return X
    C = np.linalg.cholesky(X.T @ V.metric @ X)
    return np.linalg.solve(C, X.T).T


def shoot_unstable_sphere(F, V, cp_hi, sphere_radius=None, n_shoot=16, seed=0, horizon=1e3, tol=1e-6,
                          escape_radius=1e3, trajectories=None):
    """Shoot from the sphere of radius ``sphere_radius`` in the unstable space of ``cp_hi``.

    Dimension 1: the two points +-r e. Dimension 2: ``n_shoot`` angles with a
    seeded offset; each arc whose end labels differ is bisected until the
    midpoint path enters the capture ball of a point of index one lower.
    """
    if cp_hi.degenerate:
        raise PreconditionError("critical point must be non-degenerate")
    nb_hi = V.neighborhood_of(cp_hi.id)
    r = nb_hi.capture_radius if sphere_radius is None else float(sphere_radius)
    E = unstable_frame(V, cp_hi)
    d = E.shape[1]
    center = cp_hi.coefficients
    kw = dict(horizon=horizon, tol=tol, escape_radius=escape_radius)

    def shoot(direction, **extra):
        t = integrate(V, center + r * direction, **kw, **extra)
        if trajectories is not None and not extra:
            trajectories.append(t)
        return t.label

    if d == 0:
        return SphereShot(cp_hi.id, 0, 0, [], True, [])
    if d == 1:
        items = [shoot(s * E[:, 0]) for s in (1.0, -1.0)]
        warn = ["trajectory hit the horizon" for lab in items if lab == "horizon"]
        return SphereShot(cp_hi.id, 1, 2, items, not warn, warn)
    if d != 2:
        raise PreconditionError(f"shooting supports unstable dimension <= 2 (got {d})")

    n = max(int(n_shoot), 3)
    offset = substream(seed, f"shoot-{cp_hi.id}").uniform()
    thetas = 2.0 * np.pi * (np.arange(n) + offset) / n

    def direction(th):
        return np.cos(th) * E[:, 0] + np.sin(th) * E[:, 1]

    labels = [shoot(direction(th)) for th in thetas]
    warnings = [f"sample at theta={th:.6f} hit the horizon" for th, lab in zip(thetas, labels) if lab == "horizon"]
    watch = [nb.cp.id for nb in V.neighborhoods if nb.cp.id != cp_hi.id and _index(V, nb.cp) == d - 1]
    items = []
    for i in range(n):
        items.append(labels[i])
        j = (i + 1) % n
        if labels[i] == labels[j]:
            continue
        lo_th, hi_th = thetas[i], thetas[j] + (2.0 * np.pi if j == 0 else 0.0)
        passage = None
        for width in BISECT_WIDTHS:
            while hi_th - lo_th >= width:
                mid = 0.5 * (lo_th + hi_th)
                if shoot(direction(mid)) == labels[i]:
                    lo_th = mid
                else:
                    hi_th = mid
            lab = shoot(direction(0.5 * (lo_th + hi_th)), capture=False, watch=watch)
            if lab in watch:
                passage = lab
                break
        if passage is None:
            warnings.append(f"unresolved boundary after theta={thetas[i]:.6f}")
        items.append(passage)
    return SphereShot(cp_hi.id, 2, n, items, not warnings, warnings)


def connecting_orbit_count(F, V, cp_hi, cp_lo, sphere_radius=None, n_shoot=16, seed=0,
                           horizon=1e3, tol=1e-6, escape_radius=1e3, shot=None, trajectories=None):
    """Connected components of unstable-sphere points of ``cp_hi`` flowing to ``cp_lo``.

    Pass a precomputed :class:`SphereShot` as ``shot`` to reuse one sweep for
    several lower points.
    """
    ihi, ilo = _index(V, cp_hi), _index(V, cp_lo)
    if ihi != ilo + 1:
        raise PreconditionError(f"index gap must be 1 (got {ihi} -> {ilo})")
    if cp_hi.degenerate or cp_lo.degenerate:
        raise PreconditionError("both critical points must be non-degenerate")
    if shot is None:
        shot = shoot_unstable_sphere(F, V, cp_hi, sphere_radius, n_shoot, seed, horizon, tol,
                                     escape_radius, trajectories)
    return OrbitCount(cp_hi.id, cp_lo.id, shot.count(cp_lo.id), shot.reliable, shot.n_shoot, list(shot.warnings))
