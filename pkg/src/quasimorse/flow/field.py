"""Gradient-like vector field glued from local linear fields and steepest descent."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.linalg

from ..errors import ConstructionError


def smoothstep(t):
    t = np.clip(t, 0.0, 1.0)
    return t * t * (3.0 - 2.0 * t)


def _psi(t):
    return np.where(t > 0, np.exp(-1.0 / np.where(t > 0, t, 1.0)), 0.0)


def cinf(t):
    t = np.clip(t, 0.0, 1.0)
    a, b = _psi(t), _psi(1.0 - t)
    return float(a / (a + b))


PROFILES = {"smoothstep": smoothstep, "cinf": cinf}


@dataclass
class CriticalNeighborhood:
    cp: object
    L: object
    rho: float

    @property
    def center(self):
        return self.cp.coefficients

    @property
    def capture_radius(self):
        return 0.25 * self.rho


class FlowField:
    """V = chi_i L_i (z - u_i) + (1 - chi_i) W(z) near critical point i, W elsewhere.

    ``W = -M^{-1} dF`` is steepest descent for the ambient metric ``M``;
    the cutoff chi_i is 1 inside rho_i / 2 and 0 outside rho_i.
    """

    def __init__(self, F, neighborhoods, profile="smoothstep"):
        self.F = F
        self.neighborhoods = list(neighborhoods)
        self.profile_name = profile
        self.profile = PROFILES[profile]
        self.metric = F.ambient_gram()
        self._chol = scipy.linalg.cho_factor(self.metric)

    def norm(self, v):
        return float(np.sqrt(max(v @ self.metric @ v, 0.0)))

    def dual_norm(self, g):
        return float(np.sqrt(max(g @ scipy.linalg.cho_solve(self._chol, g), 0.0)))

    def descent(self, z, g=None):
        g = self.F.gradient(z) if g is None else g
        return -scipy.linalg.cho_solve(self._chol, g)

    def locate(self, z):
        """Index of the neighborhood containing z and the cutoff weight there."""
        for i, nb in enumerate(self.neighborhoods):
            r = self.norm(z - nb.center) / nb.rho
            if r < 1.0:
                return i, float(self.profile(2.0 * (1.0 - r)))
        return None, 0.0

    def __call__(self, z):
        z = np.asarray(z, dtype=float)
        i, chi = self.locate(z)
        if i is None:
            return self.descent(z)
        nb = self.neighborhoods[i]
        lin = nb.L.matrix @ (z - nb.center)
        if chi >= 1.0:
            return lin
        return chi * lin + (1.0 - chi) * self.descent(z)

    def normalized(self, z):
        v = self(z)
        return v / np.sqrt(1.0 + self.norm(v) ** 2)

    def ids(self):
        return [nb.cp.id for nb in self.neighborhoods]

    def neighborhood_of(self, cp_id):
        for nb in self.neighborhoods:
            if nb.cp.id == cp_id:
                return nb
        raise KeyError(cp_id)


def gradient_like_field(F, crits, profile="smoothstep", max_shrinks=10):
    """Build the field from ``(cp, L)`` or ``(cp, L, radius)`` entries.

    Missing radii default to half the distance to the nearest other critical
    point; radii are halved pairwise until all neighborhoods are disjoint.
    """
    M = F.ambient_gram()

    def dist(a, b):
        d = a - b
        return float(np.sqrt(max(d @ M @ d, 0.0)))

    entries = [tuple(e) + (None,) * (3 - len(e)) for e in crits]
    centers = [e[0].coefficients for e in entries]
    n = len(entries)
    D = np.full((n, n), np.inf)
    for i in range(n):
        for j in range(i + 1, n):
            D[i, j] = D[j, i] = dist(centers[i], centers[j])
    if n and np.any(D == 0):
        raise ConstructionError("two critical points coincide")
    radii = []
    for i, (_, _, r) in enumerate(entries):
        nearest = D[i].min() if n > 1 else np.inf
        default = 0.5 * nearest if np.isfinite(nearest) else 1.0
        radii.append(float(r) if r is not None else default)
    radii = np.array(radii)

    def overlapping():
        return [(i, j) for i in range(n) for j in range(i + 1, n) if radii[i] + radii[j] >= D[i, j]]

    for _ in range(max_shrinks):
        pairs = overlapping()
        if not pairs:
            break
        for i, j in pairs:
            radii[i] *= 0.5
            radii[j] *= 0.5
    if overlapping():
        raise ConstructionError(f"critical neighborhoods still overlap after {max_shrinks} shrinks")
    nbs = [CriticalNeighborhood(cp, L, float(r)) for (cp, L, _), r in zip(entries, radii)]
    return FlowField(F, nbs, profile)
