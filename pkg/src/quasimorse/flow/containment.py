"""Cerami quantity monitoring and the Gronwall bound on band-confined trajectories."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.linalg

from .._rng import substream
from ..errors import EstimationError, InvalidInputError


def gronwall_radius(r0, epsilon, a, b):
    """R = (r0 + (b - a)/(2 eps)) * exp((b - a)/(2 eps))."""
    if not epsilon > 0:
        raise InvalidInputError("epsilon must be positive")
    if not r0 > 0:
        raise InvalidInputError("r0 must be positive")
    if b < a:
        raise InvalidInputError("need b >= a")
    k = (b - a) / (2.0 * epsilon)
    return (r0 + k) * np.exp(k)


class _Norms:
    def __init__(self, F):
        self.M = F.ambient_gram()
        self.chol = scipy.linalg.cho_factor(self.M)

    def norm(self, u):
        return float(np.sqrt(max(u @ self.M @ u, 0.0)))

    def dual(self, g):
        return float(np.sqrt(max(g @ scipy.linalg.cho_solve(self.chol, g), 0.0)))


def cerami_quantity(F, u, norms=None):
    norms = norms or _Norms(F)
    return (1.0 + norms.norm(u)) * norms.dual(F.gradient(u))


def cerami_monitor(F, traj):
    """min over the path of (1 + ||u||) ||dF(u)||_*."""
    if len(traj.states) == 0:
        raise InvalidInputError("empty trajectory")
    norms = _Norms(F)
    return float(min(cerami_quantity(F, u, norms) for u in traj.states))


def estimate_epsilon(F, a, b, r0, n_samples=4000, seed=0, r_outer=None):
    """Sampled lower-bound estimate of inf (1 + ||u||)||dF(u)||_* over f^-1([a, b]) minus B_r0.

    Samples are drawn uniformly in radius on the shell r0 <= ||u|| <= r_outer
    (default 4 r0) with isotropic directions in the ambient metric.
    """
    if not b > a:
        raise InvalidInputError("need b > a")
    if not r0 > 0:
        raise InvalidInputError("r0 must be positive")
    norms = _Norms(F)
    r_outer = 4.0 * r0 if r_outer is None else float(r_outer)
    rng = substream(seed, "cerami-eps")
    C = np.linalg.cholesky(norms.M)
    best, hits = np.inf, 0
    for _ in range(n_samples):
        z = rng.standard_normal(F.N)
        d = np.linalg.solve(C.T, z / np.linalg.norm(z))   # ||d||_M = 1
        u = rng.uniform(r0, r_outer) * d
        fu = F.value(u)
        if a <= fu <= b:
            hits += 1
            best = min(best, cerami_quantity(F, u, norms))
    if hits == 0:
        raise EstimationError(f"no samples landed in f^-1([{a}, {b}]) outside the ball of radius {r0}")
    return float(best)


@dataclass
class CeramiReport:
    r0: float
    epsilon: float
    a: float
    b: float
    R: float
    empirical_max_norm: float
    checked: int = 0

    @property
    def contained(self):
        return self.empirical_max_norm <= self.R

    def to_dict(self):
        return {
            "r0": self.r0, "epsilon": self.epsilon, "a": self.a, "b": self.b, "R": self.R,
            "empirical_max_norm": self.empirical_max_norm, "trajectories_checked": self.checked,
            "contained": self.contained,
        }


def band_prefix(traj, a, b):
    """States up to the first exit from f^-1([a, b])."""
    inside = (traj.fvals >= a) & (traj.fvals <= b)
    if not inside[0]:
        return traj.states[:0]
    stop = len(inside) if inside.all() else int(np.argmin(inside))
    return traj.states[:stop]


def containment_report(F, trajectories, a, b, r0, epsilon):
    """Maximum norm over band-confined stretches of trajectories starting in B_r0."""
    norms = _Norms(F)
    R = gronwall_radius(r0, epsilon, a, b)
    worst, checked = 0.0, 0
    for traj in trajectories:
        if norms.norm(traj.states[0]) > r0:
            continue
        seg = band_prefix(traj, a, b)
        if len(seg) == 0:
            continue
        checked += 1
        worst = max(worst, max(norms.norm(u) for u in seg))
    return CeramiReport(float(r0), float(epsilon), float(a), float(b), float(R), float(worst), checked)
