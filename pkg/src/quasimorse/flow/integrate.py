"""Adaptive integration of the normalized gradient-like flow."""
from __future__ import annotations

import csv
from dataclasses import dataclass, field
from typing import Optional

import numpy as np
from scipy.integrate import solve_ivp

from ..errors import IntegratorError, InvalidInputError

RTOL = 1e-8
ATOL = 1e-10


@dataclass
class Trajectory:
    times: np.ndarray
    states: np.ndarray
    fvals: np.ndarray
    cerami: np.ndarray
    terminal: str                     # "converged" | "escaped" | "horizon" | "passage"
    target: Optional[int] = None      # critical point id when converged or passing
    meta: dict = field(default_factory=dict)

    @property
    def cerami_min(self):
        return float(np.min(self.cerami))

    @property
    def label(self):
        return self.target if self.terminal in ("converged", "passage") else self.terminal

    def max_norm(self, metric):
        return float(np.max(np.sqrt(np.einsum("ki,ij,kj->k", self.states, metric, self.states))))

    def f_increase(self):
        """Largest step-to-step increase of f (<= 0 for a monotone path)."""
        if len(self.fvals) < 2:
            return 0.0
        return float(np.max(np.diff(self.fvals)))

    def closest_approach(self, center, metric):
        d = self.states - center
        return float(np.sqrt(np.min(np.einsum("ki,ij,kj->k", d, metric, d))))

    def to_dict(self):
        return {
            "terminal": self.terminal,
            "target": self.target,
            "t_end": float(self.times[-1]),
            "steps": int(len(self.times)),
            "f_start": float(self.fvals[0]),
            "f_end": float(self.fvals[-1]),
            "cerami_min": self.cerami_min,
            **self.meta,
        }


def _captured(V, z, tol):
    g = V.F.gradient(z)
    res = float(np.linalg.norm(g))
    for nb in V.neighborhoods:
        if V.norm(z - nb.center) < nb.capture_radius and res < tol:
            return nb.cp.id
    return None


def integrate(V, u0, horizon=1e3, tol=1e-6, escape_radius=1e3, normalize=True,
              rtol=RTOL, atol=ATOL, capture=True, watch=()):
    """Integrate u' = V(u) / sqrt(1 + ||V(u)||^2) from ``u0`` up to ``horizon``.

    Stops when the path is captured by a critical point (inside its capture
    radius with gradient norm below ``tol``) or leaves the ball of radius
    ``escape_radius``. Entering the capture ball of a critical point whose id
    is in ``watch`` ends the path with terminal "passage".
    """
    if not horizon > 0:
        raise InvalidInputError("horizon must be positive")
    u0 = np.asarray(u0, dtype=float)
    F = V.F

    def rhs(t, z):
        return V.normalized(z) if normalize else V(z)

    def escape(t, z):
        return V.norm(z) - escape_radius

    escape.terminal = True
    escape.direction = 1

    def capture_event(t, z):
        res = max(float(np.linalg.norm(F.gradient(z))), 1e-300)
        best = np.inf
        for nb in V.neighborhoods:
            best = min(best, max(V.norm(z - nb.center) / nb.capture_radius - 1.0, np.log(res / tol)))
        return best

    capture_event.terminal = True
    capture_event.direction = -1

    watched = [nb for nb in V.neighborhoods if nb.cp.id in set(watch)]

    def passage_event(t, z):
        return min(V.norm(z - nb.center) / nb.capture_radius - 1.0 for nb in watched)

    passage_event.terminal = True
    passage_event.direction = -1

    events = [escape]
    if watched:
        events.append(passage_event)
    start_target = _captured(V, u0, tol) if capture else None
    if capture and V.neighborhoods:
        events.append(capture_event)
    if start_target is not None:
        sol_t, sol_y, status = np.array([0.0]), u0[:, None], 1
        terminal, target = "converged", start_target
    else:
        sol = solve_ivp(rhs, (0.0, horizon), u0, method="RK45", rtol=rtol, atol=atol, events=events)
        sol_t, sol_y, status = sol.t, sol.y, sol.status
        terminal, target = "horizon", None
        if status == 1:
            if len(sol.t_events[0]):
                terminal = "escaped"
            elif watched and len(sol.t_events[1]):
                z = sol_y[:, -1]
                terminal = "passage"
                target = min(watched, key=lambda nb: V.norm(z - nb.center) / nb.capture_radius).cp.id
            else:
                terminal, target = "converged", _captured(V, sol_y[:, -1], tol * (1 + 1e-6))
                if target is None:
                    terminal = "horizon"
    states = sol_y.T.copy()
    fvals = np.array([F.value(z) for z in states])
    cer = np.array([(1.0 + V.norm(z)) * V.dual_norm(F.gradient(z)) for z in states])
    traj = Trajectory(sol_t.copy(), states, fvals, cer, terminal, target)
    if status == -1:
        raise IntegratorError(f"integration failed: {sol.message}", traj)
    return traj


def write_csv(traj, path):
    N = traj.states.shape[1]
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["t"] + [f"u_{i + 1}" for i in range(N)] + ["f", "cerami"])
        for t, z, f, c in zip(traj.times, traj.states, traj.fvals, traj.cerami):
            w.writerow([format(float(x), ".17g") for x in (t, *z, f, c)])
