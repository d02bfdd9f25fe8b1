"""Hyperbolic operators and sampled non-degeneracy certificates.

Certificates are sampled evidence: a failing sample is a genuine
counterexample to the tested inequality, while a pass only says that no
counterexample was found among the samples.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from ._rng import substream
from .errors import DegenerateSplittingError, InvalidInputError
from .spectral import Splitting

N_RADII = 5


@dataclass
class HyperbolicOperator:
    """L = P_minus - P_plus: +id on the unstable part, -id on the stable part."""

    matrix: np.ndarray
    projector_minus: np.ndarray
    projector_plus: np.ndarray
    splitting: Optional[Splitting] = None

    def expm(self, t):
        return np.exp(t) * self.projector_minus + np.exp(-t) * self.projector_plus

    def spectrum(self):
        return np.linalg.eigvals(self.matrix)

    def __matmul__(self, v):
        return self.matrix @ v

    @property
    def unstable_dim(self):
        return int(round(np.trace(self.projector_minus)))

    @classmethod
    def from_matrix(cls, L, atol=1e-10):
        """Wrap an involution L (L^2 = I), whose spectrum lies in {-1, +1}."""
        L = np.atleast_2d(np.asarray(L, dtype=float))
        I = np.eye(L.shape[0])
        if np.max(np.abs(L @ L - I)) > atol * max(1.0, np.max(np.abs(L))):
            raise InvalidInputError("hyperbolic operator must be an involution (spectrum in {-1, +1})")
        return cls(L, 0.5 * (I + L), 0.5 * (I - L))


def hyperbolic_from_splitting(s: Splitting) -> HyperbolicOperator:
    if s.null_count > 0:
        near = s.eigenvalues[np.abs(s.eigenvalues) <= s.zero_tol]
        raise DegenerateSplittingError(
            f"degenerate splitting: {s.null_count} eigenvalue(s) within {s.zero_tol:.3e} of zero: "
            + ", ".join(f"{m:.3e}" for m in near),
            near,
        )
    return HyperbolicOperator(s.projector_minus - s.projector_plus, s.projector_minus, s.projector_plus, s)


@dataclass
class NondegCertificate:
    kind: str
    delta: float
    samples: int
    worst_margin: float
    verdict: str
    c: Optional[float] = None
    c1: Optional[float] = None
    failure_witness: Optional[np.ndarray] = None
    detail: dict = field(default_factory=dict)

    @property
    def passed(self):
        return self.verdict == "pass"

    def to_dict(self):
        return {
            "kind": self.kind,
            "evidence": "sampled",
            "delta": self.delta,
            "c": self.c,
            "c1": self.c1,
            "samples": self.samples,
            "worst_margin": self.worst_margin,
            "verdict": self.verdict,
            "failure_witness": None if self.failure_witness is None else [float(x) for x in self.failure_witness],
            **self.detail,
        }


def _norm(v, M):
    return float(np.sqrt(max(v @ M @ v, 0.0)))


def sample_offsets(P_minus, P_plus, metric, delta, n_samples, rng):
    """Offsets h on spheres of radii delta * 2^-j, j = 0..4, in the ``metric`` norm.

    Directions mix a random unit vector of range(P_minus) with one of
    range(P_plus) at an angle stratified over [0, pi/2].
    """
    N = metric.shape[0]
    has_minus = np.linalg.norm(P_minus) > 1e-12
    has_plus = np.linalg.norm(P_plus) > 1e-12
    per_stratum = max(1, int(np.ceil(n_samples / N_RADII)))
    out = np.empty((n_samples, N))
    for i in range(n_samples):
        j, k = i % N_RADII, i // N_RADII
        radius = delta * 2.0**-j
        theta = 0.5 * np.pi * (k + rng.uniform()) / per_stratum
        zm, zp = rng.standard_normal(N), rng.standard_normal(N)
        am, ap = P_minus @ zm, P_plus @ zp
        am = am / _norm(am, metric) if has_minus else np.zeros(N)
        ap = ap / _norm(ap, metric) if has_plus else np.zeros(N)
        if not has_minus:
            theta = 0.5 * np.pi
        elif not has_plus:
            theta = 0.0
        d = np.cos(theta) * am + np.sin(theta) * ap
        out[i] = radius * d / _norm(d, metric)
    return out


def lyapunov_certificate(F, cp, L: HyperbolicOperator, delta, n_samples=1000, seed=0, metric=None):
    """Check d/dt f(ubar + e^{tL} h)|_{t=0} = df(ubar + h)[L h] < 0 on sampled h."""
    if not delta > 0 or n_samples < 1:
        raise InvalidInputError("need delta > 0 and n_samples >= 1")
    ubar = np.asarray(getattr(cp, "coefficients", cp), dtype=float)
    metric = F.ambient_gram() if metric is None else metric
    rng = substream(seed, "lyapunov")
    H = sample_offsets(L.projector_minus, L.projector_plus, metric, delta, n_samples, rng)
    worst, worst_i = -np.inf, 0
    for i, h in enumerate(H):
        m = float(F.gradient(ubar + h) @ (L.matrix @ h)) / _norm(h, metric) ** 2
        if m > worst:
            worst, worst_i = m, i
    passed = worst < 0
    return NondegCertificate(
        kind="lyapunov",
        delta=float(delta),
        samples=n_samples,
        worst_margin=float(-worst),
        verdict="pass" if passed else "fail",
        failure_witness=None if passed else ubar + H[worst_i],
    )


def criterion_check(F, cp, s: Splitting, delta, n_samples=1000, seed=0, c1=None, metric=None):
    """Sampled check of the splitting estimates in a ball around the critical point.

    (i)  2c = inf over sampled u and H-unit v in X- of -hess(u)[v, v];
    (ii) hess(u)[h+, h+] >= c1 ||h+||_H^2 - c ||h-||_H^2 for u = ubar + h.

    Null directions of a degenerate splitting are placed in X+. ``c1``
    defaults to half the smallest eigenvalue above ``zero_tol``, or to ``c``
    when X+ has none. With X- trivial, ``c`` is taken equal to ``c1``.
    """
    if not delta > 0 or n_samples < 1:
        raise InvalidInputError("need delta > 0 and n_samples >= 1")
    ubar = np.asarray(getattr(cp, "coefficients", cp), dtype=float)
    metric = F.ambient_gram() if metric is None else metric
    B = s.gram
    k = s.morse_index
    Xm, Xp = s.eigenvectors[:, :k], s.eigenvectors[:, k:]
    Pm, Pp = Xm @ Xm.T @ B, Xp @ Xp.T @ B
    rng = substream(seed, "criterion")
    H = sample_offsets(Pm, Pp, metric, delta, n_samples, rng)

    hessians = [F.hessian(ubar + h) for h in H]
    c, c_witness = None, None
    if k > 0:
        worst_neg, worst_i = np.inf, -1
        for i, A in enumerate([s.hessian] + hessians):
            v = -np.linalg.eigvalsh(Xm.T @ A @ Xm)[-1]
            if v < worst_neg:
                worst_neg, worst_i = v, i
        c = 0.5 * float(worst_neg)
        c_witness = ubar if worst_i == 0 else ubar + H[worst_i - 1]

    if c1 is None:
        pos = s.eigenvalues[s.eigenvalues > s.zero_tol]
        c1 = 0.5 * float(pos.min()) if pos.size else c
    if c is None:
        c = c1
    if c is not None and c <= 0:
        return NondegCertificate(
            kind="criterion", delta=float(delta), samples=n_samples, worst_margin=float(c),
            verdict="fail", c=float(c), c1=None if c1 is None else float(c1),
            failure_witness=c_witness,
            detail={"failed": "negative-direction estimate", "degenerate": s.degenerate},
        )

    worst, worst_i = np.inf, 0
    for i, (h, A) in enumerate(zip(H, hessians)):
        hm, hp = Pm @ h, Pp @ h
        lhs = float(hp @ A @ hp)
        rhs = c1 * float(hp @ B @ hp) - c * float(hm @ B @ hm)
        margin = (lhs - rhs) / _norm(h, metric) ** 2
        if margin < worst:
            worst, worst_i = margin, i
    passed = worst > 0
    return NondegCertificate(
        kind="criterion",
        delta=float(delta),
        samples=n_samples,
        worst_margin=float(worst),
        verdict="pass" if passed else "fail",
        c=float(c),
        c1=float(c1),
        failure_witness=None if passed else ubar + H[worst_i],
        detail={"degenerate": s.degenerate} if s.degenerate else {},
    )


def positive_inequality_holds(F, s, witness, ubar, c, c1):
    """Re-evaluate inequality (ii) at a stored witness; True when it holds."""
    k = s.morse_index
    Xm, Xp = s.eigenvectors[:, :k], s.eigenvectors[:, k:]
    B = s.gram
    h = np.asarray(witness) - np.asarray(ubar)
    hm, hp = Xm @ Xm.T @ B @ h, Xp @ Xp.T @ B @ h
    lhs = float(hp @ F.hessian(np.asarray(witness)) @ hp)
    return lhs - (c1 * float(hp @ B @ hp) - c * float(hm @ B @ hm)) > 0


def initial_delta(cp, others, metric, default=1.0):
    ubar = cp.coefficients
    dists = [_norm(o.coefficients - ubar, metric) for o in others if o is not cp]
    return 0.5 * min(dists) if dists else default


def certify(F, cp, s: Splitting, others=(), n_samples=1000, seed=0, delta=None, max_halvings=10):
    """Largest delta (by halving) at which both certificates pass.

    Returns ``(L, lyapunov, criterion)``; after ``max_halvings`` failures the
    last failing certificates are returned.
    """
    L = hyperbolic_from_splitting(s)
    metric = F.ambient_gram()
    d = initial_delta(cp, others, metric) if delta is None else float(delta)
    for _ in range(max_halvings + 1):
        crit = criterion_check(F, cp, s, d, n_samples, seed, metric=metric)
        lyap = lyapunov_certificate(F, cp, L, d, n_samples, seed, metric=metric)
        if crit.passed and lyap.passed:
            break
        d *= 0.5
    return L, lyap, crit


def t_epsilon(F, u, eps, beta, exponent=None):
    """(eps/p) int |grad u|^p - beta / (q (q - 1)) int |u|^q with q = p* by default."""
    q = F.sobolev_conjugate if exponent is None else float(exponent)
    if not np.isfinite(q):
        raise InvalidInputError("p* is infinite for this mesh dimension; pass a finite exponent")
    m = F.mesh
    p = F.psi.p
    gradu, uq = F._fields(np.asarray(u, dtype=float))
    lead = eps / p * float(m.measure @ np.sum(gradu**2, axis=-1) ** (p / 2))
    tail = beta / (q * (q - 1.0)) * float(np.sum(m.qweights * np.abs(uq) ** q))
    return lead - tail
