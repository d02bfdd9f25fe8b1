"""Growth regimes of g, the 1D p-Laplacian spectrum and the superlinear structure checks."""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

import numpy as np
from scipy.integrate import solve_ivp
from scipy.optimize import brentq

from .errors import ClassificationConflictError, InvalidInputError, ShootingBracketError
from .functionals.galerkin import sobolev_conjugate

SCAN = (1e2, 1e3, 1e4)
RESONANCE_RTOL = 1e-3


@dataclass
class GrowthClass:
    tag: str                          # sublinear | linear | superlinear | unclassified
    q: float
    p: float
    threshold_low: float
    threshold_high: float
    lam: Optional[float] = None
    resonant: Optional[bool] = None
    ratios: list = field(default_factory=list)
    spectrum: Optional[list] = None

    def to_dict(self):
        return {
            "class": self.tag,
            "q": self.q,
            "p": self.p,
            "threshold_low": self.threshold_low,
            "threshold_high": self.threshold_high if np.isfinite(self.threshold_high) else "inf",
            "lambda": self.lam,
            "resonant": self.resonant,
            "ratios": list(self.ratios),
            "spectrum": self.spectrum,
        }


def _ratios(g, p, s=SCAN):
    s = np.asarray(s, dtype=float)
    return np.abs(g.dg(None, s)) / s ** (p - 2.0)


def _asymptotic_lambda(g, p):
    s = np.array([1e3, 1e4])
    r = g.g(None, s) / s ** (p - 1.0)
    if abs(r[1] - r[0]) <= 1e-3 * max(abs(r[1]), 1e-300):
        return float(r[1])
    return None


def _consistent(tag, ratios, q, p):
    if np.all(ratios == 0):
        return tag == "sublinear"
    if np.any(ratios == 0):
        return False
    change = float(np.log10(ratios[-1] / ratios[0]))
    expected = 2.0 * (q - (p - 2.0))
    if tag == "sublinear":
        return change < 0 and change <= expected + 1.0
    if tag == "linear":
        return abs(change) <= 1.0
    if tag == "superlinear":
        return change > 0 and abs(change - expected) <= 1.0 and bool(np.all(np.diff(ratios) > 0))
    return True


def classify_growth(g, p, n, length=None, k_max=5):
    """Tag g as sub-, linear or superlinear relative to |s|^{p-2}.

    The tag follows the declared growth exponent ``q`` (linear also when
    ``g.lam`` is declared); the ratio |d_s g|/|s|^{p-2} at s = 1e2, 1e3, 1e4
    must agree with it or :class:`ClassificationConflictError` is raised.
    For the linear class on an interval of ``length`` the asymptotic ratio
    lambda is compared with the p-Laplacian spectrum.
    """
    if not p > 2:
        raise InvalidInputError("p > 2 required")
    lo = p - 2.0
    pstar = sobolev_conjugate(p, n)
    hi = pstar - 2.0
    q = float(g.q)
    if g.lam is not None or abs(q - lo) <= 1e-12:
        tag = "linear"
    elif q < lo:
        tag = "sublinear"
    elif q < hi:
        tag = "superlinear"
    else:
        tag = "unclassified"
    ratios = _ratios(g, p)
    if not _consistent(tag, ratios, q, p):
        raise ClassificationConflictError(
            f"declared growth (q={q}, class {tag}) contradicts |d_s g|/|s|^(p-2) = "
            + ", ".join(f"{r:.3e}" for r in ratios) + " at s = 1e2, 1e3, 1e4"
        )
    out = GrowthClass(tag, q, float(p), lo, hi, ratios=[float(r) for r in ratios])
    if tag == "linear":
        out.lam = float(g.lam) if g.lam is not None else _asymptotic_lambda(g, p)
        if length is not None and out.lam is not None:
            spec = plaplace_spectrum_1d(p, length, k_max)
            out.spectrum = spec
            out.resonant = is_resonant(out.lam, spec)
    return out


def _first_zeros(p, lam, k, tmax):
    """Positions of the first k positive zeros of u with u(0)=0, u'(0)=1."""

    def rhs(x, y):
        u, w = y
        return [np.sign(w) * abs(w) ** (1.0 / (p - 1.0)), -lam * abs(u) ** (p - 2.0) * u]

    def ev(x, y):
        return y[0]

    ev.terminal = k + 1   # the zero at x = 0 is reported too
    sol = solve_ivp(rhs, (0.0, tmax), [0.0, 1.0], method="DOP853", rtol=1e-11, atol=1e-13, events=ev)
    return [z for z in sol.t_events[0] if z > 0]


def _kth_zero(p, lam, k, length):
    zs = _first_zeros(p, lam, k, 4.0 * length)
    return zs[k - 1] if len(zs) >= k else np.inf


def plaplace_spectrum_1d(p, length=1.0, k_max=5):
    """Dirichlet eigenvalues of -(|u'|^{p-2} u')' = lambda |u|^{p-2} u on (0, length).

    Shooting in lambda: the k-th eigenvalue places the k-th zero of the
    initial-value solution at ``length``.
    """
    if not p > 1 or not length > 0 or k_max < 1:
        raise InvalidInputError("need p > 1, length > 0, k_max >= 1")
    out = []
    for k in range(1, int(k_max) + 1):
        def shoot(lam, k=k):
            return min(_kth_zero(p, lam, k, length), 4.0 * length) - length

        a = out[-1] if out else 1.0
        fa = shoot(a)
        b = 2.0 * a
        fb = shoot(b)
        tries = 0
        while fa * fb > 0 and tries < 200:
            if fa < 0:          # already past the zero: move down
                b, fb = a, fa
                a *= 0.5
                fa = shoot(a)
            else:
                a, fa = b, fb
                b *= 2.0
                fb = shoot(b)
            tries += 1
        if fa * fb > 0:
            raise ShootingBracketError(f"no sign change for eigenvalue {k} in [{a:.6g}, {b:.6g}]", (a, b))
        out.append(float(brentq(shoot, a, b, xtol=1e-14, rtol=1e-13)))
    return out


def plaplace_closed_form(p, length, k):
    """(p-1) (k pi_p / length)^p with pi_p = 2 pi / (p sin(pi/p))."""
    pi_p = 2.0 * np.pi / (p * np.sin(np.pi / p))
    return (p - 1.0) * (k * pi_p / length) ** p


def is_resonant(lam, spectrum, rtol=RESONANCE_RTOL):
    return any(abs(lam - mu) <= rtol * abs(mu) for mu in spectrum)


@dataclass
class SuperlinearReport:
    monotonicity: bool
    lower_bound: bool
    ar_condition: Optional[bool]
    monotonicity_failures: list = field(default_factory=list)
    lower_bound_margin: float = 0.0

    def to_dict(self):
        return {
            "monotonicity": self.monotonicity,
            "lower_bound": self.lower_bound,
            "ar_condition": self.ar_condition,
            "monotonicity_failures": [float(s) for s in self.monotonicity_failures[:20]],
            "lower_bound_margin": self.lower_bound_margin,
        }


def superlinear_check(g, p, r=None, n_grid=1000, s_max=1e4):
    """Monotonicity of g/(|s|^{p-2} s) on r <= |s| <= s_max, G >= -alpha |s|^p, and AR.

    ``alpha`` defaults to 0 when undeclared; AR is checked only when
    ``g.ar_mu`` is declared (for |s| >= ``g.ar_R``, default 1).
    """
    r = float(r if r is not None else (g.r if g.r is not None else 1.0))
    mags = np.geomspace(r, s_max, n_grid)
    failures = []
    for sign in (1.0, -1.0):
        s = sign * mags
        ratio = g.g(None, s) / (np.abs(s) ** (p - 2.0) * s)
        drop = np.diff(ratio) < -1e-12 * np.maximum(1.0, np.abs(ratio[1:]))
        failures.extend(s[1:][drop].tolist())
    alpha = float(g.alpha) if g.alpha is not None else 0.0
    lb_grid = np.concatenate([-np.geomspace(1e-3, s_max, n_grid)[::-1], [0.0], np.geomspace(1e-3, s_max, n_grid)])
    excess = g.G(None, lb_grid) + alpha * np.abs(lb_grid) ** p
    scale = np.maximum(1.0, np.abs(lb_grid) ** p)
    margin = float(np.min(excess / scale))
    lower = margin >= -1e-12
    ar = None
    if g.ar_mu is not None:
        R = float(g.ar_R) if g.ar_R is not None else 1.0
        m = np.geomspace(R, s_max, n_grid)
        s = np.concatenate([-m, m])
        G, gs = g.G(None, s), g.g(None, s) * s
        ar = bool(np.all(g.ar_mu * G > 0) and np.all(g.ar_mu * G <= gs * (1.0 + 1e-10)))
    return SuperlinearReport(not failures, bool(lower), ar, sorted(failures, key=abs), margin)
