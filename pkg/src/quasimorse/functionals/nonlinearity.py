"""Nonlinearities g(x, s) with antiderivative G and derivative in s.

Every evaluator takes ``(x, s)`` where ``x`` has shape ``s.shape + (n,)``
(or is ignored by x-independent models) and broadcasts over ``s``.
"""
from __future__ import annotations

from dataclasses import dataclass, field, replace
from typing import Callable, Optional

import numpy as np

from ..errors import InvalidInputError

_GL_T, _GL_W = np.polynomial.legendre.leggauss(64)


def quadrature_antiderivative(g):
    """G(x, s) = int_0^s g(x, t) dt by 64-point Gauss-Legendre on [0, s]."""

    def G(x, s):
        s = np.asarray(s, dtype=float)
        t = 0.5 * (_GL_T + 1.0)
        pts = s[..., None] * t
        if x is not None and np.ndim(x) > 0:
            xx = np.broadcast_to(np.asarray(x)[..., None, :], s.shape + (t.size, np.shape(x)[-1]))
        else:
            xx = x
        return 0.5 * s * np.sum(_GL_W * g(xx, pts), axis=-1)

    return G


@dataclass
class GModel:
    """Nonlinearity with the growth metadata used by the classifiers.

    ``q`` and ``c`` bound |d_s g| <= c (1 + |s|^q). ``lam`` is the declared
    asymptotic ratio g / (|s|^{p-2} s) for linear growth, ``alpha`` the
    lower-bound constant for G, ``r`` the monotonicity threshold and
    ``ar_mu`` / ``ar_R`` the Ambrosetti-Rabinowitz pair.
    """

    g: Callable
    dg: Callable
    G: Optional[Callable] = None
    q: float = 0.0
    c: float = 1.0
    lam: Optional[float] = None
    alpha: Optional[float] = None
    r: Optional[float] = None
    ar_mu: Optional[float] = None
    ar_R: Optional[float] = None
    name: str = "custom"
    params: dict = field(default_factory=dict)
    scale: float = 1.0

    def __post_init__(self):
        if self.G is None:
            self.G = quadrature_antiderivative(self.g)
        if self.q < 0 or not self.c > 0:
            raise InvalidInputError(f"growth metadata needs q >= 0 and c > 0 (q={self.q}, c={self.c})")

    def perturbed(self, rng, rel=1e-6):
        """Copy with g scaled by 1 + rel*xi, xi standard normal from ``rng``."""
        factor = 1.0 + rel * float(rng.standard_normal())
        g, dg, G = self.g, self.dg, self.G
        return replace(
            self,
            g=lambda x, s: factor * g(x, s),
            dg=lambda x, s: factor * dg(x, s),
            G=lambda x, s: factor * G(x, s),
            c=self.c * abs(factor),
            lam=None if self.lam is None else self.lam * factor,
            scale=self.scale * factor,
        )

    def growth_violation(self, s, x=None):
        """Largest excess of |d_s g| over c (1 + |s|^q) on the samples."""
        s = np.asarray(s, dtype=float)
        excess = np.abs(self.dg(x, s)) - self.c * (1.0 + np.abs(s) ** self.q)
        return float(np.max(excess))

    def antiderivative_error(self, s, x=None, h=1e-6):
        """Relative mismatch between dG/ds (central differences) and g."""
        s = np.asarray(s, dtype=float)
        dG = (self.G(x, s + h) - self.G(x, s - h)) / (2 * h)
        gv = self.g(x, s)
        return float(np.max(np.abs(dG - gv) / np.maximum(1.0, np.abs(gv))))


def monomials(terms, name="polynomial", **meta):
    """g(s) = sum_i a_i |s|^{m_i} s for ``terms = [(a_i, m_i), ...]``."""
    terms = [(float(a), float(m)) for a, m in terms]
    for _, m in terms:
        if m < 0:
            raise InvalidInputError("monomial exponents must be >= 0")

    def g(x, s):
        s = np.asarray(s, dtype=float)
        out = np.zeros_like(s)
        for a, m in terms:
            out = out + a * np.abs(s) ** m * s
        return out

    def dg(x, s):
        s = np.asarray(s, dtype=float)
        out = np.zeros_like(s)
        for a, m in terms:
            out = out + a * (m + 1.0) * np.abs(s) ** m
        return out

    def G(x, s):
        s = np.asarray(s, dtype=float)
        out = np.zeros_like(s)
        for a, m in terms:
            out = out + a * np.abs(s) ** (m + 2.0) / (m + 2.0)
        return out

    q = max((m for _, m in terms), default=0.0)
    c = sum(abs(a) * (m + 1.0) for a, m in terms) or 1.0
    meta.setdefault("q", q)
    meta.setdefault("c", c)
    return GModel(g=g, dg=dg, G=G, name=name, params={"terms": [list(t) for t in terms]}, **meta)


def zero():
    return monomials([], name="zero")


def linear(lam):
    """g(s) = lam * s."""
    m = monomials([(lam, 0.0)], name="linear")
    m.params = {"lam": float(lam)}
    return m


def power(coef, exponent, **meta):
    """g(s) = coef * |s|^exponent * s."""
    m = monomials([(coef, exponent)], name="power", **meta)
    m.params = {"coef": float(coef), "exponent": float(exponent)}
    return m


def plinear(lam, p):
    """g(s) = lam |s|^{p-2} s, the exactly-homogeneous linear-growth case."""
    m = monomials([(lam, p - 2.0)], name="plinear", lam=float(lam))
    m.params = {"lam": float(lam), "p": float(p)}
    return m


def bistable(lam, b=1.0):
    """g(s) = lam s - b s^3."""
    m = monomials([(lam, 0.0), (-b, 2.0)], name="bistable")
    m.params = {"lam": float(lam), "b": float(b)}
    return m


def oscillating():
    """g(s) = |s| s (2 + sin(log(1 + s^2))); the ratio g/(|s|s) oscillates."""

    def g(x, s):
        s = np.asarray(s, dtype=float)
        return np.abs(s) * s * (2.0 + np.sin(np.log1p(s * s)))

    def dg(x, s):
        s = np.asarray(s, dtype=float)
        h = 2.0 + np.sin(np.log1p(s * s))
        dh = np.cos(np.log1p(s * s)) * 2.0 * s / (1.0 + s * s)
        return 2.0 * np.abs(s) * h + np.abs(s) * s * dh

    return GModel(g=g, dg=dg, q=1.0, c=8.0, name="oscillating")


FACTORIES = {
    "zero": zero,
    "linear": linear,
    "power": power,
    "plinear": plinear,
    "bistable": bistable,
    "polynomial": lambda terms, **meta: monomials(terms, **meta),
    "oscillating": oscillating,
}


def from_config(kind, params=None, p=None):
    params = dict(params or {})
    if kind not in FACTORIES:
        raise InvalidInputError(f"unknown g kind {kind!r}; expected one of {sorted(FACTORIES)}")
    if kind == "plinear":
        params.setdefault("p", p)
    meta = {k: params.pop(k) for k in ("alpha", "r", "ar_mu", "ar_R") if k in params}
    model = FACTORIES[kind](**params)
    for k, v in meta.items():
        setattr(model, k, v)
    return model
