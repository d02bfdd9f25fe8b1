"""Finite-dimensional functionals given by closed-form formulas."""
from __future__ import annotations

import numpy as np

from ..errors import InvalidInputError
from .galerkin import DiscreteFunctional


class ExplicitFunctional(DiscreteFunctional):
    """Objective with user-supplied value, gradient and Hessian.

    The H-metric defaults to the identity Gram matrix, so the weak norm is
    the ambient Euclidean norm unless ``gram`` is given.
    """

    backend = "explicit"

    def __init__(self, n, value, gradient, hessian, gram=None, name="custom"):
        if n < 1:
            raise InvalidInputError("explicit functional needs at least one variable")
        self.N = int(n)
        self._value, self._gradient, self._hessian = value, gradient, hessian
        self.gram = np.eye(self.N) if gram is None else np.asarray(gram, dtype=float)
        self.name = name

    def value(self, u):
        return float(self._value(self._check(u)))

    def gradient(self, u):
        return np.asarray(self._gradient(self._check(u)), dtype=float).reshape(self.N)

    def hessian(self, u):
        H = np.asarray(self._hessian(self._check(u)), dtype=float).reshape(self.N, self.N)
        return 0.5 * (H + H.T)

    def h_gram(self, ubar):
        self._check(ubar)
        return self.gram

    def ambient_gram(self):
        return self.gram

    def describe(self):
        return {"backend": self.backend, "N": self.N, "name": self.name}


def double_well():
    """F(x, y) = (x^2 - 1)^2 + y^2: minima (+-1, 0), saddle (0, 0)."""
    return ExplicitFunctional(
        2,
        lambda u: (u[0] ** 2 - 1.0) ** 2 + u[1] ** 2,
        lambda u: np.array([4.0 * u[0] * (u[0] ** 2 - 1.0), 2.0 * u[1]]),
        lambda u: np.diag([12.0 * u[0] ** 2 - 4.0, 2.0]),
        name="double_well",
    )


def four_well():
    """F(x, y) = (x^2 - 1)^2 + (y^2 - 1)^2: four minima, four saddles, one maximum."""
    return ExplicitFunctional(
        2,
        lambda u: (u[0] ** 2 - 1.0) ** 2 + (u[1] ** 2 - 1.0) ** 2,
        lambda u: 4.0 * u * (u**2 - 1.0),
        lambda u: np.diag(12.0 * u**2 - 4.0),
        name="four_well",
    )


def saddle_quadratic():
    """F(x, y) = x^2 - y^2."""
    return ExplicitFunctional(
        2,
        lambda u: u[0] ** 2 - u[1] ** 2,
        lambda u: np.array([2.0 * u[0], -2.0 * u[1]]),
        lambda u: np.diag([2.0, -2.0]),
        name="saddle_quadratic",
    )


def quartic_saddle():
    """F(x, y) = x^4 - y^2, degenerate at the origin."""
    return ExplicitFunctional(
        2,
        lambda u: u[0] ** 4 - u[1] ** 2,
        lambda u: np.array([4.0 * u[0] ** 3, -2.0 * u[1]]),
        lambda u: np.diag([12.0 * u[0] ** 2, -2.0]),
        name="quartic_saddle",
    )


def quartic_1d():
    """F(x) = x^4."""
    return ExplicitFunctional(
        1, lambda u: u[0] ** 4, lambda u: 4.0 * u**3, lambda u: 12.0 * u**2 * np.ones((1, 1)), name="quartic_1d"
    )


def quadratic_1d():
    """F(x) = x^2 / 2, whose steepest-descent field is V(x) = -x."""
    return ExplicitFunctional(
        1, lambda u: 0.5 * u[0] ** 2, lambda u: u.copy(), lambda u: np.ones((1, 1)), name="quadratic_1d"
    )


def linear_1d():
    """F(x) = x, no critical points."""
    return ExplicitFunctional(
        1, lambda u: u[0], lambda u: np.ones(1), lambda u: np.zeros((1, 1)), name="linear_1d"
    )


class TruncatedSequenceFunctional(ExplicitFunctional):
    """phi(v) = sum_{n=1}^{N} cos(n v_n) / n^4 on R^N."""

    def __init__(self, order):
        if int(order) != order or order < 1:
            raise InvalidInputError(f"truncation order must be an integer >= 1, got {order}")
        self.order = int(order)
        n = np.arange(1, self.order + 1, dtype=float)
        self._n = n
        super().__init__(
            self.order,
            lambda v: float(np.sum(np.cos(n * v) / n**4)),
            lambda v: -np.sin(n * v) / n**3,
            lambda v: np.diag(-np.cos(n * v) / n**2),
            name=f"truncated_sequence_{self.order}",
        )

    def hessian_diagonal(self, v):
        return -np.cos(self._n * self._check(v)) / self._n**2


def build_truncated(N):
    return TruncatedSequenceFunctional(N)


def nearest_nonzero_critical(N):
    """Nonzero stationary point of least norm: only v_N = pi / N is nonzero.

    Stationarity requires sin(n v_n) = 0, i.e. v_n in (pi / n) Z, and the
    smallest nonzero step over n <= N is pi / N.
    """
    if int(N) != N or N < 1:
        raise InvalidInputError(f"truncation order must be an integer >= 1, got {N}")
    point = np.zeros(int(N))
    point[-1] = np.pi / N
    return point, float(np.pi / N)


FIXTURES = {
    "double_well": double_well,
    "four_well": four_well,
    "saddle_quadratic": saddle_quadratic,
    "quartic_saddle": quartic_saddle,
    "quartic_1d": quartic_1d,
    "quadratic_1d": quadratic_1d,
    "linear_1d": linear_1d,
}


def fixture(name, **kwargs):
    if name.startswith("truncated_sequence"):
        return build_truncated(kwargs.get("order", 10))
    if name not in FIXTURES:
        raise InvalidInputError(f"unknown explicit fixture {name!r}; expected one of {sorted(FIXTURES)}")
    return FIXTURES[name]()
