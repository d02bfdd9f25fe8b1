import numpy as np
import pytest

from quasimorse.functionals import PsiModel, assemble, interval_mesh, rectangle_mesh
from quasimorse.functionals import nonlinearity as nl


def linear_problem(lam, n_el=32, p=3.0, kappa=1.0):
    return assemble(PsiModel("area-kappa", p, kappa), nl.linear(lam), interval_mesh(0.0, 1.0, n_el))


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


@pytest.fixture
def galerkin_1d():
    return assemble(PsiModel("area-kappa", 3.0, 1.0), nl.bistable(20.0), interval_mesh(0.0, 1.0, 12))


@pytest.fixture
def galerkin_2d():
    return assemble(PsiModel("p-power-plus-quadratic", 3.0), nl.power(2.0, 1.0), rectangle_mesh(resolution=(4, 4)))


def explicit_field(name, grid=None, profile="smoothstep"):
    """Critical points (with indices) and the glued flow field of an explicit fixture."""
    from quasimorse.critical import deflated_search, make_seeds
    from quasimorse.flow import gradient_like_field
    from quasimorse.functionals import fixture
    from quasimorse.nondeg import hyperbolic_from_splitting
    from quasimorse.spectral import splitting

    F = fixture(name)
    crits = deflated_search(F, make_seeds(F, grid or {"lo": -1.5, "hi": 1.5, "n": 4}))
    entries = []
    for cp in crits:
        s = splitting(F, cp)
        cp.morse_index = s.morse_index
        entries.append((cp, hyperbolic_from_splitting(s)))
    return F, crits, gradient_like_field(F, entries, profile)


def by_coords(crits, pt):
    return next(c for c in crits if np.allclose(c.coefficients, pt, atol=1e-8))


ACCEPTANCE_LINES = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
