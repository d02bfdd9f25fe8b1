import sys

import numpy as np
import pytest

from conftest import by_coords, explicit_field
from oracles import normalized_linear_flow, rk_reference
from quasimorse.errors import ConstructionError, EstimationError, InvalidInputError, PreconditionError
from quasimorse.flow import (CriticalNeighborhood, FlowField, cerami_monitor, cinf, connecting_orbit_count,
                             containment_report, estimate_epsilon, gradient_like_field, gronwall_radius,
                             integrate, shoot_unstable_sphere, smoothstep, write_csv)
from quasimorse.functionals import fixture
from quasimorse.nondeg import HyperbolicOperator

integrate_module = sys.modules["quasimorse.flow.integrate"]


@pytest.fixture(scope="module")
def double_well():
    return explicit_field("double_well")


@pytest.fixture(scope="module")
def four_well():
    return explicit_field("four_well")


def bare_field(name):
    F = fixture(name)
    return F, FlowField(F, [])


# -- integration -------------------------------------------------------------

def test_linear_flow_unnormalized():
    _, V = bare_field("quadratic_1d")
    traj = integrate(V, np.array([1.0]), horizon=1.0, normalize=False)
    assert traj.terminal == "horizon"
    assert traj.states[-1, 0] == pytest.approx(np.exp(-1.0), abs=1e-6)
    assert traj.states[-1, 0] == pytest.approx(0.36788, abs=1e-5)


def test_linear_flow_normalized_matches_closed_form():
    _, V = bare_field("quadratic_1d")
    traj = integrate(V, np.array([1.0]), horizon=1.0)
    assert traj.states[-1, 0] == pytest.approx(normalized_linear_flow(1.0, 1.0), abs=1e-6)
    ref = rk_reference(lambda t, u: -u / np.sqrt(1 + u * u), np.array([1.0]), 1.0)
    assert traj.states[-1, 0] == pytest.approx(ref[0], abs=1e-6)


def test_no_critical_points_escapes():
    _, V = bare_field("linear_1d")
    traj = integrate(V, np.zeros(1), escape_radius=10.0)
    assert traj.terminal == "escaped"
    assert traj.label == "escaped"


def test_double_well_basin(double_well):
    F, crits, V = double_well
    traj = integrate(V, np.array([0.5, 0.0]))
    assert traj.terminal == "converged"
    assert np.allclose(crits[traj.target].coefficients, [1.0, 0.0])
    assert np.linalg.norm(F.gradient(traj.states[-1])) < 1e-6
    nb = V.neighborhood_of(traj.target)
    assert V.norm(traj.states[-1] - nb.center) < nb.capture_radius


def test_start_at_critical_point_is_captured(double_well):
    _, crits, V = double_well
    m = by_coords(crits, [-1.0, 0.0])
    traj = integrate(V, m.coefficients)
    assert traj.terminal == "converged" and traj.target == m.id and len(traj.times) == 1


def test_bad_horizon(double_well):
    with pytest.raises(InvalidInputError):
        integrate(double_well[2], np.zeros(2), horizon=0.0)


@pytest.mark.parametrize("u0", [(0.5, 0.3), (-1.7, 1.2), (0.05, -1.0), (1.9, 1.9)])
def test_monotone_energy(double_well, u0):
    traj = integrate(double_well[2], np.array(u0))
    assert traj.f_increase() <= 1e-9


def test_csv_columns(double_well, tmp_path):
    traj = integrate(double_well[2], np.array([0.5, 0.2]))
    path = tmp_path / "traj.csv"
    write_csv(traj, path)
    lines = path.read_text().splitlines()
    assert lines[0] == "t,u_1,u_2,f,cerami"
    assert len(lines) == len(traj.times) + 1
    assert float(lines[-1].split(",")[3]) == traj.fvals[-1]


# -- field -------------------------------------------------------------------

def test_profiles():
    for prof in (smoothstep, cinf):
        assert prof(0.0) == 0.0 and prof(1.0) == 1.0
        assert prof(0.5) == pytest.approx(0.5)
        assert all(prof(a) <= prof(b) for a, b in zip(np.linspace(0, 1, 50), np.linspace(0, 1, 50)[1:]))


def test_field_vanishes_at_critical_points(double_well):
    _, crits, V = double_well
    for cp in crits:
        assert np.all(V(cp.coefficients) == 0.0)


def test_field_linear_inside_half_radius(double_well, rng):
    _, crits, V = double_well
    for cp in crits:
        nb = V.neighborhood_of(cp.id)
        for _ in range(20):
            d = rng.standard_normal(2)
            z = cp.coefficients + 0.49 * nb.rho * rng.uniform() * d / np.linalg.norm(d)
            assert np.array_equal(V(z), nb.L.matrix @ (z - cp.coefficients))


def test_saddle_field_is_lx(double_well):
    _, crits, V = double_well
    s = by_coords(crits, [0.0, 0.0])
    z = np.array([0.1, 0.05]) * V.neighborhood_of(s.id).rho
    assert np.allclose(V(z), [z[0], -z[1]], atol=1e-15)


def test_pseudo_gradient_outside_neighborhoods(four_well, rng):
    F, _, V = four_well
    checked = 0
    for z in rng.uniform(-2.5, 2.5, (400, 2)):
        if V.locate(z)[0] is not None:
            continue
        g = F.gradient(z)
        assert g @ V(z) <= -0.5 * V.dual_norm(g) ** 2
        checked += 1
    assert checked > 100
    F2, _, V2 = explicit_field("double_well")
    z = np.array([0.5, 0.0])
    assert F2.gradient(z) @ V2(z) < 0


def test_normalized_field_bounded(four_well, rng):
    _, _, V = four_well
    for z in rng.uniform(-50, 50, (50, 2)):
        assert V.norm(V.normalized(z)) < 1.0


def test_local_flow_is_exact_linear_flow(double_well):
    # inside rho/2 of a minimum V = -(z - u) and the normalized flow is radial
    _, crits, V = double_well
    m = by_coords(crits, [1.0, 0.0])
    rho = V.neighborhood_of(m.id).rho
    r0 = 0.45 * rho
    traj = integrate(V, m.coefficients + np.array([r0, 0.0]), horizon=0.1, capture=False)
    assert traj.states[-1, 0] - 1.0 == pytest.approx(normalized_linear_flow(r0, 0.1), abs=1e-8)
    assert np.allclose(traj.states[:, 1], m.coefficients[1], atol=1e-15)


def test_radii_shrink_and_construction_error():
    F = fixture("double_well")
    from quasimorse.critical import CriticalPoint
    L = HyperbolicOperator.from_matrix(-np.eye(2))
    a = CriticalPoint(np.array([0.0, 0.0]), 0.0, 0.0, id=0)
    b = CriticalPoint(np.array([1.0, 0.0]), 0.0, 0.0, id=1)
    V = gradient_like_field(F, [(a, L, 5.0), (b, L, 5.0)])
    assert sum(nb.rho for nb in V.neighborhoods) < 1.0
    with pytest.raises(ConstructionError):
        gradient_like_field(F, [(a, L, 5.0), (b, L, 5.0)], max_shrinks=2)
    assert CriticalNeighborhood(a, L, 1.0).capture_radius == 0.25


# -- shooting ----------------------------------------------------------------

def test_double_well_orbit_counts(double_well):
    F, crits, V = double_well
    s = by_coords(crits, [0.0, 0.0])
    for pt in ([1.0, 0.0], [-1.0, 0.0]):
        oc = connecting_orbit_count(F, V, s, by_coords(crits, pt))
        assert oc.count == 1 and oc.parity == 1 and oc.reliable


def test_equal_index_rejected(double_well):
    F, crits, V = double_well
    with pytest.raises(PreconditionError):
        connecting_orbit_count(F, V, by_coords(crits, [1.0, 0.0]), by_coords(crits, [-1.0, 0.0]))


def test_four_well_counts_and_refinement_stability(four_well):
    F, crits, V = four_well
    top = by_coords(crits, [0.0, 0.0])
    saddles = [c for c in crits if c.morse_index == 1]
    minima = [c for c in crits if c.morse_index == 0]
    assert len(saddles) == 4 and len(minima) == 4
    shots = {n: shoot_unstable_sphere(F, V, top, n_shoot=n, seed=s) for n, s in ((8, 0), (16, 5))}
    for shot in shots.values():
        assert shot.reliable and shot.dim == 2
        assert [shot.count(s.id) % 2 for s in saddles] == [1, 1, 1, 1]
    for s in saddles:
        adjacent = [m.id for m in minima if np.linalg.norm(m.coefficients - s.coefficients) < 1.5]
        for m in minima:
            oc = connecting_orbit_count(F, V, s, m)
            assert oc.count == (1 if m.id in adjacent else 0)


def test_shot_records_trajectories(double_well):
    F, crits, V = double_well
    trajs = []
    shoot_unstable_sphere(F, V, by_coords(crits, [0.0, 0.0]), trajectories=trajs)
    assert len(trajs) == 2
    for t in trajs:
        assert cerami_monitor(F, t) >= 0.0
        assert t.f_increase() <= 1e-9


# -- containment -------------------------------------------------------------

@pytest.mark.parametrize("args,value", [((1.0, 1.0, 0.0, 2.0), 2 * np.e), ((1.0, 1.0, 0.5, 0.5), 1.0),
                                        ((2.0, 0.5, 0.0, 1.0), 3 * np.e)])
def test_gronwall_closed_form(args, value):
    assert gronwall_radius(*args) == pytest.approx(value, abs=1e-10)
    assert gronwall_radius(*args) >= args[0]


def test_gronwall_rejects():
    with pytest.raises(InvalidInputError):
        gronwall_radius(1.0, 0.0, 0.0, 1.0)
    with pytest.raises(InvalidInputError):
        gronwall_radius(1.0, 1.0, 1.0, 0.0)


def test_cerami_monitor_at_critical_point(double_well):
    F, crits, V = double_well
    traj = integrate(V, crits[0].coefficients)
    assert cerami_monitor(F, traj) == 0.0


def test_cerami_positive_on_connecting_orbit(double_well):
    F, crits, V = double_well
    s = by_coords(crits, [0.0, 0.0])
    r = V.neighborhood_of(s.id).capture_radius
    traj = integrate(V, np.array([r, 0.0]), capture=False, horizon=5.0)
    assert cerami_monitor(F, traj) > 0.0


def test_estimate_epsilon_empty_band():
    # F >= y^2 >= 1 everywhere outside the ball of radius 3 intersected with f <= 1 is empty
    with pytest.raises(EstimationError):
        estimate_epsilon(fixture("double_well"), 0.0, 1.0, 3.0, n_samples=500)


def test_containment_double_well(double_well, rng):
    F, crits, V = double_well
    a, b, r0 = 0.0, 1.0, 1.2
    eps = estimate_epsilon(F, a, b, r0, n_samples=4000)
    assert eps > 0
    trajs = [integrate(V, z) for z in rng.uniform(-0.8, 0.8, (10, 2))]
    rep = containment_report(F, trajs, a, b, r0, eps)
    assert rep.checked > 0
    assert rep.contained and rep.R >= r0


def test_estimate_epsilon_deterministic():
    F = fixture("double_well")
    assert estimate_epsilon(F, 0.0, 1.0, 1.2, 500, seed=4) == estimate_epsilon(F, 0.0, 1.0, 1.2, 500, seed=4)
