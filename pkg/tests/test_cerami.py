import numpy as np
import pytest

from oracles import plaplace_rayleigh_extrapolated
from quasimorse.cerami import (classify_growth, is_resonant, plaplace_closed_form, plaplace_spectrum_1d,
                               superlinear_check)
from quasimorse.errors import ClassificationConflictError, InvalidInputError
from quasimorse.functionals import nonlinearity as nl


@pytest.fixture(scope="module")
def spec3():
    return plaplace_spectrum_1d(3.0, 1.0, 3)


def test_laplace_spectrum():
    spec = plaplace_spectrum_1d(2.0, 1.0, 5)
    ref = [(k * np.pi) ** 2 for k in range(1, 6)]
    assert np.allclose(spec, ref, rtol=1e-6, atol=0)
    assert spec[0] == pytest.approx(9.8696, abs=1e-4)


def test_laplace_spectrum_scales_with_length():
    spec = plaplace_spectrum_1d(2.0, 2.0, 2)
    assert np.allclose(spec, [(np.pi / 2) ** 2, np.pi**2], rtol=1e-6, atol=0)


def test_p3_first_eigenvalue_vs_rayleigh(spec3):
    ref = plaplace_rayleigh_extrapolated(3.0)
    assert spec3[0] == pytest.approx(ref, rel=1e-4)
    assert spec3[0] == pytest.approx(28.29, abs=5e-3)


def test_p3_homogeneity(spec3):
    for k in (2, 3):
        assert spec3[k - 1] / spec3[0] == pytest.approx(k**3, rel=1e-3)
        assert spec3[k - 1] == pytest.approx(plaplace_closed_form(3.0, 1.0, k), rel=1e-8)


def test_spectrum_rejects_bad_input():
    with pytest.raises(InvalidInputError):
        plaplace_spectrum_1d(1.0)


def test_classification_fixtures():
    assert classify_growth(nl.linear(1.0), 3.0, 3).tag == "sublinear"
    lin = classify_growth(nl.plinear(5.0, 3.0), 3.0, 3)
    assert lin.tag == "linear" and lin.lam == pytest.approx(5.0)
    sup = classify_growth(nl.power(1.0, 3.0), 3.0, 3)
    assert sup.tag == "superlinear" and sup.threshold_high == np.inf
    assert sup.to_dict()["threshold_high"] == "inf"


def test_numeric_scan_directions():
    sub = classify_growth(nl.linear(1.0), 3.0, 3).ratios
    sup = classify_growth(nl.power(1.0, 3.0), 3.0, 3).ratios
    lin = classify_growth(nl.plinear(5.0, 3.0), 3.0, 3).ratios
    assert sub[0] > sub[1] > sub[2]
    assert sup[0] < sup[1] < sup[2]
    assert max(lin) / min(lin) < 10


def test_undeclared_lambda_of_oscillating_g():
    out = classify_growth(nl.oscillating(), 3.0, 3)
    assert out.tag == "linear" and out.lam is None


def test_conflict_raises():
    g = nl.power(1.0, 3.0)
    g.q = 0.0                     # claims sublinear, grows like |s|^3
    with pytest.raises(ClassificationConflictError):
        classify_growth(g, 3.0, 3)


def test_resonance_flips(spec3):
    lam1 = spec3[0]
    assert is_resonant(lam1, spec3)
    for lam in (lam1 * (1 - 1e-2), lam1 * (1 + 1e-2)):
        assert not is_resonant(lam, spec3)
        g = nl.plinear(lam, 3.0)
        assert classify_growth(g, 3.0, 3, length=1.0, k_max=2).resonant is False
    assert classify_growth(nl.plinear(lam1, 3.0), 3.0, 3, length=1.0, k_max=2).resonant is True


def test_resonance_bisection(spec3):
    lam1 = spec3[0]
    lo, hi = lam1 * 0.9, lam1
    for _ in range(30):
        mid = 0.5 * (lo + hi)
        if is_resonant(mid, spec3):
            hi = mid
        else:
            lo = mid
    assert hi == pytest.approx(lam1 * (1 - 1e-3), rel=1e-6)


def test_superlinear_checks():
    g = nl.power(1.0, 3.0)
    g.ar_mu = 5.0
    rep = superlinear_check(g, 3.0)
    assert rep.monotonicity and rep.lower_bound and rep.ar_condition
    bad = superlinear_check(nl.oscillating(), 3.0)
    assert not bad.monotonicity and bad.monotonicity_failures
    mixed = nl.monomials([(1.0, 3.0), (-10.0, 1.0)])
    assert not superlinear_check(mixed, 3.0).lower_bound
    mixed.alpha = 10.0 / 3.0
    assert superlinear_check(mixed, 3.0).lower_bound
