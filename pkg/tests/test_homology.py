import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from hypothesis.extra.numpy import arrays

from conftest import by_coords, explicit_field
from oracles import gf2_rank_reference
from quasimorse.critical import CriticalPoint
from quasimorse.errors import IncompleteDataError, IntegrityError, InvalidInputError
from quasimorse.flow import connecting_orbit_count
from quasimorse.homology import (MorseComplex, SublevelSpec, betti, build_morse_complex, d_squared_zero,
                                 euler_characteristic, gf2_rank, homology_summary, reference_betti)


def cp(i, index, value=0.0, degenerate=False):
    return CriticalPoint(np.zeros(1), value, 0.0, id=i, morse_index=index, degenerate=degenerate)


def test_empty_complex():
    mc = build_morse_complex([], {})
    assert all(b == 0 for b in betti(mc))
    assert d_squared_zero(mc)


def test_single_minimum():
    mc = build_morse_complex([cp(0, 0)], {})
    assert mc.boundaries == {}
    assert betti(mc) == [1]
    assert homology_summary(mc)["match"] is True


def test_double_well_complex():
    crits = [cp(0, 0), cp(1, 0), cp(2, 1, 1.0)]
    mc = build_morse_complex(crits, {(2, 0): 1, (2, 1): 1})
    assert mc.boundary(1).tolist() == [[1], [1]]
    assert betti(mc) == [1, 0]
    assert euler_characteristic(betti(mc)) == 1
    assert mc.to_dict()["boundaries"] == {"1": ["1", "1"]}


def test_double_well_from_shooting():
    F, crits, V = explicit_field("double_well")
    s = by_coords(crits, [0.0, 0.0])
    par = {(s.id, m.id): connecting_orbit_count(F, V, s, m).parity for m in crits if m.morse_index == 0}
    mc = build_morse_complex(crits, par)
    assert mc.boundary(1).tolist() == [[1], [1]]
    assert betti(mc) == [1, 0]


def test_four_well_complex():
    # minima m_ij at (+-1, +-1), saddles on the axes, maximum at 0; each saddle joins its 2 neighbours
    minima = {(sx, sy): k for k, (sx, sy) in enumerate([(-1, -1), (-1, 1), (1, -1), (1, 1)])}
    saddles = {(-1, 0): 4, (1, 0): 5, (0, -1): 6, (0, 1): 7}
    crits = [cp(k, 0) for k in minima.values()] + [cp(k, 1, 1.0) for k in saddles.values()] + [cp(8, 2, 2.0)]
    par = {}
    for (a, b), s in saddles.items():
        for (x, y), m in minima.items():
            par[(s, m)] = int((a == 0 or a == x) and (b == 0 or b == y))
    for s in saddles.values():
        par[(8, s)] = 1
    mc = build_morse_complex(crits, par)
    assert d_squared_zero(mc)
    assert betti(mc) == [1, 0, 0]
    assert homology_summary(mc)["morse_inequalities"]


def test_d_squared_nonzero_raises():
    crits = [cp(0, 0), cp(1, 1), cp(2, 2)]
    with pytest.raises(IntegrityError) as exc:
        build_morse_complex(crits, {(1, 0): 1, (2, 1): 1})
    assert "1" in str(exc.value) and "2" in str(exc.value)


def test_missing_parity():
    with pytest.raises(IncompleteDataError):
        build_morse_complex([cp(0, 0), cp(1, 0), cp(2, 1)], {(2, 0): 1})


def test_degenerate_and_sublevel_excluded():
    crits = [cp(0, 0, -1.0), cp(1, 0, 0.0), cp(2, 1, 1.0), cp(3, 1, 2.0, degenerate=True)]
    mc = build_morse_complex(crits, {(2, 1): 1}, {"kind": "sublevel", "a": -0.5})
    assert mc.generators == {0: [1], 1: [2]}
    assert betti(mc) == [0, 0]
    assert reference_betti(mc) is None


def test_sublevel_spec():
    P = SublevelSpec.parse({"kind": "sublevel", "a": 1.0})
    assert P.contains(0.5) and not P.contains(1.0)
    assert SublevelSpec.parse(None).empty and not SublevelSpec().contains(-1e300)
    with pytest.raises(InvalidInputError):
        SublevelSpec.parse({"kind": "box"})


@settings(max_examples=200, deadline=None)
@given(st.integers(1, 12).flatmap(lambda r: st.integers(1, 12).flatmap(
    lambda c: arrays(np.uint8, (r, c), elements=st.integers(0, 1)))))
def test_gf2_rank_matches_reference(M):
    assert gf2_rank(M) == gf2_rank_reference(M)


@settings(max_examples=100, deadline=None)
@given(st.integers(0, 2**31 - 1), st.integers(1, 6), st.integers(1, 6), st.integers(1, 6))
def test_betti_random_chain_complexes(seed, n0, n1, n2):
    # d1 d2 = 0 by construction: columns of d2 lie in the GF(2) kernel of d1
    rng = np.random.default_rng(seed)
    d1 = rng.integers(0, 2, (n0, n1)).astype(np.uint8)
    basis = []
    for v in range(1, 2**n1):
        x = np.array([(v >> i) & 1 for i in range(n1)], dtype=np.int64)
        if not np.any((d1.astype(np.int64) @ x) % 2):
            basis.append(x)
    cols = [basis[rng.integers(len(basis))] if basis and rng.uniform() < 0.7 else np.zeros(n1, np.int64)
            for _ in range(n2)]
    d2 = np.array(cols, dtype=np.uint8).T
    mc = MorseComplex({0: list(range(n0)), 1: list(range(n1)), 2: list(range(n2))}, {1: d1, 2: d2})
    b = betti(mc)
    assert d_squared_zero(mc)
    assert euler_characteristic(b) == n0 - n1 + n2
    assert all(0 <= b[k] <= mc.size(k) for k in range(3))
