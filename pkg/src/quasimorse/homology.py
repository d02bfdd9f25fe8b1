"""GF(2) Morse chain complex and its Betti numbers."""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .errors import IncompleteDataError, IntegrityError, InvalidInputError


@dataclass
class SublevelSpec:
    """P = f^-1(-inf, a), or the empty set when ``a`` is None."""

    a: Optional[float] = None

    @property
    def empty(self):
        return self.a is None

    def contains(self, value):
        return not self.empty and value < self.a

    def to_dict(self):
        return {"kind": "empty"} if self.empty else {"kind": "sublevel", "a": self.a}

    @classmethod
    def parse(cls, spec):
        if spec is None or isinstance(spec, cls):
            return spec or cls()
        kind = spec.get("kind", "empty")
        if kind == "empty":
            return cls()
        if kind == "sublevel":
            return cls(float(spec["a"]))
        raise InvalidInputError(f"unknown P kind {kind!r}")


@dataclass
class MorseComplex:
    generators: dict                   # degree -> sorted list of critical point ids
    boundaries: dict                   # k -> uint8 matrix, shape (|gen_{k-1}|, |gen_k|)
    P: SublevelSpec = field(default_factory=SublevelSpec)

    @property
    def top(self):
        return max(self.generators, default=-1)

    def size(self, k):
        return len(self.generators.get(k, []))

    def boundary(self, k):
        if k in self.boundaries:
            return self.boundaries[k]
        return np.zeros((self.size(k - 1), self.size(k)), dtype=np.uint8)

    def to_dict(self):
        return {
            "P": self.P.to_dict(),
            "generators": {str(k): list(v) for k, v in sorted(self.generators.items())},
            "boundaries": {str(k): ["".join(str(int(b)) for b in row) for row in M]
                           for k, M in sorted(self.boundaries.items())},
        }


def _rows_as_ints(M):
    return [int("".join("1" if b else "0" for b in row) or "0", 2) for row in np.asarray(M, dtype=np.uint8)]


def gf2_rank(M):
    """Rank over GF(2) by elimination on rows packed into integers."""
    rows = [r for r in _rows_as_ints(M) if r]
    rank = 0
    while rows:
        pivot = max(rows)
        rows.remove(pivot)
        rank += 1
        top = pivot.bit_length() - 1
        rows = [r ^ pivot if (r >> top) & 1 else r for r in rows]
        rows = [r for r in rows if r]
    return rank


def gf2_matmul(A, B):
    return (np.asarray(A, dtype=np.int64) @ np.asarray(B, dtype=np.int64)) % 2


def _check_d2(generators, boundaries):
    degrees = sorted(generators)
    for k in degrees:
        if k - 1 not in generators or k + 1 not in generators:
            continue
        A = boundaries.get(k)
        B = boundaries.get(k + 1)
        if A is None or B is None:
            continue
        if np.any(gf2_matmul(A, B)):
            return (k, k + 1)
    return None


def build_morse_complex(crits, parities, P_spec=None):
    """Chain complex generated by the non-degenerate critical points outside P.

    ``parities`` maps (hi_id, lo_id) to 0 or 1 and must cover every pair of
    retained generators with index gap one.
    """
    P = SublevelSpec.parse(P_spec)
    gens = {}
    for cp in crits:
        if cp.degenerate or cp.morse_index is None:
            continue
        if P.contains(cp.value):
            continue
        gens.setdefault(int(cp.morse_index), []).append(int(cp.id))
    for k in gens:
        gens[k].sort()
    top = max(gens, default=-1)
    for k in range(top + 1):
        gens.setdefault(k, [])
    bds = {}
    for k in range(1, top + 1):
        M = np.zeros((len(gens[k - 1]), len(gens[k])), dtype=np.uint8)
        for j, hi in enumerate(gens[k]):
            for i, lo in enumerate(gens[k - 1]):
                key = (hi, lo)
                if key not in parities:
                    raise IncompleteDataError(f"missing orbit parity for pair {key}")
                M[i, j] = int(parities[key]) % 2
        bds[k] = M
    bad = _check_d2(gens, bds)
    if bad is not None:
        raise IntegrityError(f"boundary composition d_{bad[0]} d_{bad[1]} is nonzero", bad)
    return MorseComplex(gens, bds, P)


def d_squared_zero(mc: MorseComplex) -> bool:
    return _check_d2(mc.generators, mc.boundaries) is None


def betti(mc: MorseComplex):
    """b_k = |gen_k| - rank d_k - rank d_{k+1}; at least one entry."""
    top = mc.top
    if top < 0:
        return [0]
    ranks = {k: gf2_rank(mc.boundary(k)) for k in range(1, top + 1)}
    return [mc.size(k) - ranks.get(k, 0) - ranks.get(k + 1, 0) for k in range(top + 1)]


def euler_characteristic(b):
    return sum((-1) ** k * x for k, x in enumerate(b))


def reference_betti(mc: MorseComplex):
    """Homology of the contractible ambient space (a point) when P is empty; else unknown."""
    if not mc.P.empty:
        return None
    return [1] + [0] * max(mc.top, 0)


def homology_summary(mc: MorseComplex):
    b = betti(mc)
    ref = reference_betti(mc)
    return {
        **mc.to_dict(),
        "betti": b,
        "euler_characteristic": euler_characteristic(b),
        "d_squared_zero": d_squared_zero(mc),
        "morse_inequalities": all(b[k] <= mc.size(k) for k in range(len(b))),
        "reference": ref,
        "match": None if ref is None else b == ref,
    }
