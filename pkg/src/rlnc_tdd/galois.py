"""GF(2^g) arithmetic and incremental rank tracking of received coding vectors."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

# Primitive polynomials (leading term included), one per degree.
DEFAULT_POLYS = {
    1: 0x3, 2: 0x7, 3: 0xB, 4: 0x13, 5: 0x25, 6: 0x43, 7: 0x83, 8: 0x11D,
    9: 0x211, 10: 0x409, 11: 0x805, 12: 0x1053, 13: 0x201B, 14: 0x4443,
    15: 0x8003, 16: 0x1100B, 17: 0x20009, 18: 0x40081, 19: 0x80027,
    20: 0x100009, 21: 0x200005, 22: 0x400003, 23: 0x800021, 24: 0x1000087,
    25: 0x2000009, 26: 0x4000047, 27: 0x8000027, 28: 0x10000009,
    29: 0x20000005, 30: 0x40800007, 31: 0x80000009, 32: 0x100400007,
}
EXHAUSTIVE_CHECK_MAX_G = 16


def poly_degree(a: int) -> int:
    return a.bit_length() - 1


def poly_mod(a: int, m: int) -> int:
    dm = poly_degree(m)
    while a and poly_degree(a) >= dm:
        a ^= m << (poly_degree(a) - dm)
    return a


def is_irreducible(poly: int) -> bool:
    """Trial division by every polynomial of degree 1..deg/2."""
    deg = poly_degree(poly)
    if deg < 1:
        return False
    for d in range(2, 1 << (deg // 2 + 1)):
        if poly_mod(poly, d) == 0:
            return False
    return True


@dataclass(frozen=True)
class FieldSpec:
    g: int
    poly: int

    def __post_init__(self):
        if not 1 <= self.g <= 32:
            raise ValueError(f"g must be in 1..32, got {self.g}")
        if poly_degree(self.poly) != self.g:
            raise ValueError(f"polynomial {self.poly:#x} does not have degree {self.g}")
        if self.g <= EXHAUSTIVE_CHECK_MAX_G:
            if not is_irreducible(self.poly):
                raise ValueError(f"polynomial {self.poly:#x} is reducible")
        elif DEFAULT_POLYS.get(self.g) != self.poly:
            raise ValueError(f"for g > {EXHAUSTIVE_CHECK_MAX_G} only the built-in polynomial is accepted")

    @classmethod
    def default(cls, g: int) -> "FieldSpec":
        if g not in DEFAULT_POLYS:
            raise ValueError(f"no built-in polynomial for g={g}")
        return cls(g, DEFAULT_POLYS[g])

    @property
    def order(self) -> int:
        return 1 << self.g


def field_mul(a: int, b: int, f: FieldSpec) -> int:
    """Shift-and-add product, reducing modulo ``f.poly`` as we go."""
    top = 1 << f.g
    poly = f.poly
    r = 0
    while b:
        if b & 1:
            r ^= a
        b >>= 1
        a <<= 1
        if a & top:
            a ^= poly
    return r


def field_inv(a: int, f: FieldSpec) -> int:
    """Inverse by the extended Euclidean algorithm over GF(2)[x]."""
    if a == 0:
        raise ZeroDivisionError("zero has no inverse")
    r0, r1 = f.poly, a
    s0, s1 = 0, 1
    while r1 != 1:
        shift = poly_degree(r0) - poly_degree(r1)
        if shift < 0:
            r0, r1, s0, s1 = r1, r0, s1, s0
            continue
        r0 ^= r1 << shift
        s0 ^= s1 << shift
        if poly_degree(r0) < poly_degree(r1):
            r0, r1, s0, s1 = r1, r0, s1, s0
    return poly_mod(s1, f.poly)


def _scale(row: Sequence[int], c: int, f: FieldSpec) -> list[int]:
    return [field_mul(c, x, f) if x else 0 for x in row]


@dataclass
class DecoderState:
    """Row-echelon basis of the coding vectors received so far.

    ``pivots`` maps a pivot column to a row whose entry there is 1 and whose
    entries to the left are 0.
    """

    M: int
    field: FieldSpec
    pivots: dict[int, list[int]] = field(default_factory=dict)

    @property
    def rank(self) -> int:
        return len(self.pivots)

    @property
    def dofs_needed(self) -> int:
        return self.M - self.rank

    @property
    def rows(self) -> list[list[int]]:
        return [self.pivots[c] for c in sorted(self.pivots)]

    def absorb(self, vec: Sequence[int]) -> bool:
        """Eliminate ``vec`` against the basis; True when it raised the rank."""
        if len(vec) != self.M:
            raise ValueError(f"coding vector has length {len(vec)}, expected {self.M}")
        if self.rank == self.M:
            return False
        v = list(vec)
        f = self.field
        for col in sorted(self.pivots):
            c = v[col]
            if c:
                row = self.pivots[col]
                for k in range(col, self.M):
                    if row[k]:
                        v[k] ^= field_mul(c, row[k], f)
        lead = next((k for k, x in enumerate(v) if x), None)
        if lead is None:
            return False
        self.pivots[lead] = _scale(v, field_inv(v[lead], f), f)
        return True


def absorb(d: DecoderState, coding_vector: Sequence[int]) -> tuple[DecoderState, bool]:
    innovative = d.absorb(coding_vector)
    return d, innovative


def full_rank_probability_bound(M: int, g: int) -> float:
    """Lower bound prod_k (1 - 2^(-g k)) on M uniform vectors being independent."""
    prob = 1.0
    for k in range(1, M + 1):
        prob *= 1.0 - 2.0 ** (-g * k)
    return prob
