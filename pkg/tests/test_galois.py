import random

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from rlnc_tdd.galois import (DEFAULT_POLYS, DecoderState, FieldSpec, absorb, field_inv,
                             field_mul, full_rank_probability_bound, is_irreducible)

from oracles import mul_table, poly_mulmod, rabin_irreducible, rank_by_span, rank_naive


def test_mul_examples():
    f = FieldSpec(4, 0b10011)
    assert field_mul(0b0010, 0b1000, f) == 0b0011
    for a in range(16):
        assert field_mul(a, 1, f) == a


def test_inv_examples():
    f = FieldSpec(4, 0b10011)
    assert field_inv(1, f) == 1
    assert field_mul(field_inv(0b0010, f), 0b0010, f) == 1
    with pytest.raises(ZeroDivisionError):
        field_inv(0, f)


@pytest.mark.parametrize("g", range(1, 13))
def test_inverse_exhaustive(g):
    f = FieldSpec.default(g)
    for a in range(1, 1 << g):
        inv = field_inv(a, f)
        assert field_mul(a, inv, f) == 1
        assert field_inv(inv, f) == a


@pytest.mark.parametrize("g", range(1, 9))
def test_mul_matches_independent_table(g):
    f = FieldSpec.default(g)
    table = mul_table(g, f.poly)
    q = 1 << g
    for a in range(q):
        for b in range(q):
            assert field_mul(a, b, f) == table[a, b]


@pytest.mark.parametrize("g", sorted(DEFAULT_POLYS))
def test_builtin_polys_irreducible(g):
    assert rabin_irreducible(DEFAULT_POLYS[g])
    if g <= 16:
        assert is_irreducible(DEFAULT_POLYS[g])


def test_fieldspec_validation():
    with pytest.raises(ValueError):
        FieldSpec(4, 0b10101)  # x^4 + x^2 + 1 = (x^2 + x + 1)^2
    with pytest.raises(ValueError):
        FieldSpec(4, 0b1011)
    with pytest.raises(ValueError):
        FieldSpec(20, 0b1 << 20 | 0b101)
    for g in (1, 4, 8, 16, 20):
        FieldSpec.default(g)


@pytest.mark.parametrize("g", [12, 16, 20, 24, 32])
def test_axioms_sampled(g):
    f = FieldSpec.default(g)
    rnd = random.Random(g)
    top = (1 << g) - 1
    for _ in range(3000):
        a, b, c = (rnd.randint(0, top) for _ in range(3))
        ab = field_mul(a, b, f)
        assert ab == field_mul(b, a, f)
        assert field_mul(ab, c, f) == field_mul(a, field_mul(b, c, f), f)
        assert field_mul(a, b ^ c, f) == ab ^ field_mul(a, c, f)
        assert ab == poly_mulmod(a, b, f.poly)


# ----------------------------------------------------------------- decoder

def test_absorb_zero_vector():
    d = DecoderState(4, FieldSpec.default(8))
    d, innovative = absorb(d, [0, 0, 0, 0])
    assert not innovative and d.rank == 0


def test_absorb_unit_vectors():
    d = DecoderState(4, FieldSpec.default(8))
    for k in range(4):
        v = [0] * 4
        v[k] = 1
        assert d.absorb(v)
    assert d.rank == 4 and d.dofs_needed == 0


def test_absorb_rejects_wrong_length():
    with pytest.raises(ValueError):
        DecoderState(3, FieldSpec.default(4)).absorb([1, 2])


def test_random_6x4_matches_naive_elimination():
    f = FieldSpec.default(8)
    rnd = random.Random(8)
    for _ in range(50):
        rows = [[rnd.randrange(256) for _ in range(4)] for _ in range(6)]
        if rnd.random() < 0.5:  # force dependence sometimes
            rows[5] = [a ^ poly_mulmod(7, b, f.poly) for a, b in zip(rows[0], rows[1])]
            rows[4] = list(rows[2])
        d = DecoderState(4, f)
        for r in rows:
            d.absorb(r)
        assert d.rank == rank_naive(rows, 8, f.poly)


def test_rank_small_matches_span_oracle():
    rnd = random.Random(1)
    for trial in range(200):
        g = rnd.choice([1, 2, 3])
        f = FieldSpec.default(g)
        cols = rnd.randint(1, 3)
        rows = [[rnd.randrange(1 << g) for _ in range(cols)] for _ in range(rnd.randint(1, 5))]
        d = DecoderState(cols, f)
        for r in rows:
            d.absorb(r)
        assert d.rank == rank_by_span(rows, g, f.poly)


@settings(max_examples=50, deadline=None)
@given(st.integers(0, 2**31), st.integers(2, 6))
def test_rank_order_insensitive_and_stable(seed, M):
    f = FieldSpec.default(4)
    rnd = random.Random(seed)
    rows = [[rnd.choice([0, 0, 1, rnd.randrange(16)]) for _ in range(M)] for _ in range(M + 2)]
    d1 = DecoderState(M, f)
    for r in rows:
        d1.absorb(r)
    shuffled = rows[:]
    rnd.shuffle(shuffled)
    d2 = DecoderState(M, f)
    for r in shuffled:
        d2.absorb(r)
    assert d1.rank == d2.rank
    before = d1.rank
    for r in list(d1.rows):
        assert not d1.absorb(r)
    assert d1.rank == before


def test_full_rank_bound():
    assert full_rank_probability_bound(5, 20) > 0.999999
    assert full_rank_probability_bound(1, 1) == 0.5


def test_full_rank_frequency_meets_bound():
    f = FieldSpec.default(2)
    rng = np.random.default_rng(3)
    trials, full = 3000, 0
    for _ in range(trials):
        d = DecoderState(3, f)
        for r in rng.integers(0, 4, size=(3, 3)).tolist():
            d.absorb(r)
        full += d.rank == 3
    bound = full_rank_probability_bound(3, 2)
    se = np.sqrt(bound * (1 - bound) / trials)
    assert full / trials >= bound - 3 * se
