from __future__ import annotations

from fractions import Fraction

import pytest
from hypothesis import given, strategies as st

import reference as ref
from qubar.bitsource import BitSequence, iid_bits
from qubar.cipher import (Encoder, Symbol, absg_encode, absg_step, empty_state_prob_exact,
                          internal_states, no_empty_run_prob_exact)

E, Z, O = Symbol.EMPTY, Symbol.ZERO, Symbol.ONE


def enc(s):
    return absg_encode(BitSequence.from_string(s))


def test_transition_table():
    expected = {(E, 0): Z, (E, 1): O, (Z, 0): E, (Z, 1): Z, (O, 0): O, (O, 1): E}
    for (prev, b), nxt in expected.items():
        assert absg_step(prev, b) is nxt


def test_worked_examples():
    r = enc("101001001")
    assert (r.z.to_string(), r.H, r.Q) == ("000", (3, 5, 9), (1, 0, 2))
    r = enc("00")
    assert (r.z.to_string(), r.H, r.Q) == ("0", (2,), (0,))
    r = enc("1")
    assert (len(r.z), r.H, r.Q, r.unconsumed) == (0, (), (), 1)
    assert r.consumed == 0


def test_symbol_parse():
    assert Symbol.parse("empty") is E and Symbol.parse("1") is O
    with pytest.raises(ValueError):
        Symbol.parse("x")
    with pytest.raises(ValueError):
        E.bit


def check_block_structure(bits, r):
    for (a, b), z, q in zip(r.blocks, r.z.bits, r.Q):
        block = tuple(bits[a - 1:b])
        want = (z, z) if q == 0 else (1 - z,) + (z,) * q + (1 - z,)
        assert block == want


def test_exhaustive_against_reference():
    for n in range(0, 13):
        for bits in ref.all_bitstrings(n):
            r = absg_encode(bytes(bits))
            z, H, Q = ref.encode(bits)
            assert list(r.z.bits) == z and list(r.H) == H and list(r.Q) == Q
            check_block_structure(bits, r)
            assert r.consumed + r.unconsumed == n


@given(st.lists(st.integers(0, 1), max_size=400))
def test_incremental_encoder_agrees(bits):
    e = Encoder()
    out = e.feed_many(bits)
    r = absg_encode(bytes(bits))
    assert bytes(out) == r.z.bits
    assert tuple(e.H) == r.H
    assert all(q >= 0 for q in r.Q)
    assert r.blocks == [(a + 1, b) for a, b in zip((0,) + r.H[:-1], r.H)]


@given(st.lists(st.integers(0, 1), max_size=200))
def test_internal_states_mark_boundaries(bits):
    ys = internal_states(bytes(bits))
    r = absg_encode(bytes(bits))
    assert tuple(i for i, y in enumerate(ys) if y is E and i > 0) == r.H
    # two empty symbols are never adjacent
    assert all(not (a is E and b is E) for a, b in zip(ys, ys[1:]))


def test_empty_state_probability_examples():
    assert empty_state_prob_exact(1) == 0
    assert empty_state_prob_exact(2) == Fraction(1, 2)
    assert empty_state_prob_exact(3) == Fraction(1, 4)
    for n in range(1, 21):
        assert empty_state_prob_exact(n) == Fraction(1, 3) + Fraction(2, 3) * Fraction(-1, 2) ** n


def test_no_empty_run_examples():
    assert no_empty_run_prob_exact(1, 1) == 1
    assert no_empty_run_prob_exact(2, 1) == Fraction(1, 2)
    assert no_empty_run_prob_exact(2, 2) == Fraction(1, 4)


def test_no_empty_run_against_reference_counts():
    # independent count with the literal reference table
    for n, w in [(1, 3), (3, 2), (4, 4), (5, 1)]:
        m = n + w - 1
        hits = 0
        for bits in ref.all_bitstrings(m):
            y = [ref.E]
            for b in bits:
                y.append(ref.TABLE[y[-1]][b])
            hits += all(y[k] != ref.E for k in range(n, n + w))
        assert no_empty_run_prob_exact(n, w) == Fraction(hits, 2 ** m)


def test_enumeration_cap():
    with pytest.raises(ValueError):
        empty_state_prob_exact(21)
    with pytest.raises(ValueError):
        no_empty_run_prob_exact(15, 6)
    with pytest.raises(ValueError):
        empty_state_prob_exact(0)
    assert empty_state_prob_exact(22, cap=22) == Fraction(1, 3) + Fraction(2, 3) * Fraction(1, 2) ** 22


def test_rate_on_structured_inputs():
    r = absg_encode(b"\x00" * 1000)
    assert len(r.z) == 500 and set(r.Q) == {0}
    x = iid_bits(9, 30000)
    r = absg_encode(x)
    assert abs(sum(r.Q) / len(r.Q) - 1) < 0.05
