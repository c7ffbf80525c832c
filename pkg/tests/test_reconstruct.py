from __future__ import annotations

import numpy as np
import pytest
from hypothesis import given, strategies as st

import reference as ref
from qubar.bitsource import BitSequence, make_rng
from qubar.cipher import Symbol, absg_encode, internal_states
from qubar.reconstruct import (ScanFailure, gaps_from_x_window, gaps_from_x_window_any,
                               scan_budget, x_from_gaps)


def bits(s):
    return BitSequence.from_string(s)


def test_x_from_gaps_examples():
    assert x_from_gaps(b"\x00", (0,)).bits.to_string() == "00"
    assert x_from_gaps(b"\x00\x00\x00", (1, 0, 2)).bits.to_string() == "101001001"
    seg = x_from_gaps(b"\x01", (2,))
    assert seg.bits.to_string() == "0110" and seg.length == 4
    with pytest.raises(ValueError):
        x_from_gaps(b"\x00\x01", (0,))
    with pytest.raises(ValueError):
        x_from_gaps(b"\x00", (-1,))


@given(st.lists(st.tuples(st.integers(0, 1), st.integers(0, 9)), min_size=1, max_size=40))
def test_reencode_reproduces(pairs):
    z = bytes(p[0] for p in pairs)
    q = tuple(p[1] for p in pairs)
    seg = x_from_gaps(z, q)
    r = absg_encode(seg.bits)
    assert r.z.bits == z and r.Q == q and r.unconsumed == 0
    assert seg.length == ref.span(q)


def test_gap_extraction_inverts_exhaustively():
    for n in range(1, 17):
        for x in ref.all_bitstrings(n):
            r = absg_encode(bytes(x))
            seg = x_from_gaps(r.z.bits, r.Q)
            assert seg.bits.bits == bytes(x[:r.consumed])


@pytest.mark.slow
def test_gap_extraction_inverts_exhaustively_18():
    for n in (17, 18):
        for x in ref.all_bitstrings(n):
            r = absg_encode(bytes(x))
            assert x_from_gaps(r.z.bits, r.Q).bits.bits == bytes(x[:r.consumed])


def test_gap_extraction_inverts_random_long():
    rng = make_rng(77)
    for _ in range(10**4):
        x = rng.integers(0, 2, size=int(rng.integers(20, 200)), dtype=np.uint8).tobytes()
        r = absg_encode(x)
        assert x_from_gaps(r.z.bits, r.Q).bits.bits == x[:r.consumed]


def test_situation_aligned_window():
    # boundaries at 3, 5, 9 in the worked example: n = 5, L = 4 lands on 9 exactly
    x = bits("101001001")
    w = gaps_from_x_window(x, 5, Symbol.EMPTY, 4)
    assert w and w.span == 4 and w.q == (2,) and w.start == 5 and w.i == 1
    assert w.z == b"\x00"


def test_situation_extended_window():
    x = bits("101001001")
    # from 0 with L = 4: boundary 3 is too short, 5 covers 5 > 4 bits
    w = gaps_from_x_window(x, 0, Symbol.EMPTY, 4)
    assert w.span == 5 and w.q == (1, 0)
    # start inside a block: the window opens at the next boundary
    w = gaps_from_x_window(x, 1, Symbol.ONE, 2)
    assert w.start == 3 and w.i == 2 and w.q == (0,)


def test_failures_are_values():
    x = bits("101001001")
    f = gaps_from_x_window(x, 5, Symbol.EMPTY, 10)
    assert isinstance(f, ScanFailure) and not f and f.reason == "data exhausted"
    long_run = BitSequence(b"\x01" + b"\x00" * 2000 + b"\x01")
    f = gaps_from_x_window(long_run, 1, Symbol.ONE, 4)
    assert not f and f.reason == "scan budget exhausted" and f.scanned == scan_budget(4)
    with pytest.raises(ValueError):
        gaps_from_x_window(x, 20, Symbol.EMPTY, 4)
    with pytest.raises(ValueError):
        gaps_from_x_window(x, 0, Symbol.EMPTY, 0)


@given(st.lists(st.integers(0, 1), min_size=60, max_size=300), st.integers(0, 40), st.integers(1, 20))
def test_window_coverage_and_alignment(xs, n, L):
    x = BitSequence(bytes(xs))
    y = internal_states(x.bits[:n])[-1]
    w = gaps_from_x_window(x, n, y, L)
    if not w:
        return
    assert w.span >= L and w.span == ref.span(w.q)
    assert x_from_gaps(w.z, w.q).bits.bits == x.bits[w.start:w.start + w.span]
    r = absg_encode(x)
    k = r.H.index(w.start) + 1 if w.start else 0
    assert r.Q[k:k + w.theta] == w.q
    assert r.z.bits[k:k + w.theta] == w.z
    # no earlier boundary already covers L bits
    inner = [h for h in r.H if w.start < h < w.start + w.span]
    assert all(h - w.start < L for h in inner)


def test_unknown_symbol_wrapper_contains_truth():
    rng = make_rng(5)
    for _ in range(300):
        x = BitSequence(rng.integers(0, 2, size=200, dtype=np.uint8).tobytes())
        n = int(rng.integers(0, 50))
        y = internal_states(x.bits[:n])[-1]
        truth = gaps_from_x_window(x, n, y, 16)
        cands = gaps_from_x_window_any(x, n, 16)
        assert any(w.start == truth.start and w.q == truth.q for _, w in cands)
        assert len({(w.start, w.q, w.z) for _, w in cands}) == len(cands)


def test_scan_failure_rare():
    L = 24
    rng = make_rng(99)
    failures = 0
    for _ in range(10**4):
        x = BitSequence(rng.integers(0, 2, size=10 * L, dtype=np.uint8).tobytes())
        n = int(rng.integers(0, 2 * L))
        y = internal_states(x.bits[:n])[-1]
        failures += not gaps_from_x_window(x, n, y, L)
    assert failures / 10**4 < 1e-3
