from __future__ import annotations

import numpy as np
import pytest
from hypothesis import given, strategies as st

import reference as ref
from qubar.bitsource import (PRIMITIVE_TAPS, BitSequence, FeedbackPolynomial, LfsrState,
                             default_polynomial, iid_bits, lfsr_continue, lfsr_generate,
                             splitmix64, trial_seed)


def test_iid_deterministic_and_empty():
    assert iid_bits(11, 100) == iid_bits(11, 100)
    assert iid_bits(11, 100) != iid_bits(12, 100)
    assert len(iid_bits(5, 0)) == 0
    assert iid_bits(3, 10).provenance.seed == 3


def test_iid_unbiased():
    mean = iid_bits(2024, 10**6).to_numpy().mean()
    assert 0.498 <= mean <= 0.502


def test_iid_bias_parameter():
    mean = iid_bits(1, 10**5, p=0.7).to_numpy().mean()
    assert abs(mean - 0.7) < 0.01


def test_splitmix_known_values():
    # first outputs of the reference SplitMix64 generator seeded with 0
    assert splitmix64(0) == 0xE220A8397B1DCDAF
    assert trial_seed(5, 3) == splitmix64(6)


def test_bitsequence_serialisation():
    b = BitSequence.from_string("1011 0001 1")
    assert b.to_string() == "101100011"
    assert b.to_hex() == "b180"
    assert BitSequence.from_hex("b180", 9) == b
    with pytest.raises(ValueError):
        BitSequence.from_string("012")
    with pytest.raises(ValueError):
        BitSequence(bytes([2]))
    with pytest.raises(ValueError):
        BitSequence.from_hex("ff", 9)


@given(st.lists(st.integers(0, 1), max_size=70))
def test_hex_roundtrip(bits):
    b = BitSequence.from_iterable(bits)
    assert BitSequence.from_hex(b.to_hex(), len(b)) == b
    assert BitSequence.from_string(b.to_string()) == b


def test_polynomial_mask_convention():
    p = FeedbackPolynomial.from_hex("9")
    assert p.degree == 4 and p.taps == {1, 4}
    assert p.to_hex() == "9"
    assert str(p) == "x^4 + x + 1"
    with pytest.raises(ValueError):
        FeedbackPolynomial(4, {1, 2})
    with pytest.raises(ValueError):
        FeedbackPolynomial(1, {1})
    with pytest.raises(ValueError):
        FeedbackPolynomial.from_mask(0)


def test_zero_state_absorbing():
    x = lfsr_generate(default_polynomial(8), LfsrState(bytes(8)), 50)
    assert not any(x.bits)
    assert x.provenance.degenerate


def test_x4_x_1_period_15():
    poly = FeedbackPolynomial(4, {1, 4})
    for s in range(1, 16):
        init = LfsrState.from_int(s, 4)
        p = ref.period(lambda n: list(lfsr_generate(poly, init, n).bits), 20)
        assert p == 15


@pytest.mark.parametrize("degree", [4, 5, 6, 7, 8, 9, 10, 11, 12, 13, 14, 15, 16])
def test_tabulated_polynomials_are_maximal(degree):
    poly = default_polynomial(degree)
    n = (1 << degree) - 1
    x = lfsr_generate(poly, LfsrState.from_int(1, degree), 2 * n + degree).bits
    assert x[:n + degree] == x[n:2 * n + degree]
    # no shorter period: every nonzero window of length `degree` appears once per period
    windows = {x[t:t + degree] for t in range(n)}
    assert len(windows) == n


@pytest.mark.slow
@pytest.mark.parametrize("degree", [17, 18, 19, 20])
def test_tabulated_polynomials_are_maximal_large(degree):
    poly = default_polynomial(degree)
    n = (1 << degree) - 1
    x = lfsr_generate(poly, LfsrState.from_int(1, degree), n + degree).bits
    assert x[n:n + degree] == x[:degree]
    for d in (n // p for p in _prime_factors(n)):
        assert x[d:d + degree] != x[:degree]


def _prime_factors(n):
    out, p = set(), 2
    while p * p <= n:
        while n % p == 0:
            out.add(p)
            n //= p
        p += 1
    if n > 1:
        out.add(n)
    return out


@given(st.sampled_from(sorted(PRIMITIVE_TAPS)), st.integers(1, 2**36), st.integers(0, 120))
def test_lfsr_matches_reference(degree, seed, length):
    poly = default_polynomial(degree)
    init = LfsrState.from_int(seed % (1 << degree), degree)
    got = list(lfsr_generate(poly, init, length).bits)
    assert got == ref.lfsr(sorted(poly.taps), list(init.register), length)


@given(st.integers(1, 2**16 - 1), st.integers(1, 2**16 - 1))
def test_lfsr_linearity(a, b):
    poly = default_polynomial(16)
    x = lfsr_generate(poly, LfsrState.from_int(a, 16), 200)
    y = lfsr_generate(poly, LfsrState.from_int(b, 16), 200)
    xy = lfsr_generate(poly, LfsrState.from_int(a ^ b, 16), 200)
    assert (x ^ y) == xy


@given(st.integers(1, 2**12 - 1), st.integers(0, 300))
def test_window_is_register_state(s, t):
    poly = default_polynomial(12)
    x = lfsr_generate(poly, LfsrState.from_int(s, 12), 400).bits
    again = lfsr_generate(poly, LfsrState(x[t:t + 12]), 400 - t).bits
    assert again == x[t:]
    assert lfsr_continue(poly, x[:t + 12], 50) == x[t + 12:t + 62]
