"""Input bit streams for the generator: seeded i.i.d. bits and Fibonacci LFSRs.

Bits are held as ``bytes`` with one 0/1 value per byte. That keeps
sequences immutable and lets the encoder use ``bytes.find`` to jump from
one block boundary to the next.

LFSR convention
---------------
A feedback polynomial ``1 + sum(x**j for j in taps)`` of degree ``L``
drives the recurrence ``s[t] = XOR(s[t - j] for j in taps)``. The register
at time ``t`` holds ``s[t], ..., s[t + L - 1]`` with ``register[0]`` the
oldest bit, which is also the bit emitted at time ``t``. So any ``L``
consecutive stream bits are a full register state. The hex tap mask has
bit ``j - 1`` set for every tap ``j``; ``x^4 + x + 1`` is ``0x9``.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

MASK64 = (1 << 64) - 1


def splitmix64(x: int) -> int:
    """One round of the SplitMix64 finalizer; used to derive per-trial seeds."""
    x = (x + 0x9E3779B97F4A7C15) & MASK64
    x = ((x ^ (x >> 30)) * 0xBF58476D1CE4E5B9) & MASK64
    x = ((x ^ (x >> 27)) * 0x94D049BB133111EB) & MASK64
    return x ^ (x >> 31)


def trial_seed(seed: int, trial: int) -> int:
    """Seed for trial ``trial`` of a run seeded with ``seed``: splitmix64(seed XOR trial)."""
    return splitmix64((seed ^ trial) & MASK64)


def make_rng(seed: int) -> np.random.Generator:
    return np.random.Generator(np.random.PCG64(seed & MASK64))


@dataclass(frozen=True)
class Provenance:
    kind: str  # "iid", "lfsr", "absg", "literal"
    seed: int | None = None
    p: float | None = None
    poly_mask: int | None = None
    init: str | None = None
    degenerate: bool = False

    def to_dict(self) -> dict:
        return {k: v for k, v in self.__dict__.items() if v is not None and v is not False}


@dataclass(frozen=True)
class BitSequence:
    bits: bytes
    provenance: Provenance = field(default_factory=lambda: Provenance("literal"))

    def __post_init__(self):
        if not isinstance(self.bits, bytes):
            object.__setattr__(self, "bits", bytes(self.bits))
        if self.bits.translate(None, b"\x00\x01"):
            raise ValueError("bit sequences hold only 0 and 1")

    @classmethod
    def _trusted(cls, bits: bytes, provenance: Provenance) -> BitSequence:
        """Wrap bytes already known to hold only 0/1, skipping validation."""
        obj = object.__new__(cls)
        object.__setattr__(obj, "bits", bits)
        object.__setattr__(obj, "provenance", provenance)
        return obj

    def __len__(self):
        return len(self.bits)

    def __iter__(self):
        return iter(self.bits)

    def __getitem__(self, index):
        if isinstance(index, slice):
            return BitSequence(self.bits[index], self.provenance)
        return self.bits[index]

    def __eq__(self, other):
        if isinstance(other, BitSequence):
            return self.bits == other.bits
        return NotImplemented

    def __hash__(self):
        return hash(self.bits)

    def __xor__(self, other: BitSequence) -> BitSequence:
        if len(self) != len(other):
            raise ValueError("XOR needs equal lengths")
        a = np.frombuffer(self.bits, dtype=np.uint8)
        b = np.frombuffer(other.bits, dtype=np.uint8)
        return BitSequence((a ^ b).tobytes())

    def to_numpy(self) -> np.ndarray:
        return np.frombuffer(self.bits, dtype=np.uint8)

    def to_string(self) -> str:
        return self.bits.translate(_TO_ASCII).decode("ascii")

    @classmethod
    def from_string(cls, text: str) -> BitSequence:
        text = "".join(text.split())
        if set(text) - {"0", "1"}:
            raise ValueError("bit strings may only contain '0' and '1'")
        return cls(text.encode("ascii").translate(_FROM_ASCII))

    def to_hex(self) -> str:
        """Hex, MSB-first within each byte, last byte zero-padded on the right."""
        return np.packbits(self.to_numpy()).tobytes().hex()

    @classmethod
    def from_hex(cls, text: str, length: int) -> BitSequence:
        raw = np.frombuffer(bytes.fromhex(text), dtype=np.uint8)
        bits = np.unpackbits(raw)
        if length > bits.size:
            raise ValueError(f"hex string carries {bits.size} bits, {length} requested")
        return cls(bits[:length].tobytes())

    @classmethod
    def from_iterable(cls, bits) -> BitSequence:
        return cls(bytes(int(b) for b in bits))


_TO_ASCII = bytes.maketrans(b"\x00\x01", b"01")
_FROM_ASCII = bytes.maketrans(b"01", b"\x00\x01")


def iid_bits(seed: int, length: int, p: float = 0.5) -> BitSequence:
    """``length`` i.i.d. Bernoulli(p) bits from a PCG64 generator seeded with ``seed``.

    ``p = 1/2`` is the ideal source the attack model assumes; other values
    exist to test that the gap statistics notice a biased source.
    """
    if length < 0:
        raise ValueError("length must be non-negative")
    rng = make_rng(seed)
    if p == 0.5:
        bits = rng.integers(0, 2, size=length, dtype=np.uint8)
    else:
        bits = (rng.random(length) < p).astype(np.uint8)
    return BitSequence(bits.tobytes(), Provenance("iid", seed=seed, p=p))


@dataclass(frozen=True)
class FeedbackPolynomial:
    degree: int
    taps: frozenset

    def __post_init__(self):
        taps = frozenset(int(t) for t in self.taps)
        object.__setattr__(self, "taps", taps)
        if self.degree < 2:
            raise ValueError("LFSR degree must be at least 2")
        if not taps or max(taps) != self.degree or min(taps) < 1:
            raise ValueError("taps must lie in 1..degree and include the degree")

    @classmethod
    def from_mask(cls, mask: int) -> FeedbackPolynomial:
        if mask <= 0:
            raise ValueError("tap mask must be positive")
        taps = frozenset(j + 1 for j in range(mask.bit_length()) if mask >> j & 1)
        return cls(mask.bit_length(), taps)

    @classmethod
    def from_hex(cls, text: str) -> FeedbackPolynomial:
        return cls.from_mask(int(text, 16))

    @property
    def mask(self) -> int:
        return sum(1 << (j - 1) for j in self.taps)

    def to_hex(self) -> str:
        return format(self.mask, "x")

    def __str__(self):
        terms = [f"x^{j}" if j > 1 else "x" for j in sorted(self.taps, reverse=True)]
        return " + ".join(terms + ["1"])


# Maximal-length tap sets (Xilinx XAPP052 table); periods up to degree 20
# are confirmed by brute force in the test suite.
PRIMITIVE_TAPS = {
    4: (4, 3),
    5: (5, 3),
    6: (6, 5),
    7: (7, 6),
    8: (8, 6, 5, 4),
    9: (9, 5),
    10: (10, 7),
    11: (11, 9),
    12: (12, 6, 4, 1),
    13: (13, 4, 3, 1),
    14: (14, 5, 3, 1),
    15: (15, 14),
    16: (16, 15, 13, 4),
    17: (17, 14),
    18: (18, 11),
    19: (19, 6, 2, 1),
    20: (20, 17),
    21: (21, 19),
    22: (22, 21),
    23: (23, 18),
    24: (24, 23, 22, 17),
    30: (30, 6, 4, 1),
    36: (36, 25),
}


def default_polynomial(degree: int) -> FeedbackPolynomial:
    try:
        return FeedbackPolynomial(degree, frozenset(PRIMITIVE_TAPS[degree]))
    except KeyError:
        raise ValueError(f"no tabulated primitive polynomial of degree {degree}") from None


@dataclass(frozen=True)
class LfsrState:
    register: bytes

    def __post_init__(self):
        if not isinstance(self.register, bytes):
            object.__setattr__(self, "register", bytes(self.register))

    @classmethod
    def from_int(cls, value: int, degree: int) -> LfsrState:
        """``register[k]`` is bit ``k`` of ``value``."""
        return cls(bytes(value >> k & 1 for k in range(degree)))

    def to_int(self) -> int:
        return sum(b << k for k, b in enumerate(self.register))

    def is_zero(self) -> bool:
        return not any(self.register)


def lfsr_generate(poly: FeedbackPolynomial, init: LfsrState, length: int) -> BitSequence:
    """Emit ``length`` bits of the Fibonacci LFSR starting from ``init``.

    An all-zero start is absorbing and yields an all-zero stream; the
    provenance records it as degenerate instead of raising.
    """
    L = poly.degree
    if len(init.register) != L:
        raise ValueError(f"register has {len(init.register)} bits, polynomial degree is {L}")
    if length < 0:
        raise ValueError("length must be non-negative")
    prov = Provenance("lfsr", poly_mask=poly.mask, init=format(init.to_int(), "x"),
                      degenerate=init.is_zero())
    out = bytearray(init.register[:length])
    if length > L:
        # s[t] = XOR of s[t - j] over taps; work on an int window for speed.
        offsets = [L - j for j in poly.taps]
        state = init.to_int()
        tap_mask = sum(1 << o for o in offsets)
        out.extend(bytes(length - L))
        for t in range(L, length):
            bit = (state & tap_mask).bit_count() & 1
            out[t] = bit
            state = (state >> 1) | (bit << (L - 1))
    return BitSequence(bytes(out), prov)


def lfsr_continue(poly: FeedbackPolynomial, window: bytes, count: int) -> bytes:
    """The ``count`` stream bits that follow ``window`` (its last L bits are the state)."""
    L = poly.degree
    if len(window) < L:
        raise ValueError(f"need at least {L} bits to seed the register")
    state = LfsrState(window[-L:])
    return lfsr_generate(poly, state, L + count).bits[L:]
