"""The ABSG generator: internal-state machine, output rule and gap bookkeeping."""

from __future__ import annotations

import enum
import re
from dataclasses import dataclass
from functools import lru_cache
from itertools import accumulate
from operator import itemgetter

import numpy as np

from .bitsource import BitSequence, Provenance
from .exact import ExactProb

ENUMERATION_CAP = 20


class Symbol(enum.IntEnum):
    EMPTY = 0
    ZERO = 1
    ONE = 2

    @classmethod
    def of_bit(cls, bit: int) -> Symbol:
        return cls.ONE if bit else cls.ZERO

    @property
    def bit(self) -> int:
        if self is Symbol.EMPTY:
            raise ValueError("the empty symbol carries no bit")
        return int(self is Symbol.ONE)

    @classmethod
    def parse(cls, text: str) -> Symbol:
        table = {"empty": cls.EMPTY, "e": cls.EMPTY, "0": cls.ZERO, "1": cls.ONE}
        try:
            return table[str(text).lower()]
        except KeyError:
            raise ValueError(f"unknown internal symbol {text!r}") from None


# TRANSITION[prev][x] -> next
TRANSITION = (
    (Symbol.ZERO, Symbol.ONE),
    (Symbol.EMPTY, Symbol.ZERO),
    (Symbol.ONE, Symbol.EMPTY),
)


def absg_step(prev: Symbol, x_bit: int) -> Symbol:
    return TRANSITION[prev][x_bit]


class Encoder:
    """Incremental generator: feed one input bit, get an output bit or ``None``.

    Runs the transition table literally and keeps the last three internal
    symbols, which is all the output rule looks at.
    """

    def __init__(self):
        self.state = Symbol.EMPTY  # y_{i-1} before each feed
        self.prev = None  # y_{i-2}
        self.position = 0
        self.H: list[int] = []
        self.z = bytearray()

    def feed(self, x_bit: int) -> int | None:
        new = TRANSITION[self.state][x_bit]
        self.position += 1
        y2, y1 = self.prev, self.state
        self.prev, self.state = y1, new
        if new is not Symbol.EMPTY:
            return None
        # y_i = EMPTY; y_{i-1} is y1, y_{i-2} is y2
        bit = y1.bit if y2 is Symbol.EMPTY else 1 - y1.bit
        self.H.append(self.position)
        self.z.append(bit)
        return bit

    def feed_many(self, bits) -> list[int]:
        out = []
        for b in bits:
            r = self.feed(b)
            if r is not None:
                out.append(r)
        return out


@dataclass(frozen=True)
class EncodeResult:
    """Output and gap record of one encoding run.

    ``H`` holds 1-based positions of the empty symbol (``H_0 = 0`` is
    implicit) and ``Q[i] = H[i] - H[i-1] - 2``. Input bits after the last
    block boundary produce no output; their count is ``unconsumed``.
    """

    z: BitSequence
    H: tuple
    Q: tuple
    unconsumed: int

    @property
    def consumed(self) -> int:
        return self.H[-1] if self.H else 0

    @property
    def blocks(self) -> list[tuple[int, int]]:
        """1-based inclusive ``(A_i, B_i)`` input ranges of each block."""
        starts = (0,) + self.H[:-1]
        return [(a + 1, b) for a, b in zip(starts, self.H)]

    def __len__(self):
        return len(self.Q)


# A block is an opening bit, a run of its complement, and the opening bit again.
_BLOCK = re.compile(rb"\x00\x01*\x00|\x01\x00*\x01")
_BLOCKS = re.compile(rb"(?:\x00\x01*\x00|\x01\x00*\x01)*")
_ABSG = Provenance("absg")
_second = itemgetter(1)
_minus2 = (-2).__add__


def absg_encode(x: BitSequence | bytes) -> EncodeResult:
    """Encode a whole input sequence starting from the empty state.

    A block opens with some bit ``b``, holds ``q`` copies of its complement
    and closes on the next ``b``, so blocks are the matches of one regular
    expression. Output is ``b`` for ``q = 0`` and ``1 - b`` otherwise, which
    is always the block's second bit. This is the same map as stepping
    :class:`Encoder` bit by bit, only faster.
    """
    raw = x.bits if isinstance(x, BitSequence) else bytes(x)
    end = _BLOCKS.match(raw).end()
    blocks = _BLOCK.findall(raw, 0, end)
    lengths = list(map(len, blocks))
    return EncodeResult(
        z=BitSequence._trusted(bytes(map(_second, blocks)), _ABSG),
        H=tuple(accumulate(lengths)),
        Q=tuple(map(_minus2, lengths)),
        unconsumed=len(raw) - end,
    )


def internal_states(x: BitSequence | bytes, start: Symbol = Symbol.EMPTY) -> list[Symbol]:
    """``[y_0, y_1, ..., y_M]`` for the given input."""
    ys = [start]
    for b in x:
        ys.append(TRANSITION[ys[-1]][b])
    return ys


# --- exact statistics of the internal-state process ------------------------

_STEP = np.array([[int(s) for s in row] for row in TRANSITION], dtype=np.uint8)


@lru_cache(maxsize=None)
def _empty_trajectories(m: int) -> np.ndarray:
    """Boolean ``(2**m, m)`` matrix: row = input, column k = ``[y_{k+1} is EMPTY]``."""
    idx = np.arange(1 << m, dtype=np.uint32)
    state = np.zeros(1 << m, dtype=np.uint8)
    out = np.empty((1 << m, m), dtype=bool)
    for k in range(m):
        bits = ((idx >> k) & 1).astype(np.uint8)
        state = _STEP[state, bits]
        out[:, k] = state == Symbol.EMPTY
    out.setflags(write=False)
    return out


def _check_cap(m: int, cap: int):
    if m > cap:
        raise ValueError(f"exhaustive enumeration over 2^{m} inputs exceeds the cap 2^{cap}")


def empty_state_prob_exact(n: int, cap: int = ENUMERATION_CAP) -> ExactProb:
    """``Pr(Y_n = EMPTY)`` by running every one of the ``2**n`` inputs."""
    if n < 1:
        raise ValueError("n starts at 1")
    _check_cap(n, cap)
    count = int(_empty_trajectories(n)[:, n - 1].sum())
    return ExactProb(count, n)


def no_empty_run_prob_exact(n: int, w: int, cap: int = ENUMERATION_CAP) -> ExactProb:
    """``Pr(Y_n, ..., Y_{n+w-1} all non-empty)`` by exhaustive enumeration."""
    if n < 1 or w < 1:
        raise ValueError("n and w start at 1")
    _check_cap(n + w, cap)
    m = n + w - 1
    window = _empty_trajectories(m)[:, n - 1:m]
    count = int((~window.any(axis=1)).sum())
    return ExactProb(count, m)
