"""Conversions between gap windows and the input bits they cover.

Going from gaps to bits is deterministic: block ``j`` is ``z z`` when its gap
is zero and ``~z z^q ~z`` otherwise. Going from bits to gaps needs the
internal symbol at the starting offset and a forward scan to block
boundaries; the scan is capped at ``64 L^2`` positions.
"""

from __future__ import annotations

from dataclasses import dataclass

from .bitsource import BitSequence, Provenance
from .cipher import TRANSITION, Symbol


@dataclass(frozen=True)
class ReconstructedSegment:
    bits: BitSequence
    start: int | None  # 0-based offset into x, when known
    length: int


def x_from_gaps(z_segment, q_segment, start: int | None = None) -> ReconstructedSegment:
    """Rebuild the input bits behind ``len(q_segment)`` consecutive outputs.

    The result starts right after a block boundary, so re-encoding it from
    the empty state gives back exactly ``z_segment`` and ``q_segment``.
    """
    z_segment = bytes(z_segment)
    q_segment = tuple(q_segment)
    if len(z_segment) != len(q_segment):
        raise ValueError(f"{len(z_segment)} output bits but {len(q_segment)} gaps")
    out = bytearray()
    for z, q in zip(z_segment, q_segment):
        if q < 0:
            raise ValueError("gaps are non-negative")
        if q == 0:
            out += bytes((z, z))
        else:
            nz = z ^ 1
            out.append(nz)
            out += bytes((z,)) * q
            out.append(nz)
    return ReconstructedSegment(BitSequence(bytes(out), Provenance("literal")), start, len(out))


@dataclass(frozen=True)
class GapWindow:
    """Gaps read off an input window.

    ``start`` is the 0-based offset in ``x`` of the first covered bit and
    ``span = sum(q + 2)``. ``i`` counts output blocks from the one that
    contains bit ``n + 1`` (``i = 1``); add the number of outputs emitted
    up to position ``n`` for an absolute output index.
    """

    i: int
    theta: int
    q: tuple
    z: bytes
    start: int
    span: int
    scanned: int

    def __bool__(self):
        return True


@dataclass(frozen=True)
class ScanFailure:
    reason: str
    scanned: int

    def __bool__(self):
        return False


def scan_budget(L_target: int) -> int:
    return 64 * L_target * L_target


def gaps_from_x_window(x: BitSequence, n: int, y_n: Symbol, L_target: int,
                       budget: int | None = None) -> GapWindow | ScanFailure:
    """Find a run of whole blocks after position ``n`` covering at least ``L_target`` bits.

    ``n`` is a 1-based position with ``y_n`` the internal symbol after
    consuming ``x_1..x_n`` (``n = 0`` with ``EMPTY`` is the very start).
    When ``y_n`` is empty the window opens at ``n``; otherwise it opens at
    the next empty symbol. It closes at the first empty symbol at least
    ``L_target`` bits later. Running out of data or scan budget returns a
    :class:`ScanFailure` rather than raising.
    """
    if L_target < 1:
        raise ValueError("L_target must be positive")
    if not 0 <= n <= len(x):
        raise ValueError(f"offset {n} outside a sequence of length {len(x)}")
    raw = x.bits
    if budget is None:
        budget = scan_budget(L_target)
    limit = min(len(raw), n + budget)

    state = y_n
    pos = n
    blocks_before = 0
    if state is not Symbol.EMPTY:
        while pos < limit:
            state = TRANSITION[state][raw[pos]]
            pos += 1
            if state is Symbol.EMPTY:
                break
        if state is not Symbol.EMPTY:
            return _fail(pos, n, len(raw), limit)
        blocks_before = 1
    open_at = pos  # 1-based position of the opening empty symbol

    boundaries = [open_at]
    while pos < limit:
        state = TRANSITION[state][raw[pos]]
        pos += 1
        if state is Symbol.EMPTY:
            boundaries.append(pos)
            if pos - open_at >= L_target:
                break
    if len(boundaries) < 2 or boundaries[-1] - open_at < L_target:
        return _fail(pos, n, len(raw), limit)

    q, z = [], bytearray()
    for a, b in zip(boundaries, boundaries[1:]):
        gap = b - a - 2
        first = raw[a]  # 0-based index a is the 1-based bit a + 1
        q.append(gap)
        z.append(first if gap == 0 else first ^ 1)
    return GapWindow(i=1 + blocks_before, theta=len(q), q=tuple(q), z=bytes(z),
                     start=open_at, span=boundaries[-1] - open_at, scanned=pos - n)


def _fail(pos, n, length, limit) -> ScanFailure:
    reason = "data exhausted" if limit == length else "scan budget exhausted"
    return ScanFailure(reason, pos - n)


def gaps_from_x_window_any(x: BitSequence, n: int, L_target: int,
                           budget: int | None = None) -> list[tuple[Symbol, GapWindow]]:
    """Try all three possible symbols at ``n`` and keep the distinct windows found.

    For use when ``y_n`` is not known. Candidates that agree on
    ``(start, q, z)`` are merged under the first symbol that produced them.
    """
    seen = {}
    for sym in Symbol:
        w = gaps_from_x_window(x, n, sym, L_target, budget)
        if w:
            seen.setdefault((w.start, w.q, w.z), (sym, w))
    return list(seen.values())
