"""Probability model of the gap sequence and the guess classes built on it.

Gaps are i.i.d. geometric with ``Pr(Q = q) = 2**-(q + 1)``. A gap vector of
length ``theta`` summing to ``beta`` therefore has probability
``2**-(theta + beta)``. Valid guesses (``2*theta + beta >= L``) split into
classes ``G(theta, alpha)`` with ``2*theta + beta = L + alpha``; every member
of a class has the same probability ``2**-B`` where ``B = L - theta + alpha``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Iterator

from .exact import ExactProb

GAP_ENTROPY_BITS = 2.0


def gap_pmf(q: int) -> ExactProb:
    if q < 0:
        raise ValueError("gaps are non-negative")
    return ExactProb.pow2(q + 1)


def gap_entropy() -> float:
    """Entropy of the geometric(1/2) gap law: sum (q+1) 2^-(q+1) = 2 bits."""
    return GAP_ENTROPY_BITS


def guess_probability(q_vector: Iterable[int]) -> ExactProb:
    """Probability that a run of gaps equals ``q_vector``."""
    q_vector = tuple(q_vector)
    if any(q < 0 for q in q_vector):
        raise ValueError("gaps are non-negative")
    return ExactProb.pow2(len(q_vector) + sum(q_vector))


def span(q_vector: Iterable[int]) -> int:
    """Number of input bits covered by the blocks of these gaps."""
    return sum(q + 2 for q in q_vector)


@dataclass(frozen=True, order=True)
class GuessClass:
    """Descriptor of ``G(theta, alpha)`` for a register length ``L``."""

    L: int
    theta: int
    alpha: int

    def __post_init__(self):
        if self.theta < 1 or self.alpha < 0:
            raise ValueError("need theta >= 1 and alpha >= 0")
        if self.beta < 0:
            raise ValueError(f"class (theta={self.theta}, alpha={self.alpha}) is empty for L={self.L}")

    @classmethod
    def from_cost(cls, L: int, B: int, alpha: int) -> GuessClass:
        return cls(L, L - B + alpha, alpha)

    @property
    def beta(self) -> int:
        return self.L - 2 * self.theta + self.alpha

    @property
    def cost(self) -> int:
        """``B``: each member has probability ``2**-B``."""
        return self.L - self.theta + self.alpha

    B = cost

    @property
    def element_probability(self) -> ExactProb:
        return ExactProb.pow2(self.cost)

    @property
    def cardinality(self) -> int:
        return class_cardinality(self)

    @property
    def minimal_count(self) -> int:
        return minimal_class_cardinality(self)

    def mass(self, minimal: bool = False) -> ExactProb:
        n = self.minimal_count if minimal else self.cardinality
        return ExactProb(n, self.cost)

    def contains(self, q_vector) -> bool:
        return len(q_vector) == self.theta and sum(q_vector) == self.beta


def class_cardinality(cls: GuessClass) -> int:
    """Compositions of ``beta`` into ``theta`` non-negative parts."""
    return math.comb(cls.beta + cls.theta - 1, cls.theta - 1)


def minimal_class_cardinality(cls: GuessClass) -> int:
    """Members whose proper prefixes are all invalid guesses.

    Dropping the last gap leaves ``2(theta-1) + beta - q_last = L + alpha - 2 - q_last``,
    so the member is minimal iff ``q_last >= alpha - 1``. Shorter prefixes
    cover even fewer bits and need no separate check.
    """
    m = max(0, cls.alpha - 1)
    if cls.beta < m:
        return 0
    return math.comb(cls.beta - m + cls.theta - 1, cls.theta - 1)


def enumerate_compositions(theta: int, beta: int) -> Iterator[tuple[int, ...]]:
    """All length-``theta`` non-negative vectors summing to ``beta``, lexicographically."""
    if theta < 1 or beta < 0:
        raise ValueError("need theta >= 1 and beta >= 0")
    if theta == 1:
        yield (beta,)
        return
    # Lexicographic successor: bump the rightmost entry that has mass to its
    # right, then push that remaining mass (minus one) into the last slot.
    q = [0] * theta
    q[-1] = beta
    while True:
        yield tuple(q)
        k = theta - 2
        tail = q[-1]  # invariant: tail == sum(q[k+1:])
        while tail == 0 and k >= 0:
            tail += q[k]
            k -= 1
        if k < 0:
            return
        q[k] += 1
        for j in range(k + 1, theta - 1):
            q[j] = 0
        q[-1] = tail - 1


def sorted_class_stream(L: int) -> Iterator[GuessClass]:
    """Classes by non-decreasing cost ``B``; ties by ascending ``alpha``."""
    if L % 2:
        raise ValueError(f"L must be even for the sorted class order, got {L}")
    for B in range(L // 2, L):
        for alpha in range(0, 2 * B - L + 1):
            yield GuessClass.from_cost(L, B, alpha)


def _to_fraction(epsilon) -> Fraction:
    if isinstance(epsilon, float):
        return Fraction(repr(epsilon))
    return Fraction(epsilon)


def is_typical(q_vector, epsilon) -> bool:
    """Whether per-symbol surprisal is within ``epsilon`` of 2 bits.

    Surprisal per symbol is ``1 + beta/theta``, so the test is the exact
    rational check ``|beta/theta - 1| <= epsilon``.
    """
    theta = len(q_vector)
    if theta < 1:
        raise ValueError("typicality needs at least one gap")
    eps = _to_fraction(epsilon)
    if eps <= 0:
        raise ValueError("epsilon must be positive")
    return abs(Fraction(sum(q_vector), theta) - 1) <= eps


def typical_beta_range(n: int, epsilon) -> range:
    """Gap sums ``beta`` for which length-``n`` vectors are typical."""
    eps = _to_fraction(epsilon)
    if eps <= 0:
        raise ValueError("epsilon must be positive")
    lo = math.ceil(n * (1 - eps))
    hi = math.floor(n * (1 + eps))
    return range(max(lo, 0), hi + 1)


def typical_set_size(n: int, epsilon) -> int:
    return sum(math.comb(b + n - 1, n - 1) for b in typical_beta_range(n, epsilon))


def typical_set_probability(n: int, epsilon) -> ExactProb:
    total = ExactProb.zero()
    for b in typical_beta_range(n, epsilon):
        total += ExactProb(math.comb(b + n - 1, n - 1), n + b)
    return total


@dataclass(frozen=True)
class SandwichRow:
    n: int
    count: int
    log2_count: float
    log2_lower: float
    log2_upper: float
    lower_ok: bool
    upper_ok: bool


def aep_sandwich(n_values: Iterable[int], epsilon) -> tuple[list[SandwichRow], int | None]:
    """Compare typical-set sizes against ``(1-eps) 2^{n(2-eps)}`` and ``2^{n(2+eps)}``.

    Returns the rows and the smallest ``n`` from which the lower bound holds
    for every larger ``n`` in the scan (``None`` if it never settles).
    """
    eps = float(_to_fraction(epsilon))
    rows = []
    for n in n_values:
        count = typical_set_size(n, epsilon)
        log_count = math.log2(count)
        lower = math.log2(1 - eps) + n * (2 - eps)
        upper = n * (2 + eps)
        rows.append(SandwichRow(n, count, log_count, lower, upper,
                                log_count >= lower, log_count <= upper))
    threshold = None
    for row in reversed(rows):
        if not row.lower_ok:
            break
        threshold = row.n
    return rows, threshold


def _require_divisible(L: int, d: int):
    if L % d:
        raise ValueError(f"L={L} must be divisible by {d}")


def cumulative_class_mass(L: int, selector, minimal: bool = False) -> ExactProb:
    """Exact ``sum |G| 2^-B`` over the selected classes.

    ``selector`` may be an int (that many classes from the front of the
    sorted order), a ``(B_lo, B_hi)`` inclusive cost range, an iterable of
    :class:`GuessClass`, or a predicate on classes. ``minimal`` counts only
    prefix-minimal members.
    """
    if isinstance(selector, int):
        it = iter(sorted_class_stream(L))
        classes = [next(it) for _ in range(selector)]
    elif isinstance(selector, tuple) and len(selector) == 2 and all(isinstance(v, int) for v in selector):
        lo, hi = selector
        classes = [c for c in sorted_class_stream(L) if lo <= c.cost <= hi]
    elif callable(selector):
        classes = [c for c in sorted_class_stream(L) if selector(c)]
    else:
        classes = list(selector)
    total = ExactProb.zero()
    for c in classes:
        total += c.mass(minimal)
    return total


def p1_mass(L: int, minimal: bool = False) -> ExactProb:
    """Mass of all classes with ``L/2 <= B <= 2L/3 - 1``."""
    _require_divisible(L, 6)
    return cumulative_class_mass(L, (L // 2, 2 * L // 3 - 1), minimal)


def p2_mass(L: int, minimal: bool = False) -> ExactProb:
    """Mass of the atypical cost-``2L/3`` classes ``G(L/3 + a, a)``, ``a = 1..L/3``."""
    _require_divisible(L, 6)
    n = L // 3
    return cumulative_class_mass(L, [GuessClass(L, n + a, a) for a in range(1, n + 1)], minimal)
