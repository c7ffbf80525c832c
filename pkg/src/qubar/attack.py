"""Guess/check attack loop, guess strategies and optimality validators."""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from typing import Iterable, Iterator

from .bitsource import BitSequence, FeedbackPolynomial, lfsr_continue
from .cipher import EncodeResult, Encoder
from .exact import ExactProb
from .gaps import (enumerate_compositions, guess_probability, sorted_class_stream,
                   typical_beta_range)
from .reconstruct import ReconstructedSegment, x_from_gaps


@dataclass(frozen=True)
class Guess:
    """Claim that gaps ``start .. start+theta-1`` (1-based) equal ``q``."""

    start: int
    q: tuple

    def __post_init__(self):
        object.__setattr__(self, "q", tuple(self.q))
        if self.start < 1:
            raise ValueError("output indices start at 1")
        if not self.q:
            raise ValueError("a guess covers at least one gap")
        if any(v < 0 for v in self.q):
            raise ValueError("gaps are non-negative")

    @property
    def theta(self) -> int:
        return len(self.q)

    @property
    def beta(self) -> int:
        return sum(self.q)

    @property
    def span(self) -> int:
        return 2 * self.theta + self.beta

    @property
    def cost(self) -> int:
        return self.theta + self.beta

    @property
    def probability(self) -> ExactProb:
        return guess_probability(self.q)

    def is_valid(self, L: int) -> bool:
        return self.span >= L

    def to_dict(self) -> dict:
        return {"start": self.start, "theta": self.theta, "q": list(self.q)}


# --- check algorithms ------------------------------------------------------

class OracleChecker:
    """Compares guesses with the true gap record (simulation only)."""

    mode = "oracle"

    def __init__(self, truth: EncodeResult):
        self.truth = truth
        self.z = truth.z.bits

    def __call__(self, guess: Guess) -> bool:
        return oracle_check(guess, self.truth)


def oracle_check(guess: Guess, truth: EncodeResult) -> bool:
    end = guess.start - 1 + guess.theta
    if end > len(truth.Q):
        raise ValueError(f"gap record has {len(truth.Q)} entries, guess needs {end}")
    return truth.Q[guess.start - 1:end] == guess.q


class LfsrChecker:
    """Practical check: rebuild the register from the guessed window and replay.

    The guess rebuilds the input bits of its blocks. The whole window has to
    obey the feedback recurrence (tap ``L`` is always present, so its last
    ``L`` bits fix every earlier bit). Those last ``L`` bits are the register
    state; clocking on from there and running the generator from the empty
    state must reproduce the next ``horizon`` observed output bits.
    """

    mode = "lfsr"

    def __init__(self, poly: FeedbackPolynomial, z: BitSequence | bytes, horizon: int | None = None):
        self.poly = poly
        self.z = z.bits if isinstance(z, BitSequence) else bytes(z)
        self.horizon = 2 * poly.degree if horizon is None else horizon

    def __call__(self, guess: Guess) -> bool:
        return lfsr_check(guess, self.z, self.poly, self.horizon)


def lfsr_check(guess: Guess, z, poly: FeedbackPolynomial, horizon: int) -> bool:
    z = z.bits if isinstance(z, BitSequence) else bytes(z)
    L = poly.degree
    end = guess.start - 1 + guess.theta
    need = end + horizon
    if need > len(z):
        raise ValueError(f"lfsr check needs {need} observed output bits, have {len(z)}")
    if guess.span < L:
        raise ValueError(f"guess covers {guess.span} input bits, the register needs {L}")
    if horizon == 0:
        return True
    window = x_from_gaps(z[guess.start - 1:end], guess.q).bits.bits
    if len(window) > L and lfsr_continue(poly, window[:L], len(window) - L) != window[L:]:
        return False
    expected = z[end:need]
    enc = Encoder()
    produced = 0
    # Generous bit budget; a register stuck on one value can starve the output.
    chunk = 4 * horizon + 2 * L
    max_bits = 64 * (horizon + L) * (horizon + L)
    generated = 0
    tail = window
    while produced < horizon and generated < max_bits:
        more = lfsr_continue(poly, tail, chunk)
        tail = (tail + more)[-L:]
        generated += len(more)
        for b in more:
            out = enc.feed(b)
            if out is not None:
                if out != expected[produced]:
                    return False
                produced += 1
                if produced == horizon:
                    return True
    return produced == horizon


# --- the attack loop --------------------------------------------------------

@dataclass
class AttackResult:
    success: bool
    queries_used: int
    budget: int
    recovered: ReconstructedSegment | None = None
    guess: Guess | None = None
    strategy: str = ""
    seed: int | None = None
    extra: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        d = {
            "success": self.success,
            "queries_used": self.queries_used,
            "budget": self.budget,
            "strategy": self.strategy,
            "seed": self.seed,
        }
        if self.guess is not None:
            d["guess"] = self.guess.to_dict()
        if self.recovered is not None:
            d["recovered"] = self.recovered.bits.to_string()
        d.update(self.extra)
        return d


def run_qubar(guesses: Iterable[Guess], checker, budget: int, strategy: str = "",
              seed: int | None = None) -> AttackResult:
    """Try guesses in order until one checks out or ``budget`` queries are spent."""
    if budget < 0:
        raise ValueError("budget must be non-negative")
    k = 0
    for guess in itertools.islice(guesses, budget):
        k += 1
        if checker(guess):
            zwin = checker.z[guess.start - 1:guess.start - 1 + guess.theta]
            return AttackResult(True, k, budget, x_from_gaps(zwin, guess.q), guess, strategy, seed)
    return AttackResult(False, k, budget, None, None, strategy, seed)


# --- strategies --------------------------------------------------------------

def _require(cond: bool, msg: str):
    if not cond:
        raise ValueError(msg)


def typical_attack_guesses(L: int, epsilon) -> Iterator[Guess]:
    """Every typical gap vector of length ``L/3``, starting at output 1.

    Sums ``beta`` go in ascending order (most probable first) and each sum's
    compositions go lexicographically. Vectors with ``beta < L/3`` are typical
    for large ``epsilon`` but cover fewer than ``L`` bits; they are skipped.
    """
    _require(L % 3 == 0, f"typical attack needs L divisible by 3, got {L}")
    n = L // 3
    for beta in typical_beta_range(n, epsilon):
        if beta < n:
            continue
        for q in enumerate_compositions(n, beta):
            yield Guess(1, q)


def most_probable_guesses(L: int, count: int | None = None) -> Iterator[Guess]:
    """All-zero windows of ``L/2`` gaps over consecutive disjoint output stretches."""
    _require(L % 2 == 0, f"most-probable attack needs even L, got {L}")
    half = L // 2
    zeros = (0,) * half
    ks = itertools.count() if count is None else range(count)
    for k in ks:
        yield Guess(k * half + 1, zeros)


def sorted_attack_guesses(L: int, minimal_only: bool = True) -> Iterator[Guess]:
    """Guesses by non-increasing probability, class by class.

    With ``minimal_only`` a vector is skipped when dropping its last gap
    still leaves a valid guess; what remains is prefix-free.
    """
    for cls in sorted_class_stream(L):
        m = cls.alpha - 1
        for q in enumerate_compositions(cls.theta, cls.beta):
            if minimal_only and q[-1] < m:
                continue
            yield Guess(1, q)


@dataclass(frozen=True)
class Strategy:
    """Named guess strategy plus its parameters."""

    kind: str  # "typical", "most-probable", "sorted"
    epsilon: float | None = None
    minimal_only: bool = True

    KINDS = ("typical", "most-probable", "sorted")

    def __post_init__(self):
        if self.kind not in self.KINDS:
            raise ValueError(f"unknown strategy {self.kind!r}; choose from {', '.join(self.KINDS)}")
        if self.kind == "typical" and (self.epsilon is None or self.epsilon <= 0):
            raise ValueError("typical strategy needs epsilon > 0")

    def validate(self, L: int):
        if self.kind == "typical":
            _require(L % 3 == 0, f"typical attack needs L divisible by 3, got {L}")
        else:
            _require(L % 2 == 0, f"{self.kind} attack needs even L, got {L}")

    def guesses(self, L: int, budget: int | None = None) -> Iterator[Guess]:
        if self.kind == "typical":
            it = typical_attack_guesses(L, self.epsilon)
        elif self.kind == "most-probable":
            it = most_probable_guesses(L, budget)
        else:
            it = sorted_attack_guesses(L, self.minimal_only)
        return it if budget is None else itertools.islice(it, budget)

    @property
    def tag(self) -> str:
        if self.kind == "typical":
            return f"typical(eps={self.epsilon})"
        if self.kind == "sorted":
            return "sorted" + ("" if self.minimal_only else "(all)")
        return self.kind


# --- validators ---------------------------------------------------------------

def validate_prefix_free(guesses: Iterable[Guess]) -> list[tuple[int, int]]:
    """Index pairs ``(j, k)``, ``j < k``, sharing a start where one vector properly prefixes the other."""
    guesses = list(guesses)
    first_index: dict[tuple, list[int]] = {}
    for idx, g in enumerate(guesses):
        first_index.setdefault((g.start, g.q), []).append(idx)
    violations = set()
    for k, g in enumerate(guesses):
        for t in range(1, g.theta):
            for j in first_index.get((g.start, g.q[:t]), ()):
                violations.add((min(j, k), max(j, k)))
    return sorted(violations)


def _check_common_start(guesses: list[Guess]):
    starts = {g.start for g in guesses}
    if len(starts) > 1:
        raise ValueError("brute-force checks need all guesses at one start index")


def brute_force_success_probability(guesses: Iterable[Guess], span_bound: int) -> tuple[ExactProb, ExactProb, int]:
    """Exact ``Pr(some guess is right)`` by summing over all realization cells.

    Returns ``(success probability, total cell mass, max guesses hit by one cell)``.
    The total mass must come out as exactly one.
    """
    guesses = list(guesses)
    _check_common_start(guesses)
    if any(g.span > span_bound for g in guesses):
        raise ValueError(f"some guess covers more than {span_bound} bits")
    keys = {}
    for g in guesses:
        keys[g.q] = keys.get(g.q, 0) + 1
    # A cell is the event "gaps start with u, and the next gap pushes the
    # span past the bound"; cells partition the probability space. Cell
    # masses are 2^-(bound - 1 - len(u)), or 2^-(bound - len(u)) when span(u)
    # equals the bound, so integers over 2^bound accumulate them exactly.
    success = total = 0
    worst = 0
    stack = [((), 0, 0)]
    while stack:
        u, s, hits = stack.pop()
        hits += keys.get(u, 0)
        worst = max(worst, hits)
        exponent = len(u) + sum(u) + max(0, span_bound - s - 1)
        cell = 1 << (span_bound - exponent)
        total += cell
        if hits:
            success += cell
        for q in range(span_bound - s - 1):  # child span s + q + 2 <= bound
            stack.append((u + (q,), s + q + 2, hits))
    success = ExactProb(success, span_bound)
    total = ExactProb(total, span_bound)
    return success, total, worst


MAX_BRUTE_L = 14


def validate_disjoint_success(guesses: Iterable[Guess], L_small: int) -> bool:
    """No gap realization satisfies two guesses, over every realization of span <= 2 L_small."""
    if L_small > MAX_BRUTE_L:
        raise ValueError(f"brute force is limited to L <= {MAX_BRUTE_L}")
    guesses = list(guesses)
    if len(guesses) <= 1:
        return True
    _, _, worst = brute_force_success_probability(guesses, 2 * L_small)
    return worst <= 1
