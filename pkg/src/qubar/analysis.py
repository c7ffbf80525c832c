"""Reproduction harness: Monte Carlo attack runs, exact success curves,
minimal-budget scans and goodness-of-fit for the gap law."""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Callable, Iterable

import numpy as np
from scipy import stats

from .attack import (AttackResult, Guess, LfsrChecker, Strategy, run_qubar)
from .bitsource import (BitSequence, FeedbackPolynomial, LfsrState, default_polynomial,
                        iid_bits, lfsr_generate, make_rng, trial_seed)
from .cipher import EncodeResult, absg_encode
from .exact import ExactProb
from .gaps import (GuessClass, gap_pmf, p1_mass, p2_mass, sorted_class_stream,
                   typical_beta_range)
from .reconstruct import x_from_gaps

MAX_CHECKS = 10**9
INDEX_LIMIT = 1 << 21
WILSON_Z99 = stats.norm.ppf(0.995)


# --- Monte Carlo --------------------------------------------------------------

def wilson_interval(successes: int, trials: int, z: float = WILSON_Z99) -> tuple[float, float]:
    if trials == 0:
        return (0.0, 1.0)
    p = successes / trials
    denom = 1 + z * z / trials
    centre = (p + z * z / (2 * trials)) / denom
    half = z * math.sqrt(p * (1 - p) / trials + z * z / (4 * trials * trials)) / denom
    return (float(max(0.0, centre - half)), float(min(1.0, centre + half)))


@dataclass(frozen=True)
class TrialStats:
    trials: int
    successes: int
    mean_queries_given_success: float | None
    wilson_interval: tuple[float, float]

    @property
    def success_rate(self) -> float:
        return self.successes / self.trials if self.trials else 0.0

    def to_dict(self) -> dict:
        return {
            "trials": self.trials,
            "successes": self.successes,
            "success_rate": self.success_rate,
            "mean_queries_given_success": self.mean_queries_given_success,
            "wilson_interval_99": list(self.wilson_interval),
        }


def sample_gap_record(rng: np.random.Generator, n_gaps: int) -> EncodeResult:
    """Encode fresh i.i.d. bits until at least ``n_gaps`` gaps are available."""
    bits = b""
    need = 3 * n_gaps + 64
    while True:
        bits += rng.integers(0, 2, size=need, dtype=np.uint8).tobytes()
        rec = absg_encode(bits)
        if len(rec.Q) >= n_gaps:
            return rec
        need = 3 * (n_gaps - len(rec.Q)) + 64


def _lfsr_record(rng: np.random.Generator, poly: FeedbackPolynomial, n_out: int) -> EncodeResult:
    L = poly.degree
    init = 0
    while init == 0:
        init = int(rng.integers(1, 1 << L))
    length = 3 * n_out + 64
    while True:
        x = lfsr_generate(poly, LfsrState.from_int(init, L), length)
        rec = absg_encode(x)
        if len(rec.Q) >= n_out:
            return rec
        length *= 2


def monte_carlo_attack(strategy: Strategy, L: int, budget: int, trials: int, seed: int,
                       check: str = "oracle", horizon: int | None = None,
                       poly: FeedbackPolynomial | None = None,
                       on_result: Callable[[int, AttackResult], None] | None = None) -> TrialStats:
    """Run ``trials`` independent attacks, each on freshly generated input.

    Trial ``t`` draws from a generator seeded with ``trial_seed(seed, t)``.
    With ``check="oracle"`` the input is i.i.d. and guesses are compared to
    the true gaps; the first ``budget`` guesses are indexed once so each
    trial costs a few dictionary lookups instead of a full query loop. With
    ``check="lfsr"`` the input comes from an LFSR with a random nonzero
    state and every trial runs the real query loop.
    """
    strategy.validate(L)
    if budget < 0 or trials < 0:
        raise ValueError("budget and trials must be non-negative")
    if budget * trials > MAX_CHECKS:
        raise ValueError(f"{budget} x {trials} = {budget * trials:.3g} checks exceeds the "
                         f"{MAX_CHECKS:.0e} limit; lower --budget or --trials")
    if check not in ("oracle", "lfsr"):
        raise ValueError(f"unknown check mode {check!r}")

    guesses = list(strategy.guesses(L, budget)) if budget <= INDEX_LIMIT else None
    if guesses is None:
        raise ValueError(f"budget {budget} exceeds the indexed-guess limit {INDEX_LIMIT}")
    n_out = max((g.start - 1 + g.theta for g in guesses), default=0)

    successes = 0
    total_queries = 0
    if check == "oracle":
        index: dict[tuple, int] = {}
        for k, g in enumerate(guesses):
            index.setdefault((g.start, g.q), k)
        shapes = sorted({(g.start, g.theta) for g in guesses})
        for t in range(trials):
            rng = make_rng(trial_seed(seed, t))
            rec = sample_gap_record(rng, max(n_out, 1))
            Q = rec.Q
            best = None
            for start, theta in shapes:
                k = index.get((start, Q[start - 1:start - 1 + theta]))
                if k is not None and (best is None or k < best):
                    best = k
            if best is not None:
                successes += 1
                total_queries += best + 1
            if on_result is not None:
                on_result(t, _oracle_result(guesses, best, rec, budget, strategy.tag, seed))
    else:
        poly = poly or default_polynomial(L)
        if poly.degree != L:
            raise ValueError(f"polynomial degree {poly.degree} does not match L={L}")
        h = 2 * L if horizon is None else horizon
        for t in range(trials):
            rng = make_rng(trial_seed(seed, t))
            rec = _lfsr_record(rng, poly, n_out + h)
            res = run_qubar(iter(guesses), LfsrChecker(poly, rec.z, h), budget,
                            strategy.tag, seed)
            if res.success:
                successes += 1
                total_queries += res.queries_used
            if on_result is not None:
                on_result(t, res)

    mean = total_queries / successes if successes else None
    return TrialStats(trials, successes, mean, wilson_interval(successes, trials))


def _oracle_result(guesses, best, rec, budget, tag, seed) -> AttackResult:
    if best is None:
        return AttackResult(False, min(budget, len(guesses)), budget, strategy=tag, seed=seed)
    g = guesses[best]
    zwin = rec.z.bits[g.start - 1:g.start - 1 + g.theta]
    return AttackResult(True, best + 1, budget, x_from_gaps(zwin, g.q), g, tag, seed)


# --- exact success accounting ---------------------------------------------------

def exact_success_curve(strategy: Strategy, L: int, max_budget: int) -> list[tuple[int, ExactProb]]:
    """Exact success probability after each of the first ``max_budget`` guesses.

    Sorted minimal guesses have disjoint success events, so the curve is a
    running sum. Most-probable guesses look at disjoint gap windows, so
    failures are independent and the curve is ``1 - (1 - 2^-L/2)^k``.
    """
    strategy.validate(L)
    curve = []
    if strategy.kind == "sorted" and strategy.minimal_only:
        total = ExactProb.zero()
        for k, g in enumerate(strategy.guesses(L, max_budget), start=1):
            total += g.probability
            curve.append((k, total))
    elif strategy.kind == "most-probable":
        miss = ExactProb.one() - ExactProb.pow2(L // 2)
        fail = ExactProb.one()
        for k in range(1, max_budget + 1):
            fail = fail * miss
            curve.append((k, ExactProb.one() - fail))
    else:
        raise ValueError("exact curves cover the minimal sorted and most-probable strategies")
    return curve


def most_probable_success(L: int, budget: int) -> ExactProb:
    miss = ExactProb.one() - ExactProb.pow2(L // 2)
    return ExactProb.one() - miss ** budget


def mass_profile(strategy: Strategy, L: int) -> list[tuple[int | None, int]]:
    """Guess stream as runs ``(count, B)`` of guesses that each have mass ``2^-B``.

    ``count`` is ``None`` for an unbounded run.
    """
    strategy.validate(L)
    if strategy.kind == "typical":
        n = L // 3
        return [(math.comb(b + n - 1, n - 1), n + b)
                for b in typical_beta_range(n, strategy.epsilon) if b >= n]
    if strategy.kind == "most-probable":
        return [(None, L // 2)]
    return [(c.minimal_count if strategy.minimal_only else c.cardinality, c.cost)
            for c in sorted_class_stream(L)]


@dataclass(frozen=True)
class PrefixCrossing:
    length: int
    mass: ExactProb
    mass_before: ExactProb


def first_prefix_exceeding(profile: Iterable[tuple[int | None, int]], target=Fraction(1, 2)) -> PrefixCrossing | None:
    """Shortest prefix whose summed guess mass is strictly above ``target``."""
    target = Fraction(target)
    mass = ExactProb.zero()
    length = 0
    for count, B in profile:
        run_mass = None if count is None else ExactProb(count, B)
        if run_mass is not None and mass + run_mass <= target:
            mass += run_mass
            length += count
            continue
        # crossing inside this run: need k with mass + k 2^-B > target
        k = math.floor((target - mass.as_fraction()) * (1 << B)) + 1
        if count is not None and k > count:
            raise AssertionError("crossing count exceeds run length")
        before = mass + ExactProb(k - 1, B)
        return PrefixCrossing(length + k, mass + ExactProb(k, B), before)
    return None


# --- converse scans ----------------------------------------------------------------

@dataclass(frozen=True)
class BoundScanRow:
    mode: str
    L: int
    c_star: int
    mass_at_c_star: ExactProb
    mass_before: ExactProb
    theorem_bound: Fraction
    p1: ExactProb | None = None
    p2: ExactProb | None = None
    p3: ExactProb | None = None

    @property
    def exponent(self) -> float:
        return math.log2(self.c_star) / self.L

    @property
    def bound_ok(self) -> bool:
        return self.c_star > self.theorem_bound

    @property
    def boundary_ok(self) -> bool:
        return self.mass_before <= Fraction(1, 2) < self.mass_at_c_star

    @property
    def p1_ok(self) -> bool | None:
        return None if self.p1 is None else self.p1 < Fraction(3, self.L)

    @property
    def p2_ok(self) -> bool | None:
        return None if self.p2 is None else self.p2 < Fraction(3, self.L)

    @property
    def passed(self) -> bool:
        return self.bound_ok and self.boundary_ok

    def to_dict(self) -> dict:
        def f(v):
            return None if v is None else float(v)
        return {
            "L": self.L,
            "c_star": self.c_star,
            "exponent": self.exponent,
            "theorem_bound": float(self.theorem_bound),
            "p1": f(self.p1),
            "p2": f(self.p2),
            "p3": f(self.p3),
            "mass_at_c_star": f(self.mass_at_c_star),
            "bound_ok": self.bound_ok,
            "p1_ok": self.p1_ok,
            "p2_ok": self.p2_ok,
            "pass": self.passed,
        }


def exhaustive_bound(L: int) -> Fraction:
    return Fraction(2) ** Fraction(2 * L, 3) * (Fraction(1, 2) - Fraction(6, L))


def bound_scan(mode: str, L_values: Iterable[int], target=Fraction(1, 2)) -> list[BoundScanRow]:
    """Minimal number of guesses needed for cumulative mass above ``target``.

    ``exhaustive``: guesses at output 1 by non-increasing probability, minimal
    members only, counted per class with binomials. ``general``: every guess
    at the largest possible mass ``2^-L/2``.
    """
    target = Fraction(target)
    rows = []
    for L in L_values:
        if mode == "exhaustive":
            if L % 6:
                raise ValueError(f"exhaustive scan needs L divisible by 6, got {L}")
            crossing = first_prefix_exceeding(mass_profile(Strategy("sorted"), L), target)
            n = L // 3
            used_typical = _class_usage(L, crossing.length, GuessClass(L, n, 0))
            rows.append(BoundScanRow(
                "exhaustive", L, crossing.length, crossing.mass, crossing.mass_before,
                exhaustive_bound(L), p1_mass(L), p2_mass(L),
                ExactProb(used_typical, 2 * n)))
        elif mode == "general":
            if L % 2:
                raise ValueError(f"general scan needs even L, got {L}")
            crossing = first_prefix_exceeding([(None, L // 2)], target)
            rows.append(BoundScanRow(
                "general", L, crossing.length, crossing.mass, crossing.mass_before,
                Fraction(2) ** (L // 2 - 1)))
        else:
            raise ValueError(f"unknown scan mode {mode!r}")
    return rows


def _class_usage(L: int, budget: int, target_cls: GuessClass) -> int:
    """Minimal members of ``target_cls`` among the first ``budget`` sorted guesses."""
    used = 0
    for cls in sorted_class_stream(L):
        take = min(cls.minimal_count, budget - used)
        if cls == target_cls:
            return take
        used += take
        if used >= budget:
            return 0
    return 0


def fit_exponent(rows: list) -> tuple[float, float]:
    """Least-squares slope of ``log2 c_star`` against ``L`` and its standard error."""
    if len(rows) < 4:
        raise ValueError("need at least 4 rows to fit an exponent")
    Ls = np.array([r.L for r in rows], dtype=float)
    if np.ptp(Ls) == 0:
        raise ValueError("all rows share one L; slope undefined")
    y = np.array([math.log2(r.c_star) for r in rows])
    fit = stats.linregress(Ls, y)
    return float(fit.slope), float(fit.stderr)


# --- distribution checks ------------------------------------------------------------

@dataclass(frozen=True)
class GapFit:
    tv_distance: float
    chi_square: float
    p_value: float
    n_gaps: int
    histogram: tuple


def geometric_bins(max_q: int = 20) -> np.ndarray:
    """Probabilities of gaps ``0..max_q-1`` and of the pooled tail ``>= max_q``."""
    p = np.array([float(gap_pmf(q)) for q in range(max_q)] + [2.0 ** -max_q])
    return p


def gap_histogram(Q, max_q: int = 20) -> np.ndarray:
    q = np.minimum(np.asarray(Q, dtype=np.int64), max_q)
    return np.bincount(q, minlength=max_q + 1)


def fit_gaps(Q, max_q: int = 20) -> GapFit:
    if len(Q) < 100:
        raise ValueError(f"only {len(Q)} gaps; need at least 100")
    counts = gap_histogram(Q, max_q)
    n = int(counts.sum())
    p = geometric_bins(max_q)
    tv = 0.5 * float(np.abs(counts / n - p).sum())
    expected = n * p
    chi2 = float(((counts - expected) ** 2 / expected).sum())
    pval = float(stats.chi2.sf(chi2, df=len(p) - 1))
    return GapFit(tv, chi2, pval, n, tuple(int(c) for c in counts))


def q_distribution_test(x: BitSequence, max_q: int = 20) -> GapFit:
    """Encode ``x`` and compare its gap histogram with the geometric(1/2) law."""
    if len(x) < 10**4:
        raise ValueError(f"input has {len(x)} bits; the gap test needs at least 10^4")
    return fit_gaps(absg_encode(x).Q, max_q)


def rate_test(x: BitSequence) -> float:
    """Output bits per consumed input bit."""
    rec = absg_encode(x)
    return len(rec.z) / rec.consumed if rec.consumed else 0.0


def iid_stats(seed: int, length: int) -> dict:
    x = iid_bits(seed, length)
    fit = q_distribution_test(x)
    return {"rate": rate_test(x), "tv_distance": fit.tv_distance, "chi_square": fit.chi_square,
            "p_value": fit.p_value, "n_gaps": fit.n_gaps, "mean_bit": float(x.to_numpy().mean())}
