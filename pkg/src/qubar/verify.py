"""Self-check suites behind ``qubar verify``.

Each suite returns a list of :class:`Check` records; a suite passes when
every check does. Exact suites compare integers and dyadic rationals only.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from .analysis import fit_gaps, q_distribution_test, rate_test
from .attack import (brute_force_success_probability, sorted_attack_guesses,
                     validate_prefix_free)
from .bitsource import BitSequence, iid_bits, make_rng, trial_seed
from .cipher import (absg_encode, empty_state_prob_exact, internal_states,
                     no_empty_run_prob_exact)
from .gaps import (GuessClass, aep_sandwich, enumerate_compositions, is_typical)
from .reconstruct import gaps_from_x_window, x_from_gaps


@dataclass
class Check:
    name: str
    passed: bool
    detail: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        return {"name": self.name, "passed": bool(self.passed), **self.detail}


def empty_state_closed_form(n: int) -> Fraction:
    return Fraction(1, 3) + Fraction(2, 3) * Fraction(-1, 2) ** n


def no_empty_run_closed_form(n: int, w: int) -> Fraction:
    return (Fraction(2, 3) - Fraction(2, 3) * Fraction(-1, 2) ** n) * Fraction(1, 2) ** (w - 1)


def suite_markov(max_n: int = 16, **_) -> list[Check]:
    bad_single = [n for n in range(1, max_n + 1)
                  if empty_state_prob_exact(n).as_fraction() != empty_state_closed_form(n)]
    bad_runs = [(n, w) for n in range(1, max_n) for w in range(1, max_n - n + 1)
                if no_empty_run_prob_exact(n, w).as_fraction() != no_empty_run_closed_form(n, w)]
    n_runs = sum(max_n - n for n in range(1, max_n))
    return [
        Check("empty_state_probability", not bad_single, {"n_max": max_n, "mismatches": bad_single}),
        Check("no_empty_run_probability", not bad_runs,
              {"pairs_checked": n_runs, "mismatches": [list(p) for p in bad_runs]}),
    ]


def suite_distribution(seed: int = 0, length: int = 10**6, **_) -> list[Check]:
    x = iid_bits(seed, length)
    fit = q_distribution_test(x)
    rate = rate_test(x)
    rng = make_rng(trial_seed(seed, 1))
    null = fit_gaps(rng.geometric(0.5, size=fit.n_gaps) - 1)
    return [
        Check("gap_law_tv", fit.tv_distance < 0.01,
              {"tv_distance": fit.tv_distance, "chi_square": fit.chi_square,
               "p_value": fit.p_value, "n_gaps": fit.n_gaps}),
        Check("null_model_tv", null.tv_distance < 0.01, {"tv_distance": null.tv_distance}),
        Check("output_rate", 0.323 <= rate <= 0.343, {"rate": rate}),
    ]


def roundtrip_once(rng: np.random.Generator, L: int) -> bool:
    x = BitSequence(rng.integers(0, 2, size=10 * L, dtype=np.uint8).tobytes())
    n = int(rng.integers(0, 4 * L))
    y_n = internal_states(x.bits[:n])[-1]
    w = gaps_from_x_window(x, n, y_n, L)
    if not w:
        return False
    rebuilt = x_from_gaps(w.z, w.q).bits.bits
    if rebuilt != x.bits[w.start:w.start + w.span] or w.span < L:
        return False
    # the window must also line up with the encoder's own gap record
    rec = absg_encode(x)
    k = rec.H.index(w.start) + 1 if w.start else 0
    return rec.Q[k:k + w.theta] == w.q and rec.z.bits[k:k + w.theta] == w.z


def suite_roundtrip(seed: int = 0, trials: int = 1000, L: int = 24, **_) -> list[Check]:
    failures = [t for t in range(trials) if not roundtrip_once(make_rng(trial_seed(seed, t)), L)]
    return [Check("gaps_to_bits_roundtrip", not failures,
                  {"trials": trials, "L": L, "mismatches": len(failures)})]


def typicality_identity(L: int = 24, epsilon=0.1, seed: int = 0, non_members: int = 10**4) -> dict:
    """Typical length-L/3 vectors versus the class ``G(L/3, 0)``.

    Checks every class element and ``non_members`` random length-L/3 vectors
    drawn with geometric gaps and rejected when they fall in the class.
    """
    n = L // 3
    cls = GuessClass(L, n, 0)
    members = list(enumerate_compositions(n, cls.beta))
    member_ok = all(is_typical(q, epsilon) for q in members)
    rng = make_rng(seed)
    outside = 0
    checked = 0
    while checked < non_members:
        q = tuple(int(v) for v in rng.geometric(0.5, size=n) - 1)
        if cls.contains(q):
            continue
        checked += 1
        outside += not is_typical(q, epsilon)
    return {"members": len(members), "cardinality": cls.cardinality,
            "members_typical": member_ok, "non_members": checked,
            "non_members_atypical": outside}


def suite_typicality(seed: int = 0, **_) -> list[Check]:
    d = typicality_identity(seed=seed)
    rows, threshold = aep_sandwich(range(12, 41), 0.25)
    return [
        Check("typical_equals_class", d["members_typical"] and d["members"] == d["cardinality"]
              and d["non_members_atypical"] == d["non_members"], d),
        Check("aep_upper_bound", all(r.upper_ok for r in rows), {"n": [12, 40], "epsilon": 0.25}),
        Check("aep_lower_bound_threshold", threshold is not None, {"threshold": threshold}),
    ]


def minimal_prefix(L: int, target=Fraction(1, 2)):
    """Minimal sorted guesses up to and including the first that takes the mass past ``target``."""
    out, total = [], Fraction(0)
    for g in sorted_attack_guesses(L, minimal_only=True):
        out.append(g)
        total += g.probability.as_fraction()
        if total > target:
            break
    return out


def optimality_report(L: int) -> dict:
    guesses = minimal_prefix(L)
    marginals = [g.probability for g in guesses]
    total = sum((p.as_fraction() for p in marginals), Fraction(0))
    success, cell_mass, worst = brute_force_success_probability(guesses, 2 * L)
    return {
        "L": L,
        "guesses": len(guesses),
        "prefix_free": not validate_prefix_free(guesses),
        "disjoint": worst <= 1,
        "sum_identity": success.as_fraction() == total,
        "cells_sum_to_one": cell_mass == 1,
        "non_increasing": all(a >= b for a, b in zip(marginals, marginals[1:])),
        "mass": float(total),
    }


def suite_optimality(L_values=(10, 12, 14), **_) -> list[Check]:
    checks = []
    for L in L_values:
        r = optimality_report(L)
        ok = all(r[k] for k in ("prefix_free", "disjoint", "sum_identity", "cells_sum_to_one",
                                "non_increasing"))
        checks.append(Check(f"minimal_sorted_L{L}", ok, r))
    return checks


SUITES = {
    "distribution": suite_distribution,
    "markov": suite_markov,
    "roundtrip": suite_roundtrip,
    "typicality": suite_typicality,
    "optimality": suite_optimality,
}


def run_suite(name: str, seed: int = 0) -> tuple[bool, list[Check]]:
    try:
        fn = SUITES[name]
    except KeyError:
        raise ValueError(f"unknown suite {name!r}; choose from {', '.join(SUITES)}") from None
    checks = fn(seed=seed)
    return all(c.passed for c in checks), checks

