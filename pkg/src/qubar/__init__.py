"""ABSG keystream generator and query-based key-recovery attacks on it."""

from __future__ import annotations

__version__ = "0.1.0"

from .analysis import (BoundScanRow, TrialStats, bound_scan, exact_success_curve,
                       fit_exponent, monte_carlo_attack, q_distribution_test, rate_test)
from .attack import (AttackResult, Guess, LfsrChecker, OracleChecker, Strategy,
                     lfsr_check, most_probable_guesses, oracle_check, run_qubar,
                     sorted_attack_guesses, typical_attack_guesses, validate_disjoint_success,
                     validate_prefix_free)
from .bitsource import (BitSequence, FeedbackPolynomial, LfsrState, default_polynomial,
                        iid_bits, lfsr_generate)
from .cipher import (EncodeResult, Encoder, Symbol, absg_encode, absg_step,
                     empty_state_prob_exact, no_empty_run_prob_exact)
from .exact import ExactProb
from .gaps import (GuessClass, class_cardinality, cumulative_class_mass, enumerate_compositions,
                   gap_entropy, gap_pmf, guess_probability, is_typical, sorted_class_stream)
from .reconstruct import ReconstructedSegment, gaps_from_x_window, x_from_gaps
