"""Guessing a typical gap window: exact success mass against simulation."""

from __future__ import annotations

from qubar.analysis import monte_carlo_attack
from qubar.attack import Strategy
from qubar.gaps import GuessClass, typical_set_probability, typical_set_size

# %% With a narrow band every typical vector of length L/3 sums to L/3
for L in (12, 18, 24):
    n = L // 3
    print(f"L={L}: {typical_set_size(n, 0.1)} typical vectors, "
          f"class G({n},0) has {GuessClass(L, n, 0).cardinality}, "
          f"exact mass {float(typical_set_probability(n, 0.1)):.4f}")

# %% Simulate the attack at L = 18
strategy = Strategy("typical", epsilon=0.1)
stats = monte_carlo_attack(strategy, L=18, budget=462, trials=5000, seed=11)
lo, hi = stats.wilson_interval
print(f"\nL=18: success {stats.success_rate:.4f}  99% interval [{lo:.4f}, {hi:.4f}]  "
      f"exact {462 / 2**12:.4f}")

# %% Equiprobable guesses: the mean query count over successes sits near (count + 1) / 2
stats = monte_carlo_attack(strategy, L=24, budget=6435, trials=40000, seed=12)
print(f"L=24: {stats.successes} successes, mean queries {stats.mean_queries_given_success:.0f} "
      f"(midpoint {(6435 + 1) / 2:.0f})")

# %% A wider band trades more guesses for more mass
for eps in (0.25, 0.5, 1.0):
    print(f"eps={eps}: {typical_set_size(6, eps)} guesses carry mass "
          f"{float(typical_set_probability(6, eps)):.4f}")
