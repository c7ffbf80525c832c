"""Walk through the generator: blocks, gaps and what i.i.d. input does to them."""

from __future__ import annotations

import numpy as np

from qubar import BitSequence, absg_encode, empty_state_prob_exact, iid_bits
from qubar.analysis import geometric_bins, q_distribution_test, rate_test

# %% A hand-sized input
x = BitSequence.from_string("101001001")
r = absg_encode(x)
print("x =", x.to_string())
print("z =", r.z.to_string(), " H =", r.H, " Q =", r.Q)
for (a, b), q, z in zip(r.blocks, r.Q, r.z.bits):
    print(f"  block x[{a}..{b}] = {x.to_string()[a - 1:b]}  q={q}  z={z}")

# %% One million fair bits
x = iid_bits(seed=1, length=10**6)
fit = q_distribution_test(x)
print(f"\noutput rate {rate_test(x):.4f} (one output per three input bits on average)")
print(f"{fit.n_gaps} gaps, total variation to geometric(1/2) = {fit.tv_distance:.4f}")

observed = np.array(fit.histogram) / fit.n_gaps
expected = geometric_bins()
print(" q   observed   expected")
for q in range(8):
    print(f"{q:2d}   {observed[q]:.5f}    {expected[q]:.5f}")

# %% A biased source shows up in the gap law
fit = q_distribution_test(iid_bits(seed=1, length=10**6, p=0.7))
print(f"\nBernoulli(0.7) input: TV distance {fit.tv_distance:.3f}")

# %% Exact probability that the internal state is empty after n bits
for n in range(1, 9):
    p = empty_state_prob_exact(n)
    print(f"Pr(Y_{n} empty) = {p}  ~ {float(p):.5f}")
