"""How many guesses does it take to pass success probability 1/2?"""

from __future__ import annotations

import numpy as np

from qubar.analysis import bound_scan, fit_exponent

# %% Guesses on one output window, best first, prefix-free
rows = bound_scan("exhaustive", range(12, 61, 6))
print("  L        c_star   log2(c)/L   bound        ok    P1      P2")
for r in rows:
    print(f"{r.L:3d} {r.c_star:13d}   {r.exponent:.4f}   {float(r.theorem_bound):11.4g}  "
          f"{str(r.bound_ok):5s} {float(r.p1):.4f}  {float(r.p2):.4f}")

slope, err = fit_exponent(rows)
print(f"\nfitted exponent {slope:.4f} +/- {err:.4f}")

# %% The closed-form lower bound 2^(2L/3)(1/2 - 6/L) stops holding at L = 48
ratio = np.array([r.c_star / float(r.theorem_bound) for r in rows[1:]])
print("c_star / bound:", np.round(ratio, 3))

# %% Guesses anywhere in the output: the per-guess cap 2^-L/2 forces 2^(L/2-1) + 1
general = bound_scan("general", range(12, 41, 4))
for r in general:
    print(f"L={r.L}: c_star={r.c_star} > {float(r.theorem_bound):.0f}")
print("fitted exponent %.4f" % fit_exponent(general)[0])
