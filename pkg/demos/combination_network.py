#!/usr/bin/env python3
"""Combination networks: the coded loads land exactly on the converse.

Every r-subset of H relays serves eta users. For each (H, r) the script prints
achieved and lower-bound loads side by side together with the closed form.
"""

from fractions import Fraction
from math import comb

from hiercode.allocation import round_allocations
from hiercode.analysis import achievable_loads, lower_bounds
from hiercode.topology import connectivity_profile, gen_combination

eta = 1
print(f"{'H':>2} {'r':>2} {'K':>3}   {'up':>6} {'up_lb':>6}   {'down':>6} {'down_lb':>7}   closed form")
for H in range(3, 7):
    for r in range(1, H):
        t = gen_combination(H, r, eta)
        p = connectivity_profile(t)
        ach = achievable_loads(t, p, round_allocations(t, p))
        lb = lower_bounds(t, p)
        K = eta * comb(H, r)
        closed = (Fraction(K * (H - r), H - 1), K - Fraction(r * K, H))
        mark = "ok" if (ach.up, ach.down) == (lb.up, lb.down) == closed else "MISMATCH"
        print(f"{H:>2} {r:>2} {K:>3}   {str(ach.up):>6} {str(lb.up):>6}   {str(ach.down):>6} {str(lb.down):>7}   {mark}")
