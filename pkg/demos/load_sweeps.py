#!/usr/bin/env python3
"""Average server-hop loads as the network grows and as relay sizes skew.

First sweep: random topologies where every user reaches r=3 relays, K from 10
to 50. Second sweep: four relays whose sizes spread apart with d. Pass a
directory to also write the per-seed CSV files.
"""

import sys
from fractions import Fraction
from pathlib import Path

from hiercode.analysis import TimingModel
from hiercode.sweep import Scenario, run_sweep, write_csv

SEEDS = range(50)
model = TimingModel(Fraction(10**8), Fraction(10**8), Fraction(10**6))
out_dir = Path(sys.argv[1]) if len(sys.argv) > 1 else None


def show(title, rows, axis):
    print(f"\n{title}")
    print(f"{axis:>5}  {'up':>7} {'down':>7}  {'uncoded':>7}  {'T_comm coded/uncoded':>20}")
    for r in rows:
        if r["seed"] != "mean":
            continue
        ratio = r["T_comm_coded"] / r["T_comm_uncoded"]
        print(f"{str(r[axis]):>5}  {float(r['L_up_coded']):7.3f} {float(r['L_down_coded']):7.3f}"
              f"  {float(r['L_up_uncoded']):7.1f}  {float(ratio):20.3f}")


sweeps = []
for H in (5, 10):
    rows = run_sweep(Scenario("random", H=H, r=3), "K", [10, 20, 30, 40, 50], SEEDS, model)
    show(f"random topologies, H={H}, r=3", rows, "K")
    sweeps.append((f"k_sweep_H{H}.csv", rows))

rows = run_sweep(Scenario("hetero", K=40), "d", [Fraction(i, 20) for i in range(10)], SEEDS, model)
show("four relays, K=40, sizes spread by d", rows, "d")
sweeps.append(("d_sweep_K40.csv", rows))

if out_dir:
    out_dir.mkdir(parents=True, exist_ok=True)
    for name, rows in sweeps:
        with open(out_dir / name, "w", newline="") as fh:
            write_csv(rows, fh)
    print(f"\nCSV written to {out_dir}")
