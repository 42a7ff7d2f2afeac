"""Parameter sweeps over generated topologies, emitted as CSV rows."""

from __future__ import annotations

import csv
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, TextIO

from .allocation import round_allocations
from .analysis import TimingModel, achievable_loads, lower_bounds, timing, uncoded_loads
from .topology import Topology, connectivity_profile, gen_combination, gen_heterogeneous, gen_random_regular

COLUMNS = [
    "K", "H", "r", "d", "seed",
    "L_up_coded", "L_down_coded", "L_up_uncoded", "L_down_uncoded",
    "L_up_lb", "L_down_lb", "up_gap", "down_gap",
    "T_comm_coded", "T_comm_uncoded",
]
NUMERIC = COLUMNS[5:]
AXES = ("K", "d", "r")


@dataclass(frozen=True)
class Scenario:
    gen: str
    K: int | None = None
    H: int | None = None
    r: int | None = None
    d: Fraction | None = None
    eta: int = 1

    def build(self, seed: int) -> Topology:
        if self.gen == "random":
            return gen_random_regular(self.K, self.H, self.r, seed)
        if self.gen == "hetero":
            return gen_heterogeneous(self.K, self.d, seed)
        if self.gen == "combination":
            return gen_combination(self.H, self.r, self.eta)
        raise ValueError(f"unknown generator {self.gen!r}")

    def with_axis(self, axis: str, value) -> Scenario:
        if axis == "d":
            value = Fraction(value)
        else:
            value = int(value)
        return Scenario(**{**self.__dict__, axis: value})


def scenario_row(t: Topology, seed, model: TimingModel, scenario: Scenario) -> dict:
    profile = connectivity_profile(t)
    coded = achievable_loads(t, profile, round_allocations(t, profile))
    base = uncoded_loads(t)
    lb = lower_bounds(t, profile)
    K = Fraction(t.K)
    return {
        "K": t.K,
        "H": t.H,
        "r": profile.r,
        "d": scenario.d if scenario.gen == "hetero" else "",
        "seed": seed,
        "L_up_coded": coded.up,
        "L_down_coded": coded.down,
        "L_up_uncoded": base.up,
        "L_down_uncoded": base.down,
        "L_up_lb": lb.up,
        "L_down_lb": lb.down,
        "up_gap": coded.up - lb.up,
        "down_gap": coded.down - lb.down,
        "T_comm_coded": timing((K, coded.up, coded.down, K), model)["T_comm"],
        "T_comm_uncoded": timing((K, base.up, base.down, K), model)["T_comm"],
    }


def mean_row(rows: list[dict]) -> dict:
    first = rows[0]
    out = {c: first[c] for c in ("K", "H", "d")}
    out["r"] = sum((Fraction(r["r"]) for r in rows), Fraction(0)) / len(rows)
    out["seed"] = "mean"
    for c in NUMERIC:
        out[c] = sum((Fraction(r[c]) for r in rows), Fraction(0)) / len(rows)
    return out


def run_sweep(base: Scenario, axis: str, values: Iterable, seeds: Iterable[int], model: TimingModel) -> list[dict]:
    """Per-seed rows for each axis value, each group followed by its mean row."""
    if axis not in AXES:
        raise ValueError(f"sweep axis must be one of {AXES}")
    values = list(values)
    if not values:
        raise ValueError("empty sweep axis")
    seeds = list(seeds)
    rows = []
    for v in values:
        sc = base.with_axis(axis, v)
        group = [scenario_row(sc.build(s), s, model, sc) for s in seeds]
        rows += group
        rows.append(mean_row(group))
    return rows


def _fmt(v) -> str:
    if isinstance(v, (Fraction, float)):
        return format(float(v), ".12g")
    return str(v)


def write_csv(rows: list[dict], fh: TextIO) -> None:
    w = csv.writer(fh, lineterminator="\n")
    w.writerow(COLUMNS)
    for row in rows:
        w.writerow([_fmt(row[c]) for c in COLUMNS])
