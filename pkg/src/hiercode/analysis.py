"""Closed-form communication loads, converse bounds and the timing model.

All loads are exact ``Fraction`` values in units of one IV.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from math import comb
from typing import Mapping

from .allocation import RoundAllocation, round_users
from .topology import ConnectivityProfile, Topology


class GapViolation(AssertionError):
    pass


class IndivisibleK(ValueError):
    pass


@dataclass(frozen=True)
class LoadPair:
    up: Fraction
    down: Fraction

    def __post_init__(self):
        if self.up < 0 or self.down < 0:
            raise ValueError("loads are non-negative")

    def as_json(self) -> dict:
        return {"up": str(self.up), "down": str(self.down)}


@dataclass(frozen=True)
class TimingModel:
    W1: Fraction
    W2: Fraction
    V: Fraction
    T_comp: Fraction = Fraction(0)

    def __post_init__(self):
        if self.W1 <= 0 or self.W2 <= 0:
            raise ValueError("bandwidths must be positive")


def _pairwise_min(local: list[frozenset[int]], i: int) -> int:
    return min(len(local[i] & other) for j, other in enumerate(local) if j != i)


def round_down_load(t: Topology, profile: ConnectivityProfile, z: int) -> int:
    """Server messages of round ``z`` in IV units: ``|I_z| - min_i |N_i & I_z|``."""
    local = round_users(t, profile, z)
    return len(profile.users(z)) - min(len(s) for s in local)


def achievable_loads(t: Topology, profile: ConnectivityProfile, allocations: Mapping[int, RoundAllocation]) -> LoadPair:
    up = Fraction(0)
    down = Fraction(0)
    for z in range(1, t.H):
        if not profile.users(z):
            continue
        alloc = allocations[z]
        local = round_users(t, profile, z)
        for i in range(t.H):
            if alloc.alpha[i]:
                up += alloc.alpha[i] * (len(local[i]) - _pairwise_min(local, i))
        down += round_down_load(t, profile, z)
    return LoadPair(up, down)


def literal_down_load(t: Topology, profile: ConnectivityProfile) -> Fraction:
    """``K - sum_z min_i |N_i & I_z|``; counts users on every relay, unlike the per-round sum."""
    total = sum(min(len(s) for s in round_users(t, profile, z)) for z in range(1, t.H))
    return Fraction(t.K - total)


def uncoded_loads(t: Topology) -> LoadPair:
    return LoadPair(Fraction(t.K), Fraction(t.K))


def lower_bounds(t: Topology, profile: ConnectivityProfile) -> LoadPair:
    links = sum(z * len(profile.users(z)) for z in range(1, t.H + 1))
    up = Fraction(t.H * t.K - links, t.H - 1)
    down = Fraction(t.K - min(len(n) for n in t.neighbors))
    return LoadPair(up, down)


def equal_split_saving(t: Topology, profile: ConnectivityProfile) -> Fraction:
    """``sum_z sum_i (1/z) min_j |N_i & N_j & I_z|``."""
    total = Fraction(0)
    for z in range(1, t.H):
        if not profile.users(z):
            continue
        local = round_users(t, profile, z)
        total += Fraction(sum(_pairwise_min(local, i) for i in range(t.H)), z)
    return total


def equal_split_upper_bound(t: Topology, profile: ConnectivityProfile) -> Fraction:
    """Uplink load bound reached by splitting every IV equally among its relays."""
    return t.K - equal_split_saving(t, profile)


@dataclass(frozen=True)
class GapReport:
    up_gap: Fraction
    down_gap: Fraction
    bound: int
    up_bound_tight: Fraction
    down_bound_tight: Fraction
    up_lb_certified: Fraction
    up_gap_certified: Fraction
    passed: bool

    def as_json(self) -> dict:
        return {
            "up_gap": str(self.up_gap),
            "down_gap": str(self.down_gap),
            "bound": self.bound,
            "up_bound_tight": str(self.up_bound_tight),
            "down_bound_tight": str(self.down_bound_tight),
            "up_lb_certified": str(self.up_lb_certified),
            "up_gap_certified": str(self.up_gap_certified),
            "pass": self.passed,
        }


def gap_certificates(t: Topology, profile: ConnectivityProfile, achieved: LoadPair, strict: bool = True) -> GapReport:
    """Compare achieved loads against the converse bounds.

    ``up_gap`` is measured against the link-counting uplink bound. The gap
    guarantee itself rests on ``up* >= down* >= K - min|N_i|`` (the server can
    always forward what it received), so it is checked against the larger of
    the two uplink bounds, ``up_lb_certified``.
    """
    lb = lower_bounds(t, profile)
    m = min(len(n) for n in t.neighbors)
    up_tight = m - equal_split_saving(t, profile)
    down_tight = Fraction(m - sum(min(len(s) for s in round_users(t, profile, z)) for z in range(1, t.H)))
    up_lb = max(lb.up, Fraction(t.K - m))
    up_gap_cert = achieved.up - up_lb
    down_gap = achieved.down - lb.down
    passed = up_gap_cert <= up_tight <= m and down_gap <= down_tight <= m
    if strict and not passed:
        raise GapViolation(f"gaps ({up_gap_cert}, {down_gap}) exceed ({up_tight}, {down_tight})")
    return GapReport(
        up_gap=achieved.up - lb.up,
        down_gap=down_gap,
        bound=m,
        up_bound_tight=up_tight,
        down_bound_tight=down_tight,
        up_lb_certified=up_lb,
        up_gap_certified=up_gap_cert,
        passed=passed,
    )


def flexible_optimal_loads(K: int, H: int, r: int) -> LoadPair:
    if not 1 <= r < H:
        raise ValueError(f"need 1 <= r < H, got r={r}, H={H}")
    if K % comb(H, r):
        raise IndivisibleK(f"K={K} is not a multiple of C({H},{r})={comb(H, r)}")
    return LoadPair(Fraction(K * (H - r), H - 1), K - Fraction(r * K, H))


def timing(loads: tuple, model: TimingModel) -> dict[str, Fraction]:
    """Per-iteration time from loads ``(user->relay, relay->server, server->relay, relay->user)``."""
    ue, es, se, eu = (Fraction(x) for x in loads)
    V = Fraction(model.V)
    comm = (ue + eu) * V / Fraction(model.W1) + (es + se) * V / Fraction(model.W2)
    return {"T_comm": comm, "T_total": Fraction(model.T_comp) + comm}
