"""Per-round segment allocation for the relay-to-server uplink.

Round ``z`` carries the IVs of the users served by exactly ``z`` relays. Relay
``i`` contributes ``n[i]`` coded messages of ``alpha[i]`` IV-sizes each; the
allocation picks ``alpha`` to minimise the round's uplink load while every
user of the round stays fully covered.
"""

from __future__ import annotations

from dataclasses import dataclass, replace
from fractions import Fraction
from math import lcm

from .simplex import LPError, solve_covering
from .topology import ConnectivityProfile, Topology


class AllocationError(RuntimeError):
    pass


class AllZero(AllocationError):
    pass


@dataclass(frozen=True)
class RoundAllocation:
    z: int
    alpha: tuple[Fraction, ...]
    n: tuple[int, ...]
    objective: Fraction
    alpha_grid: Fraction | None = None

    @property
    def blocks(self) -> int:
        """Sub-blocks per IV, ``1 / alpha_grid``."""
        if self.alpha_grid is None:
            raise AllocationError("common grid not set; call common_grid first")
        return int(1 / self.alpha_grid)

    def slots(self, i: int) -> int:
        """Sub-block slots of relay ``i`` (1-based): ``alpha_i / alpha_grid``."""
        return int(self.alpha[i - 1] / self.alpha_grid) if self.alpha_grid else 0


def round_users(t: Topology, profile: ConnectivityProfile, z: int) -> list[frozenset[int]]:
    """``N_i`` restricted to round ``z`` users, in relay order."""
    Iz = profile.users(z)
    return [n & Iz for n in t.neighbors]


def unknown_counts(t: Topology, profile: ConnectivityProfile, z: int) -> tuple[int, ...]:
    """IVs of each relay in round ``z`` that its least-overlapping peer lacks."""
    if not 1 <= z <= t.H - 1:
        raise ValueError(f"round z={z} outside 1..{t.H - 1}")
    local = round_users(t, profile, z)
    counts = []
    for i, own in enumerate(local):
        shared = min(len(own & other) for j, other in enumerate(local) if j != i)
        counts.append(len(own) - shared)
    return tuple(counts)


def _check_round(t: Topology, profile: ConnectivityProfile, z: int) -> None:
    if not 1 <= z <= t.H - 1:
        raise ValueError(f"round z={z} outside 1..{t.H - 1}")


def solve_round_lp(t: Topology, profile: ConnectivityProfile, z: int) -> RoundAllocation:
    """Exact optimal ``alpha`` for round ``z``.

    Only the users of round ``z`` are constrained. Relays with no such users are
    pinned to zero by leaving them out of the program.
    """
    _check_round(t, profile, z)
    Iz = sorted(profile.users(z))
    if not Iz:
        raise ValueError(f"round z={z} has no users")
    n = unknown_counts(t, profile, z)
    active = [i for i in range(t.H) if t.neighbors[i] & profile.users(z)]
    col = {i: c for c, i in enumerate(active)}
    rows = [[col[i] for i in active if k in t.neighbors[i]] for k in Iz]
    try:
        x, obj = solve_covering([n[i] for i in active], rows)
    except LPError as exc:
        raise AllocationError(f"round z={z}: {exc}") from exc
    alpha = [Fraction(0)] * t.H
    for i in active:
        alpha[i] = x[col[i]]
    return RoundAllocation(z=z, alpha=tuple(alpha), n=n, objective=obj)


def equal_split(t: Topology, profile: ConnectivityProfile, z: int) -> RoundAllocation:
    _check_round(t, profile, z)
    n = unknown_counts(t, profile, z)
    Iz = profile.users(z)
    alpha = tuple(Fraction(1, z) if t.neighbors[i] & Iz else Fraction(0) for i in range(t.H))
    return RoundAllocation(z=z, alpha=alpha, n=n, objective=sum((a * c for a, c in zip(alpha, n)), Fraction(0)))


def common_grid(alloc: RoundAllocation) -> RoundAllocation:
    positive = [a for a in alloc.alpha if a > 0]
    if not positive:
        raise AllZero(f"round z={alloc.z}: every alpha is zero")
    L = lcm(*(a.denominator for a in positive))
    return replace(alloc, alpha_grid=Fraction(1, L))


def round_allocations(t: Topology, profile: ConnectivityProfile, method: str = "lp") -> dict[int, RoundAllocation]:
    """Gridded allocations for every non-empty round ``1..H-1``."""
    solver = {"lp": solve_round_lp, "equal": equal_split}[method]
    out = {}
    for z in range(1, t.H):
        if profile.users(z):
            out[z] = common_grid(solver(t, profile, z))
    return out
