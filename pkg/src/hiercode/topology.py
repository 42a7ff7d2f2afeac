"""Relay-user connection topologies.

Users and relays are labelled 1..K and 1..H, as in the files and reports.
Per-relay vectors (``G`` rows, allocations, counts) are stored in relay order,
so position ``i - 1`` belongs to relay ``i``.
"""

from __future__ import annotations

import itertools
import json
from dataclasses import dataclass, field
from fractions import Fraction
from math import comb
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

MAX_RESAMPLE = 1000


class TopologyError(ValueError):
    """Base class for rejected topologies and generator parameters."""


class EmptyRelay(TopologyError):
    pass


class FullRelay(TopologyError):
    pass


class UncoveredUser(TopologyError):
    pass


class InvalidDegree(TopologyError):
    pass


class InfeasibleSizes(TopologyError):
    pass


class CoverageRetryExhausted(TopologyError):
    pass


class TopologyFormatError(TopologyError):
    """Malformed topology file (bad keys, duplicates, out-of-range users)."""


@dataclass(frozen=True)
class Topology:
    H: int
    K: int
    neighbors: tuple[frozenset[int], ...]
    G: np.ndarray = field(repr=False, compare=False)

    def relays_of(self, k: int) -> tuple[int, ...]:
        """Relays (1-based) connected to user ``k``."""
        return tuple(i + 1 for i, n in enumerate(self.neighbors) if k in n)

    def to_dict(self) -> dict:
        return {
            "H": self.H,
            "K": self.K,
            "relays": [sorted(n) for n in self.neighbors],
        }

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, Topology):
            return NotImplemented
        return (self.H, self.K, self.neighbors) == (other.H, other.K, other.neighbors)

    def __hash__(self) -> int:
        return hash((self.H, self.K, self.neighbors))


@dataclass(frozen=True)
class ConnectivityProfile:
    r_k: tuple[int, ...]
    r: Fraction
    I: dict[int, frozenset[int]]

    def users(self, z: int) -> frozenset[int]:
        return self.I.get(z, frozenset())


def build_topology(H: int, neighbors: Sequence[Iterable[int]], K: int | None = None) -> Topology:
    """Validate a relay neighbour list and derive the connection matrix.

    ``K`` defaults to the largest user index present. Passing it explicitly
    lets a file declare users that no relay serves, which is then rejected.
    """
    if len(neighbors) != H:
        raise TopologyError(f"expected {H} relay lists, got {len(neighbors)}")
    if H < 2:
        raise TopologyError("need at least two relays")
    sets = tuple(frozenset(int(k) for k in n) for n in neighbors)
    for i, n in enumerate(sets, start=1):
        if not n:
            raise EmptyRelay(f"relay {i} serves no users")
        if min(n) < 1:
            raise TopologyError(f"relay {i}: user indices are 1-based")
    present = max(max(n) for n in sets)
    if K is None:
        K = present
    elif present > K:
        raise TopologyError(f"user {present} exceeds K={K}")
    everyone = frozenset(range(1, K + 1))
    for i, n in enumerate(sets, start=1):
        if n == everyone:
            raise FullRelay(f"relay {i} serves every user")
    missing = everyone - frozenset().union(*sets)
    if missing:
        raise UncoveredUser(f"users {sorted(missing)} are not served by any relay")

    G = np.zeros((H, K), dtype=np.int64)
    for i, n in enumerate(sets):
        G[i, [k - 1 for k in n]] = 1
    G.setflags(write=False)
    return Topology(H=H, K=K, neighbors=sets, G=G)


def connectivity_profile(t: Topology) -> ConnectivityProfile:
    r_k = tuple(int(c) for c in t.G.sum(axis=0))
    groups: dict[int, set[int]] = {z: set() for z in range(1, t.H + 1)}
    for k, rk in enumerate(r_k, start=1):
        groups[rk].add(k)
    return ConnectivityProfile(
        r_k=r_k,
        r=Fraction(sum(r_k), t.K),
        I={z: frozenset(u) for z, u in groups.items()},
    )


def gen_combination(H: int, r: int, eta: int) -> Topology:
    """Symmetric design: one group of ``eta`` users per r-subset of relays."""
    if not 1 <= r < H:
        raise InvalidDegree(f"need 1 <= r < H, got r={r}, H={H}")
    if eta < 1:
        raise TopologyError("eta must be positive")
    neighbors: list[set[int]] = [set() for _ in range(H)]
    k = 1
    for T in itertools.combinations(range(H), r):
        group = range(k, k + eta)
        for i in T:
            neighbors[i].update(group)
        k += eta
    return build_topology(H, neighbors, K=eta * comb(H, r))


def heterogeneous_sizes(K: int, d: Fraction | float | str) -> tuple[int, int, int, int]:
    d = Fraction(d).limit_denominator(10**6) if isinstance(d, float) else Fraction(d)
    if not 0 <= d < Fraction(1, 2):
        raise InfeasibleSizes(f"d must lie in [0, 1/2), got {d}")
    big = (Fraction(1, 2) + d) * K
    small = (Fraction(1, 2) - d) * K
    if big.denominator != 1 or small.denominator != 1:
        raise InfeasibleSizes(f"(1/2 +- {d}) * {K} is not integral")
    return int(big), int(big), int(small), int(small)


def _resample(draw, H: int, what: str) -> Topology:
    for _ in range(MAX_RESAMPLE):
        neighbors, K = draw()
        try:
            return build_topology(H, neighbors, K=K)
        except (EmptyRelay, FullRelay, UncoveredUser):
            continue
    raise CoverageRetryExhausted(f"{what}: no valid topology after {MAX_RESAMPLE} draws")


def gen_heterogeneous(K: int, d: Fraction | float | str, seed: int) -> Topology:
    """Four relays with sizes (1/2+d)K, (1/2+d)K, (1/2-d)K, (1/2-d)K."""
    sizes = heterogeneous_sizes(K, d)
    rng = np.random.default_rng(seed)

    def draw():
        return [set((rng.choice(K, size=s, replace=False) + 1).tolist()) for s in sizes], K

    return _resample(draw, 4, f"heterogeneous(K={K}, d={d})")


def gen_random_regular(K: int, H: int, r: int, seed: int) -> Topology:
    """Every user joins a uniformly random r-subset of the H relays."""
    if not 1 <= r < H:
        raise InvalidDegree(f"need 1 <= r < H, got r={r}, H={H}")
    rng = np.random.default_rng(seed)

    def draw():
        neighbors: list[set[int]] = [set() for _ in range(H)]
        for k in range(1, K + 1):
            for i in rng.choice(H, size=r, replace=False):
                neighbors[i].add(k)
        return neighbors, K

    return _resample(draw, H, f"random_regular(K={K}, H={H}, r={r})")


def topology_from_dict(data: dict) -> Topology:
    try:
        H, K, relays = int(data["H"]), int(data["K"]), data["relays"]
    except (KeyError, TypeError, ValueError) as exc:
        raise TopologyFormatError(f"topology needs integer H, K and a relays list: {exc}") from None
    if not isinstance(relays, list) or len(relays) != H:
        raise TopologyFormatError(f"relays must list exactly H={H} entries")
    for i, users in enumerate(relays, start=1):
        if not isinstance(users, list) or not all(isinstance(k, int) for k in users):
            raise TopologyFormatError(f"relay {i}: expected a list of integers")
        if len(set(users)) != len(users):
            raise TopologyFormatError(f"relay {i}: duplicate user index")
        if any(not 1 <= k <= K for k in users):
            raise TopologyFormatError(f"relay {i}: user index outside 1..{K}")
    return build_topology(H, relays, K=K)


def load_topology(path: str | Path) -> Topology:
    with open(path) as fh:
        return topology_from_dict(json.load(fh))


def save_topology(t: Topology, path: str | Path) -> None:
    relays = ",\n    ".join(json.dumps(r) for r in t.to_dict()["relays"])
    with open(path, "w") as fh:
        fh.write(f'{{\n  "H": {t.H},\n  "K": {t.K},\n  "relays": [\n    {relays}\n  ]\n}}\n')


# Ten-user, five-relay reference topology used throughout the tests and demos.
EXAMPLE_NEIGHBORS = (
    {1, 3, 5, 6, 8, 9, 10},
    {1, 2, 3, 4, 10},
    {2, 4, 5},
    {6, 7, 9, 10},
    {1, 2, 6, 7, 8},
)


def example_topology() -> Topology:
    return build_topology(5, EXAMPLE_NEIGHBORS)
