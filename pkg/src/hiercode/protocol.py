"""End-to-end training iterations over the two-hop relay network.

One iteration: users compute IVs and hand them verbatim to their relays; the
coded rounds ``z = 1..H-1`` carry IVs relay->server->relay; every relay runs
the global update; each user downloads its model column from one relay.
``run_training`` replays the same iterations through the uncoded pipeline
(relays forward IVs, the server updates and returns every model) and demands
identical model matrices.
"""

from __future__ import annotations

import hashlib
from dataclasses import dataclass, field
from fractions import Fraction
from math import lcm
from typing import Protocol

import numpy as np

from .allocation import RoundAllocation, round_allocations
from .coding import (
    coefficient_stream,
    plan_segments,
    relay_decode,
    relay_encode,
    server_recombine,
)
from .topology import ConnectivityProfile, Topology, connectivity_profile

UPLINK_KEY = 1
SERVER_KEY = 2


class EquivalenceViolation(AssertionError):
    pass


class ConsensusViolation(AssertionError):
    pass


class Learner(Protocol):
    K: int
    dim: int

    def initial_model(self) -> np.ndarray: ...

    def local_update(self, k: int, w_k: np.ndarray, iteration: int) -> np.ndarray: ...

    def global_update(self, ivs: dict[int, np.ndarray], W: np.ndarray) -> np.ndarray: ...


def padded_length(dim: int, allocations: dict[int, RoundAllocation]) -> int:
    """Smallest IV length ``>= dim`` that every round's sub-block grid divides."""
    step = lcm(1, *(a.blocks for a in allocations.values()))
    return -(-dim // step) * step


def checksum(W: np.ndarray) -> str:
    return hashlib.sha256(np.ascontiguousarray(W, dtype=np.int64).tobytes()).hexdigest()


@dataclass
class SystemState:
    topology: Topology
    learner: Learner
    seed: int
    profile: ConnectivityProfile = None
    allocations: dict[int, RoundAllocation] = None
    relay_models: list[np.ndarray] = None
    user_models: dict[int, np.ndarray] = None
    iteration: int = 0

    def __post_init__(self):
        if self.learner.K != self.topology.K:
            raise ValueError(f"learner has {self.learner.K} tasks, topology {self.topology.K} users")
        if self.learner.dim <= 0:
            raise ValueError("IV length must be positive")
        if self.profile is None:
            self.profile = connectivity_profile(self.topology)
        if self.allocations is None:
            self.allocations = round_allocations(self.topology, self.profile)
        W = self.learner.initial_model()
        if self.relay_models is None:
            self.relay_models = [W.copy() for _ in range(self.topology.H)]
        if self.user_models is None:
            self.user_models = {k: W[:, k - 1].copy() for k in range(1, self.topology.K + 1)}

    @property
    def iv_len(self) -> int:
        return padded_length(self.learner.dim, self.allocations)


@dataclass
class IterationReport:
    iteration: int
    user_to_relay: Fraction
    relay_to_server: Fraction
    server_to_relay: Fraction
    relay_to_user: Fraction
    resamples: dict[int, int] = field(default_factory=dict)
    rounds: dict[int, tuple[Fraction, Fraction]] = field(default_factory=dict)
    checksums: list[str] = field(default_factory=list)

    @property
    def loads(self) -> tuple[Fraction, Fraction, Fraction, Fraction]:
        return (self.user_to_relay, self.relay_to_server, self.server_to_relay, self.relay_to_user)

    def as_json(self) -> dict:
        return {
            "iteration": self.iteration,
            "loads": {
                "L_up_UE": str(self.user_to_relay),
                "L_up_ES": str(self.relay_to_server),
                "L_down_SE": str(self.server_to_relay),
                "L_down_EU": str(self.relay_to_user),
            },
            "rounds": {str(z): {"up": str(u), "down": str(d)} for z, (u, d) in self.rounds.items()},
            "resamples": {str(z): n for z, n in self.resamples.items()},
            "relay_checksums": self.checksums,
        }


def _pad(v: np.ndarray, length: int) -> np.ndarray:
    out = np.zeros(length, dtype=np.int64)
    out[:v.size] = v
    return out


def designated_relay(t: Topology, k: int) -> int:
    """Lowest-index relay serving user ``k``; it alone delivers ``w_k``."""
    return t.relays_of(k)[0]


def run_iteration(state: SystemState, log: list | None = None) -> tuple[SystemState, IterationReport]:
    """Advance ``state`` by one coded iteration (mutates and returns it).

    ``log`` collects wire-format dicts of every relay/server message if given.
    """
    t, learner = state.topology, state.learner
    it = state.iteration
    dim, iv_len = learner.dim, state.iv_len

    # users -> relays, verbatim
    ivs = {k: _pad(learner.local_update(k, state.user_models[k], it), iv_len) for k in range(1, t.K + 1)}
    user_sent = Fraction(sum(v.size for v in ivs.values()), iv_len)
    held = [{k: ivs[k] for k in n} for n in t.neighbors]

    up_symbols = down_symbols = 0
    report = IterationReport(it, user_sent, Fraction(0), Fraction(0), Fraction(0))
    for z, alloc in sorted(state.allocations.items()):
        plan = plan_segments(alloc, t, state.profile, iv_len)
        uplink = []
        for i in range(1, t.H + 1):
            rng = coefficient_stream(state.seed, it, z, UPLINK_KEY, i)
            uplink += relay_encode(i, plan, alloc, held[i - 1], rng)
        downlink, rejected = server_recombine(plan, uplink, t, coefficient_stream(state.seed, it, z, SERVER_KEY))
        up_z = sum(m.payload.size for m in uplink)
        down_z = sum(m.payload.size for m in downlink)
        up_symbols += up_z
        down_symbols += down_z
        report.rounds[z] = (Fraction(up_z, iv_len), Fraction(down_z, iv_len))
        report.resamples[z] = rejected
        if log is not None:
            log.extend(m.to_wire() for m in uplink)
            log.extend(m.to_wire() for m in downlink)
        for i in range(1, t.H + 1):
            held[i - 1].update(relay_decode(i, plan, t, uplink, downlink, held[i - 1]))

    # every relay now holds all K IVs and updates its own model copy
    new_models = []
    for i in range(t.H):
        if len(held[i]) != t.K:
            raise ConsensusViolation(f"relay {i + 1} recovered {len(held[i])} of {t.K} IVs")
        relay_ivs = {k: v[:dim] for k, v in held[i].items()}
        new_models.append(learner.global_update(relay_ivs, state.relay_models[i]))
    if any(not np.array_equal(new_models[0], W) for W in new_models[1:]):
        raise ConsensusViolation("relay model copies diverged")

    delivered = 0
    for k in range(1, t.K + 1):
        i = designated_relay(t, k)
        state.user_models[k] = new_models[i - 1][:, k - 1].copy()
        delivered += iv_len

    state.relay_models = new_models
    state.iteration += 1
    report.relay_to_server = Fraction(up_symbols, iv_len)
    report.server_to_relay = Fraction(down_symbols, iv_len)
    report.relay_to_user = Fraction(delivered, iv_len)
    report.checksums = [checksum(W) for W in new_models]
    return state, report


def run_uncoded_iteration(t: Topology, learner: Learner, W: np.ndarray, iteration: int) -> tuple[np.ndarray, tuple]:
    """Forward-everything reference: the server updates and returns every model."""
    ivs = {k: learner.local_update(k, W[:, k - 1], iteration) for k in range(1, t.K + 1)}
    W_new = learner.global_update(ivs, W)
    K = Fraction(t.K)
    return W_new, (K, K, K, K)


@dataclass
class TrainingConfig:
    topology: Topology
    learner: Learner
    iterations: int
    seed: int = 0


@dataclass
class TrainingReport:
    iterations: list[IterationReport]
    uncoded_loads: list[tuple]
    equivalent: bool
    iv_len: int
    dim: int
    final_model: np.ndarray = field(repr=False)

    def as_json(self) -> dict:
        return {
            "iterations": [r.as_json() for r in self.iterations],
            "uncoded_loads": [[str(x) for x in loads] for loads in self.uncoded_loads],
            "equivalent": self.equivalent,
            "iv_len": self.iv_len,
            "iv_len_requested": self.dim,
            "padded": self.iv_len != self.dim,
            "final_checksum": checksum(self.final_model),
        }


def run_training(config: TrainingConfig) -> TrainingReport:
    if config.iterations < 0:
        raise ValueError("iterations must be non-negative")
    state = SystemState(config.topology, config.learner, config.seed)
    W_ref = config.learner.initial_model()
    reports, uncoded = [], []
    for _ in range(config.iterations):
        it = state.iteration
        state, report = run_iteration(state)
        W_ref, loads = run_uncoded_iteration(config.topology, config.learner, W_ref, it)
        for W in state.relay_models:
            if not np.array_equal(W, W_ref):
                raise EquivalenceViolation(f"iteration {it}: coded model differs from uncoded")
        reports.append(report)
        uncoded.append(loads)
    return TrainingReport(reports, uncoded, True, state.iv_len, config.learner.dim, state.relay_models[0])
