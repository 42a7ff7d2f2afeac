"""Coded relay<->server exchange for one round.

Every IV of a round-``z`` user is cut into ``L = 1/alpha_grid`` sub-blocks and
each sub-block is owned by exactly one relay slot. Relay ``i`` sends ``n_i``
messages; slot ``s`` of a message is a random combination of the slot-``s``
sub-blocks it owns. The server mixes all received slot equations into
``L * (|I_z| - min_i |N_i & I_z|)`` downlink messages, which every relay solves
after substituting the sub-blocks it already holds.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Mapping, Sequence

import numpy as np

from . import gf
from .allocation import RoundAllocation
from .topology import ConnectivityProfile, Topology

MAX_RESAMPLE = 64
SERVER = 0


class CodingError(RuntimeError):
    pass


class CoverageGap(CodingError):
    pass


class ResampleExhausted(CodingError):
    pass


def coefficient_stream(seed: int, *key: int) -> np.random.Generator:
    """Counter-based (Philox) generator keyed by ``(seed, *key)``."""
    return np.random.Generator(np.random.Philox(np.random.SeedSequence([seed, *key])))


@dataclass(frozen=True)
class SegmentPlan:
    z: int
    users: tuple[int, ...]
    blocks: int
    block_len: int
    slots: tuple[int, ...]
    # user -> owning (relay, slot) of each of its sub-blocks, in sub-block order
    owner: Mapping[int, tuple[tuple[int, int], ...]]
    # relay -> IVs it combines (sorted N_i & I_z)
    group: Mapping[int, tuple[int, ...]]

    @property
    def iv_len(self) -> int:
        return self.blocks * self.block_len

    def column(self, k: int, b: int) -> int:
        return self.users.index(k) * self.blocks + b

    def held(self, i: int, s: int) -> list[tuple[int, int]]:
        """``(user, sub-block)`` pairs owned by slot ``s`` of relay ``i``."""
        return [(k, b) for k in self.group[i] for b, own in enumerate(self.owner[k]) if own == (i, s)]

    def segments(self, k: int) -> dict[int, list[int]]:
        """Relay -> sub-block indices of IV ``k`` it owns."""
        out: dict[int, list[int]] = {}
        for b, (i, _) in enumerate(self.owner[k]):
            out.setdefault(i, []).append(b)
        return out


@dataclass(frozen=True)
class UplinkRelayMsg:
    z: int
    relay: int
    index: int
    coeffs: np.ndarray = field(repr=False)  # (slots, |group|)
    payload: np.ndarray = field(repr=False)  # slots * block_len symbols

    def to_wire(self) -> dict:
        return {
            "z": self.z,
            "sender": self.relay,
            "index": self.index,
            "coeffs": self.coeffs.ravel().tolist(),
            "payload": self.payload.tolist(),
        }

    @classmethod
    def from_wire(cls, data: dict, plan: SegmentPlan) -> UplinkRelayMsg:
        i = data["sender"]
        coeffs = np.asarray(data["coeffs"], dtype=np.int64).reshape(plan.slots[i - 1], len(plan.group[i]))
        return cls(data["z"], i, data["index"], coeffs, np.asarray(data["payload"], dtype=np.int64))


@dataclass(frozen=True)
class DownlinkServerMsg:
    z: int
    index: int
    coeffs: np.ndarray = field(repr=False)  # one per uplink slot equation
    payload: np.ndarray = field(repr=False)  # block_len symbols

    def to_wire(self) -> dict:
        return {
            "z": self.z,
            "sender": SERVER,
            "index": self.index,
            "coeffs": self.coeffs.tolist(),
            "payload": self.payload.tolist(),
        }

    @classmethod
    def from_wire(cls, data: dict) -> DownlinkServerMsg:
        return cls(
            data["z"],
            data["index"],
            np.asarray(data["coeffs"], dtype=np.int64),
            np.asarray(data["payload"], dtype=np.int64),
        )


def plan_segments(alloc: RoundAllocation, t: Topology, profile: ConnectivityProfile, iv_len: int) -> SegmentPlan:
    """Assign sub-blocks greedily by ascending relay index.

    A relay takes up to its slot count per IV; assignment stops once the IV
    is covered, so over-covered users leave trailing slots empty.
    """
    L = alloc.blocks
    if iv_len <= 0 or iv_len % L:
        raise ValueError(f"IV length {iv_len} must be a positive multiple of {L}")
    users = tuple(sorted(profile.users(alloc.z)))
    slots = tuple(alloc.slots(i) for i in range(1, t.H + 1))
    owner = {}
    for k in users:
        blocks: list[tuple[int, int]] = []
        for i in t.relays_of(k):
            for s in range(slots[i - 1]):
                if len(blocks) == L:
                    break
                blocks.append((i, s))
        if len(blocks) < L:
            raise CoverageGap(f"user {k}: only {len(blocks)} of {L} sub-blocks placed")
        owner[k] = tuple(blocks)
    group = {i: tuple(sorted(t.neighbors[i - 1] & set(users))) for i in range(1, t.H + 1)}
    return SegmentPlan(alloc.z, users, L, iv_len // L, slots, owner, group)


def _sub_block(ivs: Mapping[int, np.ndarray], plan: SegmentPlan, k: int, b: int) -> np.ndarray:
    return ivs[k][b * plan.block_len:(b + 1) * plan.block_len]


def relay_encode(i: int, plan: SegmentPlan, alloc: RoundAllocation, ivs: Mapping[int, np.ndarray], rng: np.random.Generator) -> list[UplinkRelayMsg]:
    a = plan.slots[i - 1]
    count = alloc.n[i - 1]
    if a == 0 or count == 0:
        return []
    members = plan.group[i]
    # (slot, member) -> sub-block symbols; zero where the slot holds nothing of that IV
    blocks = np.zeros((a, len(members), plan.block_len), dtype=np.int64)
    for s in range(a):
        for k, b in plan.held(i, s):
            blocks[s, members.index(k)] = _sub_block(ivs, plan, k, b)
    msgs = []
    for j in range(1, count + 1):
        coeffs = gf.random_matrix(rng, (a, len(members)))
        payload = np.concatenate([gf.matmul(coeffs[s:s + 1], blocks[s])[0] for s in range(a)])
        msgs.append(UplinkRelayMsg(plan.z, i, j, coeffs, payload))
    return msgs


def uplink_system(plan: SegmentPlan, msgs: Sequence[UplinkRelayMsg]) -> tuple[np.ndarray, np.ndarray]:
    """Slot equations of the round: coefficient matrix over all sub-blocks and their payloads."""
    ordered = sorted(msgs, key=lambda m: (m.relay, m.index))
    rows, payloads = [], []
    for m in ordered:
        members = plan.group[m.relay]
        for s in range(plan.slots[m.relay - 1]):
            row = np.zeros(len(plan.users) * plan.blocks, dtype=np.int64)
            for k, b in plan.held(m.relay, s):
                row[plan.column(k, b)] = m.coeffs[s, members.index(k)]
            rows.append(row)
            payloads.append(m.payload[s * plan.block_len:(s + 1) * plan.block_len])
    width = len(plan.users) * plan.blocks
    if not rows:
        return np.zeros((0, width), dtype=np.int64), np.zeros((0, plan.block_len), dtype=np.int64)
    return np.array(rows), np.array(payloads)


def downlink_count(plan: SegmentPlan, t: Topology) -> int:
    users = set(plan.users)
    least = min(len(n & users) for n in t.neighbors)
    return plan.blocks * (len(users) - least)


def unknown_columns(plan: SegmentPlan, t: Topology, i: int) -> list[int]:
    return [plan.column(k, b) for k in plan.users if k not in t.neighbors[i - 1] for b in range(plan.blocks)]


def verify_decodable(plan: SegmentPlan, msgs: Sequence[UplinkRelayMsg], server_coeffs: np.ndarray, t: Topology) -> bool:
    """Whether every relay's reduced downlink system has full column rank."""
    M, _ = uplink_system(plan, msgs)
    S = np.asarray(server_coeffs, dtype=np.int64).reshape(-1, M.shape[0])
    composed = gf.matmul(S, M)
    for i in range(1, t.H + 1):
        cols = unknown_columns(plan, t, i)
        if cols and gf.rank(composed[:, cols]) < len(cols):
            return False
    return True


def server_recombine(plan: SegmentPlan, msgs: Sequence[UplinkRelayMsg], t: Topology, rng: np.random.Generator,
                     max_attempts: int = MAX_RESAMPLE) -> tuple[list[DownlinkServerMsg], int]:
    """Mix the uplink slot equations into the round's downlink messages.

    Returns the messages and the number of rejected coefficient draws.
    """
    count = downlink_count(plan, t)
    M, Y = uplink_system(plan, msgs)
    if count == 0:
        return [], 0
    for attempt in range(max_attempts):
        S = gf.random_matrix(rng, (count, M.shape[0]))
        if verify_decodable(plan, msgs, S, t):
            payload = gf.matmul(S, Y)
            return [DownlinkServerMsg(plan.z, n + 1, S[n], payload[n]) for n in range(count)], attempt
    raise ResampleExhausted(f"round z={plan.z}: no decodable server code in {max_attempts} draws")


def relay_decode(i: int, plan: SegmentPlan, t: Topology, uplink: Sequence[UplinkRelayMsg],
                 downlink: Sequence[DownlinkServerMsg], local: Mapping[int, np.ndarray]) -> dict[int, np.ndarray]:
    """Recover every round-``z`` IV at relay ``i`` from its own IVs and the server messages."""
    known = [k for k in plan.users if k in t.neighbors[i - 1]]
    out = {k: np.asarray(local[k], dtype=np.int64) for k in known}
    cols = unknown_columns(plan, t, i)
    if not cols:
        return out
    M, _ = uplink_system(plan, uplink)
    S = np.array([m.coeffs for m in sorted(downlink, key=lambda m: m.index)], dtype=np.int64)
    Y = np.array([m.payload for m in sorted(downlink, key=lambda m: m.index)], dtype=np.int64)
    A = gf.matmul(S, M)
    known_cols = [plan.column(k, b) for k in known for b in range(plan.blocks)]
    if known_cols:
        X_known = np.array([_sub_block(out, plan, k, b) for k in known for b in range(plan.blocks)])
        Y = (Y - gf.matmul(A[:, known_cols], X_known)) % gf.P
    X = gf.solve(A[:, cols], Y)
    L = plan.blocks
    for n, k in enumerate(k for k in plan.users if k not in t.neighbors[i - 1]):
        out[k] = X[n * L:(n + 1) * L].ravel()
    return out
