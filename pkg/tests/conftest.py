import itertools
import random

import pytest
from hypothesis import strategies as st

from hiercode.topology import (
    TopologyError,
    build_topology,
    example_topology,
    gen_combination,
    gen_heterogeneous,
    gen_random_regular,
)


@pytest.fixture
def example():
    return example_topology()


def brute_force_groups(t):
    """z-connected users straight from the definition: enumerate relay subsets."""
    groups = {}
    for z in range(1, t.H + 1):
        found = set()
        for C in itertools.combinations(range(t.H), z):
            inside = set.intersection(*(set(t.neighbors[i]) for i in C))
            outside = set().union(*(t.neighbors[i] for i in range(t.H) if i not in C))
            found |= inside - outside
        groups[z] = found
    return groups


@st.composite
def topologies(draw, max_h=6, max_k=12):
    H = draw(st.integers(2, max_h))
    K = draw(st.integers(2, max_k))
    rows = draw(st.lists(st.sets(st.integers(1, K), min_size=1, max_size=K - 1), min_size=H, max_size=H))
    covered = set().union(*rows)
    # patch uncovered users onto relays that stay non-full
    for k in range(1, K + 1):
        if k not in covered:
            i = draw(st.integers(0, H - 1))
            rows[i] = rows[i] | {k}
    try:
        return build_topology(H, rows, K=K)
    except TopologyError:
        from hypothesis import assume

        assume(False)


def mixed_topologies(count, seed0=0):
    """Deterministic mix of random-regular, heterogeneous and combination topologies."""
    out = []
    for seed in range(seed0, seed0 + count):
        R = random.Random(seed)
        kind = seed % 3
        if kind == 0:
            H = R.randint(2, 8)
            out.append(gen_random_regular(R.randint(H, 30), H, R.randint(1, H - 1), seed))
        elif kind == 1:
            K = R.choice([4, 8, 12, 20, 24, 28])
            num = R.randint(0, K // 2 - 1)
            out.append(gen_heterogeneous(K, f"{num}/{K}", seed))
        else:
            H = R.randint(3, 6)
            r = R.randint(1, H - 1)
            out.append(gen_combination(H, r, 1))
    return out


def pytest_terminal_summary(terminalreporter):
    mod = __import__("sys").modules.get("test_acceptance")
    if mod and mod.RESULTS:
        terminalreporter.section("acceptance criteria")
        for line in mod.RESULTS:
            terminalreporter.write_line(line)
