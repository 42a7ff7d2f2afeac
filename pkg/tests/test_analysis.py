from fractions import Fraction

import pytest
from hypothesis import given, settings

from hiercode.allocation import round_allocations
from hiercode.analysis import (
    GapViolation,
    IndivisibleK,
    LoadPair,
    TimingModel,
    achievable_loads,
    equal_split_saving,
    equal_split_upper_bound,
    flexible_optimal_loads,
    gap_certificates,
    literal_down_load,
    lower_bounds,
    timing,
    uncoded_loads,
)
from hiercode.topology import build_topology, connectivity_profile, gen_combination

from conftest import topologies

F = Fraction


def loads_of(t):
    p = connectivity_profile(t)
    return p, achievable_loads(t, p, round_allocations(t, p))


def test_example_loads(example):
    p, ach = loads_of(example)
    assert ach == LoadPair(F(17, 2), F(7))
    assert uncoded_loads(example) == LoadPair(F(10), F(10))
    assert lower_bounds(example, p) == LoadPair(F(13, 2), F(7))
    assert literal_down_load(example, p) == 7
    assert equal_split_upper_bound(example, p) == F(53, 6)


def test_example_gaps(example):
    p, ach = loads_of(example)
    g = gap_certificates(example, p, ach)
    assert (g.up_gap, g.down_gap, g.bound) == (2, 0, 3)
    assert g.up_lb_certified == 7
    assert g.up_gap_certified == F(3, 2)
    assert g.up_bound_tight == F(11, 6)
    assert g.passed


def test_gap_violation_raised():
    t = gen_combination(4, 2, 1)
    p = connectivity_profile(t)
    with pytest.raises(GapViolation):
        gap_certificates(t, p, LoadPair(F(100), F(100)))
    assert not gap_certificates(t, p, LoadPair(F(100), F(100)), strict=False).passed


@pytest.mark.parametrize("H", range(3, 7))
def test_combination_loads_meet_bounds(H):
    for r in range(1, H):
        for eta in (1, 2):
            t = gen_combination(H, r, eta)
            p, ach = loads_of(t)
            K = t.K
            closed = LoadPair(F(K * (H - r), H - 1), K - F(r * K, H))
            assert ach == lower_bounds(t, p) == closed
            g = gap_certificates(t, p, ach)
            assert (g.up_gap, g.down_gap) == (0, 0)


def test_combination_4_2_1():
    t = gen_combination(4, 2, 1)
    assert loads_of(t)[1] == LoadPair(F(4), F(3))


@pytest.mark.parametrize("H,per", [(2, 3), (3, 2), (5, 1)])
def test_disjoint_relays(H, per):
    t = build_topology(H, [set(range(i * per + 1, (i + 1) * per + 1)) for i in range(H)])
    p, ach = loads_of(t)
    K = H * per
    assert ach.down == K - F(K, H)
    assert ach.up == K
    assert equal_split_saving(t, p) == 0


@pytest.mark.parametrize("K,H,r,expected", [(6, 4, 2, (4, 3)), (2, 2, 1, (2, 1)), (20, 5, 3, (10, 8))])
def test_flexible_optimum(K, H, r, expected):
    assert flexible_optimal_loads(K, H, r) == LoadPair(F(expected[0]), F(expected[1]))


def test_flexible_optimum_needs_divisible_K():
    with pytest.raises(IndivisibleK):
        flexible_optimal_loads(7, 4, 2)
    with pytest.raises(ValueError):
        flexible_optimal_loads(6, 4, 4)


def test_timing_uncoded_spot_check():
    model = TimingModel(F(10**8), F(10**8), F(10**6))
    out = timing((10, 10, 10, 10), model)
    assert out["T_total"] == F(2, 5)
    assert isinstance(out["T_total"], Fraction)


def test_timing_example_coded():
    model = TimingModel(F(10**8), F(10**8), F(10**6), T_comp=F(1, 10))
    out = timing((10, F(17, 2), 7, 10), model)
    assert out["T_comm"] == F(355, 1000)
    assert out["T_total"] == F(455, 1000)


def test_timing_rejects_bad_bandwidth():
    with pytest.raises(ValueError):
        TimingModel(F(0), F(1), F(1))


@given(topologies(max_h=7, max_k=14))
@settings(max_examples=150, deadline=None)
def test_load_ordering(t):
    p, ach = loads_of(t)
    lb = lower_bounds(t, p)
    base = uncoded_loads(t)
    assert lb.up <= ach.up <= equal_split_upper_bound(t, p) <= base.up
    assert lb.down <= ach.down <= literal_down_load(t, p) <= base.down
    g = gap_certificates(t, p, ach)
    assert g.passed
    assert g.up_gap_certified <= g.bound and g.down_gap <= g.bound
