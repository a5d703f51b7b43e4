import math

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from collperf import models as M
from collperf.params import SegmentSpec

from conftest import t0_table, tables

T0 = t0_table()

UNSEGMENTED = [
    (M.bcast_flat, 4, 8, 34), (M.bcast_flat, 2, 1, 11), (M.bcast_flat, 16, 128, 1930),
    (M.bcast_flat_rendezvous, 4, 8, 56), (M.bcast_flat_rendezvous, 2, 1, 33),
    (M.bcast_flat_rendezvous, 8, 64, 480),
    (M.bcast_chain, 4, 8, 54), (M.bcast_chain, 2, 8, 18), (M.bcast_chain, 16, 1, 165),
    (M.bcast_chain_rendezvous, 4, 8, 120), (M.bcast_chain_rendezvous, 2, 1, 33),
    (M.bcast_chain_rendezvous, 5, 10, 168),
    (M.bcast_binary, 4, 8, 52), (M.bcast_binary, 2, 8, 26), (M.bcast_binary, 5, 1, 36),
    (M.bcast_binomial, 4, 8, 36), (M.bcast_binomial, 2, 8, 18), (M.bcast_binomial, 5, 8, 46),
    (M.bcast_binomial_rendezvous, 4, 8, 80), (M.bcast_binomial_rendezvous, 2, 1, 33),
    (M.bcast_binomial_rendezvous, 8, 16, 144),
    (M.scatter_flat, 4, 8, 34), (M.scatter_flat, 2, 1, 11), (M.scatter_flat, 24, 100, 2310),
    (M.scatter_chain, 4, 8, 78), (M.scatter_chain, 2, 8, 18), (M.scatter_chain, 5, 1, 50),
    (M.scatter_binomial, 4, 8, 44), (M.scatter_binomial, 2, 8, 18), (M.scatter_binomial, 5, 8, 86),
    (M.alltoall_lower, 4, 8, 34), (M.alltoall_lower, 2, 2, 12), (M.alltoall_lower, 24, 10, 240),
    (M.alltoall_upper, 4, 8, 46), (M.alltoall_upper, 2, 2, 13), (M.alltoall_upper, 24, 10, 355),
]

SEGMENTED = [
    (M.bcast_flat_segmented, 4, 8, 2, 34), (M.bcast_flat_segmented, 4, 8, 8, 34),
    (M.bcast_flat_segmented, 3, 9, 4, 34),
    (M.bcast_pipeline, 4, 8, 2, 42), (M.bcast_pipeline, 4, 8, 8, 54), (M.bcast_pipeline, 8, 64, 4, 158),
    (M.bcast_binomial_segmented, 4, 8, 2, 36), (M.bcast_binomial_segmented, 4, 8, 8, 36),
    (M.bcast_binomial_segmented, 8, 32, 8, 126),
]


@pytest.mark.parametrize("model, P, m, expected", UNSEGMENTED,
                         ids=[f"{f.__name__}-P{P}-m{m}" for f, P, m, _ in UNSEGMENTED])
def test_t0_examples(model, P, m, expected):
    p = model(T0, P, m)
    assert math.isclose(p.time, expected, rel_tol=1e-12)


@pytest.mark.parametrize("model, P, m, s, expected", SEGMENTED,
                         ids=[f"{f.__name__}-P{P}-m{m}-s{s}" for f, P, m, s, _ in SEGMENTED])
def test_t0_segmented_examples(model, P, m, s, expected):
    p = model(T0, P, m, SegmentSpec.for_message(m, s))
    assert math.isclose(p.time, expected, rel_tol=1e-12)
    assert p.segment.s == s


def test_terms_sum_to_time():
    for model, P, m, _ in UNSEGMENTED:
        p = model(T0, P, m)
        assert math.isclose(sum(v for _, v in p.terms), p.time, rel_tol=1e-12)


def test_binary_marked_as_bound():
    assert M.bcast_binary(T0, 4, 8).upper_bound
    assert not M.bcast_binomial(T0, 4, 8).upper_bound


def test_extrapolation_noted():
    p = M.scatter_chain(T0, 4, 500_000)
    assert M.EXTRAPOLATED_NOTE in p.notes
    assert M.EXTRAPOLATED_NOTE not in M.scatter_chain(T0, 4, 8).notes


@pytest.mark.parametrize("P, m", [(1, 8), (0, 8), (4, 0)])
def test_rejects_bad_inputs(P, m):
    with pytest.raises(M.ModelError):
        M.bcast_flat(T0, P, m)


def test_segmented_rejects_mismatched_spec():
    with pytest.raises(M.ModelError):
        M.bcast_pipeline(T0, 4, 8, SegmentSpec(s=2, k=3))
    with pytest.raises(M.ModelError):
        M.bcast_pipeline(T0, 4, 8, None)


def test_log_helpers_exact_on_integers():
    for j in range(1, 60):
        assert M.floor_log2(2**j) == j and M.ceil_log2(2**j) == j
        assert M.ceil_log2(2**j + 1) == j + 1 and M.floor_log2(2**j - 1) == j - 1


@pytest.mark.parametrize("d, h, P, expected", [(2, 2, 7, True), (2, 2, 8, False), (3, 0, 1, True)])
def test_tree_feasible(d, h, P, expected):
    assert M.tree_feasible(d, h, P) is expected


@given(st.integers(1, 200))
def test_tree_feasible_chain(P):
    assert M.tree_feasible(1, P - 1, P)
    assert not M.tree_feasible(1, P - 2, P) if P > 1 else True


@given(st.integers(1, 6), st.integers(0, 8), st.integers(1, 5000))
def test_tree_feasible_matches_sum(d, h, P):
    assert M.tree_feasible(d, h, P) == (sum(d**i for i in range(h + 1)) >= P)


def test_strategy_validation():
    assert M.Strategy.parse("broadcast", "chain_segmented").variant == "pipeline"
    with pytest.raises(M.ModelError):
        M.Strategy("scatter", "pipeline")
    with pytest.raises(M.ModelError):
        M.Strategy("gather", "flat")


# -- invariants over arbitrary valid tables ----------------------------------

sizes = st.integers(1, 1 << 16)
procs = st.integers(2, 64)


@given(tables(), procs, sizes)
def test_reductions_at_one_segment(t, P, m):
    one = SegmentSpec.for_message(m, m)
    assert M.bcast_flat_segmented(t, P, m, one).time == M.bcast_flat(t, P, m).time
    assert M.bcast_pipeline(t, P, m, one).time == M.bcast_chain(t, P, m).time
    assert M.bcast_binomial_segmented(t, P, m, one).time == M.bcast_binomial(t, P, m).time


@given(tables(), sizes)
def test_two_processes_coincide(t, m):
    flat = M.bcast_flat(t, 2, m).time
    assert flat == M.bcast_chain(t, 2, m).time == M.bcast_binomial(t, 2, m).time
    assert flat == M.scatter_chain(t, 2, m).time == M.scatter_binomial(t, 2, m).time


ALL_UNSEGMENTED = sorted({x[0] for x in UNSEGMENTED}, key=lambda f: f.__name__)


@settings(max_examples=50)
@given(tables(), sizes)
def test_monotone_in_process_count(t, m):
    for model in ALL_UNSEGMENTED:
        times = [model(t, P, m).time for P in range(2, 40)]
        assert all(a <= b for a, b in zip(times, times[1:])), model.__name__
    seg = SegmentSpec.for_message(m, max(1, m // 3))
    for model in (M.bcast_flat_segmented, M.bcast_pipeline, M.bcast_binomial_segmented):
        times = [model(t, P, m, seg).time for P in range(2, 40)]
        assert all(a <= b for a, b in zip(times, times[1:])), model.__name__


@given(tables(), procs, sizes)
def test_alltoall_bound_ordering(t, P, m):
    assert M.alltoall_lower(t, P, m).time <= M.alltoall_upper(t, P, m).time


@given(tables(), procs, sizes)
def test_rendezvous_dominates(t, P, m):
    assert M.bcast_flat_rendezvous(t, P, m).time > M.bcast_flat(t, P, m).time
    assert M.bcast_chain_rendezvous(t, P, m).time > M.bcast_chain(t, P, m).time
    assert M.bcast_binomial_rendezvous(t, P, m).time > M.bcast_binomial(t, P, m).time


@given(tables(), procs, sizes, st.sampled_from([1e-3, 0.5, 3.0, 1e3]))
def test_positive_scaling(t, P, m, c):
    scaled = t.scaled(c)
    for model in ALL_UNSEGMENTED:
        assert math.isclose(model(scaled, P, m).time, c * model(t, P, m).time, rel_tol=1e-12)
