import random
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, strategies as st

from choicewalk.metrics import RunRecord, aggregate, improvement, visit_histogram


def record(cs, mnl=1, visits=None, graph_index=0, partial=()):
    if visits is None:
        visits = [mnl, 1]
    return RunRecord(cs, partial, visits, mnl, 0, graph_index=graph_index)


def test_single_record():
    rep = aggregate([record(10)], 5)
    assert rep.mean_cs_norm == rep.ct_norm == rep.bc_cs_norm == 2.0
    assert rep.replicates == 1 and rep.cs_se_norm == 0.0


def test_two_records():
    rep = aggregate([record(10), record(30)], 10)
    assert (rep.mean_cs_norm, rep.ct_norm, rep.bc_cs_norm) == (2.0, 3.0, 1.0)


def test_mnlct_is_load_of_slowest_run():
    rep = aggregate([record(30, 4), record(10, 9)], 10)
    assert rep.mnlct == 4
    assert rep.bc_mnlcs == 9
    assert rep.mean_mnlcs == 6.5


def test_tied_extremes_do_not_depend_on_order():
    recs = [record(30, 4), record(30, 7), record(10, 9), record(10, 2)]
    for perm in (recs, recs[::-1]):
        rep = aggregate(perm, 10)
        assert (rep.mnlct, rep.bc_mnlcs) == (7, 2)


def test_distributions_sorted_and_complete():
    recs = [record(c, m) for c, m in [(30, 3), (10, 5), (20, 1)]]
    rep = aggregate(recs, 10)
    assert rep.cs_distribution == (10, 20, 30)
    assert rep.mnl_distribution == (1, 3, 5)
    assert rep.cs_sum == 60 and rep.mnl_sum == 9


def test_partial_curve():
    recs = [record(10, partial=(2, 10)), record(20, partial=(4, 20))]
    rep = aggregate(recs, 10, fractions=(Fraction(1, 2), Fraction(1)))
    assert rep.partial_cover_curve == (0.3, 1.5)


def test_standard_errors():
    recs = [record(c, m) for c, m in [(10, 1), (20, 2), (30, 6)]]
    rep = aggregate(recs, 10)
    assert rep.cs_se_norm == pytest.approx(np.std([10, 20, 30], ddof=1) / np.sqrt(3) / 10)
    assert rep.mnlcs_se == pytest.approx(np.std([1, 2, 6], ddof=1) / np.sqrt(3))


def test_aggregate_rejects_empty():
    with pytest.raises(ValueError):
        aggregate([], 5)


@given(st.lists(st.tuples(st.integers(0, 500), st.integers(1, 50)), min_size=1, max_size=30),
       st.integers(1, 100), st.randoms(use_true_random=False))
def test_aggregate_permutation_invariant(pairs, n, rnd):
    recs = [record(c, m, visits=[m]) for c, m in pairs]
    shuffled = recs[:]
    rnd.shuffle(shuffled)
    a, b = aggregate(recs, n), aggregate(shuffled, n)
    assert a == b
    assert a.bc_cs_norm <= a.mean_cs_norm <= a.ct_norm
    assert len(a.cs_distribution) == len(a.mnl_distribution) == len(recs)


@given(st.lists(st.integers(0, 10**6), min_size=1, max_size=20), st.integers(1, 1000))
def test_normalization_is_exact(steps, n):
    recs = [record(s, visits=[1]) for s in steps]
    rep = aggregate(recs, n)
    assert rep.mean_cs_norm == float(Fraction(sum(steps), len(steps) * n))
    assert rep.cs_sum == sum(steps)


def test_improvement_values():
    assert improvement(6.44, 4.87) == pytest.approx(24.3789, abs=1e-4)
    assert int(improvement(6.44, 4.87) * 100) / 100 == 24.37
    assert improvement(7.32, 6.44) == pytest.approx(12.0219, abs=1e-4)
    assert improvement(3.0, 3.0) == 0


@pytest.mark.parametrize("baseline", [0, -1.0])
def test_improvement_rejects_nonpositive_baseline(baseline):
    with pytest.raises(ValueError):
        improvement(baseline, 1.0)


@given(st.floats(1e-3, 1e6), st.floats(0, 1e6))
def test_improvement_inverts(baseline, enhanced):
    pct = improvement(baseline, enhanced)
    assert baseline * (1 - pct / 100) == pytest.approx(enhanced, rel=1e-9, abs=1e-9)


def test_histogram_examples():
    assert visit_histogram([record(1, visits=[1, 1])]) == [0, 2]
    recs = [record(3, 3, visits=[1, 3]), record(3, 3, visits=[3, 1])]
    assert visit_histogram(recs) == [0, 0, 2]


def test_histogram_pools_per_graph_means():
    recs = [record(0, visits=[1, 5], graph_index=0), record(0, visits=[2, 2, 2], graph_index=1)]
    assert visit_histogram(recs) == [0, 1, 3, 0, 0, 1]


def test_histogram_floors_means_into_bins():
    recs = [record(0, visits=[1, 2]), record(0, visits=[2, 2])]
    assert visit_histogram(recs) == [0, 1, 1]


def test_record_equality_and_dict():
    a = RunRecord(3, (1, 3), [1, 2, 1], 2, 0)
    b = RunRecord(3, [1, 3], np.array([1, 2, 1]), 2, 0)
    assert a == b
    assert a != RunRecord(3, (1, 3), [2, 1, 1], 2, 0)
    d = a.to_dict()
    assert d["visit_counts"] == [1, 2, 1] and d["partial_cover_steps"] == [1, 3]


def test_report_summary_keys():
    rep = aggregate([record(5, 2)], 3)
    assert set(rep.summary()) == {"R", "mean_cs_norm", "mean_mnlcs", "ct_norm", "mnlct",
                                  "bc_cs_norm", "bc_mnlcs"}
