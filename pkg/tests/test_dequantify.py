import math
import random
from fractions import Fraction

import pytest
from hypothesis import given, strategies as st

from tropica import dequantify as dq
from tropica.dequantify import CopyIndex, CopySchedule, CopySet
from tropica.errors import NotDisjoint


def test_t_map_examples():
    x = CopySet.of(2, [(1, 1)])
    assert dq.t_map(x) == CopySet.of(2, [(1, 1), (1, 2)])
    assert dq.t_map(CopySet(2)) == CopySet(2)
    c = CopySet.of(2, tails={1: 3})
    assert dq.t_map(c) == c


def test_t_closure_examples():
    assert dq.t_closure(CopySet.of(2, [(1, 1)])) == CopySet.of(2, tails={1: 1})
    c = dq.t_closure(CopySet.of(2, [(1, 3)]))
    assert c.closed and (1, 3) in c and (1, 50) in c and (1, 2) not in c
    assert dq.t_closure(CopySet(2)) == CopySet(2)


def test_members_absorbed_by_tails():
    s = CopySet.of(3, [(1, 5), (1, 1), (2, 2)], tails={1: 3})
    assert s.finite == frozenset({CopyIndex(1, 1), CopyIndex(2, 2)})
    assert s.members_upto(4) == {CopyIndex(1, 1), CopyIndex(1, 3), CopyIndex(1, 4), CopyIndex(2, 2)}
    with pytest.raises(OverflowError):
        len(s)
    with pytest.raises(ValueError):
        CopySet.of(2, [(3, 1)])


copysets = st.builds(
    lambda fin, tails: CopySet.of(3, fin, dict(tails)),
    st.lists(st.tuples(st.integers(1, 3), st.integers(1, 6)), max_size=6),
    st.lists(st.tuples(st.integers(1, 3), st.integers(1, 6)), max_size=3))


def agree_upto(a, b, bound=12):
    return a.members_upto(bound) == b.members_upto(bound)


@given(copysets, copysets)
def test_t_closure_is_a_closure_operator(x, y):
    cx = dq.t_closure(x)
    assert x.issubset(cx)
    assert dq.t_closure(cx) == cx
    if x.issubset(y):
        assert cx.issubset(dq.t_closure(y))
    u = x.union(y)
    assert x.issubset(u) and y.issubset(u)
    # iterating T from x converges to the closure on any finite window
    z = x
    for _ in range(12):
        z = dq.t_map(z)
    assert agree_upto(z, cx, 12) or not x.finite


@given(copysets, copysets)
def test_closed_sets_intersect_to_closed(x, y):
    i = dq.t_closure(x).intersection(dq.t_closure(y))
    assert i.closed and dq.t_map(i) == i
    assert i.members_upto(10) == dq.t_closure(x).members_upto(10) & dq.t_closure(y).members_upto(10)


def test_gibbs_weights_examples():
    assert dq.gibbs_weights((0, 0), 1) == [0.5, 0.5]
    w = dq.gibbs_weights((0, 0.3 * math.log(2)), 0.3)
    assert w == pytest.approx([2 / 3, 1 / 3], abs=1e-15)
    w = dq.gibbs_weights((0, 10), 0.01)
    assert w[0] == 1 and w[1] <= math.exp(-1000)


@given(st.lists(st.floats(-1e3, 1e3), min_size=1, max_size=40), st.floats(1e-4, 1e3))
def test_gibbs_weights_sum_to_one(f, k):
    w = dq.gibbs_weights(f, k)
    assert abs(math.fsum(w) - 1) <= 1e-14 and all(x >= 0 for x in w)


def test_gibbs_with_copies_examples():
    assert dq.gibbs_with_copies((0, 0), 1, 2) == pytest.approx(2 / 3, abs=1e-15)
    f = (0.2, 1.3, 0.7)
    assert [dq.gibbs_with_copies(f, a, 1) for a in (1, 2, 3)] == pytest.approx(dq.gibbs_weights(f, 1), abs=1e-15)
    # lambda0 = 1: the finite-N form N/(lambda0 - 1 + N) collapses to 1
    assert abs(dq.gibbs_with_copies((0, 1), 1, 100) - 1) <= math.exp(-100) + 1e-15
    # a doubly degenerate pair reaches N/(N + 1)
    assert dq.gibbs_with_copies((0, 0), 1, 100) == pytest.approx(100 / 101, abs=1e-12)
    with pytest.raises(ValueError):
        dq.gibbs_with_copies((0, 0), 3, 2)


def test_log_weight_survives_underflow():
    lw = dq.log_gibbs_with_copies((0, 0, 1), 3, 4096)
    assert dq.gibbs_with_copies((0, 0, 1), 3, 4096) == 0
    assert lw == pytest.approx(math.log(4096) - 4096 - math.log(2), rel=1e-12)


@given(st.lists(st.integers(1, 50), min_size=1, max_size=8), st.integers(1, 20))
def test_copying_everything_changes_nothing(factors, n):
    factors = [Fraction(x, 7) for x in factors]
    assert dq.copied_weights(factors, [n] * len(factors)) == dq.copied_weights(factors, [1] * len(factors))


def test_copied_weights_single_copy_matches_formula():
    factors = [Fraction(1), Fraction(1), Fraction(1, 3)]
    w = dq.copied_weights(factors, [2, 1, 1])
    assert w[0] == Fraction(2, 2 + 1 + Fraction(1, 3))


def test_schedule_parse():
    assert CopySchedule.parse("pow2:3").N_list == (2, 4, 8)
    assert CopySchedule.parse("1,5,9").N_list == (1, 5, 9)
    with pytest.raises(ValueError):
        CopySchedule.parse("5,3")


def test_dominant_convergence_bound():
    r = dq.dequantified_weight((0, 0, 1), 1, CopySchedule.parse("pow2:12"))
    assert r.dominant and r.limit == 1 and r.converged
    for row in r.rows:
        assert abs(row.w - 1) <= 1 / row.N + 1e-12
        assert row.gap == pytest.approx(1 - row.w, abs=1e-15)
    assert next(row.gap for row in r.rows if row.N == 1024) <= 1e-3
    assert r.rate <= r.lambda0


def test_non_dominant_convergence():
    r = dq.dequantified_weight((0, 0, 1), 3, CopySchedule.parse("pow2:12"))
    assert not r.dominant and r.limit == 0 and r.converged
    assert next(row.w for row in r.rows if row.N == 128) <= 1e-30
    for row in r.rows:
        assert row.w <= row.N * math.exp(-row.N * 1) + 1e-300
    assert r.rate == pytest.approx(1, rel=1e-2)  # ln N and the degenerate pair bend the fit slightly


def test_constant_spectrum_all_dominant():
    for a in (1, 2, 3):
        r = dq.dequantified_weight((2, 2, 2), a, CopySchedule.parse("pow2:8"))
        assert r.dominant and r.converged


def test_dequantified_limits_indicator_on_random_spectra():
    rng = random.Random(9)
    for _ in range(30):
        lam = rng.randint(1, 3)
        f = [0.0] * lam + [rng.uniform(0.1, 2) for _ in range(rng.randint(1, 4))]
        rng.shuffle(f)
        for a in range(1, len(f) + 1):
            r = dq.dequantified_weight(f, a, CopySchedule.parse("pow2:12"))
            assert r.limit == (1 if f[a - 1] == 0 else 0) and r.converged


def test_possibility_examples():
    r = dq.possibility_check((0, 0, 1), [[1], [2]])
    assert r.block_values == (1, 1) and r.union_value == 1 and r.tropical_ok
    assert not r.real_additive_here and not r.real_additive
    r = dq.possibility_check((0, 0, 1), [[3]])
    assert r.block_values == (0,) and r.union_value == 0
    r = dq.possibility_check((0, 1, 1), [[1], [2, 3]])
    assert r.tropical_ok and r.real_additive_here and r.real_additive
    with pytest.raises(NotDisjoint):
        dq.possibility_check((0, 1), [[1], [1, 2]])
