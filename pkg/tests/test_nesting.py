import math
import random
from fractions import Fraction

import pytest
from hypothesis import given, strategies as st

from tropica import nesting
from tropica.errors import DigitRange, GridTooCoarse, NotPrime
from tropica.nesting import Level


def sort_group_oracle(values):
    """Levels by sorting distinct values descending and grouping exact ties."""
    out = []
    for v in sorted(set(values), reverse=True):
        idx = tuple(i + 1 for i, x in enumerate(values) if x == v)
        out.append((idx, v, len(idx)))
    return out


spectra = st.lists(st.integers(-6, 6), min_size=1, max_size=30)


def test_nest_example_levels():
    nf = nesting.nest((3, 1, 3, 0), "A")
    assert [(lv.indices, lv.mu, lv.nu) for lv in nf.levels] == [((1, 3), 3, 2), ((2,), 1, 1), ((4,), 0, 1)]
    assert nesting.nest((3, 1, 3, 0), "B").levels == tuple(reversed(nf.levels))
    assert nf.L == 2


def test_constant_spectrum_single_level():
    nf = nesting.nest((5, 5, 5))
    assert nf.levels == (Level((1, 2, 3), 5, 3),)


def test_float_ties_join_within_tolerance():
    nf = nesting.nest((1.0, 1.0 + 1e-12, 0.0))
    assert nf.levels[0].nu == 2
    assert nesting.nest((1.0, 1.0 + 1e-12, 0.0), tie_tol=0).levels[0].nu == 1


def test_nest_rejects_bad_input():
    for bad in ((), (math.inf,), (math.nan, 1.0)):
        with pytest.raises(ValueError):
            nesting.nest(bad)
    with pytest.raises(ValueError):
        nesting.nest((1, 2), "C")
    with pytest.raises(ValueError):
        nesting.nest((1, 2), tie_tol=-1)


@given(spectra)
def test_nest_matches_oracle_and_partitions(values):
    nf = nesting.nest(values)
    assert [(lv.indices, lv.mu, lv.nu) for lv in nf.levels] == sort_group_oracle(values)
    flat = sorted(i for lv in nf.levels for i in lv.indices)
    assert flat == list(range(1, len(values) + 1))
    mus = [lv.mu for lv in nf.levels]
    assert all(a > b for a, b in zip(mus, mus[1:]))
    b = nesting.nest(values, "B")
    assert b.levels == tuple(reversed(nf.levels)) and b.reversed() == nf


def test_reconstruct_examples():
    assert nesting.reconstruct(nesting.nest((0, 0))) == 2
    assert nesting.reconstruct(nesting.nest((math.log(3), 0.0))) == pytest.approx(4, rel=1e-15)


def test_reconstruct_many_spectra():
    rng = random.Random(11)
    for i in range(500):
        n = rng.randint(1, 50)
        vals = [rng.uniform(-20, 20) for _ in range(n)]
        if i % 3 == 0:  # force degeneracies
            vals = [rng.choice(vals[:3]) for _ in range(n)]
        for t in "AB":
            r = nesting.reconstruct(nesting.nest(vals, t))
            d = nesting.direct_sum(vals)
            assert abs(r - d) / d <= 1e-12


@given(spectra, st.sampled_from([2, Fraction(3, 2), 10]))
def test_reconstruct_exact_base_is_bit_exact(values, base):
    for t in "AB":
        r = nesting.reconstruct(nesting.nest(values, t), base)
        assert isinstance(r, Fraction) and r == nesting.direct_sum(values, base)


def test_padic_series_examples():
    assert nesting.padic_series((1, 1), 2, "A") == Fraction(3, 2)
    assert nesting.padic_series((1, 1), 2, "B") == 3
    assert nesting.padic_series((0, 0, 0), 5, "A") == 0 == nesting.padic_series((0, 0, 0), 5, "B")
    assert nesting.padic_series((1, 2, 3), 5, "B", truncation=1) == 11


@given(st.lists(st.integers(0, 6), min_size=1, max_size=12), st.integers(0, 11))
def test_padic_b_truncations_are_coherent(digits, L):
    full = nesting.padic_series(digits, 7, "B")
    part = nesting.padic_series(digits, 7, "B", truncation=L)
    assert (full - part) % 7 ** (L + 1) == 0


def test_padic_series_errors():
    with pytest.raises(DigitRange):
        nesting.padic_series((2,), 2)
    with pytest.raises(NotPrime):
        nesting.padic_series((1,), 6)


def test_free_energy_examples():
    assert nesting.free_energy((0, 1), 1) == pytest.approx(-math.log(1 + math.exp(-1)), abs=1e-15)
    assert nesting.free_energy((0, 1), 1) == pytest.approx(-0.313262, abs=1e-6)
    assert nesting.free_energy((2.5,), 0.3) == 2.5
    # huge values never overflow
    assert nesting.free_energy((1e6, 1e6 + 1), 1e-3) == pytest.approx(1e6)


@given(st.lists(st.floats(-5, 5), min_size=1, max_size=10), st.floats(1e-3, 2))
def test_free_energy_level_bound(values, k):
    nf = nesting.nest(values, "B", tie_tol=0)
    kappa0, lam0 = nf.levels[0].mu, nf.levels[0].nu
    f = nesting.free_energy(values, k)
    assert abs(f - kappa0) <= k * math.log(len(values)) + 1e-12
    if len(nf.levels) > 1:
        gap = nf.levels[1].mu - kappa0
        bound = k * (len(values) - lam0) * math.exp(-gap / k)
        assert abs(f - kappa0 + k * math.log(lam0)) <= bound + 1e-12 * (1 + abs(kappa0))


def test_stencil_weights_are_classical():
    import mpmath
    w1 = [float(x) for x in nesting.stencil_weights(1, 2)]
    w2 = [float(x) for x in nesting.stencil_weights(2, 2)]
    assert w1 == pytest.approx([1 / 12, -2 / 3, 0, 2 / 3, -1 / 12], abs=1e-15)
    assert w2 == pytest.approx([-1 / 12, 4 / 3, -5 / 2, 4 / 3, -1 / 12], abs=1e-15)
    assert mpmath.mp.dps == 15  # workdps leaves global precision alone


def test_probe_doubly_degenerate():
    rep = nesting.taylor_probe((0, 0, 1), m_max=3)
    assert rep.ok and rep.lambda0 == 2 and rep.kappa0 == 0
    assert abs(rep.rows[0].estimate) <= 1e-9
    assert abs(rep.rows[1].estimate + math.log(2)) <= 1e-6
    assert rep.rows[2].residual <= 1e-6 and rep.rows[3].residual <= 1e-6


def test_probe_single_and_unique():
    rep = nesting.taylor_probe((0,), m_max=3)
    assert rep.ok and all(abs(r.estimate) <= 1e-12 for r in rep.rows[1:])
    rep = nesting.taylor_probe((0, 0.5, 1.5), m_max=3)
    assert rep.ok and abs(rep.rows[1].estimate) <= 1e-6


def test_probe_random_spectra_with_gap():
    rng = random.Random(5)
    for _ in range(10):
        lam = rng.randint(1, 3)
        vals = [0.0] * lam + [rng.uniform(0.1, 3) for _ in range(rng.randint(0, 6))]
        rng.shuffle(vals)
        assert nesting.taylor_probe(vals).ok


def test_probe_grid_too_coarse():
    with pytest.raises(GridTooCoarse):
        nesting.taylor_probe((0, 0.001))


def test_probe_rejects_bad_grid():
    with pytest.raises(ValueError):
        nesting.taylor_probe((0, 1), k_grid=[0.1, 0.2, 0.05, 0.01])
    with pytest.raises(ValueError):
        nesting.taylor_probe((0, 1), m_max=1)


def test_nesting_form_dict():
    assert nesting.nest((3, 1, 3, 0)).to_dict() == {
        "type": "A", "levels": [{"indices": [1, 3], "mu": 3, "nu": 2}, {"indices": [2], "mu": 1, "nu": 1},
                                {"indices": [4], "mu": 0, "nu": 1}]}
