import itertools

import pytest
from hypothesis import given, strategies as st

from tropica import filters as F
from tropica.errors import EmptyFamily, NotABase, NotAProperFilter
from tropica.filters import Kind, SubsetFamily


def powerset(n):
    return [frozenset(c) for r in range(n + 1) for c in itertools.combinations(range(1, n + 1), r)]


def brute_is_filter(n, fam):
    """Up-closed and closed under pairwise intersection, over explicit frozensets."""
    if not fam:
        return False
    ps = powerset(n)
    up = all(b in fam for a in fam for b in ps if a <= b)
    return up and all(a & b in fam for a in fam for b in fam)


def test_principal_ultrafilter():
    c = F.classify(SubsetFamily.of(3, [[1], [1, 2], [1, 3], [1, 2, 3]]))
    assert c.kind is Kind.ULTRAFILTER and c.zeta == (1,) and c.proper


def test_filter_with_two_point_generator():
    c = F.classify(SubsetFamily.of(3, [[1, 2], [1, 2, 3]]))
    assert c.kind is Kind.FILTER and c.zeta == (1, 2)


def test_full_power_set_is_improper_filter_and_ideal():
    c = F.classify(SubsetFamily(3, frozenset(range(8))))
    assert c.kind is Kind.FILTER and not c.proper and c.is_ideal


def test_ideal_and_neither():
    assert F.classify(SubsetFamily.of(3, [[], [1], [2], [1, 2]])).kind is Kind.IDEAL
    assert F.classify(SubsetFamily.of(3, [[1], [2]])).kind is Kind.NEITHER


def test_empty_family_rejected():
    with pytest.raises(EmptyFamily):
        F.classify(SubsetFamily(3, frozenset()))


def test_extend_base_example():
    ext = F.extend_base(SubsetFamily.of(3, [[1], [1, 2]]), Kind.FILTER)
    assert ext.sorted_members() == [(1,), (1, 2), (1, 2, 3), (1, 3)]


def test_extend_base_rejects_undirected():
    with pytest.raises(NotABase) as exc:
        F.extend_base(SubsetFamily.of(3, [[1], [2]]), Kind.FILTER)
    assert set(exc.value.pair) == {(1,), (2,)}
    with pytest.raises(NotABase):
        F.extend_base(SubsetFamily.of(3, [[1], [2]]), Kind.IDEAL)


def test_dual_swaps_filters_and_ideals():
    for n in range(1, 5):
        for f in F.all_filters(n):
            assert F.classify(F.dual(f)).is_ideal
            assert F.dual(F.dual(f)) == f


@given(st.integers(1, 4).flatmap(lambda n: st.tuples(st.just(n), st.sets(st.integers(0, 2 ** n - 1)))))
def test_classify_matches_brute_force(arg):
    n, members = arg
    fam = SubsetFamily(n, frozenset(members))
    sets = {frozenset(F.members_of(m)) for m in members}
    if not members:
        return
    assert F.is_filter(fam) == brute_is_filter(n, sets)


@given(st.integers(9, 14).flatmap(lambda n: st.tuples(st.just(n), st.integers(0, 2 ** n - 1))))
def test_large_ground_uses_generator(arg):
    n, zeta = arg
    f = F.principal_filter(n, zeta)
    c = F.classify(f)
    assert c.principal_generator == zeta
    assert (c.kind is Kind.ULTRAFILTER) == (F.popcount(zeta) == 1)


def test_finite_filters_are_principal_exhaustive():
    for n in range(1, 5):
        all_sets = range(1 << n)
        count = 0
        # every up-closed, intersection-closed family is principal
        for bits in range(1, 1 << (1 << n)) if n <= 3 else []:
            fam = SubsetFamily(n, frozenset(a for a in all_sets if bits >> a & 1))
            if F.is_filter(fam):
                count += 1
                assert fam == F.principal_filter(n, F.classify(fam).principal_generator)
        if n <= 3:
            assert count == 2 ** n


def test_ultrafilters_are_singletons():
    for n in range(1, 6):
        ultra = [f for f in F.all_filters(n) if F.classify(f).kind is Kind.ULTRAFILTER]
        assert sorted(F.classify(f).zeta for f in ultra) == [(i,) for i in range(1, n + 1)]


def test_filter_measure():
    u = F.principal_filter(3, [2])
    assert F.filter_measure(u, [2, 3]) == 1
    assert F.filter_measure(u, [1, 3]) == 0
    f = F.principal_filter(3, [1, 2])
    assert F.filter_measure(f, [1]) is None
    with pytest.raises(NotAProperFilter):
        F.filter_measure(SubsetFamily(2, frozenset(range(4))), [1])


def test_json_roundtrip():
    f = F.principal_filter(4, [2, 3])
    assert SubsetFamily.from_json(f.to_json()) == f
    assert f.to_json() == '{"ground":4,"members":[[1,2,3],[1,2,3,4],[2,3],[2,3,4]]}'
