"""Fixture suite replayed by ``tropica selftest``: published example values, checked end to end."""

from __future__ import annotations

import math
from fractions import Fraction

from . import amoeba, core, dequantify, filters, nesting, thermo, ultrametrics as um
from .errors import DegenerateDistance


def _diamond():
    # bottom 0, incomparable 1 and 2, top 3
    join = {}
    for a in range(4):
        for b in range(4):
            if a == b or b == 0:
                join[(a, b)] = a
            elif a == 0:
                join[(a, b)] = b
            else:
                join[(a, b)] = 3
    return core.finite_monoid((0, 1, 2, 3), join, neutral=0, name="diamond")


def powerset_union_erasing():
    return core.erasing_element(core.powerset_union((1, 2, 3))) == frozenset({1, 2, 3})


def max_plus_grounded():
    return core.is_grounded(core.max_plus())


def phi_always_homomorphism():
    return all(core.check_homomorphism(lambda y, m=m: core.phi_map(m, y), m, core.phi_codomain(m)).ok
               for n in range(1, 5) for m in core.all_join_semilattices(n))


def iota_diamond_fails():
    m = _diamond()
    res = core.check_homomorphism(lambda y: core.iota_map(m, y), m, core.iota_codomain(m))
    return not res.ok and set(res.witness) == {1, 2}


def polynomial_copy_invariance():
    p = core.TropicalPolynomial(((0, (0,)), (1, (1,)), (-2, (2,))))
    q = p.with_copy(1, 3)
    return all(core.eval_polynomial(p, (x / 10,)) == core.eval_polynomial(q, (x / 10,)) for x in range(-50, 50))


def almost_complete_equivalence():
    for n in range(1, 5):
        for m in core.all_join_semilattices(n):
            if core.is_almost_complete(m) != all(core.iota_almost_complete(m, y) for y in m.elements):
                return False
    return True


def ultrafilter_singleton_generator():
    c = filters.classify(filters.SubsetFamily.of(3, [[1], [1, 2], [1, 3], [1, 2, 3]]))
    return c.kind is filters.Kind.ULTRAFILTER and c.zeta == (1,)


def ball_ideal_trivial():
    m = um.UltrametricMatrix("abcd", [[0, 1, 2, 2], [1, 0, 2, 2], [2, 2, 0, 1], [2, 2, 1, 0]])
    base, proper = um.ball_ideal_base(m)
    ideal = filters.extend_base(base, filters.Kind.IDEAL)
    return not proper and len(ideal) == 16


def euclidean_base_fails():
    return um.euclidean_fixture(20).containment_fails


def degenerate_fixture_raises():
    try:
        um.degenerate_ideal_fixture(8)
    except DegenerateDistance as exc:
        return exc.pair == (1, 2) and exc.sequence[-1][1] == Fraction(1, 2 ** 8)
    return False


def min_form_ideal():
    ideal = filters.SubsetFamily(3, frozenset(range(8)))
    diam = um.DiameterFunction(ideal, lambda a: 1 + filters.popcount(a), um.Monotonicity.INCREASING)
    m = um.ideal_to_ultrametric(ideal, diam, um.Form.MIN_FORM)
    return um.verify_ultrametric(m).valid


def ultrafilter_distance_infinite():
    f = filters.principal_filter(3, [1])
    diam = um.DiameterFunction(f, lambda a: 1 + filters.popcount(a), um.Monotonicity.INCREASING)
    d = um.filter_to_ultrametric(f, diam)
    g = um.filter_to_ultrametric(f, diam, squash=True)
    return d.d[0][1] == math.inf and g.d[0][1] == 1 and g.d[1][2] < 1


def roundtrip_trees():
    import random
    return all(um.roundtrip_check(um.random_tree_ultrametric(n, random.Random(n))).equal for n in range(2, 9))


def deinfinitate_top():
    return um.deinfinitate(math.inf) == 1


def padic_inverse_powers():
    return all(um.padic_norm(Fraction(p) ** -n, p) == Fraction(p) ** n for p in (2, 3, 5, 7) for n in range(-5, 6))


def padic_zero():
    return um.padic_norm(0, 5) == 0


def nesting_reversal():
    s = (3, 1, 3, 0)
    return nesting.nest(s, "B").levels == tuple(reversed(nesting.nest(s, "A").levels))


def free_energy_limit():
    s = (0.3, 1.0, 0.3, 2.0)
    return all(abs(nesting.free_energy(s, k) - min(s)) <= k * math.log(len(s)) for k in (1, 0.1, 0.01))


def probe_first_order():
    rep = nesting.taylor_probe((0, 0, 1), m_max=2)
    return rep.ok and abs(rep.rows[1].estimate + math.log(2)) <= 1e-6


def dual_shift_symmetry():
    e = thermo.Ensemble.of([(0, 1, 2), (1, 0, -1), (2, 2, 0.5)])
    rep = thermo.shift_diagnostics(e, [-3, 0.5, 7])
    return all(r.a_differences_invariant for r in rep.rows)


def usual_probability_ultrafilter():
    s = (2, 0, 1)
    return thermo.usual_probability(s, [2, 3]) == 1 and thermo.usual_probability(s, [1, 3]) == 0


def tropical_weights_normalized():
    e = thermo.Ensemble.of([(1, 0.5, 1), (0, 2, 3), (2, -1, 1)])
    return max(thermo.tropical_weights(e, 1.5).W) == 0


def copy_effect_two():
    return thermo.copy_effect((0, 0, 1), 1) == (Fraction(1, 2), Fraction(2, 3))


def possibility_degenerate():
    r = dequantify.possibility_check((0, 0, 1), [[1], [2]])
    return r.tropical_ok and not r.real_additive_here and r.union_value == 1


def possibility_ultrafilter():
    r = dequantify.possibility_check((0, 1, 1), [[1], [2], [3]])
    return r.tropical_ok and r.real_additive_here and r.real_additive


def amoeba_trace():
    res = amoeba.instability_scan(amoeba.AmoebaModel(3, 1, [(math.log(9), 0, 0)]), threads=1)
    return res.flagged == (0,) and not res.failures


FIXTURES = (
    ("core.powerset_union_erasing", powerset_union_erasing),
    ("core.max_plus_grounded", max_plus_grounded),
    ("core.phi_always_homomorphism", phi_always_homomorphism),
    ("core.iota_diamond_fails", iota_diamond_fails),
    ("core.polynomial_copy_invariance", polynomial_copy_invariance),
    ("core.almost_complete_equivalence", almost_complete_equivalence),
    ("filters.ultrafilter_singleton_generator", ultrafilter_singleton_generator),
    ("ultra.ball_ideal_trivial", ball_ideal_trivial),
    ("ultra.euclidean_base_fails", euclidean_base_fails),
    ("ultra.degenerate_fixture_raises", degenerate_fixture_raises),
    ("ultra.min_form_ideal", min_form_ideal),
    ("ultra.ultrafilter_distance_infinite", ultrafilter_distance_infinite),
    ("ultra.roundtrip_trees", roundtrip_trees),
    ("ultra.deinfinitate_top", deinfinitate_top),
    ("ultra.padic_inverse_powers", padic_inverse_powers),
    ("ultra.padic_zero", padic_zero),
    ("nesting.reversal", nesting_reversal),
    ("nesting.free_energy_limit", free_energy_limit),
    ("nesting.probe_first_order", probe_first_order),
    ("thermo.dual_shift_symmetry", dual_shift_symmetry),
    ("thermo.usual_probability_ultrafilter", usual_probability_ultrafilter),
    ("thermo.tropical_weights_normalized", tropical_weights_normalized),
    ("thermo.copy_effect_two", copy_effect_two),
    ("dequantify.possibility_degenerate", possibility_degenerate),
    ("dequantify.possibility_ultrafilter", possibility_ultrafilter),
    ("amoeba.trace", amoeba_trace),
)


def run_all():
    """(name, passed) for every fixture; an exception counts as a failure."""
    out = []
    for name, fn in FIXTURES:
        try:
            ok = bool(fn())
        except Exception:  # a crashing fixture is a failed fixture
            ok = False
        out.append((name, ok))
    return out
