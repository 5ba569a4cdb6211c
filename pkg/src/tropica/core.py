"""Idempotent monoids, their induced order and the finite lattice machinery.

Carriers come in two flavours.  Finite carriers list their elements and are
checked exhaustively (up to ``EXHAUSTIVE_CAP`` elements, random spot checks
beyond).  Symbolic carriers such as max-plus over the extended reals cannot
be scanned, so they carry a small registry of known structural facts.
"""

from __future__ import annotations

import itertools
import math
import random
from dataclasses import dataclass, field
from enum import Enum
from fractions import Fraction
from typing import Any, Callable, Hashable, Iterable, Mapping, Sequence

from .errors import (
    DimensionMismatch,
    DomainMismatch,
    NotAMonoid,
    NotHomomorphism,
    NotIdempotent,
    NotTotallyOrdered,
    Unsupported,
)

NEG_INF = float("-inf")
POS_INF = float("inf")
FLOAT_TOL = 1e-12
EXHAUSTIVE_CAP = 8


class Mode(str, Enum):
    MAX = "max"
    MIN = "min"

    @property
    def neutral(self):
        return NEG_INF if self is Mode.MAX else POS_INF

    @property
    def op(self):
        return max if self is Mode.MAX else min

    def flip(self) -> "Mode":
        return Mode.MIN if self is Mode.MAX else Mode.MAX


def is_exact(x) -> bool:
    return isinstance(x, (int, Fraction))


def ext_eq(a, b, tol: float = FLOAT_TOL) -> bool:
    """Equality of extended reals: exact for rationals, absolute tolerance for floats."""
    if a == b:
        return True
    if is_exact(a) and is_exact(b):
        return False
    if math.isinf(a) or math.isinf(b):
        return False
    return abs(a - b) <= tol


def oplus(a, b, mode: Mode = Mode.MAX):
    # float('-inf') / float('inf') compare correctly against ints and Fractions
    return mode.op(a, b)


def oplus_eps(x: float, y: float, eps: float) -> float:
    """eps * log(exp(x/eps) + exp(y/eps)), evaluated around the larger argument."""
    if eps <= 0:
        raise ValueError("eps must be positive")
    hi, lo = (x, y) if x >= y else (y, x)
    return hi + eps * math.log1p(math.exp((lo - hi) / eps))


# --------------------------------------------------------------------------
# monoids


@dataclass(frozen=True, eq=False)
class TropicalMonoid:
    name: str
    add: Callable[[Any, Any], Any]
    neutral: Any
    elements: tuple | None = None
    member: Callable[[Any], bool] | None = None
    facts: Mapping[str, Any] = field(default_factory=dict)
    tol: float = FLOAT_TOL

    @property
    def finite(self) -> bool:
        return self.elements is not None

    def __contains__(self, x) -> bool:
        if self.member is not None:
            return self.member(x)
        if self.elements is not None:
            return x in self._element_set
        raise Unsupported(f"membership undefined for {self.name}")

    @property
    def _element_set(self):
        s = self.__dict__.get("_eset")
        if s is None:
            s = frozenset(self.elements)
            object.__setattr__(self, "_eset", s)
        return s

    def eq(self, a, b) -> bool:
        if isinstance(a, (int, float, Fraction)) and isinstance(b, (int, float, Fraction)):
            return ext_eq(a, b, self.tol)
        return a == b

    def leq(self, x, y) -> bool:
        return self.eq(self.add(x, y), y)

    def lt(self, x, y) -> bool:
        return self.leq(x, y) and not self.eq(x, y)

    def sum(self, xs: Iterable):
        acc = self.neutral
        for x in xs:
            acc = self.add(acc, x)
        return acc

    def __repr__(self):
        size = len(self.elements) if self.elements is not None else "inf"
        return f"TropicalMonoid({self.name}, size={size})"


def check_monoid(m: TropicalMonoid, cap: int = EXHAUSTIVE_CAP, samples: int = 2000, seed: int = 0):
    """Raise if the finite carrier of ``m`` violates the tropical monoid laws."""
    if not m.finite:
        return
    els = m.elements
    for x in els:
        if not m.eq(m.add(x, x), x):
            raise NotIdempotent(f"{x!r} + {x!r} != {x!r}")
        if not m.eq(m.add(m.neutral, x), x):
            raise NotAMonoid(f"neutral {m.neutral!r} does not fix {x!r}")
    for x, y in itertools.combinations(els, 2):
        s = m.add(x, y)
        if s not in m:
            raise NotAMonoid(f"{x!r} + {y!r} leaves the carrier")
        if not m.eq(s, m.add(y, x)):
            raise NotAMonoid(f"addition not commutative on {x!r}, {y!r}")
    if len(els) <= cap:
        triples = itertools.product(els, repeat=3)
    else:
        rng = random.Random(seed)
        triples = ((rng.choice(els), rng.choice(els), rng.choice(els)) for _ in range(samples))
    for x, y, z in triples:
        if not m.eq(m.add(m.add(x, y), z), m.add(x, m.add(y, z))):
            raise NotAMonoid(f"addition not associative on {x!r}, {y!r}, {z!r}")


def finite_monoid(elements: Sequence, add, neutral=None, name: str = "finite", check: bool = True,
                  cap: int = EXHAUSTIVE_CAP) -> TropicalMonoid:
    """Build a finite monoid from an element list and an addition table or function.

    ``add`` may be a callable or a mapping ``{(a, b): c}``; missing ``(b, a)``
    entries are filled by commutativity.  The neutral element is located by
    scanning when not given.
    """
    els = tuple(elements)
    if isinstance(add, Mapping):
        table = dict(add)
        for (a, b), c in list(table.items()):
            table.setdefault((b, a), c)

        def add_fn(a, b, _t=table):
            try:
                return _t[(a, b)]
            except KeyError:
                raise NotAMonoid(f"table has no entry for ({a!r}, {b!r})") from None
    else:
        add_fn = add
    if neutral is None:
        cands = [e for e in els if all(add_fn(e, x) == x for x in els)]
        if len(cands) != 1:
            raise NotAMonoid("no unique neutral element")
        neutral = cands[0]
    m = TropicalMonoid(name=name, add=add_fn, neutral=neutral, elements=els)
    if check:
        check_monoid(m, cap=cap)
    return m


def chain(values: Sequence, mode: Mode = Mode.MAX) -> TropicalMonoid:
    """Finite totally ordered monoid on ``values`` with max (or min) addition."""
    vals = tuple(sorted(set(values), reverse=(mode is Mode.MIN)))
    return finite_monoid(vals, mode.op, neutral=vals[0], name=f"chain-{mode.value}")


def _is_number(x):
    return isinstance(x, (int, float, Fraction)) and not (isinstance(x, float) and math.isnan(x))


def max_plus() -> TropicalMonoid:
    return TropicalMonoid("MAX_PLUS", max, NEG_INF,
                          member=lambda x: _is_number(x) and x != POS_INF,
                          facts={"erasing": None, "total": True})


def min_plus() -> TropicalMonoid:
    return TropicalMonoid("MIN_PLUS", min, POS_INF,
                          member=lambda x: _is_number(x) and x != NEG_INF,
                          facts={"erasing": None, "total": True})


def nat_max() -> TropicalMonoid:
    return TropicalMonoid("NAT_MAX", max, 0,
                          member=lambda x: isinstance(x, int) and not isinstance(x, bool) and x >= 0,
                          facts={"erasing": None, "total": True})


def _ground(ground) -> tuple:
    return tuple(range(1, ground + 1)) if isinstance(ground, int) else tuple(ground)


def _powerset(ground: tuple) -> tuple:
    return tuple(frozenset(c) for r in range(len(ground) + 1)
                 for c in itertools.combinations(ground, r))


def powerset_union(ground, enumerate_limit: int = 12) -> TropicalMonoid:
    """(P(ground), union, empty set); ground is ``n`` (meaning 1..n) or an iterable."""
    g = _ground(ground)
    full = frozenset(g)
    els = _powerset(g) if len(g) <= enumerate_limit else None
    return TropicalMonoid(f"POWERSET_UNION({len(g)})", frozenset.union, frozenset(), elements=els,
                          member=lambda x: isinstance(x, frozenset) and x <= full,
                          facts={"erasing": full, "total": len(g) <= 1})


def powerset_intersection(ground, enumerate_limit: int = 12) -> TropicalMonoid:
    g = _ground(ground)
    full = frozenset(g)
    els = _powerset(g) if len(g) <= enumerate_limit else None
    return TropicalMonoid(f"POWERSET_INTERSECTION({len(g)})", frozenset.intersection, full, elements=els,
                          member=lambda x: isinstance(x, frozenset) and x <= full,
                          facts={"erasing": frozenset(), "total": len(g) <= 1})


# --------------------------------------------------------------------------
# induced order


@dataclass(frozen=True)
class InducedOrder:
    monoid: TropicalMonoid
    pairs: frozenset | None  # explicit (x, y) with x <= y, finite carriers only

    def leq(self, x, y) -> bool:
        if self.pairs is not None:
            return (x, y) in self.pairs
        return self.monoid.leq(x, y)

    def lt(self, x, y) -> bool:
        return self.leq(x, y) and not self.monoid.eq(x, y)


def induced_order(m: TropicalMonoid) -> InducedOrder:
    """x <= y iff x + y == y.  Finite carriers are verified to give a partial order."""
    if not m.finite:
        return InducedOrder(m, None)
    els = m.elements
    for x in els:
        if not m.eq(m.add(x, x), x):
            raise NotIdempotent(f"{x!r} + {x!r} != {x!r}")
    pairs = frozenset((x, y) for x in els for y in els if m.leq(x, y))
    for x, y in itertools.combinations(els, 2):
        if (x, y) in pairs and (y, x) in pairs:
            raise NotAMonoid(f"induced relation not antisymmetric on {x!r}, {y!r}")
    if len(els) <= 64:
        for x, y, z in itertools.product(els, repeat=3):
            if (x, y) in pairs and (y, z) in pairs and (x, z) not in pairs:
                raise NotAMonoid(f"induced relation not transitive on {x!r}, {y!r}, {z!r}")
    return InducedOrder(m, pairs)


def is_total(m: TropicalMonoid) -> bool:
    if not m.finite:
        if "total" in m.facts:
            return m.facts["total"]
        raise Unsupported(f"totality unknown for {m.name}")
    return all(m.leq(x, y) or m.leq(y, x) for x, y in itertools.combinations(m.elements, 2))


def erasing_element(m: TropicalMonoid):
    """The absorbing element of addition, or None when the monoid is grounded."""
    if not m.finite:
        if "erasing" in m.facts:
            return m.facts["erasing"]
        raise Unsupported(f"no registered erasing-element fact for {m.name}")
    for t in m.elements:
        if all(m.eq(m.add(a, t), t) for a in m.elements):
            return t
    return None


def is_grounded(m: TropicalMonoid) -> bool:
    return erasing_element(m) is None


# --------------------------------------------------------------------------
# homomorphisms


@dataclass(frozen=True)
class HomomorphismCheck:
    ok: bool
    witness: tuple | None = None

    def __bool__(self):
        return self.ok


def check_homomorphism(f: Callable, m1: TropicalMonoid, m2: TropicalMonoid) -> HomomorphismCheck:
    """Check f(neutral) == neutral and f(x + y) == f(x) + f(y) over a finite source."""
    if not m1.finite:
        raise Unsupported("homomorphism checks need a finite source carrier")
    image = {}
    for x in m1.elements:
        y = f(x)
        if y not in m2:
            raise DomainMismatch(f"f({x!r}) = {y!r} is outside {m2.name}")
        image[x] = y
    if not m2.eq(image[m1.neutral], m2.neutral):
        return HomomorphismCheck(False, ("neutral", m1.neutral))
    for x, y in itertools.combinations_with_replacement(m1.elements, 2):
        if not m2.eq(f(m1.add(x, y)), m2.add(image[x], image[y])):
            return HomomorphismCheck(False, (x, y))
    return HomomorphismCheck(True)


def iota_map(m: TropicalMonoid, y) -> frozenset:
    """Strict down-set {x : x < y}."""
    return frozenset(x for x in _elements(m) if m.lt(x, y))


def phi_map(m: TropicalMonoid, y) -> frozenset:
    """Up-set {x : y <= x}."""
    return frozenset(x for x in _elements(m) if m.leq(y, x))


def _elements(m):
    if not m.finite:
        raise Unsupported(f"{m.name} has no finite carrier")
    return m.elements


def iota_codomain(m: TropicalMonoid) -> TropicalMonoid:
    return powerset_union(_elements(m))


def phi_codomain(m: TropicalMonoid) -> TropicalMonoid:
    return powerset_intersection(_elements(m))


# --------------------------------------------------------------------------
# polynomials


@dataclass(frozen=True)
class TropicalPolynomial:
    monomials: tuple  # ((coefficient, (i_1, ..., i_n)), ...)
    mode: Mode = Mode.MAX

    @property
    def nvars(self) -> int:
        return len(self.monomials[0][1]) if self.monomials else 0

    def with_copy(self, index: int, times: int = 1) -> "TropicalPolynomial":
        return TropicalPolynomial(self.monomials + (self.monomials[index],) * times, self.mode)


def eval_polynomial(p: TropicalPolynomial, x: Sequence):
    x = tuple(x)
    acc = p.mode.neutral
    for coef, exps in p.monomials:
        if len(exps) != len(x):
            raise DimensionMismatch(f"monomial has {len(exps)} exponents, input has {len(x)}")
        if coef == p.mode.neutral:
            continue
        term = coef
        for i, xi in zip(exps, x):
            if i:  # X^0 is the multiplicative unit, even for infinite X
                term = term + i * xi
        acc = p.mode.op(acc, term)
    return acc


# --------------------------------------------------------------------------
# almost complete lattices and chain extraction


class _Top:
    _inst = None

    def __new__(cls):
        if cls._inst is None:
            cls._inst = super().__new__(cls)
        return cls._inst

    def __repr__(self):
        return "TOP"


TOP = _Top()


def least_upper_bound(subset: Iterable, elements: Sequence, leq: Callable):
    """Least upper bound of ``subset`` among ``elements`` extended by TOP.

    Returns TOP when no element of the carrier is a least upper bound.
    """
    subset = list(subset)
    ubs = [u for u in elements if all(leq(s, u) for s in subset)]
    least = [u for u in ubs if all(leq(u, v) for v in ubs)]
    return least[0] if least else TOP


def has_all_joins(elements: Sequence, leq: Callable, cap: int = 12) -> bool:
    """True when the poset extended by a fresh top has a supremum for every subset."""
    els = list(elements)
    if len(els) > cap:
        raise Unsupported(f"exhaustive join check capped at {cap} elements")
    for r in range(len(els) + 1):
        for sub in itertools.combinations(els, r):
            ubs = [u for u in els if all(leq(s, u) for s in sub)]
            least = [u for u in ubs if all(leq(u, v) for v in ubs)]
            # TOP is an upper bound of everything, so it is the least one only if ubs is empty
            if ubs and not least:
                return False
    return True


def is_almost_complete(m: TropicalMonoid) -> bool:
    return has_all_joins(_elements(m), m.leq)


def iota_almost_complete(m: TropicalMonoid, y) -> bool:
    return has_all_joins(sorted(iota_map(m, y), key=repr), m.leq)


@dataclass(frozen=True)
class ChainExtraction:
    delta0: tuple
    theta: Mapping
    covered: bool


def extract_chain_hom(psi: Callable | Mapping, delta: TropicalMonoid, lam: TropicalMonoid) -> ChainExtraction:
    """Reduce a homomorphism from a chain into subsets of ``lam`` to a chain map.

    ``psi`` must send the neutral of ``delta`` to {neutral of lam} and turn
    max into union.  theta(a) is the supremum of psi(a) in lam extended by a
    top; ``delta0`` keeps the points where that supremum lies in lam.
    """
    get = psi.__getitem__ if isinstance(psi, Mapping) else psi
    if not is_total(delta):
        raise NotTotallyOrdered(f"{delta.name} is not totally ordered")
    lam_els = _elements(lam)
    images = {a: frozenset(get(a)) for a in _elements(delta)}
    for a, s in images.items():
        if not s <= frozenset(lam_els):
            raise DomainMismatch(f"psi({a!r}) is not a subset of {lam.name}")
    if images[delta.neutral] != frozenset([lam.neutral]):
        raise NotHomomorphism("psi(neutral) must be {neutral}")
    for a, b in itertools.combinations(delta.elements, 2):
        if images[delta.add(a, b)] != images[a] | images[b]:
            raise NotHomomorphism(f"psi(max({a!r}, {b!r})) != psi({a!r}) | psi({b!r})")

    theta_hat = {a: least_upper_bound(s, lam_els, lam.leq) for a, s in images.items()}
    delta0 = tuple(a for a in delta.elements if theta_hat[a] is not TOP)
    theta = {a: theta_hat[a] for a in delta0}
    covered = all(images[a] <= iota_map(lam, theta[a]) | {theta[a]} for a in delta0)
    return ChainExtraction(delta0, theta, covered)


@dataclass(frozen=True)
class IotaThetaReport:
    union_preserving: bool
    vacuum_preserved: bool
    homomorphism: bool


def iota_theta_report(theta: Callable | Mapping, delta: TropicalMonoid, lam: TropicalMonoid) -> IotaThetaReport:
    """Check a monotone theta: chain -> lam through iota o theta."""
    get = theta.__getitem__ if isinstance(theta, Mapping) else theta
    if not is_total(delta):
        raise NotTotallyOrdered(f"{delta.name} is not totally ordered")
    it = {a: iota_map(lam, get(a)) for a in delta.elements}
    union_ok = all(it[delta.add(a, b)] == it[a] | it[b]
                   for a, b in itertools.combinations_with_replacement(delta.elements, 2))
    vacuum = it[delta.neutral] == frozenset()
    return IotaThetaReport(union_ok, vacuum, union_ok and vacuum)


# --------------------------------------------------------------------------
# enumeration of small join-semilattices


def _posets(k: int):
    """All labeled partial orders on range(k) as sets of strict pairs."""
    pairs = [(i, j) for i in range(k) for j in range(k) if i != j]
    for bits in range(1 << len(pairs)):
        rel = {pairs[t] for t in range(len(pairs)) if bits >> t & 1}
        if any((j, i) in rel for (i, j) in rel):
            continue
        if any((i, l) not in rel for (i, j) in rel for (jj, l) in rel if j == jj and i != l):
            continue
        yield rel


def all_join_semilattices(n: int):
    """Every labeled finite monoid of size n whose order is a join-semilattice.

    Element 0 is the bottom (the neutral); the rest range over all labeled
    posets on n - 1 points.  Addition is the join.
    """
    if n < 1:
        return
    if n == 1:
        yield finite_monoid((0,), lambda a, b: 0, neutral=0, name="JSL1")
        return
    for rel in _posets(n - 1):
        strict = {(i + 1, j + 1) for i, j in rel} | {(0, j) for j in range(1, n)}
        le = lambda a, b, s=strict: a == b or (a, b) in s
        els = tuple(range(n))
        join = {}
        ok = True
        for a in els:
            for b in els:
                j = least_upper_bound((a, b), els, le)
                if j is TOP:
                    ok = False
                    break
                join[(a, b)] = j
            if not ok:
                break
        if ok:
            yield finite_monoid(els, join, neutral=0, name=f"JSL{n}", check=False)
