"""Ultrametrics: verification, balls, ideal/filter constructions, p-adic norms.

Points of an ``UltrametricMatrix`` are addressed by position 1..n so that
balls and diameter domains are bitmask subsets of the same ground set used
by :mod:`tropica.filters`.  Distances may be ints, Fractions (exact mode),
floats, or ``POS_INF``.
"""

from __future__ import annotations

import csv
import io
import itertools
import json
import math
import random
from dataclasses import dataclass, field
from enum import Enum
from fractions import Fraction
from typing import Callable, Mapping, Sequence

import numpy as np

from .core import FLOAT_TOL, POS_INF, is_exact
from .errors import (
    CapacityError,
    CoverageError,
    DegenerateDistance,
    MonotonicityError,
    NegativeDistance,
    NonPositiveInput,
    NotAFilter,
    NotAnIdeal,
    NotPrime,
    NotUltrametric,
    ShapeError,
    UnknownPoint,
)
from .filters import Kind, SubsetFamily, classify, dual, extend_base, full_mask, members_of, popcount


class Form(str, Enum):
    MAX_FORM = "max"
    MIN_FORM = "min"


class Monotonicity(str, Enum):
    INCREASING = "increasing"
    DECREASING = "decreasing"


def _all_exact(values) -> bool:
    return all(is_exact(v) for v in values if v != POS_INF)


@dataclass(frozen=True)
class UltrametricMatrix:
    points: tuple
    d: tuple  # tuple of row tuples
    mode: Form = Form.MAX_FORM

    def __post_init__(self):
        n = len(self.points)
        object.__setattr__(self, "points", tuple(self.points))
        object.__setattr__(self, "d", tuple(tuple(r) for r in self.d))
        if n == 0 or len(self.d) != n or any(len(r) != n for r in self.d):
            raise ShapeError(f"expected a {n}x{n} matrix")
        for i in range(n):
            if self.d[i][i] != 0:
                raise ShapeError(f"d({self.points[i]}, {self.points[i]}) must be 0")
            for j in range(n):
                v = self.d[i][j]
                if isinstance(v, float) and math.isnan(v):
                    raise ShapeError("NaN distance")
                if v < 0:
                    raise NegativeDistance(f"d({self.points[i]}, {self.points[j]}) = {v}")
                if self.d[j][i] != v:
                    raise ShapeError(f"asymmetric at ({self.points[i]}, {self.points[j]})")

    @property
    def n(self) -> int:
        return len(self.points)

    @property
    def exact(self) -> bool:
        return _all_exact(v for r in self.d for v in r)

    def index(self, label) -> int:
        try:
            return self.points.index(label)
        except ValueError:
            raise UnknownPoint(f"{label!r} is not a point") from None

    def __call__(self, x, y):
        return self.d[self.index(x)][self.index(y)]

    def max_deviation(self, other: "UltrametricMatrix"):
        dev = 0
        for r1, r2 in zip(self.d, other.d):
            for a, b in zip(r1, r2):
                if a == b:
                    continue
                if math.isinf(a) or math.isinf(b):
                    return POS_INF
                dev = max(dev, abs(a - b))
        return dev


@dataclass(frozen=True)
class UltrametricReport:
    valid: bool
    worst_triple: tuple | None
    worst_violation: float
    algebraic_valid: bool
    forms_agree: bool
    positive: bool

    def __bool__(self):
        return self.valid


def _gap(a, b):
    """a - b for a > b with infinities mapped to inf."""
    if math.isinf(a):
        return POS_INF
    return a - b


def verify_ultrametric(m: UltrametricMatrix, tol: float | None = None) -> UltrametricReport:
    """Check the triangle form of ``m.mode`` on all triples, and the mode-free reduction.

    The reduction is d(x,z) + d(z,y) + d(x,y) == d(x,z) + d(x,y) with + the
    tropical addition of the form.  The worst violating triple is the one with
    the largest excess; ties go to the lexicographically smallest triple.
    Only triples of distinct points are scanned: repeated points satisfy the
    max form trivially, while with d(x,x) = 0 the min form would fail on every
    one of them.
    """
    if tol is None:
        tol = 0 if m.exact else FLOAT_TOL
    op = max if m.mode is Form.MAX_FORM else min
    d = m.d
    n = m.n
    worst, worst_amt = None, 0
    for x, y, z in itertools.permutations(range(n), 3):
        if m.mode is Form.MAX_FORM:
            lhs, rhs = d[x][y], max(d[x][z], d[z][y])
            amt = _gap(lhs, rhs) if lhs > rhs else 0
        else:
            lhs, rhs = min(d[x][z], d[z][y]), d[x][y]
            amt = _gap(lhs, rhs) if lhs > rhs else 0
        if amt > tol and amt > worst_amt:
            worst, worst_amt = (m.points[x], m.points[y], m.points[z]), amt
    alg = True
    for x, y, z in itertools.permutations(range(n), 3):
        a = op(op(d[x][z], d[z][y]), d[x][y])
        b = op(d[x][z], d[x][y])
        if not (a == b or (not math.isinf(a) and not math.isinf(b) and abs(a - b) <= tol)):
            alg = False
            break
    positive = all(d[i][j] > 0 for i in range(n) for j in range(n) if i != j)
    valid = worst is None and positive
    return UltrametricReport(valid, worst, worst_amt, alg and positive, (worst is None) == alg, positive)


def is_isoceles(m: UltrametricMatrix, tol: float | None = None) -> bool:
    """Every triangle has its two longest sides equal (max-form ultrametrics)."""
    if tol is None:
        tol = 0 if m.exact else FLOAT_TOL
    d = m.d
    for x, y, z in itertools.combinations(range(m.n), 3):
        s = sorted((d[x][y], d[y][z], d[x][z]))
        if not (s[1] == s[2] or (not math.isinf(s[2]) and s[2] - s[1] <= tol)):
            return False
    return True


# --------------------------------------------------------------------------
# balls


def ball(m: UltrametricMatrix, center, radius) -> int:
    """Closed ball as a bitmask over point positions 1..n."""
    c = m.index(center)
    out = 0
    for j, v in enumerate(m.d[c]):
        if v <= radius:
            out |= 1 << j
    return out


def _balls(m: UltrametricMatrix) -> set:
    out = set()
    for c in range(m.n):
        for r in set(m.d[c]):
            b = 0
            for j, v in enumerate(m.d[c]):
                if v <= r:
                    b |= 1 << j
            out.add(b)
    return out


def ball_ideal_base(m: UltrametricMatrix) -> tuple[SubsetFamily, bool]:
    """Balls with attained radii, and whether the ideal they generate is proper.

    The ideal is proper iff the distance set has no maximum, which never
    happens on a finite point set.
    """
    if m.mode is not Form.MAX_FORM or not verify_ultrametric(m):
        raise NotUltrametric("ball ideal base needs a valid max-form ultrametric")
    dmax = max(v for r in m.d for v in r)
    attained = any(v == dmax for r in m.d for v in r)
    return SubsetFamily(m.n, frozenset(_balls(m))), not attained


def ball_union_cover(m: UltrametricMatrix, x0, r, y0, s):
    """A ball S(c, M) containing S(x0, r) | S(y0, s), with M = max(r, s, d(x0, y0))."""
    big = max(r, s, m(x0, y0))
    return x0, big, ball(m, x0, big)


# --------------------------------------------------------------------------
# diameter functions and the ideal/filter constructions


@dataclass(frozen=True)
class DiameterFunction:
    domain: SubsetFamily
    value: Callable[[int], object]
    monotonicity: Monotonicity | None = None

    @classmethod
    def from_mapping(cls, domain: SubsetFamily, values: Mapping, monotonicity=None) -> "DiameterFunction":
        vals = {k if isinstance(k, int) else _mask(k): v for k, v in values.items()}
        missing = [members_of(a) for a in domain.members if a not in vals]
        if missing:
            raise ValueError(f"diameter undefined on {missing[:3]}")
        return cls(domain, vals.__getitem__, monotonicity)

    def __call__(self, a: int):
        return self.value(a)

    def table(self) -> dict:
        return {a: self.value(a) for a in self.domain.members}

    def check(self):
        """Raise MonotonicityError unless values are positive and monotone as declared."""
        vals = self.table()
        for a, v in vals.items():
            if not v > 0:
                raise MonotonicityError(f"diameter of {members_of(a)} is {v}, must be positive")
        if self.monotonicity is None:
            return
        bits = [1 << i for i in range(self.domain.n)]
        for a, v in vals.items():
            for b in bits:
                if a & b or (a | b) not in vals:
                    continue
                w = vals[a | b]
                bad = w < v if self.monotonicity is Monotonicity.INCREASING else w > v
                if bad:
                    raise MonotonicityError(
                        f"diameter not {self.monotonicity.value}: "
                        f"{members_of(a)} -> {v}, {members_of(a | b)} -> {w}")


def _mask(indices) -> int:
    out = 0
    for i in indices:
        out |= 1 << (i - 1)
    return out


def _ranked(values):
    """Map values to int ranks so extrema can be taken in numpy without losing exactness."""
    uniq = sorted(set(values))
    index = {v: i for i, v in enumerate(uniq)}
    return uniq, np.fromiter((index[v] for v in values), dtype=np.int64, count=len(values))


def _masks_array(masks, n):
    if n > 62:
        return np.array(masks, dtype=object)
    return np.fromiter(masks, dtype=np.int64, count=len(masks))


def _nondegenerate(v, pair):
    if v == 0:
        raise DegenerateDistance(f"distance between {pair[0]} and {pair[1]} degenerates to 0", pair)
    return v


def _pair_extrema(masks, vals, n, select, reduce_min: bool, empty):
    """For each pair x < y, reduce diameter values over members picked by ``select``."""
    uniq, ranks = _ranked(vals)
    arr = _masks_array(masks, n)
    d = [[0] * n for _ in range(n)]
    for x, y in itertools.combinations(range(n), 2):
        pm = (1 << x) | (1 << y)
        sel = select(arr, pm)
        if not sel.any():
            v = empty
        else:
            r = ranks[sel]
            v = uniq[int(r.min() if reduce_min else r.max())]
        d[x][y] = d[y][x] = v
    return d


def ideal_to_ultrametric(ideal: SubsetFamily, diam: DiameterFunction, form: Form = Form.MAX_FORM,
                         relax: bool = False, points: Sequence | None = None) -> UltrametricMatrix:
    """Distance as the inf (max form) or sup (min form) of diameters of members covering {x, y}.

    With ``relax`` the monotonicity and positive-infimum preconditions are not
    enforced; degenerate (zero) distances still raise.
    """
    if not classify(ideal).is_ideal:
        raise NotAnIdeal("family is not an ideal")
    n = ideal.n
    cover = 0
    for a in ideal.members:
        cover |= a
    if cover != full_mask(n):
        raise CoverageError(f"ideal does not cover [{n}]")
    if not relax:
        want = Monotonicity.DECREASING if form is Form.MAX_FORM else Monotonicity.INCREASING
        if diam.monotonicity is not want:
            raise MonotonicityError(f"{form.value}-form construction needs a {want.value} diameter")
        diam.check()
    masks = list(ideal.members)
    vals = [diam(a) for a in masks]
    d = _pair_extrema(masks, vals, n, lambda arr, pm: (arr & pm) == pm,
                      reduce_min=form is Form.MAX_FORM,
                      empty=POS_INF if form is Form.MAX_FORM else 0)
    pts = tuple(points) if points is not None else tuple(range(1, n + 1))
    for x, y in itertools.combinations(range(n), 2):
        _nondegenerate(d[x][y], (pts[x], pts[y]))
    return UltrametricMatrix(pts, d, form)


def deinfinitate(x):
    """Squash (0, inf] monotonically onto (0, 1]: x -> (1 + 1/x)^-1."""
    if x == POS_INF:
        return 1
    if not x > 0:
        raise NonPositiveInput(f"deinfinitation needs x > 0, got {x}")
    return x / (1 + x)


def filter_to_ultrametric(filt: SubsetFamily, diam: DiameterFunction, relax: bool = False,
                          squash: bool = False, points: Sequence | None = None) -> UltrametricMatrix:
    """D(x, y) = inf of diameters of filter members missing both x and y.

    Pairs with no such member get POS_INF (inf of the empty set), or 1 after
    squashing with :func:`deinfinitate`.
    """
    if classify(filt).kind not in (Kind.FILTER, Kind.ULTRAFILTER):
        raise NotAFilter("family is not a filter")
    if not relax:
        if diam.monotonicity is not Monotonicity.INCREASING:
            raise MonotonicityError("filter construction needs an increasing diameter")
        diam.check()
    n = filt.n
    masks = list(filt.members)
    vals = [diam(a) for a in masks]
    d = _pair_extrema(masks, vals, n, lambda arr, pm: (arr & pm) == 0, reduce_min=True, empty=POS_INF)
    pts = tuple(points) if points is not None else tuple(range(1, n + 1))
    for x, y in itertools.combinations(range(n), 2):
        _nondegenerate(d[x][y], (pts[x], pts[y]))
        if squash:
            d[x][y] = d[y][x] = deinfinitate(d[x][y])
    return UltrametricMatrix(pts, d, Form.MAX_FORM)


def ultradiameter(seed: UltrametricMatrix, g: int):
    """sup of seed distances between points outside g; 0 if at most one point is left."""
    out = [i for i in range(seed.n) if not g >> i & 1]
    return max((seed.d[i][j] for i, j in itertools.combinations(out, 2)), default=0)


def ultradiameter_table(seed: UltrametricMatrix, masks: Sequence[int]) -> dict:
    """ultradiameter for many subsets at once."""
    n = seed.n
    arr = _masks_array(list(masks), n)
    pairs = list(itertools.combinations(range(n), 2))
    uniq, ranks = _ranked([seed.d[i][j] for i, j in pairs] + [0])
    zero_rank = ranks[-1]
    best = np.full(len(arr), zero_rank, dtype=np.int64)
    for (i, j), r in zip(pairs, ranks[:-1]):
        outside = (arr & ((1 << i) | (1 << j))) == 0
        np.maximum(best, np.where(outside, r, zero_rank), out=best)
    return {a: uniq[int(b)] for a, b in zip(masks, best)}


@dataclass(frozen=True)
class RoundTrip:
    equal: bool
    max_deviation: object
    recovered: UltrametricMatrix


def roundtrip_check(seed: UltrametricMatrix) -> RoundTrip:
    """Ball ideal -> dual filter -> filter construction with the ultradiameter; compare to seed."""
    base, _ = ball_ideal_base(seed)
    ideal = extend_base(base, Kind.IDEAL)
    filt = dual(ideal)
    table = ultradiameter_table(seed, list(filt.members))
    diam = DiameterFunction(filt, table.__getitem__, None)
    rec = filter_to_ultrametric(filt, diam, relax=True, points=seed.points)
    dev = seed.max_deviation(rec)
    equal = dev == 0 if seed.exact else dev <= FLOAT_TOL
    return RoundTrip(equal, dev, rec)


# --------------------------------------------------------------------------
# generators


def random_tree_ultrametric(n: int, rng: random.Random | None = None, exact: bool = True,
                            labels: Sequence | None = None) -> UltrametricMatrix:
    """Leaf distances of a random rooted tree = height of the lowest common ancestor.

    Clusters are merged two or three at a time at strictly increasing heights.
    """
    rng = rng or random.Random(0)
    clusters = [([i], 0) for i in range(n)]
    d = [[0] * n for _ in range(n)]
    while len(clusters) > 1:
        k = min(len(clusters), rng.choice((2, 2, 3)))
        picked = rng.sample(range(len(clusters)), k)
        parts = [clusters[i] for i in picked]
        step = Fraction(rng.randint(1, 12), rng.randint(1, 4)) if exact else rng.uniform(0.05, 3.0)
        h = max(p[1] for p in parts) + step
        for a, b in itertools.combinations(parts, 2):
            for i in a[0]:
                for j in b[0]:
                    d[i][j] = d[j][i] = h
        clusters = [c for i, c in enumerate(clusters) if i not in picked]
        clusters.append(([i for p in parts for i in p[0]], h))
    pts = tuple(labels) if labels is not None else tuple(f"p{i + 1}" for i in range(n))
    return UltrametricMatrix(pts, d, Form.MAX_FORM)


# --------------------------------------------------------------------------
# p-adic norm

_PRIME_LIMIT = 1 << 31
_MAX_BITS = 1 << 16


def is_prime(p: int) -> bool:
    if p > _PRIME_LIMIT:
        raise CapacityError(f"primality check limited to p <= 2^31, got {p}")
    if p < 2:
        return False
    if p % 2 == 0:
        return p == 2
    f = 3
    while f * f <= p:
        if p % f == 0:
            return False
        f += 2
    return True


def padic_valuation(q, p: int) -> int:
    q = Fraction(q)
    if q == 0:
        raise ValueError("valuation of 0 is infinite")
    a = 0
    num, den = q.numerator, q.denominator
    while num % p == 0:
        num //= p
        a += 1
    while den % p == 0:
        den //= p
        a -= 1
    return a


def padic_norm(q, p: int) -> Fraction:
    """||q||_p = p^-a where q = p^a * r/s with r, s prime to p; ||0||_p = 0."""
    if not isinstance(p, int) or not is_prime(p):
        raise NotPrime(f"{p} is not prime")
    q = Fraction(q)
    if max(q.numerator.bit_length(), q.denominator.bit_length()) > _MAX_BITS:
        raise CapacityError("rational too large for exact p-adic evaluation")
    if q == 0:
        return Fraction(0)
    return Fraction(p) ** (-padic_valuation(q, p))


def padic_matrix(values: Sequence, p: int) -> UltrametricMatrix:
    vals = [Fraction(v) for v in values]
    if len(set(vals)) != len(vals):
        raise ShapeError("p-adic sample points must be distinct")
    d = [[padic_norm(a - b, p) for b in vals] for a in vals]
    return UltrametricMatrix(tuple(str(v) for v in vals), d, Form.MAX_FORM)


# --------------------------------------------------------------------------
# counterexample fixtures


def degenerate_ideal_fixture(max_n: int = 10):
    """Finite subsets of N with diameter 1 - sum_{a in A} 2^-a.

    On each truncation [n] the construction is fine and d(1, 2) = 2^-n; the
    decreasing chain [n] exhausts the ideal of all finite subsets, whose
    infimum 1 - sum_{a >= 1} 2^-a is 0.  Raises DegenerateDistance carrying the
    truncation sequence as ``.sequence``.
    """
    seq = []
    for n in range(3, max_n + 1):
        ideal = SubsetFamily(n, frozenset(range(1 << n)))
        diam = DiameterFunction(
            ideal, lambda a: 1 - sum(Fraction(1, 2 ** i) for i in members_of(a)), Monotonicity.DECREASING)
        seq.append((n, ideal_to_ultrametric(ideal, diam).d[0][1]))
    # the geometric series sums to exactly 1
    limit = 1 - Fraction(1, 2) / (1 - Fraction(1, 2))
    try:
        _nondegenerate(limit, (1, 2))
    except DegenerateDistance as exc:
        exc.sequence = seq
        raise
    return seq


def nonmonotone_filter_fixture(n: int = 4, high=3, low=1) -> UltrametricMatrix:
    """Filter construction with a diameter jumping by more than 1 across the {1,2} split.

    On a finite truncation the filter of cofinite sets is the whole power set.
    The resulting matrix has d(1,2) > max(d(1,3), d(2,3)), so it is not an
    ultrametric.
    """
    filt = SubsetFamily(n, frozenset(range(1 << n)))
    diam = DiameterFunction(filt, lambda a: high if a & 0b11 == 0 else low, None)
    return filter_to_ultrametric(filt, diam, relax=True)


@dataclass(frozen=True)
class EuclideanFixture:
    union_covers: bool
    candidates: int
    uncontained: int
    truncated_base_property: bool

    @property
    def containment_fails(self) -> bool:
        return self.candidates > 0 and self.uncontained == self.candidates


def euclidean_fixture(depth: int = 40) -> EuclideanFixture:
    """{1/n} | {3 - 1/m} with the euclidean metric.

    S(1,1) | S(2,1) is the whole set, yet no ball S(x0, r) with an attained
    radius contains it: the supremum of distances from x0 is never attained,
    so each candidate has an explicit point of the infinite set outside it.
    The candidates are centers and radii drawn from the first ``depth`` points
    of each sequence.  For contrast the same containment is also tested on
    the finite truncation, where the largest ball is the whole sample.
    """
    low = [Fraction(1, k) for k in range(1, depth + 1)]
    high = [3 - Fraction(1, k) for k in range(1, depth + 1)]
    sample = sorted(set(low + high))
    # membership of the infinite families: |1/n - 1| < 1 and |3 - 1/m - 2| <= 1
    covers = all(abs(x - 1) <= 1 or abs(x - 2) <= 1 for x in sample)

    def outside_witness(x0, r):
        if x0 <= 1:  # sup of |x - x0| is 3 - x0, approached along 3 - 1/m
            gap = 3 - x0 - r
            m = math.floor(1 / gap) + 1
            w = 3 - Fraction(1, m)
        else:  # sup is x0, approached along 1/n
            gap = x0 - r
            k = math.floor(1 / gap) + 1
            w = Fraction(1, k)
        return w if abs(w - x0) > r else None

    cands = uncontained = 0
    for x0 in sample:
        for r in {abs(x - x0) for x in sample}:
            cands += 1
            if outside_witness(x0, r) is not None:
                uncontained += 1
    span = max(sample) - min(sample)
    truncated = any(max(abs(x - x0) for x in sample) == span for x0 in sample)
    return EuclideanFixture(covers, cands, uncontained, truncated)


# --------------------------------------------------------------------------
# I/O


def _fmt(v) -> str:
    if v == POS_INF:
        return "inf"
    if isinstance(v, Fraction):
        return str(v.numerator) if v.denominator == 1 else f"{v.numerator}/{v.denominator}"
    if isinstance(v, float):
        return format(v, ".17g")
    return str(v)


def _parse(s: str, exact: bool):
    s = s.strip()
    if s.lower() in ("inf", "+inf"):
        return POS_INF
    return Fraction(s) if exact else float(Fraction(s)) if "/" in s else float(s)


def write_matrix_csv(m: UltrametricMatrix) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(m.points)
    for row in m.d:
        w.writerow([_fmt(v) for v in row])
    return buf.getvalue()


def read_matrix_csv(text: str, exact: bool = True, mode: Form = Form.MAX_FORM) -> UltrametricMatrix:
    rows = [r for r in csv.reader(io.StringIO(text)) if r]
    if not rows:
        raise ShapeError("empty matrix file")
    labels = tuple(rows[0])
    d = [[_parse(v, exact) for v in r] for r in rows[1:]]
    return UltrametricMatrix(labels, d, mode)


def diameter_to_json(diam: DiameterFunction) -> str:
    items = sorted((list(members_of(a)), _fmt(v)) for a, v in diam.table().items())
    return json.dumps({"ground": diam.domain.n,
                       "monotonicity": diam.monotonicity.value if diam.monotonicity else None,
                       "values": [{"member": m, "value": v} for m, v in items]},
                      separators=(",", ":"))


def diameter_from_json(text: str) -> DiameterFunction:
    data = json.loads(text)
    n = data["ground"]
    vals = {_mask(e["member"]): _parse(e["value"], True) for e in data["values"]}
    mono = data.get("monotonicity")
    return DiameterFunction.from_mapping(SubsetFamily(n, frozenset(vals)), vals,
                                         Monotonicity(mono) if mono else None)
