"""Filters, ideals and ultrafilters on the power set of a finite ground set.

Subsets of the ground set [n] = {1, ..., n} are stored as int bitmasks, bit
``i - 1`` standing for element ``i``.  Python ints are unbounded, so the same
representation serves every n; exhaustive scans are what get expensive.
"""

from __future__ import annotations

import itertools
import json
from dataclasses import dataclass
from enum import Enum
from typing import Iterable

from .errors import EmptyFamily, NotABase, NotAProperFilter

# n up to this size gets the verbatim pairwise directedness check in classify
VERBATIM_LIMIT = 8
POWERSET_LIMIT = 20


def mask(indices: Iterable[int]) -> int:
    m = 0
    for i in indices:
        if i < 1:
            raise ValueError(f"ground elements are 1-based, got {i}")
        m |= 1 << (i - 1)
    return m


def members_of(m: int) -> tuple:
    out = []
    i = 1
    while m:
        if m & 1:
            out.append(i)
        m >>= 1
        i += 1
    return tuple(out)


def full_mask(n: int) -> int:
    return (1 << n) - 1


def popcount(m: int) -> int:
    return bin(m).count("1")


def submasks(m: int):
    """All submasks of m, including m and 0."""
    s = m
    while True:
        yield s
        if s == 0:
            return
        s = (s - 1) & m


def supermasks(m: int, n: int):
    for s in submasks(full_mask(n) & ~m):
        yield s | m


@dataclass(frozen=True)
class SubsetFamily:
    n: int
    members: frozenset

    def __post_init__(self):
        if self.n < 1:
            raise ValueError("ground set must have at least one element")
        full = full_mask(self.n)
        for a in self.members:
            if a & ~full:
                raise ValueError(f"member {members_of(a)} not inside [{self.n}]")

    @classmethod
    def of(cls, n: int, sets: Iterable[Iterable[int]]) -> "SubsetFamily":
        return cls(n, frozenset(mask(s) for s in sets))

    def __contains__(self, a) -> bool:
        return (a if isinstance(a, int) else mask(a)) in self.members

    def __len__(self):
        return len(self.members)

    def __iter__(self):
        return iter(self.members)

    def sorted_members(self) -> list:
        return sorted(members_of(a) for a in self.members)

    def to_json(self) -> str:
        return json.dumps({"ground": self.n, "members": [list(s) for s in self.sorted_members()]},
                          separators=(",", ":"))

    @classmethod
    def from_json(cls, text: str) -> "SubsetFamily":
        data = json.loads(text)
        return cls.of(data["ground"], data["members"])

    def __repr__(self):
        return f"SubsetFamily(n={self.n}, members={self.sorted_members()})"


class Kind(str, Enum):
    FILTER = "FILTER"
    IDEAL = "IDEAL"
    ULTRAFILTER = "ULTRAFILTER"
    NEITHER = "NEITHER"


@dataclass(frozen=True)
class FilterCertificate:
    kind: Kind
    proper: bool
    principal_generator: int | None = None
    is_ideal: bool = False

    @property
    def zeta(self) -> tuple | None:
        return None if self.principal_generator is None else members_of(self.principal_generator)


def _up_closed(fam: SubsetFamily) -> bool:
    bits = [1 << i for i in range(fam.n)]
    return all((a | b) in fam.members for a in fam.members for b in bits)


def _down_closed(fam: SubsetFamily) -> bool:
    bits = [1 << i for i in range(fam.n)]
    return all((a & ~b) in fam.members for a in fam.members for b in bits)


# For an up-closed family, downward directedness is closure under
# intersection (and dually for ideals), which is a set lookup per pair.
def _down_directed(fam: SubsetFamily) -> bool:
    ms = fam.members
    return all((x & y) in ms for x, y in itertools.combinations(ms, 2))


def _up_directed(fam: SubsetFamily) -> bool:
    ms = fam.members
    return all((x | y) in ms for x, y in itertools.combinations(ms, 2))


def _meet_all(fam: SubsetFamily) -> int:
    z = full_mask(fam.n)
    for a in fam.members:
        z &= a
    return z


def _join_all(fam: SubsetFamily) -> int:
    z = 0
    for a in fam.members:
        z |= a
    return z


def is_filter(fam: SubsetFamily) -> bool:
    if not fam.members:
        return False
    if fam.n <= VERBATIM_LIMIT:
        return _up_closed(fam) and _down_directed(fam)
    # finite filters are principal: the family must be the up-set of its meet
    zeta = _meet_all(fam)
    return zeta in fam.members and len(fam.members) == 1 << (fam.n - popcount(zeta))


def is_ideal(fam: SubsetFamily) -> bool:
    if not fam.members:
        return False
    if fam.n <= VERBATIM_LIMIT:
        return _down_closed(fam) and _up_directed(fam)
    top = _join_all(fam)
    return top in fam.members and len(fam.members) == 1 << popcount(top)


def classify(fam: SubsetFamily) -> FilterCertificate:
    if not fam.members:
        raise EmptyFamily("a filter or ideal is non-empty by definition")
    ideal = is_ideal(fam)
    if is_filter(fam):
        zeta = _meet_all(fam)
        proper = 0 not in fam.members
        ultra = proper and popcount(zeta) == 1
        if ultra and fam.n <= POWERSET_LIMIT:
            full = full_mask(fam.n)
            # complement property, checked over the whole power set
            ultra = all((a in fam.members) != ((full & ~a) in fam.members) for a in range(1 << fam.n))
        return FilterCertificate(Kind.ULTRAFILTER if ultra else Kind.FILTER, proper, zeta, ideal)
    if ideal:
        return FilterCertificate(Kind.IDEAL, full_mask(fam.n) not in fam.members, None, True)
    return FilterCertificate(Kind.NEITHER, False)


def dual(fam: SubsetFamily) -> SubsetFamily:
    full = full_mask(fam.n)
    return SubsetFamily(fam.n, frozenset(full & ~a for a in fam.members))


def principal_filter(n: int, x) -> SubsetFamily:
    x = x if isinstance(x, int) else mask(x)
    return SubsetFamily(n, frozenset(supermasks(x, n)))


def principal_ideal(n: int, y) -> SubsetFamily:
    y = y if isinstance(y, int) else mask(y)
    return SubsetFamily(n, frozenset(submasks(y)))


def _maximal(ms):
    ms = sorted(set(ms), key=popcount, reverse=True)
    out = []
    for a in ms:
        if not any(a & ~b == 0 for b in out):
            out.append(a)
    return out


def _minimal(ms):
    ms = sorted(set(ms), key=popcount)
    out = []
    for a in ms:
        if not any(b & ~a == 0 for b in out):
            out.append(a)
    return out


def extend_base(base: SubsetFamily, kind: Kind) -> SubsetFamily:
    """Smallest filter (or ideal) containing ``base``; the base must be directed.

    A finite directed family has a least (greatest) member, so directedness
    fails exactly when there are two distinct minimal (maximal) members;
    such a pair is reported.
    """
    if not base.members:
        raise NotABase("a base is non-empty")
    if kind in (Kind.FILTER, Kind.ULTRAFILTER):
        ext = _minimal(base.members)
        if len(ext) > 1:
            x, y = sorted(ext)[:2]
            raise NotABase("base is not downward directed", (members_of(x), members_of(y)))
        out = frozenset(supermasks(ext[0], base.n))
    elif kind is Kind.IDEAL:
        ext = _maximal(base.members)
        if len(ext) > 1:
            x, y = sorted(ext)[:2]
            raise NotABase("base is not upward directed", (members_of(x), members_of(y)))
        out = frozenset(submasks(ext[0]))
    else:
        raise ValueError(f"cannot extend a base to {kind}")
    return SubsetFamily(base.n, out)


def filter_measure(f: SubsetFamily, x) -> int | None:
    """1 if x is in the filter, 0 if its complement is, None (undefined) otherwise."""
    cert = classify(f)
    if cert.kind not in (Kind.FILTER, Kind.ULTRAFILTER) or not cert.proper:
        raise NotAProperFilter("the {0,1} measure needs a proper filter")
    x = x if isinstance(x, int) else mask(x)
    if x in f.members:
        return 1
    if full_mask(f.n) & ~x in f.members:
        return 0
    return None


def all_filters(n: int):
    """Every filter on [n] (proper or not), one per generator."""
    for zeta in range(1 << n):
        yield principal_filter(n, zeta)


def all_ultrafilters(n: int):
    for i in range(1, n + 1):
        yield principal_filter(n, 1 << (i - 1))

