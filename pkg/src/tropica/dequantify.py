"""Copies of microsystems and the k_B = 1/N dequantification limit.

Copy-indexed states are pairs (alpha, n) with n >= 1.  The map T adds the
next copy; T-closed sets are unions of upward tails {(alpha, m): m >= n},
stored as {alpha: n} so they stay finite.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

from .errors import NotDisjoint
from .thermo import minimizers


@dataclass(frozen=True, order=True)
class CopyIndex:
    alpha: int
    n: int = 1

    def __post_init__(self):
        if self.alpha < 1 or self.n < 1:
            raise ValueError(f"copy index needs alpha >= 1 and n >= 1, got {(self.alpha, self.n)}")

    def succ(self) -> "CopyIndex":
        return CopyIndex(self.alpha, self.n + 1)


@dataclass(frozen=True)
class CopySet:
    """Finite members plus closed tails; members already inside a tail are dropped."""

    N: int
    finite: frozenset = frozenset()
    tails: tuple = ()  # sorted (alpha, min copy) pairs

    def __post_init__(self):
        tails = dict(self.tails)
        fin = set()
        for c in self.finite:
            c = c if isinstance(c, CopyIndex) else CopyIndex(*c)
            if not 1 <= c.alpha <= self.N:
                raise ValueError(f"base index {c.alpha} outside [{self.N}]")
            if c.alpha in tails and c.n >= tails[c.alpha]:
                continue
            fin.add(c)
        object.__setattr__(self, "finite", frozenset(fin))
        object.__setattr__(self, "tails", tuple(sorted(tails.items())))

    @classmethod
    def of(cls, N: int, pairs: Iterable = (), tails=None) -> "CopySet":
        return cls(N, frozenset(CopyIndex(*p) for p in pairs), tuple((tails or {}).items()))

    @property
    def closed(self) -> bool:
        return not self.finite

    def __contains__(self, c) -> bool:
        c = c if isinstance(c, CopyIndex) else CopyIndex(*c)
        t = dict(self.tails).get(c.alpha)
        return (t is not None and c.n >= t) or c in self.finite

    def members_upto(self, bound: int) -> set:
        """All members with copy number <= bound (tails truncated)."""
        out = {c for c in self.finite if c.n <= bound}
        for a, n in self.tails:
            out.update(CopyIndex(a, m) for m in range(n, bound + 1))
        return out

    def union(self, other: "CopySet") -> "CopySet":
        tails = dict(self.tails)
        for a, n in other.tails:
            tails[a] = min(n, tails.get(a, n))
        return CopySet(self.N, self.finite | other.finite, tuple(tails.items()))

    def intersection(self, other: "CopySet") -> "CopySet":
        tails = {}
        for a, n in self.tails:
            m = dict(other.tails).get(a)
            if m is not None:
                tails[a] = max(n, m)
        fin = {c for c in self.finite | other.finite if c in self and c in other}
        return CopySet(self.N, frozenset(fin), tuple(tails.items()))

    def issubset(self, other: "CopySet") -> bool:
        if not all(c in other for c in self.finite):
            return False
        ot = dict(other.tails)
        return all(a in ot and ot[a] <= n for a, n in self.tails)

    def __len__(self):
        if self.tails:
            raise OverflowError("a set with closed tails is infinite")
        return len(self.finite)


def t_map(x: CopySet) -> CopySet:
    """X | T(X): every finite member also gets its next copy."""
    return CopySet(x.N, x.finite | {c.succ() for c in x.finite}, x.tails)


def t_closure(x: CopySet) -> CopySet:
    """Smallest T-closed superset: the tail from the smallest copy of each base index."""
    tails = dict(x.tails)
    for c in x.finite:
        tails[c.alpha] = min(c.n, tails.get(c.alpha, c.n))
    return CopySet(x.N, frozenset(), tuple(tails.items()))


# --------------------------------------------------------------------------
# Gibbs weights


def gibbs_weights(values: Sequence, k_B: float) -> list:
    """exp(-f/k_B) normalized, computed relative to the minimum of f."""
    if not k_B > 0:
        raise ValueError("k_B must be positive")
    lo = min(values)
    t = [math.exp(-(v - lo) / k_B) for v in values]
    z = math.fsum(t)
    return [x / z for x in t]


def _copy_terms(values, alpha, copies):
    lo = min(values)
    t = [math.exp(-copies * (v - lo)) for v in values]
    ta = t[alpha - 1]
    den = (copies - 1) * ta + math.fsum(t)
    rest = math.fsum(x for i, x in enumerate(t) if i != alpha - 1)
    return t, ta, den, rest, lo


def gibbs_with_copies(values: Sequence, alpha: int, copies: int) -> float:
    """Weight of system alpha copied ``copies`` times, with k_B = 1/copies."""
    if copies < 1:
        raise ValueError("copies must be at least 1")
    if not 1 <= alpha <= len(values):
        raise ValueError(f"alpha must lie in [1, {len(values)}]")
    _, ta, den, _, _ = _copy_terms(values, alpha, copies)
    return copies * ta / den


def log_gibbs_with_copies(values: Sequence, alpha: int, copies: int) -> float:
    """ln of gibbs_with_copies, finite even where the weight underflows."""
    lo = min(values)
    _, _, den, _, _ = _copy_terms(values, alpha, copies)
    return math.log(copies) - copies * (values[alpha - 1] - lo) - math.log(den)


def copied_weights(factors: Sequence, copies: Sequence[int]) -> list:
    """Per-base-index weights when system alpha has copies[alpha] identical copies.

    ``factors`` are Boltzmann factors exp(-f/k_B), exact rationals allowed.
    """
    z = sum(n * x for n, x in zip(copies, factors))
    return [n * x / z for n, x in zip(copies, factors)]


@dataclass(frozen=True)
class CopySchedule:
    N_list: tuple

    def __post_init__(self):
        object.__setattr__(self, "N_list", tuple(self.N_list))
        if not self.N_list:
            raise ValueError("schedule must be non-empty")
        if any(b <= a for a, b in zip(self.N_list, self.N_list[1:])) or self.N_list[0] < 1:
            raise ValueError("schedule must be strictly increasing positive integers")

    @classmethod
    def parse(cls, text: str) -> "CopySchedule":
        """'pow2:12' -> 2, 4, ..., 4096; otherwise a comma-separated list."""
        if text.startswith("pow2:"):
            top = int(text[5:])
            return cls(tuple(2 ** i for i in range(1, top + 1)))
        return cls(tuple(int(t) for t in text.split(",")))

    def k_B(self, N: int) -> float:
        return 1 / N


DOMINANT_TOL = 1e-6
NONDOMINANT_TOL = 1e-30


@dataclass(frozen=True)
class ConvergenceRow:
    N: int
    k_B: float
    w: float
    gap: float
    log_gap: float


@dataclass(frozen=True)
class Dequantified:
    alpha: int
    dominant: bool
    limit: int
    lambda0: int
    rows: tuple
    rate: float  # fitted C in gap ~ C/N (dominant) or e-folding rate (non-dominant)
    within_threshold: bool
    converged: bool

    @property
    def estimate(self) -> float:
        return self.rows[-1].w


def dequantified_weight(values: Sequence, alpha: int, schedule: CopySchedule, tie_tol=None) -> Dequantified:
    """Weights along k_B = 1/N for growing copy numbers N, against the limit 1[alpha in m0].

    Dominant gaps decay like (lambda0 - 1)/N, non-dominant ones exponentially.
    Convergence means the last three points approach the limit monotonically,
    and either the final gap is under the regime's threshold or (dominant
    case) every gap respects the (lambda0 - 1)/N + tail bound.
    """
    m0 = minimizers(values, tie_tol)
    dominant = alpha in m0
    lam0 = len(m0)
    rows = []
    for N in schedule.N_list:
        _, ta, den, rest, _ = _copy_terms(values, alpha, N)
        w = N * ta / den
        if dominant:
            # 1 - w = (den - N t_alpha)/den = (sum over beta != alpha of t_beta)/den, no cancellation
            gap = rest / den
            log_gap = math.log(gap) if gap > 0 else -math.inf
        else:
            log_gap = log_gibbs_with_copies(values, alpha, N)
            gap = w
        rows.append(ConvergenceRow(N, 1 / N, w, gap, log_gap))
    lg = [r.log_gap for r in rows]
    tail = lg[-3:]
    monotone = all(b <= a for a, b in zip(tail, tail[1:]))
    final = rows[-1].gap
    if dominant:
        within = final <= DOMINANT_TOL
        rate = max(r.N * r.gap for r in rows)
        bound_ok = all(r.gap <= (lam0 - 1) / r.N + math.exp(-r.N * _level_gap(values, m0)) + 1e-12
                       for r in rows)
        converged = monotone and (within or bound_ok)
    else:
        within = final <= NONDOMINANT_TOL
        pts = [(r.N, r.log_gap) for r in rows if math.isfinite(r.log_gap)]
        rate = -float(np.polyfit([p[0] for p in pts], [p[1] for p in pts], 1)[0]) if len(pts) >= 2 else math.nan
        converged = monotone and within
    return Dequantified(alpha, dominant, 1 if dominant else 0, lam0, tuple(rows), rate, within, converged)


def _level_gap(values, m0) -> float:
    lo = min(values)
    rest = [v for i, v in enumerate(values) if i + 1 not in m0]
    return (min(rest) - lo) if rest else math.inf


# --------------------------------------------------------------------------
# possibility distributions


@dataclass(frozen=True)
class PossibilityReport:
    m0: tuple
    block_values: tuple
    union_value: int
    tropical_ok: bool
    real_sum: int
    real_additive_here: bool
    real_additive: bool  # as a set function on [N]; holds iff #m0 == 1


def w0(m0, x) -> int:
    return 1 if set(x) & set(m0) else 0


def possibility_check(values: Sequence, partition: Sequence, tie_tol=None) -> PossibilityReport:
    """w0(X) = 1 iff X meets m0; max-additive always, real-additive iff m0 is a singleton."""
    seen = set()
    n = len(values)
    for blk in partition:
        blk = set(blk)
        if any(not 1 <= i <= n for i in blk):
            raise ValueError(f"blocks must lie inside [{n}]")
        if seen & blk:
            raise NotDisjoint(f"blocks overlap on {sorted(seen & blk)}")
        seen |= blk
    m0 = minimizers(values, tie_tol)
    vals = tuple(w0(m0, b) for b in partition)
    union = w0(m0, seen)
    # real additivity over all of [N] fails exactly when two singletons of m0 both weigh 1
    real = len(m0) == 1
    return PossibilityReport(m0, vals, union, union == max(vals, default=0), sum(vals),
                             sum(vals) == union, real)
