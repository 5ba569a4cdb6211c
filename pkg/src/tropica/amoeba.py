"""Signed weights of k-subsets, their negative families, and instability scans.

For a point x with values f_1..f_N, the weight of a k-subset I is
Z_k(I) = -sum_{I} e^f + sum_{rest} e^f.  Since Z_k(I) = Z - 2 sum_I e^f, a
subset is negative exactly when it carries more than half the total mass.
"""

from __future__ import annotations

import itertools
import logging
import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from functools import lru_cache
from fractions import Fraction
from typing import Sequence

import numpy as np

from .errors import SizeMismatch, TooLarge
from .filters import SubsetFamily, mask

log = logging.getLogger(__name__)

MAX_N = 24
MAX_K = 6


@dataclass(frozen=True)
class AmoebaModel:
    N: int
    k: int
    grid: tuple  # tabulated f-values, one length-N tuple per grid point

    def __post_init__(self):
        object.__setattr__(self, "grid", tuple(tuple(p) for p in self.grid))
        if self.k < 1 or 2 * self.k >= self.N + 1:
            raise ValueError(f"need 1 <= k and 2k < N + 1, got N={self.N}, k={self.k}")
        for p in self.grid:
            if len(p) != self.N:
                raise SizeMismatch(f"grid point has {len(p)} values, expected {self.N}")

    @property
    def max_cardinality(self) -> int:
        return math.comb(self.N - 1, self.k - 1)


def _mass(f: Sequence) -> tuple:
    hi = max(f)
    return [math.exp(v - hi) for v in f], hi


def amoeba_weight(f: Sequence, subset, k: int | None = None) -> float:
    """Z_k(I) with the exponentials taken relative to max f, signs kept explicit."""
    idx = sorted(set(subset))
    if k is not None and len(idx) != k:
        raise SizeMismatch(f"subset has {len(idx)} elements, expected {k}")
    if any(not 1 <= i <= len(f) for i in idx):
        raise SizeMismatch(f"subset must lie inside [{len(f)}]")
    w, hi = _mass(f)
    inside = set(idx)
    s = math.fsum(-x if i + 1 in inside else x for i, x in enumerate(w))
    return math.exp(hi) * s


def amoeba_weight_exact(weights: Sequence, subset) -> Fraction:
    """Z_k(I) for exact positive weights standing in for e^f."""
    inside = set(subset)
    return sum((-Fraction(x) if i + 1 in inside else Fraction(x) for i, x in enumerate(weights)), Fraction(0))


@lru_cache(maxsize=64)
def _combos(n: int, k: int) -> np.ndarray:
    return np.array(list(itertools.combinations(range(n), k)), dtype=np.int64).reshape(-1, k)


def _guard(n, k, allow_large):
    if not allow_large and (n > MAX_N or k > MAX_K):
        raise TooLarge(f"enumerating C({n},{k}) subsets exceeds the N <= {MAX_N}, k <= {MAX_K} guard")


def negative_family(f: Sequence, k: int, allow_large: bool = False) -> SubsetFamily:
    """All k-subsets with Z_k < 0, i.e. holding strictly more than half of sum e^f."""
    n = len(f)
    _guard(n, k, allow_large)
    w, _ = _mass(f)
    w = np.array(w)
    combos = _combos(n, k)
    inside = w[combos].sum(axis=1)
    neg = combos[inside > (w.sum() - inside)]
    return SubsetFamily(n, frozenset(mask(int(i) + 1 for i in row) for row in neg))


def negative_family_exact(weights: Sequence, k: int, allow_large: bool = False) -> SubsetFamily:
    n = len(weights)
    _guard(n, k, allow_large)
    return SubsetFamily(n, frozenset(
        mask(c) for c in itertools.combinations(range(1, n + 1), k) if amoeba_weight_exact(weights, c) < 0))


def dominant_index(f: Sequence) -> int | None:
    """The unique strict maximizer of f (1-based), if there is one."""
    hi = max(f)
    tops = [i + 1 for i, v in enumerate(f) if v == hi]
    return tops[0] if len(tops) == 1 else None


def star_trace(n: int, k: int, alpha: int) -> SubsetFamily:
    """k-subsets containing alpha: the principal ultrafilter at alpha traced on k-subsets."""
    return SubsetFamily(n, frozenset(
        mask(c) for c in itertools.combinations(range(1, n + 1), k) if alpha in c))


@dataclass(frozen=True)
class ScanRow:
    point: int
    cardinality: int
    max_cardinality: int
    flagged: bool
    alpha: int | None
    trace_ok: bool | None  # None on unflagged points


@dataclass(frozen=True)
class ScanResult:
    rows: tuple
    failures: tuple  # flagged points where the trace identity fails
    bound_violations: tuple  # points with #N_k above C(N-1, k-1)

    @property
    def flagged(self) -> tuple:
        return tuple(r.point for r in self.rows if r.flagged)


def workers() -> int:
    env = os.environ.get("TROPICA_THREADS")
    cap = int(env) if env and env.isdigit() and int(env) > 0 else (os.cpu_count() or 1)
    return max(1, cap)


def _scan_point(args):
    i, f, k, allow_large = args
    n = len(f)
    fam = negative_family(f, k, allow_large)
    top = math.comb(n - 1, k - 1)
    flagged = len(fam) == top
    alpha = dominant_index(f)
    ok = None
    if flagged:
        ok = alpha is not None and fam.members == star_trace(n, k, alpha).members
    return ScanRow(i, len(fam), top, flagged, alpha, ok)


def instability_scan(model: AmoebaModel, allow_large: bool = False, threads: int | None = None) -> ScanResult:
    """Negative families over the grid; flagged points are checked against the star trace."""
    if not model.grid:
        raise ValueError("grid must be non-empty")
    jobs = [(i, p, model.k, allow_large) for i, p in enumerate(model.grid)]
    n_workers = min(threads or workers(), len(jobs))
    if n_workers > 1:
        with ThreadPoolExecutor(n_workers) as ex:
            rows = tuple(ex.map(_scan_point, jobs))
    else:
        rows = tuple(map(_scan_point, jobs))
    failures = tuple(r.point for r in rows if r.flagged and not r.trace_ok)
    over = tuple(r.point for r in rows if r.cardinality > r.max_cardinality)
    for p in failures:
        log.warning("flagged grid point %d is not an ultrafilter trace", p)
    for p in over:
        log.warning("grid point %d exceeds the C(N-1, k-1) bound", p)
    return ScanResult(rows, failures, over)


def dominant_point(n: int, rng, margin: float = 0.1) -> tuple:
    """Random values where one index outweighs all others combined (e^f_a > sum of the rest)."""
    f = [rng.uniform(-1, 1) for _ in range(n)]
    a = rng.randrange(n)
    rest = math.fsum(math.exp(v) for i, v in enumerate(f) if i != a)
    f[a] = math.log(rest) + margin + rng.uniform(0, 1)
    return tuple(f)
