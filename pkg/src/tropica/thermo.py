"""Ensembles of microsystems (E, S, T) out of equilibrium, in the tropical limit.

Each microsystem carries its own temperature, which may be negative but not
zero.  The B-type tropical free energy is min over systems of F/T, and the
A/B duality swaps energy with entropy and inverts the temperature.
"""

from __future__ import annotations

import itertools
import math
import random
from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

from .core import is_exact
from .errors import NonpositiveTemperature, NotAMinimizer, ZeroTemperature
from .nesting import default_tie_tol


@dataclass(frozen=True)
class MicroSystem:
    E: object
    S: object
    T: object
    label: str | None = None

    @property
    def exact(self) -> bool:
        return is_exact(self.E) and is_exact(self.S) and is_exact(self.T)


@dataclass(frozen=True)
class Ensemble:
    systems: tuple

    def __post_init__(self):
        object.__setattr__(self, "systems", tuple(self.systems))
        if not self.systems:
            raise ValueError("an ensemble needs at least one system")

    @classmethod
    def of(cls, triples, labels=None) -> "Ensemble":
        labels = labels or [None] * len(triples)
        return cls(tuple(MicroSystem(E, S, T, lab) for (E, S, T), lab in zip(triples, labels)))

    @property
    def labels(self) -> tuple:
        return tuple(s.label if s.label is not None else str(i + 1) for i, s in enumerate(self.systems))

    @property
    def exact(self) -> bool:
        return all(s.exact for s in self.systems)

    def __len__(self):
        return len(self.systems)

    def __iter__(self):
        return iter(self.systems)


def _tol(values, tie_tol):
    return default_tie_tol(values) if tie_tol is None else tie_tol


def _argext(values, best, tol) -> tuple:
    return tuple(i + 1 for i, v in enumerate(values) if abs(v - best) <= tol)


def _nonzero_t(e: Ensemble):
    for i, s in enumerate(e):
        if s.T == 0:
            raise ZeroTemperature(f"system {i + 1} has T = 0")


def _div(a, b):
    return Fraction(a) / Fraction(b) if is_exact(a) and is_exact(b) else a / b


def micro_free_energy(m: MicroSystem):
    return m.E - m.T * m.S


def beta(x):
    """Embed a finite real into the min-plus carrier (an identity immersion)."""
    return x


def b_objective(e: Ensemble) -> list:
    _nonzero_t(e)
    return [_div(micro_free_energy(s), s.T) for s in e]


def a_objective(e: Ensemble) -> list:
    """E - S*T per system, the quantity maximized in the A-type presentation."""
    return [s.E - s.S * s.T for s in e]


@dataclass(frozen=True)
class Extremum:
    value: object
    argext: tuple


def tropical_free_energy_B(e: Ensemble, tie_tol=None) -> Extremum:
    """min over systems of (E - T S)/T with the tie set of minimizers (1-based)."""
    vals = b_objective(e)
    best = min(vals)
    return Extremum(best, _argext(vals, best, _tol(vals, tie_tol)))


def ab_dual(e: Ensemble) -> Ensemble:
    """(E, S, T) -> (S, E, 1/T) for every system; an involution."""
    _nonzero_t(e)
    return Ensemble(tuple(MicroSystem(s.S, s.E, _div(1, s.T), s.label) for s in e))


@dataclass(frozen=True)
class DualityReport:
    b_value: object
    a_value: object  # the max of the dual A-form; the identity uses its negative
    inverted_value: object
    argmin_b: tuple
    argmax_a: tuple
    argmin_inverted: tuple
    holds: bool


def duality_identity(e: Ensemble, tol=None, tie_tol=None) -> DualityReport:
    """min (E - TS)/T  ==  -max of the dual A-form  ==  min of its tropical inversion."""
    b = b_objective(e)
    a = a_objective(ab_dual(e))
    inv = [-v for v in a]  # tropical inversion in min-plus is negation
    exact = e.exact
    ttol = 0 if exact else _tol(b, tie_tol)
    bmin, amax, imin = min(b), max(a), min(inv)
    if tol is None:
        tol = 0 if exact else 1e-12
    scale = max(1, abs(bmin))
    holds = abs(bmin + amax) <= tol * scale and abs(bmin - imin) <= tol * scale
    return DualityReport(bmin, amax, imin, _argext(b, bmin, ttol), _argext(a, amax, ttol),
                         _argext(inv, imin, ttol), holds)


# --------------------------------------------------------------------------
# shifts


def _order_signs(vals, tol):
    out = []
    for a, b in itertools.combinations(vals, 2):
        d = a - b
        out.append(0 if abs(d) <= tol else (1 if d > 0 else -1))
    return tuple(out)


@dataclass(frozen=True)
class ShiftRow:
    shift: object
    argmin_before: tuple
    argmin_after: tuple
    order_changed: bool
    f_shift_preserves: bool | None  # only meaningful for a common temperature
    a_differences_invariant: bool


@dataclass(frozen=True)
class ShiftReport:
    equilibrium: bool
    rows: tuple
    witness: object  # a grid shift flipping some pairwise comparison, if found

    @property
    def argmin_invariant(self) -> bool:
        return all(r.argmin_before == r.argmin_after for r in self.rows)


def default_shift_grid(points: int = 101, span=10) -> list:
    return [-span + 2 * span * i / (points - 1) for i in range(points)]


def _shifted(e: Ensemble, c) -> Ensemble:
    return Ensemble(tuple(MicroSystem(s.E + c, s.S, s.T, s.label) for s in e))


def shift_diagnostics(e: Ensemble, shifts: Sequence, grid: Sequence | None = None, tie_tol=None) -> ShiftReport:
    """Effect of energy shifts E -> E + c on the B-type minimizers and their order.

    With a common temperature the shift moves every F/T by c/T and nothing
    changes.  With unequal temperatures a grid of shifts is searched for one
    that flips a pairwise comparison.
    """
    base = b_objective(e)
    tol = _tol(base, tie_tol)
    temps = {s.T for s in e}
    equilibrium = len(temps) == 1
    before = _argext(base, min(base), tol)
    signs0 = _order_signs(base, tol)
    a0 = a_objective(ab_dual(e))
    rows = []
    for c in shifts:
        sh = _shifted(e, c)
        vals = b_objective(sh)
        after = _argext(vals, min(vals), tol)
        f_pres = None
        if equilibrium:
            f_pres = after == before
        # the dual A-form shifted in its own energy moves every entry by c
        a1 = [v + c for v in a0]
        a_inv = all(abs((x1 - y1) - (x0 - y0)) <= tol
                    for (x0, y0), (x1, y1) in zip(itertools.combinations(a0, 2), itertools.combinations(a1, 2)))
        rows.append(ShiftRow(c, before, after, _order_signs(vals, tol) != signs0, f_pres, a_inv))
    witness = None
    if not equilibrium:
        for c in (default_shift_grid() if grid is None else grid):
            if c == 0:
                continue
            vals = b_objective(_shifted(e, c))
            if _order_signs(vals, tol) != signs0:
                witness = c
                break
    return ShiftReport(equilibrium, tuple(rows), witness)


# --------------------------------------------------------------------------
# probabilities


def minimizers(values: Sequence, tie_tol=None) -> tuple:
    best = min(values)
    return _argext(values, best, _tol(values, tie_tol))


def usual_probability(values: Sequence, x, tie_tol=None) -> Fraction:
    """#(X & m0) / #m0 with m0 the minimizers of the spectrum; X holds 1-based indices."""
    x = set(x)
    n = len(values)
    if any(not 1 <= i <= n for i in x):
        raise ValueError(f"subset must lie inside [{n}]")
    m0 = minimizers(values, tie_tol)
    return Fraction(len(x.intersection(m0)), len(m0))


@dataclass(frozen=True)
class TropicalWeights:
    w: tuple
    W: tuple
    k_B: float
    m0: tuple
    F_tr: object


def tropical_weights(source, T, k_B=0, tie_tol=None) -> TropicalWeights:
    """W = (F_tr - F)/T - k_B ln #m0 and w = W - S at evaluation temperature T.

    ``source`` is an Ensemble (F = E - T S with the evaluation T) or a plain
    list of free energies (S = 0).
    """
    if not T > 0:
        raise NonpositiveTemperature(f"evaluation temperature must be positive, got {T}")
    if k_B < 0:
        raise ValueError("k_B must be nonnegative")
    if isinstance(source, Ensemble):
        F = [s.E - T * s.S for s in source]
        S = [s.S for s in source]
    else:
        F = list(source)
        S = [0] * len(F)
    m0 = minimizers(F, tie_tol)
    ftr = min(F)
    penalty = k_B * math.log(len(m0)) if k_B else 0
    W = tuple(_div(ftr - f, T) - penalty for f in F)
    w = tuple(a - s for a, s in zip(W, S))
    return TropicalWeights(w, W, k_B, m0, ftr)


def copy_effect(values: Sequence, alpha0: int, tie_tol=None) -> tuple:
    """Usual-probability weight of minimizer alpha0 before and after one extra copy."""
    m0 = minimizers(values, tie_tol)
    if alpha0 not in m0:
        raise NotAMinimizer(f"index {alpha0} is not a minimizer")
    lam0 = len(m0)
    return Fraction(1, lam0), Fraction(2, lam0 + 1)


# --------------------------------------------------------------------------
# generators and sweeps


def random_ensemble(n: int, rng: random.Random, exact: bool = False, t_range=5) -> Ensemble:
    def num():
        return Fraction(rng.randint(-40, 40), rng.randint(1, 8)) if exact else rng.uniform(-10, 10)

    def temp():
        while True:
            t = Fraction(rng.randint(-5 * 8, 5 * 8), 8) if exact else rng.uniform(-t_range, t_range)
            if t != 0:
                return t

    return Ensemble(tuple(MicroSystem(num(), num(), temp()) for _ in range(n)))


def equilibrium_ensemble(n: int, rng: random.Random, T=1.0) -> Ensemble:
    return Ensemble(tuple(MicroSystem(rng.uniform(-10, 10), rng.uniform(-10, 10), T) for _ in range(n)))


def temperature_sweep(e: Ensemble, t_min, t_max, steps: int, k_B=0, tie_tol=None) -> list:
    """Rows (T, F_tr, m0, W) at the common evaluation temperatures of a sweep."""
    if steps < 1:
        raise ValueError("steps must be at least 1")
    rows = []
    for i in range(steps):
        T = t_min if steps == 1 else t_min + (t_max - t_min) * i / (steps - 1)
        tw = tropical_weights(e, T, k_B, tie_tol)
        rows.append((T, tw.F_tr, tw.m0, tw.W))
    return rows
