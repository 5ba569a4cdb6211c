"""Nesting forms of a finite spectrum and the tropical free energy near k = 0.

A spectrum is a list of N finite values f_1..f_N.  The A-type nesting strips
maxima level by level; the B-type form is its reversal.  Indices are 1-based
in every public structure.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Sequence

import mpmath

from .core import is_exact
from .errors import DigitRange, GridTooCoarse, NotPrime
from .ultrametrics import is_prime

FLOAT_TIE_TOL = 1e-9


def default_tie_tol(values) -> float:
    return 0 if all(is_exact(v) for v in values) else FLOAT_TIE_TOL


@dataclass(frozen=True)
class Level:
    indices: tuple
    mu: object
    nu: int


@dataclass(frozen=True)
class NestingForm:
    type: str
    levels: tuple

    @property
    def L(self) -> int:
        return len(self.levels) - 1

    def reversed(self) -> "NestingForm":
        return NestingForm("B" if self.type == "A" else "A", tuple(reversed(self.levels)))

    def to_dict(self) -> dict:
        return {"type": self.type,
                "levels": [{"indices": list(lv.indices), "mu": lv.mu, "nu": lv.nu} for lv in self.levels]}


def _check_spectrum(values):
    if len(values) == 0:
        raise ValueError("spectrum must be non-empty")
    for v in values:
        if isinstance(v, float) and not math.isfinite(v):
            raise ValueError(f"spectrum values must be finite, got {v}")


def nest(values: Sequence, type: str = "A", tie_tol=None) -> NestingForm:
    """Level decomposition by repeated maximum stripping (A); B is the reversal.

    A value joins the current level when it is within ``tie_tol`` of the level
    leader (the largest remaining value).
    """
    _check_spectrum(values)
    if type not in ("A", "B"):
        raise ValueError(f"nesting type must be A or B, got {type!r}")
    if tie_tol is None:
        tie_tol = default_tie_tol(values)
    if tie_tol < 0:
        raise ValueError("tie_tol must be nonnegative")
    order = sorted(range(len(values)), key=lambda i: (-values[i], i))
    levels = []
    pos = 0
    while pos < len(order):
        lead = values[order[pos]]
        grp = []
        while pos < len(order) and lead - values[order[pos]] <= tie_tol:
            grp.append(order[pos] + 1)
            pos += 1
        levels.append(Level(tuple(sorted(grp)), lead, len(grp)))
    nf = NestingForm("A", tuple(levels))
    return nf if type == "A" else nf.reversed()


def reconstruct(nf: NestingForm, base=None):
    """Evaluate the nested product b^mu_0 (nu_0 + b^(mu_1 - mu_0) (nu_1 + ...)).

    ``base=None`` means e in floating point.  An exact rational base with
    integer level values gives an exact Fraction.
    """
    levels = nf.levels if nf.type == "A" else tuple(reversed(nf.levels))

    def power(x):
        if base is None:
            return math.exp(x)
        return Fraction(base) ** x if is_exact(base) and isinstance(x, int) else base ** x

    acc = levels[-1].nu
    for cur, nxt in zip(reversed(levels[:-1]), reversed(levels[1:])):
        acc = cur.nu + power(nxt.mu - cur.mu) * acc
    return power(levels[0].mu) * acc


def direct_sum(values: Sequence, base=None):
    if base is None:
        return math.fsum(math.exp(v) for v in values)
    return sum(Fraction(base) ** v for v in values)


def padic_series(digits: Sequence[int], p: int, type: str = "A", truncation: int | None = None) -> Fraction:
    """A: sum nu_l p^-l (a base-p expansion); B: sum nu_l p^l (a p-adic integer truncation)."""
    if not isinstance(p, int) or not is_prime(p):
        raise NotPrime(f"{p} is not prime")
    digits = list(digits)
    if truncation is not None:
        digits = digits[:truncation + 1]
    for d in digits:
        if not isinstance(d, int) or not 0 <= d < p:
            raise DigitRange(f"digit {d!r} outside 0..{p - 1}")
    sign = -1 if type == "A" else 1
    if type not in ("A", "B"):
        raise ValueError(f"type must be A or B, got {type!r}")
    return sum((Fraction(d) * Fraction(p) ** (sign * l) for l, d in enumerate(digits)), Fraction(0))


def free_energy(values: Sequence, k: float) -> float:
    """-k ln sum exp(-f/k), evaluated relative to the minimum so it never overflows."""
    _check_spectrum(values)
    if not k > 0:
        raise ValueError("k must be positive")
    kappa0 = min(values)
    lam0 = sum(1 for v in values if v == kappa0)
    rest = math.fsum(math.exp((kappa0 - v) / k) for v in values if v != kappa0)
    return float(kappa0) - k * math.log(lam0 + rest)


# --------------------------------------------------------------------------
# perturbative probe

PROBE_DPS = 50


def default_k_grid(k0: float = 0.1, halvings: int = 8) -> list:
    return [k0 / 2 ** i for i in range(halvings + 1)]


def _mp_free_energy(values, kappa0, k):
    s = mpmath.fsum(mpmath.exp((kappa0 - v) / k) for v in values)
    return kappa0 - k * mpmath.log(s)


def stencil_weights(m: int, r: int) -> list:
    """Central finite-difference weights for the m-th derivative on offsets -r..r."""
    pts = list(range(-r, r + 1))
    a = mpmath.matrix([[mpmath.mpf(x) ** q for x in pts] for q in range(len(pts))])
    b = mpmath.matrix([mpmath.factorial(m) if q == m else 0 for q in range(len(pts))])
    w = mpmath.lu_solve(a, b)
    return [w[i] for i in range(len(pts))]


def _derivative(fn, k, m, weights, r, h):
    return mpmath.fsum(w * fn(k + j * h) for w, j in zip(weights, range(-r, r + 1))) / h ** m


@dataclass(frozen=True)
class ProbeRow:
    order: int
    estimate: float
    target: float
    residual: float
    contraction: float
    tol: float

    @property
    def passed(self) -> bool:
        return self.residual <= self.tol


@dataclass(frozen=True)
class ProbeReport:
    kappa0: float
    lambda0: int
    rows: tuple
    table: tuple = field(default=(), repr=False)  # (order, k, raw, extrapolated)

    @property
    def ok(self) -> bool:
        return all(r.passed for r in self.rows)


def taylor_probe(values: Sequence, m_max: int = 3, k_grid: Sequence | None = None,
                 tie_tol=None, tols: Sequence | None = None, atol: float = 1e-12) -> ProbeReport:
    """Estimate the k -> 0+ derivatives of F/T = -k ln sum exp(-f/k).

    At every k on the grid, derivatives come from 5-point central stencils
    (step k/8) refined by two Richardson levels in the step.  The per-k values
    are then extrapolated toward k = 0 with two Richardson levels in k.  The
    expected limits are kappa_0 (order 0), -ln lambda_0 (order 1) and 0 above.
    """
    _check_spectrum(values)
    if m_max < 2:
        raise ValueError("m_max must be at least 2")
    grid = list(default_k_grid() if k_grid is None else k_grid)
    if len(grid) < 4 or any(not (b < a) for a, b in zip(grid, grid[1:])) or grid[-1] <= 0:
        raise ValueError("k_grid must be strictly decreasing, positive, with at least 4 points")
    lvl = nest(values, "B", tie_tol).levels[0]
    kappa0, lam0 = lvl.mu, lvl.nu
    if tols is None:
        tols = [1e-9] + [1e-6] * m_max
    rows, table = [], []
    with mpmath.workdps(PROBE_DPS):
        vals = [mpmath.mpf(v) if not isinstance(v, Fraction) else mpmath.mpf(v.numerator) / v.denominator
                for v in values]
        k0 = min(vals)
        cache = {}

        def fe(k):
            if k not in cache:
                cache[k] = _mp_free_energy(vals, k0, k)
            return cache[k]

        weights = {m: stencil_weights(m, 2) for m in range(1, m_max + 1)}
        for m in range(m_max + 1):
            raw = []
            for kf in grid:
                k = mpmath.mpf(kf)
                if m == 0:
                    raw.append(fe(k))
                    continue
                h = k / 8
                d = [_derivative(fe, k, m, weights[m], 2, h / 2 ** i) for i in range(3)]
                r1 = [(4 * d[i + 1] - d[i]) / 3 for i in range(2)]
                raw.append((16 * r1[1] - r1[0]) / 15)
            e1 = [2 * raw[i + 1] - raw[i] for i in range(len(raw) - 1)]
            e2 = [(4 * e1[i + 1] - e1[i]) / 3 for i in range(len(e1) - 1)]
            for i, kf in enumerate(grid):
                table.append((m, kf, float(raw[i]), float(e2[i - 2]) if i >= 2 else float("nan")))
            diffs = [abs(b - a) for a, b in zip(e2, e2[1:])]
            if diffs[-1] > atol and diffs[-1] >= diffs[-2]:
                raise GridTooCoarse(
                    f"order {m}: extrapolation not contracting ({float(diffs[-2]):.3g} -> {float(diffs[-1]):.3g})")
            est = e2[-1]
            target = (k0 if m == 0 else -mpmath.log(lam0) if m == 1 else mpmath.mpf(0))
            rows.append(ProbeRow(m, float(est), float(target), float(abs(est - target)),
                                 float(diffs[-1]), tols[m] if m < len(tols) else tols[-1]))
    return ProbeReport(float(kappa0), lam0, tuple(rows), tuple(table))


def random_gapped_spectrum(rng, n_max: int = 12, gap: float = 0.1, max_degeneracy: int = 3) -> list:
    """Shuffled spectrum whose distinct levels sit at least ``gap`` apart."""
    levels = [rng.uniform(-2, 2)]
    for _ in range(rng.randint(0, 4)):
        levels.append(levels[-1] + gap + rng.uniform(0, 1))
    vals = []
    for v in levels:
        vals += [v] * rng.randint(1, max_degeneracy)
    vals = vals[:n_max]
    rng.shuffle(vals)
    return vals
