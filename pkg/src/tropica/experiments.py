"""Seeded desk-scale sweeps behind the scripts/ entry points.

Each sweep is a dataclass config plus a ``run`` that fills a RunReport, so
the output goes through the same writer as the CLI.
"""

from __future__ import annotations

import math
import random
from dataclasses import asdict, dataclass

from . import amoeba, dequantify, nesting, thermo, ultrametrics as um
from .report import RunReport


@dataclass
class RoundtripSweep:
    count: int = 200
    max_points: int = 12
    exact: bool = True
    seed: int = 0

    def run(self) -> RunReport:
        rep = RunReport("roundtrip_sweep", asdict(self))
        t = rep.table("roundtrip", "case", "points", "equal", "max_deviation")
        for i in range(self.count):
            rng = random.Random(f"{self.seed}:{i}")
            m = um.random_tree_ultrametric(rng.randint(2, self.max_points), rng, self.exact)
            r = um.roundtrip_check(m)
            t.add(i, m.n, r.equal, r.max_deviation)
        rep.check("all_equal", all(row[2] for row in t.rows))
        return rep


@dataclass
class ProbeSweep:
    count: int = 50
    gap: float = 0.1
    m_max: int = 3
    seed: int = 6

    def run(self) -> RunReport:
        rep = RunReport("probe_sweep", asdict(self))
        t = rep.table("probe", "case", "N", "lambda0", "order", "estimate", "target", "residual", "passed")
        rng = random.Random(self.seed)
        for i in range(self.count):
            s = nesting.random_gapped_spectrum(rng, gap=self.gap)
            res = nesting.taylor_probe(s, self.m_max)
            for r in res.rows:
                t.add(i, len(s), res.lambda0, r.order, r.estimate, r.target, r.residual, r.passed)
        rep.check("all_orders_pass", all(row[-1] for row in t.rows))
        return rep


@dataclass
class DequantifySweep:
    spectrum: tuple = (0, 0, 1)
    schedule: str = "pow2:12"

    def run(self) -> RunReport:
        rep = RunReport("dequantify_sweep", asdict(self))
        sched = dequantify.CopySchedule.parse(self.schedule)
        t = rep.table("convergence", "alpha", "N", "kB", "w", "gap", "log_gap")
        for a in range(1, len(self.spectrum) + 1):
            res = dequantify.dequantified_weight(self.spectrum, a, sched)
            for r in res.rows:
                t.add(a, r.N, r.k_B, r.w, r.gap, r.log_gap)
            rep.check(f"alpha_{a}_limit_{res.limit}", res.converged)
        return rep


@dataclass
class AmoebaSweep:
    points: int = 200
    N: int = 8
    k: int = 3
    dominant_share: float = 0.5  # fraction of grid points built with a dominant index
    seed: int = 11
    threads: int | None = None

    def run(self) -> RunReport:
        rep = RunReport("amoeba_sweep", asdict(self))
        rng = random.Random(self.seed)
        grid = [amoeba.dominant_point(self.N, rng) if rng.random() < self.dominant_share
                else tuple(rng.uniform(-2, 2) for _ in range(self.N)) for _ in range(self.points)]
        res = amoeba.instability_scan(amoeba.AmoebaModel(self.N, self.k, grid), threads=self.threads)
        t = rep.table("scan", "point", "cardinality", "max_cardinality", "flagged", "alpha")
        for r in res.rows:
            t.add(r.point, r.cardinality, r.max_cardinality, r.flagged, r.alpha)
        rep.data.update(flagged=len(res.flagged), bound_violations=list(res.bound_violations),
                        max_cardinality=math.comb(self.N - 1, self.k - 1))
        rep.check("trace_on_flagged_points", not res.failures)
        return rep


@dataclass
class DualitySweep:
    count: int = 1000
    max_n: int = 20
    exact: bool = False
    seed: int = 7

    def run(self) -> RunReport:
        rep = RunReport("duality_sweep", asdict(self))
        t = rep.table("duality", "case", "N", "b_value", "a_value", "inverted_value", "holds")
        rng = random.Random(self.seed)
        for i in range(self.count):
            e = thermo.random_ensemble(rng.randint(1, self.max_n), rng, exact=self.exact)
            r = thermo.duality_identity(e)
            t.add(i, len(e), r.b_value, r.a_value, r.inverted_value, r.holds)
        rep.check("identity_holds", all(row[-1] for row in t.rows))
        return rep


SWEEPS = {"roundtrip": RoundtripSweep, "probe": ProbeSweep, "dequantify": DequantifySweep,
          "amoeba": AmoebaSweep, "duality": DualitySweep}
