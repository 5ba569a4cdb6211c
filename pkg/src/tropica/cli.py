"""Command-line front end: ``tropica <subcommand> [options]``.

Exit codes: 0 success, 2 when an exercised invariant fails, 1 on input errors.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import random
import sys
from fractions import Fraction
from pathlib import Path

import jsonschema

from . import amoeba, dequantify, filters, nesting, selftest, thermo, ultrametrics as um
from .core import POS_INF
from .errors import TropicaError
from .report import RunReport, emit

EXIT_OK, EXIT_INPUT, EXIT_ASSERT = 0, 1, 2
DEFAULT_SEED = 0

_NUM = {"type": ["number", "string"]}

SPECTRUM_SCHEMA = {
    "type": "object",
    "properties": {
        "version": {"const": 1},
        "spectrum": {"type": "array", "items": _NUM, "minItems": 1},
        "tie_tol": {"type": "number", "minimum": 0},
    },
    "required": ["version", "spectrum"],
    "additionalProperties": False,
}

THERMO_SCHEMA = {
    "type": "object",
    "properties": {
        "version": {"const": 1},
        "systems": {
            "type": "array",
            "minItems": 1,
            "items": {
                "type": "object",
                "properties": {"label": {"type": "string"}, "E": _NUM, "S": _NUM, "T": _NUM},
                "required": ["E", "S", "T"],
                "additionalProperties": False,
            },
        },
        "kB": {"type": "number", "minimum": 0},
        "tie_tol": {"type": "number", "minimum": 0},
        "T": _NUM,
        "sweep": {"type": "array", "prefixItems": [_NUM, _NUM, {"type": "integer", "minimum": 1}],
                  "minItems": 3, "maxItems": 3},
        "shifts": {"type": "array", "items": _NUM},
    },
    "required": ["version", "systems"],
    "additionalProperties": False,
}

FAMILY_SCHEMA = {
    "type": "object",
    "properties": {
        "version": {"const": 1},
        "ground": {"type": "integer", "minimum": 1},
        "members": {"type": "array", "items": {"type": "array", "items": {"type": "integer", "minimum": 1}}},
    },
    "required": ["version", "ground", "members"],
    "additionalProperties": False,
}

AMOEBA_SCHEMA = {
    "type": "object",
    "properties": {
        "version": {"const": 1},
        "N": {"type": "integer", "minimum": 2},
        "k": {"type": "integer", "minimum": 1},
        "labels": {"type": "array", "items": {"type": "string"}},
    },
    "required": ["version", "N"],
    "additionalProperties": False,
}

SCHEMAS = {
    "nest": SPECTRUM_SCHEMA, "probe": SPECTRUM_SCHEMA, "dequantify": SPECTRUM_SCHEMA,
    "thermo": THERMO_SCHEMA, "filters": FAMILY_SCHEMA, "amoeba": AMOEBA_SCHEMA,
}


class InputError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    """Usage errors are input errors (exit 1) and come with the relevant schema."""

    def error(self, message):
        self.print_usage(sys.stderr)
        sub = self.prog.split()[-1]
        if sub in SCHEMAS:
            sys.stderr.write("input schema:\n" + json.dumps(SCHEMAS[sub], indent=2, sort_keys=True) + "\n")
        sys.stderr.write(f"{self.prog}: error: {message}\n")
        raise SystemExit(EXIT_INPUT)


# --------------------------------------------------------------------------
# input helpers


def _read_text(arg: str) -> str:
    """Inline text, or the contents of a file given as @path or an existing path."""
    if arg.startswith("@"):
        return Path(arg[1:]).read_text()
    p = Path(arg)
    if not arg.lstrip().startswith(("[", "{")) and p.exists():
        return p.read_text()
    return arg


def _number(v, exact: bool):
    if isinstance(v, str):
        if v.strip().lower() in ("inf", "+inf"):
            return POS_INF
        q = Fraction(v)
        return q if exact else float(q)
    if isinstance(v, Fraction):
        if not exact:
            return float(v)
        return int(v) if v.denominator == 1 else v
    return v if exact or isinstance(v, float) else float(v)


def _load_json(text: str, exact: bool):
    return json.loads(text, parse_float=Fraction if exact else float)


def _validate(obj, schema):
    try:
        jsonschema.validate(obj, schema)
    except jsonschema.ValidationError as exc:
        raise InputError(f"schema violation: {exc.message}") from None


def _spectrum(arg: str, exact: bool):
    data = _load_json(_read_text(arg), exact)
    if isinstance(data, list):
        data = {"version": 1, "spectrum": data}
    _validate(_plain(data), SPECTRUM_SCHEMA)
    return [_number(v, exact) for v in data["spectrum"]], data.get("tie_tol")


def _plain(obj):
    """Fractions -> floats so jsonschema sees JSON numbers."""
    if isinstance(obj, dict):
        return {k: _plain(v) for k, v in obj.items()}
    if isinstance(obj, list):
        return [_plain(v) for v in obj]
    if isinstance(obj, Fraction):
        return float(obj)
    return obj


def _tie(args, fallback=None):
    return args.tie_tol if args.tie_tol is not None else fallback


def _inputs(args) -> dict:
    return {k: v for k, v in sorted(vars(args).items()) if k not in ("out", "func") and v is not None}


# --------------------------------------------------------------------------
# subcommands


def cmd_nest(args, rep: RunReport):
    exact = args.mode == "exact"
    s, tol = _spectrum(args.spectrum, exact)
    tol = _tie(args, tol)
    nf = nesting.nest(s, args.type, tol)
    other = nesting.nest(s, "B" if args.type == "A" else "A", tol)
    rep.data["nesting"] = nf.to_dict()
    t = rep.table("levels", "level", "indices", "mu", "nu")
    for i, lv in enumerate(nf.levels):
        t.add(i, lv.indices, lv.mu, lv.nu)
    idx = sorted(i for lv in nf.levels for i in lv.indices)
    rep.check("levels_partition", idx == list(range(1, len(s) + 1)))
    mus = [lv.mu for lv in nf.levels]
    mono = all(a > b for a, b in zip(mus, mus[1:])) if args.type == "A" else all(a < b for a, b in zip(mus, mus[1:]))
    rep.check("levels_strictly_monotone", mono)
    rep.check("reversal_symmetry", other.levels == tuple(reversed(nf.levels)))
    if exact and all(isinstance(v, int) for v in s):
        rep.check("exact_reconstruction_base2", nesting.reconstruct(nf, 2) == nesting.direct_sum(s, 2))
    elif (tol or 0) == 0 or not exact:
        fs = [float(v) for v in s]
        direct = nesting.direct_sum(fs)
        rec = nesting.reconstruct(nesting.nest(fs, "A", 0))
        rep.check("reconstruction_rel_1e-12", abs(rec - direct) <= 1e-12 * direct)


def cmd_probe(args, rep: RunReport):
    s, tol = _spectrum(args.spectrum, args.mode == "exact")
    grid = nesting.default_k_grid(args.k0, args.halvings)
    res = nesting.taylor_probe(s, args.orders, grid, _tie(args, tol))
    t = rep.table("residuals", "order", "estimate", "target", "residual", "contraction", "passed")
    for r in res.rows:
        t.add(r.order, r.estimate, r.target, r.residual, r.contraction, r.passed)
        rep.check(f"order_{r.order}_limit", r.passed)
    g = rep.table("grid", "order", "k", "raw", "extrapolated")
    for row in res.table:
        g.add(*row)
    rep.data["kappa0"] = res.kappa0
    rep.data["lambda0"] = res.lambda0


def _matrix_from_args(args, rng):
    exact = args.mode == "exact"
    form = um.Form.MIN_FORM if args.form == "min" else um.Form.MAX_FORM
    if args.matrix:
        return um.read_matrix_csv(_read_text(args.matrix), exact, form)
    if args.padic:
        pts = _load_json(_read_text(args.points or "[0, 1, 2, 3, 4]"), True)
        return um.padic_matrix([Fraction(str(v)) if not isinstance(v, int) else v for v in pts], args.padic)
    return um.random_tree_ultrametric(args.random, rng, exact)


def cmd_ultra(args, rep: RunReport):
    m = _matrix_from_args(args, random.Random(args.seed))
    v = um.verify_ultrametric(m)
    t = rep.table("verification", "valid", "worst_triple", "worst_violation", "algebraic_valid", "forms_agree")
    t.add(v.valid, v.worst_triple or (), v.worst_violation, v.algebraic_valid, v.forms_agree)
    d = rep.table("matrix", "x", "y", "d")
    for i, x in enumerate(m.points):
        for j, y in enumerate(m.points):
            if i < j:
                d.add(x, y, m.d[i][j])
    rep.check("forms_agree", v.forms_agree)
    if args.expect:
        rep.check(f"expected_{args.expect}", v.valid == (args.expect == "valid"))


def cmd_roundtrip(args, rep: RunReport):
    t = rep.table("roundtrip", "case", "points", "equal", "max_deviation")
    if args.matrix:
        seeds = [um.read_matrix_csv(_read_text(args.matrix), args.mode == "exact")]
    else:
        seeds = []
        for i in range(args.count):
            rng = random.Random(f"{args.seed}:{i}")
            seeds.append(um.random_tree_ultrametric(rng.randint(2, args.max_points), rng, args.mode == "exact"))
    ok = True
    for i, m in enumerate(seeds):
        r = um.roundtrip_check(m)
        t.add(i, m.n, r.equal, r.max_deviation)
        ok &= r.equal
    rep.check("roundtrip_equal", ok)


def cmd_filters(args, rep: RunReport):
    if args.enumerate:
        t = rep.table("filters", "zeta", "proper", "kind")
        ok = True
        for f in filters.all_filters(args.enumerate):
            c = filters.classify(f)
            t.add(c.zeta, c.proper, c.kind.value)
            ok &= (c.kind is filters.Kind.ULTRAFILTER) == (c.proper and len(c.zeta) == 1)
        rep.check("ultra_iff_singleton_generator", ok)
        return
    if not args.family:
        raise InputError("filters needs --family or --enumerate")
    data = json.loads(_read_text(args.family))
    _validate(data, FAMILY_SCHEMA)
    fam = filters.SubsetFamily.of(data["ground"], data["members"])
    c = filters.classify(fam)
    t = rep.table("classification", "kind", "proper", "zeta", "is_ideal")
    t.add(c.kind.value, c.proper, c.zeta or (), c.is_ideal)
    if c.kind in (filters.Kind.FILTER, filters.Kind.ULTRAFILTER):
        rep.check("finite_filter_principal",
                  fam.members == filters.principal_filter(fam.n, c.principal_generator).members)
    if args.extend:
        kind = filters.Kind.IDEAL if args.extend == "ideal" else filters.Kind.FILTER
        ext = filters.extend_base(fam, kind)
        e = rep.table("extension", "member")
        for m in ext.sorted_members():
            e.add(m)
    if args.measure is not None:
        x = json.loads(args.measure)
        rep.data["measure"] = filters.filter_measure(fam, x)


def _ensemble(data, exact):
    systems = tuple(thermo.MicroSystem(_number(s["E"], exact), _number(s["S"], exact), _number(s["T"], exact),
                                       s.get("label")) for s in data["systems"])
    return thermo.Ensemble(systems)


def cmd_thermo(args, rep: RunReport):
    exact = args.mode == "exact"
    data = _load_json(_read_text(args.model), exact)
    _validate(_plain(data), THERMO_SCHEMA)
    e = _ensemble(data, exact)
    tol = _tie(args, data.get("tie_tol"))
    kb = data.get("kB", 0)
    if "sweep" in data:
        lo, hi, steps = data["sweep"]
        sw = rep.table("sweep", "T", "F_tr", "m0", "W")
        for row in thermo.temperature_sweep(e, _number(lo, False), _number(hi, False), steps, float(kb), tol):
            sw.add(*row)
    b = thermo.tropical_free_energy_B(e, tol)
    dual = thermo.duality_identity(e, tie_tol=tol)
    s = rep.table("summary", "b_value", "argmin", "a_value", "inverted_value", "duality_holds")
    s.add(b.value, b.argext, dual.a_value, dual.inverted_value, dual.holds)
    per = rep.table("systems", "label", "F", "F_over_T")
    for lab, sysm, v in zip(e.labels, e, thermo.b_objective(e)):
        per.add(lab, thermo.micro_free_energy(sysm), v)
    rep.check("duality_identity", dual.holds)
    shifts = [_number(x, exact) for x in data.get("shifts", [])]
    if shifts:
        sd = thermo.shift_diagnostics(e, shifts, tie_tol=tol)
        st = rep.table("shifts", "shift", "argmin_before", "argmin_after", "order_changed")
        for r in sd.rows:
            st.add(r.shift, r.argmin_before, r.argmin_after, r.order_changed)
        rep.data["equilibrium"] = sd.equilibrium
        rep.data["witness_shift"] = sd.witness
        if sd.equilibrium:
            rep.check("equilibrium_argmin_invariant", sd.argmin_invariant)
    if "T" in data:
        tw = thermo.tropical_weights(e, _number(data["T"], exact), kb, tol)
        wt = rep.table("weights", "label", "w", "W")
        for lab, w, W in zip(e.labels, tw.w, tw.W):
            wt.add(lab, w, W)
        if kb == 0:
            rep.check("weights_max_normalized", max(tw.W) == 0)


def cmd_dequantify(args, rep: RunReport):
    s, tol = _spectrum(args.spectrum, False)
    sched = dequantify.CopySchedule.parse(args.schedule)
    if not 1 <= args.alpha <= len(s):
        raise InputError(f"--alpha must lie in [1, {len(s)}]")
    res = dequantify.dequantified_weight(s, args.alpha, sched, _tie(args, tol))
    t = rep.table("convergence", "N", "kB", "w", "gap")
    for r in res.rows:
        t.add(r.N, r.k_B, r.w, r.gap)
    rep.data.update(limit=res.limit, dominant=res.dominant, lambda0=res.lambda0, rate=res.rate)
    rep.check("limit_" + ("one" if res.dominant else "zero"), res.converged)


def _grid_csv(text: str, exact: bool):
    rows = [r for r in csv.reader(io.StringIO(text)) if r]
    try:
        float(rows[0][0])
    except ValueError:
        rows = rows[1:]
    return [tuple(float(Fraction(x)) for x in r) for r in rows]


def cmd_amoeba(args, rep: RunReport):
    data = json.loads(_read_text(args.model))
    _validate(data, AMOEBA_SCHEMA)
    k = args.k if args.k is not None else data.get("k")
    if k is None:
        raise InputError("subset size k missing (use --k or the model's k)")
    grid = _grid_csv(_read_text(args.grid), False)
    model = amoeba.AmoebaModel(data["N"], k, grid)
    res = amoeba.instability_scan(model, allow_large=args.allow_large)
    t = rep.table("scan", "point", "cardinality", "max_cardinality", "flagged", "alpha")
    for r in res.rows:
        t.add(r.point, r.cardinality, r.max_cardinality, r.flagged, r.alpha)
    rep.check("ultrafilter_trace_on_flagged_points", not res.failures)
    rep.data["bound_violations"] = list(res.bound_violations)


def cmd_selftest(args, rep: RunReport):
    t = rep.table("fixtures", "fixture", "passed")
    for name, ok in selftest.run_all():
        t.add(name, ok)
        rep.check(name, ok)


# --------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--mode", choices=("exact", "float"), default="exact")
    common.add_argument("--seed", type=int, default=DEFAULT_SEED)
    common.add_argument("--tie-tol", type=float, default=None)
    common.add_argument("--out", default=None)
    common.add_argument("--format", choices=("csv", "json"), default=None)

    p = _Parser(prog="tropica", description="Tropical limits: filters, ultrametrics, nesting, thermodynamics.")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def add(name, func, help_, fmt="json"):
        sp = sub.add_parser(name, parents=[common], help=help_)
        sp.set_defaults(func=func, default_format=fmt)
        return sp

    sp = add("nest", cmd_nest, "nesting form of a spectrum")
    sp.add_argument("--spectrum", required=True)
    sp.add_argument("--type", choices=("A", "B"), default="A")

    sp = add("probe", cmd_probe, "perturbative probe of the free energy at k -> 0")
    sp.add_argument("--spectrum", required=True)
    sp.add_argument("--orders", type=int, default=3)
    sp.add_argument("--k0", type=float, default=0.1)
    sp.add_argument("--halvings", type=int, default=8)

    sp = add("ultra", cmd_ultra, "verify an ultrametric")
    src = sp.add_mutually_exclusive_group(required=True)
    src.add_argument("--matrix")
    src.add_argument("--padic", type=int)
    src.add_argument("--random", type=int)
    sp.add_argument("--points")
    sp.add_argument("--form", choices=("max", "min"), default="max")
    sp.add_argument("--expect", choices=("valid", "invalid"))

    sp = add("roundtrip", cmd_roundtrip, "ultrametric -> filter -> ultrametric round trip")
    sp.add_argument("--matrix")
    sp.add_argument("--count", type=int, default=200)
    sp.add_argument("--max-points", type=int, default=12)

    sp = add("filters", cmd_filters, "classify filters and ideals")
    sp.add_argument("--family")
    sp.add_argument("--enumerate", type=int)
    sp.add_argument("--extend", choices=("filter", "ideal"))
    sp.add_argument("--measure")

    sp = add("thermo", cmd_thermo, "tropical free energy of a microsystem ensemble")
    sp.add_argument("--model", required=True)

    sp = add("dequantify", cmd_dequantify, "copy-schedule dequantification limit", fmt="csv")
    sp.add_argument("--spectrum", required=True)
    sp.add_argument("--alpha", type=int, required=True)
    sp.add_argument("--schedule", default="pow2:12")

    sp = add("amoeba", cmd_amoeba, "instability scan of the statistical amoeba", fmt="csv")
    sp.add_argument("--model", required=True)
    sp.add_argument("--k", type=int)
    sp.add_argument("--grid", required=True)
    sp.add_argument("--allow-large", action="store_true")

    add("selftest", cmd_selftest, "replay the embedded fixture suite")
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    rep = RunReport(args.command, _inputs(args))
    try:
        args.func(args, rep)
        text = emit(rep, args.format or args.default_format, args.out)
    except (TropicaError, InputError, ValueError, KeyError, OSError, json.JSONDecodeError,
            ZeroDivisionError) as exc:
        sys.stderr.write(f"tropica {args.command}: error: {exc}\n")
        return EXIT_INPUT
    if args.out is None:
        sys.stdout.write(text)
    for name in rep.failed:
        sys.stderr.write(f"tropica {args.command}: assertion failed: {name}\n")
    return EXIT_ASSERT if rep.failed else EXIT_OK


run = main

if __name__ == "__main__":
    sys.exit(main())
