"""Run one seeded sweep and write its primary table.

    python3 scripts/run_sweep.py probe --set count=20 --out probe.csv
"""

import argparse
import dataclasses
import sys
import time

from tropica.experiments import SWEEPS
from tropica.report import emit


def _coerce(field, text):
    if field.type in ("bool", bool):
        return text.lower() in ("1", "true", "yes")
    if field.type in ("int", int, "int | None"):
        return int(text)
    if field.type in ("float", float):
        return float(text)
    if field.type in ("tuple", tuple):
        return tuple(float(x) for x in text.split(","))
    return text


def main(argv=None):
    p = argparse.ArgumentParser(description=__doc__, formatter_class=argparse.RawDescriptionHelpFormatter)
    p.add_argument("sweep", choices=sorted(SWEEPS))
    p.add_argument("--set", action="append", default=[], metavar="KEY=VALUE", help="override a config field")
    p.add_argument("--format", choices=("csv", "json"), default="csv")
    p.add_argument("--out")
    args = p.parse_args(argv)
    cls = SWEEPS[args.sweep]
    fields = {f.name: f for f in dataclasses.fields(cls)}
    overrides = {}
    for item in args.set:
        key, _, val = item.partition("=")
        if key not in fields:
            p.error(f"{args.sweep} has no field {key!r}; choose from {', '.join(fields)}")
        overrides[key] = _coerce(fields[key], val)
    cfg = cls(**overrides)
    t0 = time.perf_counter()
    rep = cfg.run()
    text = emit(rep, args.format, args.out)
    if args.out is None:
        sys.stdout.write(text)
    status = "ok" if not rep.failed else "FAILED: " + ", ".join(rep.failed)
    print(f"# {cfg} {status} in {time.perf_counter() - t0:.2f}s", file=sys.stderr)
    return 0 if not rep.failed else 2


if __name__ == "__main__":
    sys.exit(main())
