"""Push eps up and D down under the standard protocol until the pulse dies.

Writes breakdown_eps.csv and breakdown_D.csv to the output directory.
"""
import argparse
import logging
from pathlib import Path

from karmafhn import pde
from karmafhn.csvio import write_csv
from karmafhn.model import KarmaParams, params_to_mapping


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--out", default="out/breakdown")
    ap.add_argument("--eps", default="0.08,0.12,0.16,0.2,0.3,0.5")
    ap.add_argument("--D", default="0.1,0.05,0.02,0.01")
    ap.add_argument("--workers", type=int)
    args = ap.parse_args()
    logging.basicConfig(level=logging.INFO, format="%(message)s")
    out = Path(args.out)
    base = KarmaParams()
    for name, field, values in (("eps", "eps", args.eps), ("D", "diff", args.D)):
        vals = [float(v) for v in values.split(",")]
        rows = pde.sweep(base, field, vals, workers=args.workers)
        for r in rows:
            logging.info("%s=%g %s %s", name, r.value, r.status,
                         "" if r.measurement is None else f"speed={r.measurement.speed:.4f}")
        write_csv(out / f"breakdown_{name}.csv", pde.SWEEP_COLUMNS, pde.sweep_rows(rows),
                  header=params_to_mapping(base) | {"vary": name})


if __name__ == "__main__":
    main()
