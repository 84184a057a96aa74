"""Heteroclinic loci c(n) for several gate exponents, the direction switch,
c_min at the fold gate and the assembled singular pulse."""
import argparse
import logging
from pathlib import Path

from karmafhn import travelling as tw
from karmafhn.csvio import write_csv
from karmafhn.model import KarmaParams, params_to_mapping


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--out", default="out/wave")
    ap.add_argument("--M", type=int, nargs="+", default=[4, 10, 30])
    ap.add_argument("--D", type=float, default=1.0)
    args = ap.parse_args()
    logging.basicConfig(level=logging.INFO, format="%(message)s")
    out = Path(args.out)
    p = KarmaParams(diff=args.D)

    loci = tw.continue_loci(p, Ms=args.M)
    summary = []
    for M, pts in zip(args.M, loci):
        q = p.with_(M=M)
        write_csv(out / f"locus_M{M}.csv", tw.LOCUS_COLUMNS, tw.locus_rows(pts), header=params_to_mapping(q))
        s = tw.locus_switch(q, pts)
        summary.append((M, pts[0].c, s))
        logging.info("M=%d  c(0)=%.6f  switch n^M=%.9f", M, pts[0].c, s)

    ms = tw.min_speed_family(p, samples=(0.5, 0.99, 1.01, 1.5))
    logging.info("c_min=%.6f  certified %s", ms.c_min, ms.certified)
    write_csv(out / "summary.csv", ("M", "c_front", "switch_nM"), summary,
              header=params_to_mapping(p) | {"c_min": ms.c_min})

    pulse = tw.assemble_singular_pulse(p)
    write_csv(out / "pulse.csv", tw.PULSE_COLUMNS, tw.pulse_rows(pulse),
              header=params_to_mapping(p) | {"c_front": pulse.c_front, "c_min": pulse.c_min})


if __name__ == "__main__":
    main()
