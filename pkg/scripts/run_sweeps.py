"""Standard-protocol sweeps over eps, D, I, M and n_B for the Karma model.

One CSV per swept parameter plus aligned final profiles for the I and M
sweeps (the n_B sweep runs on a doubled domain because the longest pulse
does not fit on the standard one).
"""
import argparse
import logging
from pathlib import Path

import numpy as np

from karmafhn import pde
from karmafhn.csvio import write_csv
from karmafhn.model import KarmaParams, params_to_mapping

SWEEPS = {
    "eps": ("eps", [1e-3, 1e-2, 8e-2], 400.0),
    "D": ("diff", [0.1, 0.15, 0.5, 1.0, 2.0], 400.0),
    "I": ("I", [0.0, 0.04, 0.08], 400.0),
    "M": ("M", [4, 10, 30], 400.0),
    "n_B": ("n_B", [0.3, 0.5, 0.8], 800.0),
}


def aligned_rows(rows, xi):
    out = []
    profiles = pde.profile_align([r.final for r in rows], labels=[r.value for r in rows])
    for prof in profiles:
        if prof.status != "ok":
            continue
        E, n = pde.resample(prof, xi)
        out.extend((prof.label, x, e, m) for x, e, m in zip(xi, E, n))
    return out


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--out", default="out/sweeps")
    ap.add_argument("--only", nargs="*", choices=sorted(SWEEPS))
    ap.add_argument("--workers", type=int)
    args = ap.parse_args()
    logging.basicConfig(level=logging.INFO, format="%(message)s")
    out = Path(args.out)
    base = KarmaParams()
    xi = np.linspace(-150.0, 20.0, 851)
    for name in args.only or SWEEPS:
        field, values, length = SWEEPS[name]
        rows = pde.sweep(base, field, values, pde.Protocol(length=length), workers=args.workers)
        header = params_to_mapping(base) | {"vary": name, "L": length}
        write_csv(out / f"sweep_{name}.csv", pde.SWEEP_COLUMNS, pde.sweep_rows(rows), header=header)
        if name in ("I", "M", "n_B"):
            write_csv(out / f"profiles_{name}.csv", ("value", "xi", "fast", "slow"),
                      aligned_rows(rows, xi), header=header)
        for r in rows:
            logging.info("%s=%g %s", name, r.value, r.status)


if __name__ == "__main__":
    main()
