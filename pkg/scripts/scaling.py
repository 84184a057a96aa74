"""Fenichel distance and fold-exit height against eps, with fitted exponents."""
import argparse
from pathlib import Path

from karmafhn import fastslow
from karmafhn.csvio import write_csv
from karmafhn.model import KarmaParams, params_to_mapping


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--out", default="out/scaling")
    ap.add_argument("--eps", type=float, nargs="+", default=[1e-2, 5e-3, 2e-3, 1e-3])
    ap.add_argument("--rho", type=float, default=0.5)
    args = ap.parse_args()
    p = KarmaParams()
    fen = fastslow.fenichel_distance_scaling(p, args.eps)
    fold = fastslow.fold_exit_scaling(p, args.eps, rho=args.rho)
    print(f"Fenichel distance slope {fen.slope:.4f}")
    print(f"fold exit height slope  {fold.slope:.4f}  (2/3 = {2 / 3:.4f})")
    rows = [(e, d, h) for e, d, h in zip(fen.eps, fen.values, fold.values)]
    write_csv(Path(args.out) / "scaling.csv", ("eps", "distance", "exit_height"), rows,
              header=params_to_mapping(p) | {"slope_distance": fen.slope, "slope_exit": fold.slope,
                                             "rho": args.rho})


if __name__ == "__main__":
    main()
