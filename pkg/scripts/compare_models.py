"""Karma against FitzHugh-Nagumo under the standard bump protocol: late
profiles, phase projections, undershoot and where the back leaves the
excited branch."""
import argparse
from pathlib import Path

from karmafhn import fastslow, pde
from karmafhn.csvio import write_csv
from karmafhn.model import FhnParams, KarmaParams, params_to_mapping


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--out", default="out/compare")
    args = ap.parse_args()
    out = Path(args.out)
    for label, p in (("karma", KarmaParams()), ("fhn", FhnParams())):
        run = pde.standard_run(p)
        if run.status != "ok":
            print(f"{label}: {run.status} {run.message}")
            continue
        last = run.snapshots[-1]
        last.to_csv(out / f"profile_{label}.csv", p)
        m = run.measurement
        rest = fastslow.resting_state(p).fast
        print(f"{label}: speed {m.speed:.4f}  width {m.pulse_width:.2f}  "
              f"min below rest {rest - last.fast.min():.4f}")
        if label == "karma":
            E, n = pde.back_departure(last)
            print(f"karma back crosses E=2 at n={n:.4f}")
        write_csv(out / f"phase_{label}.csv", ("fast", "slow"), pde.project_phase(last),
                  header=params_to_mapping(p) | {"time": last.time})


if __name__ == "__main__":
    main()
