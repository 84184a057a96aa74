"""Command-line entry point: ``python3 -m karmafhn <command> [options]``.

Every command reads one flat ``key = value`` config (optional), applies
``--set`` overrides, and writes CSV files under ``--out`` with the resolved
parameters as ``#`` header lines.
"""
from __future__ import annotations

import argparse
import logging
import sys
from pathlib import Path

import numpy as np

from . import blowup, fastslow, pde, travelling
from .csvio import write_csv
from .errors import ConfigError, KarmaFhnError
from .integrate import IntegratorConfig, Switch, integrate
from .model import KarmaParams, params_from_mapping, params_to_mapping, parse_config_text

log = logging.getLogger("karmafhn")


class UsageError(Exception):
    pass


def _floats(text: str):
    return [float(v) for v in text.split(",") if v.strip()]


def resolve_params(args):
    mapping = {}
    if args.config:
        path = Path(args.config)
        if not path.exists():
            raise UsageError(f"config file {path} does not exist")
        mapping.update(parse_config_text(path.read_text()))
    if args.model:
        mapping["model"] = args.model
    for item in args.set or []:
        if "=" not in item:
            raise UsageError(f"--set expects key=value, got {item!r}")
        k, v = item.split("=", 1)
        mapping[k.strip()] = v.strip()
    return params_from_mapping(mapping)


def _header(p, **extra):
    h = params_to_mapping(p)
    h.update(extra)
    return h


def cmd_ode(args, p, out: Path):
    s0 = _floats(args.s0) if args.s0 else ([3.0, 0.2] if isinstance(p, KarmaParams) else [2.0, 0.0])
    t_end = args.t_end or 30.0 / p.eps
    sw = Switch() if isinstance(p, KarmaParams) else None
    cfg = IntegratorConfig(rel_tol=1e-9, abs_tol=1e-11, max_step=0.5)
    from .model import vector_field
    traj = integrate(vector_field(p), s0, (0.0, t_end), cfg, switch=sw)
    h = _header(p, s0=f"{s0[0]} {s0[1]}", t_end=t_end)
    traj.to_csv(out / "trajectory.csv", header=h)

    eqs = fastslow.find_equilibria(p)
    write_csv(out / "equilibria.csv", ("fast", "slow", "re_l1", "im_l1", "re_l2", "im_l2", "class"),
              [(e.position.fast, e.position.slow, e.eigenvalues[0].real, e.eigenvalues[0].imag,
                e.eigenvalues[1].real, e.eigenvalues[1].imag, e.classification) for e in eqs], header=h)
    if isinstance(p, KarmaParams):
        samples = fastslow.sample_manifold(p)
        fast = np.linspace(-0.5, 4.0, 451)
        slow_null = np.maximum(fast - 1.0, 0.0) / p.n_B
    else:
        samples = fastslow.sample_fhn_manifold(p)
        fast = np.linspace(-2.5, 2.5, 501)
        slow_null = (fast + p.a) / p.b
    write_csv(out / "manifold.csv", ("fast", "slow", "branch", "J"),
              [(s.E, s.n, s.branch, s.layer_jacobian) for s in samples], header=h)
    write_csv(out / "nullclines.csv", ("fast", "slow"), zip(fast, slow_null), header=h)
    return 0


def cmd_analyze(args, p, out: Path):
    if not isinstance(p, KarmaParams):
        raise UsageError("analyze needs --model karma: the FitzHugh-Nagumo fold curves are "
                         "parallel lines, so there are no current thresholds to compute")
    th = fastslow.compute_thresholds(p)
    h = _header(p)
    write_csv(out / "thresholds.csv", ("I0", "I1", "I2", "E_cusp"),
              [(th.I0, th.I1, th.I2, th.E_cusp)], header=h)
    Is = sorted(set(np.linspace(0.0, 0.6, 121).tolist()) | {th.I1})
    rows = []
    for I in Is:
        fc = fastslow.fold_curves(I, p)
        rows.append((I, fc.E_plus, fc.E_minus, fc.on_manifold_plus, fc.on_manifold_minus))
    write_csv(out / "fold_curves.csv", ("I", "E_plus", "E_minus", "on_manifold_plus", "on_manifold_minus"),
              rows, header=h)
    return 0


def cmd_wave(args, p, out: Path):
    if not isinstance(p, KarmaParams):
        raise UsageError("wave needs --model karma")
    Ms = [int(m) for m in _floats(args.M)]
    status = 0
    for M in Ms:
        q = p.with_(M=M)
        try:
            pts = travelling.continue_locus(q)
        except KarmaFhnError as exc:
            pts = getattr(exc, "partial", [])
            log.error("locus for M=%d incomplete: %s", M, exc)
            status = 1
        write_csv(out / f"locus_M{M}.csv", travelling.LOCUS_COLUMNS, travelling.locus_rows(pts),
                  header=_header(q))
    pulse = travelling.assemble_singular_pulse(p)
    write_csv(out / "pulse.csv", travelling.PULSE_COLUMNS, travelling.pulse_rows(pulse),
              header=_header(p, c_front=pulse.c_front, c_min=pulse.c_min))
    nM = travelling.switch_nM(p)
    write_csv(out / "hamiltonian.csv", travelling.LEVEL_COLUMNS,
              travelling.hamiltonian_level_set(0.0, nM, p), header=_header(p, nM=nM))
    return status


def _protocol(args):
    kw = {}
    if args.length:
        kw["length"] = args.length
    if args.points:
        kw["n_points"] = args.points
    if args.t_end:
        kw["t_end"] = args.t_end
    return pde.Protocol(**kw)


def cmd_pde(args, p, out: Path):
    prot = _protocol(args)
    grid = pde.Grid1D(prot.length, prot.n_points)
    times = _floats(args.snapshots)
    t_end = max(prot.t_end, max(times)) if times else prot.t_end
    f0 = pde.init_bump(grid, prot.center, prot.width, prot.height, pde.rest_of(p))
    snaps = pde.run_simulation(f0, p, t_end, times)
    for s in snaps[1:]:
        s.to_csv(out / f"snapshot_t{s.time:g}.csv", p)
    return 0


def cmd_sweep(args, p, out: Path):
    if not args.vary or not args.values:
        raise UsageError("sweep needs --vary NAME and --values v1,v2,...")
    field = {"D": "diff"}.get(args.vary, args.vary)
    rows = pde.sweep(p, field, _floats(args.values), _protocol(args), workers=args.workers)
    write_csv(out / f"sweep_{args.vary}.csv", pde.SWEEP_COLUMNS, pde.sweep_rows(rows),
              header=_header(p, vary=args.vary))
    return 0


def cmd_blowup(args, p, out: Path):
    blowup.export(out / "blowup_field.csv", out / "blowup_equilibria.csv", n_theta=args.theta_points)
    return 0


COMMANDS = {"ode": cmd_ode, "analyze": cmd_analyze, "wave": cmd_wave, "pde": cmd_pde,
            "sweep": cmd_sweep, "blowup": cmd_blowup}


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--model", choices=("karma", "fhn"))
    common.add_argument("--config", help="flat key = value parameter file")
    common.add_argument("--out", default="out", help="output directory")
    common.add_argument("--set", action="append", metavar="KEY=VALUE", help="parameter override")
    common.add_argument("-v", "--verbose", action="store_true")

    ap = argparse.ArgumentParser(prog="karmafhn", description=__doc__.splitlines()[0])
    sub = ap.add_subparsers(dest="command", required=True)
    s = sub.add_parser("ode", parents=[common], help="phase-plane orbit, manifold, equilibria")
    s.add_argument("--s0", help="initial state 'fast,slow'")
    s.add_argument("--t-end", type=float)
    sub.add_parser("analyze", parents=[common], help="current thresholds and fold curves")
    s = sub.add_parser("wave", parents=[common], help="heteroclinic loci and singular pulse")
    s.add_argument("--M", default="4,10,30", help="comma-separated gate exponents")
    for name in ("pde", "sweep"):
        s = sub.add_parser(name, parents=[common])
        s.add_argument("--length", type=float)
        s.add_argument("--points", type=int)
        s.add_argument("--t-end", type=float)
        if name == "pde":
            s.add_argument("--snapshots", default="100,200,300,400,500")
        else:
            s.add_argument("--vary")
            s.add_argument("--values")
            s.add_argument("--workers", type=int)
    s = sub.add_parser("blowup", parents=[common], help="blown-up planar example")
    s.add_argument("--theta-points", type=int, default=73)
    return ap


def main(argv=None) -> int:
    ap = build_parser()
    args = ap.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    out = Path(args.out)
    try:
        try:
            p = resolve_params(args)
        except ConfigError as exc:
            raise UsageError(str(exc)) from exc
        out.mkdir(parents=True, exist_ok=True)
        return COMMANDS[args.command](args, p, out)
    except UsageError as exc:
        ap.error(str(exc))  # exits with status 2
    except KarmaFhnError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
