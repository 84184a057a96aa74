"""Method-of-lines solver for the 1-D Karma and FitzHugh-Nagumo equations.

Second-order central differences with mirror (zero-flux) boundaries and
classical RK4 in time.  On top of the solver sit the wave measurements
(front speed, pulse width, baseline, undershoot) and the parameter-sweep
harness.
"""
from __future__ import annotations

import logging
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, replace
from typing import Callable, Sequence

import numpy as np
from scipy.stats import linregress

from .csvio import write_csv
from .errors import BlowUpError, DomainError, GeometryError, WaveLost
from .fastslow import resting_state
from .model import KarmaParams, Params, fhn_reaction, karma_reaction, params_to_mapping

log = logging.getLogger(__name__)


@dataclass(frozen=True)
class Grid1D:
    length: float = 400.0
    n_points: int = 2001
    boundary: str = "zero-flux"

    def __post_init__(self):
        if self.n_points < 16:
            raise GeometryError("need at least 16 grid points")
        if not self.length > 0:
            raise GeometryError("domain length must be > 0")
        if self.boundary != "zero-flux":
            raise GeometryError(f"unsupported boundary {self.boundary!r}")

    @property
    def dx(self) -> float:
        return self.length / (self.n_points - 1)

    @property
    def x(self) -> np.ndarray:
        return np.linspace(0.0, self.length, self.n_points)


@dataclass
class Field1D:
    grid: Grid1D
    fast: np.ndarray
    slow: np.ndarray
    time: float = 0.0

    def __post_init__(self):
        self.fast = np.asarray(self.fast, dtype=float)
        self.slow = np.asarray(self.slow, dtype=float)
        if self.fast.shape != (self.grid.n_points,) or self.slow.shape != (self.grid.n_points,):
            raise GeometryError("field arrays must match the grid")

    def copy(self) -> "Field1D":
        return Field1D(self.grid, self.fast.copy(), self.slow.copy(), self.time)

    def to_csv(self, path, params: Params | None = None):
        header = dict(params_to_mapping(params)) if params is not None else {}
        header["time"] = self.time
        header["L"] = self.grid.length
        header["n_points"] = self.grid.n_points
        write_csv(path, ("x", "fast", "slow"),
                  np.column_stack([self.grid.x, self.fast, self.slow]), header=header)


@dataclass(frozen=True)
class WaveMeasurement:
    speed: float
    speed_stderr: float
    pulse_width: float
    amplitude: float
    baseline: float
    hyperpolarization_depth: float


# -- initial data and stepping ------------------------------------------------------

def init_bump(grid: Grid1D, center: float = 50.0, width: float = 10.0, height: float = 3.0,
              rest: tuple[float, float] = (0.0, 0.0)) -> Field1D:
    """cos^2 bump of half-width ``width`` on top of the uniform state ``rest``."""
    if width <= 0 or width > grid.length or center - width < 0 or center + width > grid.length:
        raise GeometryError(f"bump [{center - width}, {center + width}] leaves [0, {grid.length}]")
    x = grid.x
    inside = np.abs(x - center) < width
    bump = np.where(inside, height * np.cos(0.5 * np.pi * (x - center) / width) ** 2, 0.0)
    return Field1D(grid, rest[0] + bump, np.full(grid.n_points, float(rest[1])), 0.0)


def rest_of(p: Params) -> tuple[float, float]:
    """Stable homogeneous state the bump is placed on."""
    if isinstance(p, KarmaParams) and p.I == 0:
        return (0.0, 0.0)
    return tuple(resting_state(p))


def laplacian(u: np.ndarray, dx: float) -> np.ndarray:
    lap = np.empty_like(u)
    lap[1:-1] = u[2:] - 2.0 * u[1:-1] + u[:-2]
    lap[0] = 2.0 * (u[1] - u[0])
    lap[-1] = 2.0 * (u[-2] - u[-1])
    return lap / (dx * dx)


def _reaction(p: Params) -> Callable:
    if isinstance(p, KarmaParams):
        return lambda u, v: karma_reaction(u, v, p)
    return lambda u, v: fhn_reaction(u, v, p)


def _semi_discrete(p: Params, dx: float):
    react = _reaction(p)
    D = p.diff

    def f(u, v):
        du, dv = react(u, v)
        return du + D * laplacian(u, dx), dv
    return f


def stable_dt(grid: Grid1D, p: Params, cap: float = 0.01) -> float:
    if p.diff == 0:
        return cap
    return min(0.9 * grid.dx ** 2 / (2.0 * p.diff), cap)


def _rk4(f, u, v, dt):
    k1u, k1v = f(u, v)
    k2u, k2v = f(u + 0.5 * dt * k1u, v + 0.5 * dt * k1v)
    k3u, k3v = f(u + 0.5 * dt * k2u, v + 0.5 * dt * k2v)
    k4u, k4v = f(u + dt * k3u, v + dt * k3v)
    return (u + dt / 6.0 * (k1u + 2 * k2u + 2 * k3u + k4u),
            v + dt / 6.0 * (k1v + 2 * k2v + 2 * k3v + k4v))


def _check_dt(grid, p, dt):
    if dt <= 0:
        raise DomainError("dt must be > 0")
    if p.diff > 0 and dt > 0.9 * grid.dx ** 2 / (2.0 * p.diff) * (1 + 1e-12):
        raise DomainError(f"dt={dt} exceeds the explicit diffusion bound "
                          f"{0.9 * grid.dx ** 2 / (2.0 * p.diff):.4g}")


def step_pde(f: Field1D, p: Params, dt: float) -> Field1D:
    _check_dt(f.grid, p, dt)
    # overflow shows up as non-finite values, checked below
    with np.errstate(over="ignore", invalid="ignore"):
        u, v = _rk4(_semi_discrete(p, f.grid.dx), f.fast, f.slow, dt)
    t = f.time + dt
    if not (np.all(np.isfinite(u)) and np.all(np.isfinite(v))):
        raise BlowUpError(f"non-finite field at t={t:g}", time=t)
    return Field1D(f.grid, u, v, t)


def run_simulation(f0: Field1D, p: Params, t_end: float, snapshot_times: Sequence[float] = (),
                   dt: float | None = None, stop: Callable[[Field1D], bool] | None = None) -> list:
    """Snapshots at ``snapshot_times`` (the initial field first).

    ``stop`` is called on every snapshot; returning True ends the run early.
    """
    times = list(snapshot_times)
    if any(b < a for a, b in zip(times, times[1:])):
        raise DomainError("snapshot times must be sorted")
    if times and times[-1] > t_end + 1e-12:
        raise DomainError("snapshot time beyond t_end")
    grid = f0.grid
    dt = dt or stable_dt(grid, p)
    _check_dt(grid, p, dt)
    rhs = _semi_discrete(p, grid.dx)
    out = [f0.copy()]
    if t_end <= 0:
        return out
    u, v = f0.fast.copy(), f0.slow.copy()
    t0 = f0.time
    n_steps = int(round(t_end / dt))
    marks = {}
    for ts in times:
        k = int(round(ts / dt))
        if k > 0:
            marks.setdefault(k, ts)
    check_every = max(1, int(round(1.0 / dt)))
    for k in range(1, n_steps + 1):
        with np.errstate(over="ignore", invalid="ignore"):
            u, v = _rk4(rhs, u, v, dt)
        if k % check_every == 0 or k in marks:
            if not (np.all(np.isfinite(u)) and np.all(np.isfinite(v))):
                raise BlowUpError(f"non-finite field at t={t0 + k * dt:g}", time=t0 + k * dt)
        if k in marks:
            snap = Field1D(grid, u.copy(), v.copy(), t0 + k * dt)
            out.append(snap)
            if stop is not None and stop(snap):
                break
    return out


# -- measurements -----------------------------------------------------------------------------------

def front_position(f: Field1D, level: float) -> float | None:
    """x of the rightmost crossing of ``fast = level``, by linear interpolation."""
    u = f.fast - level
    idx = np.nonzero((u[:-1] >= 0) & (u[1:] < 0))[0]
    if not idx.size:
        return None
    i = idx[-1]
    x = f.grid.x
    return float(x[i] + u[i] / (u[i] - u[i + 1]) * (x[i + 1] - x[i]))


def trailing_position(f: Field1D, level: float, front: float) -> float | None:
    """x of the nearest upward crossing (left to right) behind ``front``."""
    u = f.fast - level
    x = f.grid.x
    idx = np.nonzero((u[:-1] < 0) & (u[1:] >= 0))[0]
    idx = idx[x[idx] < front]
    if not idx.size:
        return None
    i = idx[-1]
    return float(x[i] + u[i] / (u[i] - u[i + 1]) * (x[i + 1] - x[i]))


def measure_wave(snapshots: Sequence[Field1D], level: float = 1.0,
                 baseline_window: float = 20.0) -> WaveMeasurement:
    """Speed from a least-squares fit of front position against time; shape from the last snapshot."""
    if len(snapshots) < 3:
        raise DomainError("need at least 3 snapshots")
    ts, xs = [], []
    for s in snapshots:
        xf = front_position(s, level)
        if xf is None:
            raise WaveLost(f"no crossing of level {level} at t={s.time:g}")
        ts.append(s.time)
        xs.append(xf)
    fit = linregress(ts, xs)
    last = snapshots[-1]
    x = last.grid.x
    xf = xs[-1]
    ahead = last.fast[(x > xf + 5.0) & (x <= xf + 5.0 + baseline_window)]
    if not ahead.size:
        ahead = last.fast[x > xf]
    baseline = float(np.median(ahead)) if ahead.size else float("nan")
    xt = trailing_position(last, level, xf)
    width = xf - xt if xt is not None else float("nan")
    behind = last.fast[x < xt] if xt is not None else np.empty(0)
    depth = float(behind.min() - baseline) if behind.size else float("nan")
    return WaveMeasurement(float(fit.slope), float(fit.stderr), float(width),
                           float(last.fast.max()), baseline, depth)


# -- standard protocol ------------------------------------------------------------------------------

@dataclass(frozen=True)
class Protocol:
    length: float = 400.0
    n_points: int = 2001
    center: float = 50.0
    width: float = 10.0
    height: float = 3.0
    t_end: float = 500.0
    t_start: float = 50.0
    every: float = 5.0
    edge_margin: float = 40.0
    level: float | None = None  # 1 for Karma, 0 for FHN

    def level_for(self, p: Params) -> float:
        if self.level is not None:
            return self.level
        return 1.0 if isinstance(p, KarmaParams) else 0.0

    def with_(self, **kw) -> "Protocol":
        return replace(self, **kw)


@dataclass
class ProtocolRun:
    snapshots: list
    measurement: WaveMeasurement | None
    status: str  # "ok" | "wave-lost" | "blow-up"
    message: str = ""


def standard_run(p: Params, protocol: Protocol = Protocol()) -> ProtocolRun:
    """Bump at ``center`` on the resting state, run until ``t_end`` or until
    the front is ``edge_margin`` from the right edge, then measure.

    The wave counts as lost if any snapshot in the window lacks a crossing.
    """
    grid = Grid1D(protocol.length, protocol.n_points)
    level = protocol.level_for(p)
    f0 = init_bump(grid, protocol.center, protocol.width, protocol.height, rest_of(p))
    times = list(np.arange(protocol.t_start, protocol.t_end + 1e-9, protocol.every))
    edge = protocol.length - protocol.edge_margin
    lost = []

    def stop(s):
        xf = front_position(s, level)
        if xf is None:
            lost.append(s.time)
            return True
        return xf > edge

    try:
        snaps = run_simulation(f0, p, protocol.t_end, times, stop=stop)
    except BlowUpError as exc:
        return ProtocolRun([], None, "blow-up", str(exc))
    window = [s for s in snaps[1:]]
    if lost:
        return ProtocolRun(window, None, "wave-lost", f"no crossing at t={lost[0]:g}")
    # drop the snapshot that triggered the edge stop
    window = [s for s in window if front_position(s, level) <= edge] or window
    try:
        m = measure_wave(window, level)
    except (WaveLost, DomainError) as exc:
        return ProtocolRun(window, None, "wave-lost", str(exc))
    return ProtocolRun(window, m, "ok")


@dataclass
class SweepRow:
    value: float
    status: str
    measurement: WaveMeasurement | None
    final: Field1D | None = None


SWEEP_COLUMNS = ("param_value", "speed", "speed_stderr", "width", "amplitude", "baseline",
                 "hyperpolarization_depth", "status")


def _sweep_job(args):
    base, name, value, protocol = args
    p = base.with_(**{name: value})
    run = standard_run(p, protocol)
    final = run.snapshots[-1] if run.snapshots else None
    return SweepRow(float(value), run.status, run.measurement, final)


def sweep(base: Params, vary: str, values: Sequence[float], protocol: Protocol = Protocol(),
          workers: int | None = None) -> list:
    """One standard run per value; rows come back in input order."""
    if not hasattr(base, vary):
        raise DomainError(f"{type(base).__name__} has no parameter {vary!r}")
    if not all(np.isfinite(v) for v in values):
        raise DomainError("sweep values must be finite")
    jobs = [(base, vary, v, protocol) for v in values]
    workers = workers or min(len(jobs), os.cpu_count() or 1)
    if workers <= 1:
        return [_sweep_job(j) for j in jobs]
    with ProcessPoolExecutor(max_workers=workers) as ex:
        return list(ex.map(_sweep_job, jobs))


def sweep_rows(rows: Sequence[SweepRow]):
    out = []
    for r in rows:
        m = r.measurement
        if m is None:
            out.append((r.value,) + (float("nan"),) * 6 + (r.status,))
        else:
            out.append((r.value, m.speed, m.speed_stderr, m.pulse_width, m.amplitude, m.baseline,
                        m.hyperpolarization_depth, r.status))
    return out


# -- profile tools ------------------------------------------------------------------------------------

@dataclass
class AlignedProfile:
    label: object
    xi: np.ndarray | None  # x - front
    fast: np.ndarray | None
    slow: np.ndarray | None
    status: str = "ok"


def profile_align(fields: Sequence[Field1D], level: float = 1.0, labels=None) -> list:
    """Shift each profile so its front sits at xi = 0; fields without a front are marked."""
    labels = labels if labels is not None else list(range(len(fields)))
    out = []
    for lab, f in zip(labels, fields):
        xf = front_position(f, level) if f is not None else None
        if xf is None:
            out.append(AlignedProfile(lab, None, None, None, "front-missing"))
            continue
        out.append(AlignedProfile(lab, f.grid.x - xf, f.fast.copy(), f.slow.copy()))
    return out


def resample(profile: AlignedProfile, xi: np.ndarray):
    return (np.interp(xi, profile.xi, profile.fast, left=np.nan, right=np.nan),
            np.interp(xi, profile.xi, profile.slow, left=np.nan, right=np.nan))


def project_phase(f: Field1D) -> np.ndarray:
    """(fast, slow) pairs ordered by x."""
    return np.column_stack([f.fast, f.slow])


def back_departure(f: Field1D, fold_fast: float = 2.0, level: float = 1.0) -> tuple[float, float]:
    """Phase-plane point where the wave back crosses the fold voltage ``fold_fast``.

    The slow gate at that crossing tells whether the back jump starts at the
    fold (gate near its fold value) or further down the excited branch.
    """
    xf = front_position(f, level)
    if xf is None:
        raise WaveLost("no front")
    xb = trailing_position(f, fold_fast, xf)
    if xb is None:
        raise WaveLost("back never crosses the fold voltage")
    x = f.grid.x
    return float(fold_fast), float(np.interp(xb, x, f.slow))


def back_sharpness(f: Field1D, level: float = 1.0) -> float:
    """Largest |d fast/dx| on the trailing edge (between trailing crossing region and the back)."""
    xf = front_position(f, level)
    if xf is None:
        raise WaveLost("no front")
    xt = trailing_position(f, level, xf)
    if xt is None:
        raise WaveLost("no trailing edge")
    x = f.grid.x
    g = np.abs(np.gradient(f.fast, f.grid.dx))
    mid = 0.5 * (xt + xf)
    sel = (x > 0.0) & (x < mid)
    return float(g[sel].max())
