"""Adaptive Runge-Kutta integration with switching-line and section events.

The stepping itself is scipy's Dormand-Prince 5(4) pair with dense output.
What this module adds is the handling of a piecewise-smooth right-hand side:
integration is split into segments, each confined to one side of a switching
line ``y[index] = value``.  Within a segment the vector field is evaluated on
that side's smooth piece only; a terminal event localises the crossing and
integration restarts from the crossing point on the other piece.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable, Sequence

import numpy as np
from scipy.integrate import solve_ivp

from .errors import Divergence, DomainError, NoCrossing, StepSizeUnderflow


@dataclass(frozen=True)
class IntegratorConfig:
    rel_tol: float = 1e-9
    abs_tol: float = 1e-11
    max_step: float = np.inf
    event_tol: float = 1e-10

    def __post_init__(self):
        if min(self.rel_tol, self.abs_tol, self.max_step, self.event_tol) <= 0:
            raise DomainError("integrator tolerances and max_step must be > 0")


@dataclass(frozen=True)
class Switch:
    """Switching line ``y[index] == value`` (E = 1 for the Karma rectifier)."""

    index: int = 0
    value: float = 1.0
    kind: str = "switch"


@dataclass(frozen=True)
class Section:
    """Hyperplane ``y[index] == value`` crossed in ``direction`` (+1 up, -1 down, 0 any).

    Direction is measured along the integration, so for backward integration
    "up" means the coordinate grows as t decreases.
    """

    index: int
    value: float
    direction: int = 0
    terminal: bool = True
    kind: str = "section"


@dataclass
class Trajectory:
    times: np.ndarray
    states: np.ndarray
    events: list = field(default_factory=list)
    status: str = "completed"

    @property
    def final(self) -> np.ndarray:
        return self.states[-1]

    def to_csv(self, path, names: Sequence[str] = ("fast", "slow"), header: dict | None = None):
        """Write ``t, <names>`` rows and an events sidecar ``<stem>_events.csv``."""
        from .csvio import write_csv

        path = Path(path)
        write_csv(path, ("t",) + tuple(names),
                  np.column_stack([self.times, self.states]), header=header)
        write_csv(path.with_name(path.stem + "_events.csv"), ("t", "kind"),
                  [(t, k) for t, k in self.events], header=header)


def _piece(y, t, f, switch, previous):
    d = y[switch.index] - switch.value
    if d > 0:
        return 1
    if d < 0:
        return -1
    # on the line: the field is continuous, so either piece gives the same direction
    g = f(t, y, side=1)[switch.index]
    if g > 0:
        return 1
    if g < 0:
        return -1
    return previous if previous is not None else -1


def _checked(fun):
    def wrapped(t, y, *args):
        out = np.asarray(fun(t, y, *args), dtype=float)
        if not np.all(np.isfinite(out)):
            raise Divergence(f"non-finite right-hand side at t={t:g}", t=t, state=np.array(y))
        return out
    return wrapped


def integrate(rhs: Callable, s0, t_span, cfg: IntegratorConfig = IntegratorConfig(),
              switch: Switch | None = None, sections: Sequence[Section] = (),
              max_segments: int = 100000) -> Trajectory:
    """Integrate ``y' = rhs(t, y)`` over ``t_span`` (which may run backwards).

    With ``switch`` given, ``rhs`` must accept a ``side`` keyword (+1 / -1)
    selecting the smooth piece; every crossing of the switching line is
    recorded as an event.  Terminal ``sections`` stop the integration at
    their first crossing (status ``"section"``).
    """
    t0, t1 = map(float, t_span)
    if t0 == t1:
        raise DomainError("degenerate time span")
    y = np.asarray(s0, dtype=float).copy()
    if not np.all(np.isfinite(y)):
        raise DomainError("initial state is not finite")
    fwd = 1.0 if t1 > t0 else -1.0

    times = [t0]
    states = [y.copy()]
    events: list[tuple[float, str]] = []
    side = None
    t = t0
    status = "completed"

    for _ in range(max_segments):
        evs = []
        if switch is not None:
            side = _piece(y, t, rhs, switch, side)
            fun = _checked(lambda tt, yy, _s=side: rhs(tt, yy, side=_s))

            def sw(tt, yy):
                return yy[switch.index] - switch.value
            sw.terminal = True
            sw.direction = -side
            evs.append(sw)
        else:
            fun = _checked(rhs)
        for sec in sections:
            def se(tt, yy, _s=sec):
                return yy[_s.index] - _s.value
            se.terminal = sec.terminal
            se.direction = sec.direction
            evs.append(se)

        try:
            sol = solve_ivp(fun, (t, t1), y, method="RK45", rtol=cfg.rel_tol, atol=cfg.abs_tol,
                            max_step=cfg.max_step, events=evs or None)
        except Divergence as exc:
            exc.t, exc.state = times[-1], states[-1]
            raise
        if sol.status == -1:
            raise StepSizeUnderflow(f"integration failed at t={sol.t[-1]:g}: {sol.message}",
                                    t=sol.t[-1], state=sol.y[:, -1])
        ts, ys = sol.t[1:], sol.y[:, 1:].T
        # a segment restarted exactly on the line can report a spurious zero-length event
        keep = fwd * (ts - t) > 0
        times.extend(ts[keep])
        states.extend(ys[keep])

        offset = 1 if switch is not None else 0
        hit_switch = switch is not None and sol.t_events[0].size > 0
        hit_section = False
        for k, sec in enumerate(sections):
            for te in sol.t_events[k + offset]:
                events.append((float(te), sec.kind))
            if sec.terminal and sol.t_events[k + offset].size:
                hit_section = True
        if hit_switch:
            te = float(sol.t_events[0][0])
            events.append((te, switch.kind))
        if hit_section:
            status = "section"
            break
        if sol.status == 0:
            break
        # switch crossing: restart on the other piece from the localised point
        t = float(sol.t[-1])
        y = sol.y[:, -1].copy()
        y[switch.index] = switch.value
        if times[-1] == t:
            states[-1] = y.copy()
        else:
            times.append(t)
            states.append(y.copy())
        side = -side
    else:
        raise StepSizeUnderflow("too many switching segments (chattering?)", t=t, state=y)

    times_arr = np.asarray(times)
    states_arr = np.asarray(states)
    events.sort(key=lambda e: fwd * e[0])
    return Trajectory(times_arr, states_arr, events, status)


def section_crossing(rhs: Callable, s0, t_span, section: Section,
                     cfg: IntegratorConfig = IntegratorConfig(),
                     switch: Switch | None = None) -> tuple[float, np.ndarray]:
    """Time and state of the first directed crossing of ``section``."""
    sec = Section(section.index, section.value, section.direction, True, section.kind)
    traj = integrate(rhs, s0, t_span, cfg, switch=switch, sections=(sec,))
    if traj.status != "section":
        raise NoCrossing(f"no crossing of y[{sec.index}]={sec.value} within {t_span}")
    return float(traj.times[-1]), traj.states[-1].copy()



def sample_states(rhs: Callable, s0, times: Sequence[float], cfg: IntegratorConfig = IntegratorConfig(),
                  switch: Switch | None = None) -> np.ndarray:
    """States at each of ``times`` (monotone, starting at the initial time), integrating
    from sample to sample so no interpolation error enters."""
    times = [float(t) for t in times]
    y = np.asarray(s0, dtype=float)
    out = [y.copy()]
    for a, b in zip(times, times[1:]):
        y = integrate(rhs, y, (a, b), cfg, switch=switch).final.copy()
        out.append(y)
    return np.asarray(out)
