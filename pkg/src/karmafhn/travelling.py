"""Travelling pulses of the Karma model in the co-moving frame z = x + c t.

With w = E_z the profile equations are

    E_z = w
    D w_z = c w + E - (E* - n^M) h(E) - I
    c n_z = eps (max(E - 1, 0) / n_B - n)

For eps = 0 the gate is a frozen parameter and (E, w) is a planar system
with equilibria p0 = (0, 0), p1 and p2 on the E-axis.  Fronts p0 -> p2
and backs p2 -> p0 are found by shooting the one-dimensional invariant
manifolds to the section E = E2/2 and zeroing the gap function.

Internally every connection is computed as a front p0 -> p2 with a signed
speed: the reflection (z, w, c) -> (-z, -w, -c) maps a back at speed c onto
a front at speed -c, so the whole locus is one root curve c(n^M) that
changes sign where the direction switches.
"""
from __future__ import annotations

import logging
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np
from scipy.integrate import solve_ivp
from scipy.optimize import brentq

from .errors import (
    AssemblyInfeasible, CertificationFailed, ContinuationError, DomainError,
    RootNotBracketed, ShootMissed,
)
from .fastslow import _branch_E, _branch_intervals
from .model import KarmaParams, reaction_h, reaction_h_prime

log = logging.getLogger(__name__)

FRONT, BACK = "p0->p2", "p2->p0"
Z_BUDGET = 200.0
RTOL, ATOL = 1e-11, 1e-13


@dataclass(frozen=True)
class ComovingState:
    E: float
    w: float
    n: float


@dataclass(frozen=True)
class FastTwEquilibria:
    p0: tuple
    p1: tuple | None
    p2: tuple | None
    radicand: float  # 1 - 1/(2(E* - n^M)); p1, p2 exist iff >= 0


@dataclass(frozen=True)
class HeteroclinicLocusPoint:
    n: float
    c: float
    direction: str
    residual: float


@dataclass(frozen=True)
class TwEigen:
    lam_plus: complex
    lam_minus: complex
    v_plus: np.ndarray
    v_minus: np.ndarray
    kind: str


@dataclass
class PulseSegment:
    kind: str  # "fast" | "slow"
    label: str
    param: np.ndarray  # z along fast segments, n along slow ones
    E: np.ndarray
    w: np.ndarray
    n: np.ndarray


@dataclass
class SingularPulse:
    segments: list = field(default_factory=list)
    c_front: float = float("nan")
    c_min: float = float("nan")


# -- vector field and equilibria -----------------------------------------------------

def _strength(nM, p):
    return p.E_star - nM


def comoving_rhs(s, c: float, p: KarmaParams, frozen: bool = False):
    """Derivative in z of ``(E, w, n)``; ``frozen=True`` returns only ``(E_z, w_z)``."""
    E, w, n = s
    nM = n ** p.M
    wz = (c * w + E - (p.E_star - nM) * reaction_h(E, p.variant, p.delta) - p.I) / p.diff
    if frozen:
        return np.array([w, wz])
    if c == 0:
        raise ZeroDivisionError("the gate equation is undefined for c = 0")
    nz = p.eps * (max(E - 1.0, 0.0) / p.n_B - n) / c
    return np.array([w, wz, nz])


def _frozen_field(nM, c, p):
    a = _strength(nM, p)
    D = p.diff

    def f(z, y):
        E = y[0]
        return [y[1], (c * y[1] + E - a * reaction_h(E, p.variant, p.delta) - p.I) / D]
    return f


def _E2(nM, p):
    if p.I != 0 or p.variant != "cubic":
        raise DomainError("travelling-wave shooting needs I = 0 and the cubic reaction")
    a = _strength(nM, p)
    if a <= 0:
        raise DomainError(f"n^M={nM} leaves no nontrivial equilibria")
    rad = 1.0 - 2.0 * p.delta / a  # 1 - 1/(2a) at delta = 1/4
    if rad < 0:
        raise DomainError(f"p2 does not exist at n^M={nM} (radicand {rad:.3g})")
    return (1.0 + math.sqrt(rad)) / (2.0 * p.delta)


def fast_tw_equilibria(n: float, p: KarmaParams) -> FastTwEquilibria:
    if n < 0:
        raise DomainError("n must be >= 0")
    if p.I != 0 or p.variant != "cubic":
        raise DomainError("closed-form travelling-wave equilibria need I = 0 and the cubic reaction")
    a = _strength(n ** p.M, p)
    rad = 1.0 - 2.0 * p.delta / a if a > 0 else -math.inf
    if rad < 0:
        return FastTwEquilibria((0.0, 0.0), None, None, rad)
    r = math.sqrt(rad)
    return FastTwEquilibria((0.0, 0.0), ((1 - r) / (2 * p.delta), 0.0),
                            ((1 + r) / (2 * p.delta), 0.0), rad)


def tw_eigen(E: float, n: float, c: float, p: KarmaParams) -> TwEigen:
    D = p.diff
    bracket = 1.0 - (p.E_star - n ** p.M) * reaction_h_prime(E, p.variant, p.delta)
    disc = c * c / (4 * D * D) + bracket / D
    root = complex(math.sqrt(disc)) if disc >= 0 else complex(0.0, math.sqrt(-disc))
    lp, lm = c / (2 * D) + root, c / (2 * D) - root
    if disc < 0:
        kind = "unstable-spiral" if c > 0 else ("center" if c == 0 else "stable-spiral")
    elif lp.real > 0 > lm.real:
        kind = "saddle"
    elif lm.real > 0:
        kind = "unstable-node"
    elif lp.real < 0:
        kind = "stable-node"
    else:
        kind = "non-hyperbolic"
    return TwEigen(lp, lm, np.array([1.0, lp]), np.array([1.0, lm]), kind)


# -- shooting -----------------------------------------------------------------------------------

def shoot_manifold(eq: str, which: str, n: float, c: float, p: KarmaParams,
                   offset: float = 1e-6, z_budget: float = Z_BUDGET, nM: float | None = None,
                   dense: bool = False):
    """Cross the section E = E2/2 along a 1-d invariant manifold of ``eq`` ("p0" or "p2").

    Returns the crossing ``ComovingState``; with ``dense=True`` returns
    ``(state, z, E, w)`` with the whole shot orbit.
    """
    if not 1e-8 <= abs(offset) <= 1e-4:
        raise DomainError("offset must lie in [1e-8, 1e-4]")
    nM = n ** p.M if nM is None else nM
    E2 = _E2(nM, p)
    sigma = E2 / 2.0
    E_eq = 0.0 if eq == "p0" else E2
    ev = _eig_nM(E_eq, nM, c, p)
    lam = ev[0] if which == "unstable" else ev[1]
    if abs(lam.imag) > 0 or (which == "unstable" and lam.real <= 0) or (which == "stable" and lam.real >= 0):
        raise ShootMissed(f"{which} manifold of {eq} is not one-dimensional (lambda={lam})")
    v = np.array([1.0, lam.real])
    v /= np.linalg.norm(v)
    inward = 1.0 if eq == "p0" else -1.0
    y0 = np.array([E_eq, 0.0]) + np.sign(offset) * inward * abs(offset) * v
    span = (0.0, z_budget) if which == "unstable" else (0.0, -z_budget)

    def hit(z, y):
        return y[0] - sigma
    hit.terminal = True
    # E moves toward the interior along the integration: up from p0, down from p2
    hit.direction = inward

    def turn(z, y):
        return y[1]
    turn.terminal = True

    def escape(z, y):
        return (y[0] + 1.0) * (E2 + 1.0 - y[0])
    escape.terminal = True

    sol = solve_ivp(_frozen_field(nM, c, p), span, y0, method="DOP853", rtol=RTOL, atol=ATOL,
                    events=(hit, turn, escape), dense_output=False)
    if sol.t_events[0].size:
        E, w = sol.y_events[0][0]
        state = ComovingState(float(E), float(w), float(nM ** (1.0 / p.M)))
        if dense:
            return state, sol.t, sol.y[0], sol.y[1]
        return state
    if sol.t_events[1].size:
        E_ext = float(sol.y_events[1][0][0])
        raise ShootMissed(f"{which} manifold of {eq} turned at E={E_ext:.6g} before E={sigma:.6g}",
                          turned=True, extreme_E=E_ext)
    raise ShootMissed(f"{which} manifold of {eq} did not reach E={sigma:.6g} within z={z_budget}")


def _eig_nM(E, nM, c, p):
    D = p.diff
    bracket = 1.0 - _strength(nM, p) * reaction_h_prime(E, p.variant, p.delta)
    disc = c * c / (4 * D * D) + bracket / D
    root = complex(math.sqrt(disc)) if disc >= 0 else complex(0.0, math.sqrt(-disc))
    return c / (2 * D) + root, c / (2 * D) - root


def _front_gap(nM: float, c: float, p: KarmaParams, offset: float = 1e-6) -> float:
    """q0 - q2 for the front orientation at signed speed c.

    A shot that turns back before the section has too little energy; its
    w-value there is replaced by minus the distance it fell short, which
    keeps the sign of the gap correct for bracketing.
    """
    sigma = _E2(nM, p) / 2.0
    try:
        q0 = shoot_manifold("p0", "unstable", 0.0, c, p, offset, nM=nM).w
    except ShootMissed as exc:
        if not exc.turned:
            raise
        q0 = -(sigma - exc.extreme_E)
    try:
        q2 = shoot_manifold("p2", "stable", 0.0, c, p, offset, nM=nM).w
    except ShootMissed as exc:
        if not exc.turned:
            raise
        q2 = -(exc.extreme_E - sigma)
    return q0 - q2


def gap_delta(nM: float, c: float, p: KarmaParams, direction: str | None = None,
              offset: float = 1e-6) -> float:
    """Gap q0 - q2 at the section between the manifolds of p0 and p2.

    ``direction`` defaults to a front below n^M = 15/16 and a back above it.
    """
    if direction is None:
        direction = FRONT if nM < switch_nM(p) else BACK
    if direction == FRONT:
        return _front_gap(nM, c, p, offset)
    return -_front_gap(nM, -c, p, offset)


def switch_nM(p: KarmaParams) -> float:
    """n^M at which H(p2) = 0, so p0 and p2 share an energy level (15/16 at defaults)."""
    # H(E2) = 0 together with the nullcline at E2 gives E2 = 2/(3 delta), E* - n^M = 9 delta / 4
    return p.E_star - 9.0 * p.delta / 4.0


def _signed_root(nM, p, bracket, offset=1e-6, xtol=1e-11, n_scan=15):
    """Root of the front gap in signed c; the bracket is scanned first because
    shots near its ends may miss the section altogether."""
    lo, hi = bracket
    cache = {}

    def g(c):
        if c not in cache:
            try:
                cache[c] = _front_gap(nM, c, p, offset)
            except (ShootMissed, DomainError):
                cache[c] = None
        return cache[c]

    cs = np.linspace(lo, hi, n_scan)
    vals = [g(c) for c in cs]
    pairs = [(cs[i], cs[i + 1]) for i in range(n_scan - 1)
             if vals[i] is not None and vals[i + 1] is not None and vals[i] * vals[i + 1] <= 0]
    if not pairs:
        raise RootNotBracketed(f"no sign change of the gap on c in [{lo}, {hi}] at n^M={nM}")
    a, b = pairs[0]
    for x in (a, b):
        if g(x) == 0:
            return float(x), 0.0
    c = brentq(lambda x: _front_gap(nM, x, p, offset), a, b, xtol=xtol,
               rtol=4 * np.finfo(float).eps, maxiter=200)
    return c, abs(_front_gap(nM, c, p, offset))


def _locus_point(n, nM, c_signed, residual, p):
    if abs(c_signed) < 1e-9:
        direction = FRONT if nM < switch_nM(p) else BACK
    else:
        direction = FRONT if c_signed > 0 else BACK
    return HeteroclinicLocusPoint(float(n), float(abs(c_signed)), direction, float(residual))


def default_bracket(p: KarmaParams):
    s = math.sqrt(p.diff)
    return (-3.0 * s, 4.0 * s)


def find_heteroclinic_c(n: float, p: KarmaParams, bracket=None, offset: float = 1e-6,
                        tol: float = 1e-8) -> HeteroclinicLocusPoint:
    """Speed of the fast connection at frozen gate ``n``.

    ``bracket`` is an interval of signed speeds (negative values are backs).
    """
    nM = n ** p.M
    c, res = _signed_root(nM, p, bracket or default_bracket(p), offset)
    if res > tol:
        raise RootNotBracketed(f"gap jumps across c={c:.10g} (|gap|={res:.3g}); no connection")
    return _locus_point(n, nM, c, res, p)


def continue_locus(p: KarmaParams, n_grid=None, offset: float = 1e-6) -> list:
    """Walk the heteroclinic locus along ``n_grid``, seeding each root from the last.

    The default grid is uniform in n^M on [0, 1].
    """
    if n_grid is None:
        n_grid = np.linspace(0.0, 1.0, 41) ** (1.0 / p.M)
    n_grid = [float(x) for x in n_grid]
    out, roots = [], []
    for i, n in enumerate(n_grid):
        nM = n ** p.M
        try:
            if not roots:
                c, res = _signed_root(nM, p, default_bracket(p), offset)
            else:
                c, res = _continued_root(nM, p, roots[-2:], offset)
        except (RootNotBracketed, ShootMissed) as exc:
            raise ContinuationError(f"lost the locus at n={n:.6g}: {exc}", partial=out, index=i) from exc
        out.append(_locus_point(n, nM, c, res, p))
        roots.append((nM, c))
    return out


def _continued_root(nM, p, history, offset):
    """Secant prediction from the last two roots, then a widening bracket around it."""
    lo_b, hi_b = default_bracket(p)
    if len(history) == 2:
        (x0, c0), (x1, c1) = history
        slope = (c1 - c0) / (x1 - x0) if x1 != x0 else 0.0
        pred = c1 + slope * (nM - x1)
        h = max(0.02, 0.25 * abs(pred - c1))
    else:
        pred, h = history[-1][1], 0.1
    pred = min(max(pred, lo_b), hi_b)
    h *= math.sqrt(p.diff)
    for _ in range(6):
        lo, hi = max(pred - h, lo_b), min(pred + h, hi_b)
        try:
            return _signed_root(nM, p, (lo, hi), offset, n_scan=2)
        except RootNotBracketed:
            h *= 3.0
    return _signed_root(nM, p, (lo_b, hi_b), offset)


def _locus_job(args):
    M, p, n_grid = args
    return continue_locus(p.with_(M=M), n_grid)


def continue_loci(p: KarmaParams, Ms=(4, 10, 30), n_grid=None, workers: int | None = None):
    """Loci for several M in parallel; results ordered as ``Ms``."""
    jobs = [(M, p, n_grid) for M in Ms]
    with ProcessPoolExecutor(max_workers=workers or len(jobs)) as ex:
        return list(ex.map(_locus_job, jobs))


def locus_switch(p: KarmaParams, points=None, offset: float = 1e-6, xtol: float = 1e-10) -> float:
    """n^M where the connection reverses direction (signed speed crosses 0).

    With ``points`` given, the search is restricted to the grid cell where
    their direction changes.
    """
    lo, hi = 0.0, 1.0
    if points:
        for a, b in zip(points, points[1:]):
            if a.direction != b.direction:
                lo, hi = a.n ** p.M, b.n ** p.M
                break
        else:
            raise RootNotBracketed("locus never changes direction on the grid")
    g = lambda nM: _signed_root(nM, p, default_bracket(p), offset)[0]
    return brentq(g, lo, hi, xtol=xtol)


# -- Hamiltonian at c = 0 -----------------------------------------------------------------------

def hamiltonian(E: float, w: float, nM: float, p: KarmaParams) -> float:
    """First integral of the frozen fast system at c = 0 (cubic reaction, I = 0)."""
    D = p.diff
    return 0.5 * w * w - E * E / (2 * D) + (2.0 / D) * (p.E_star - nM) * (E ** 3 / 3.0 - p.delta * E ** 4 / 4.0)


def hamiltonian_level_set(level: float, nM: float, p: KarmaParams, E_range=(-0.5, 3.5), n_points=801):
    """Upper and lower branches w = +-sqrt(2(level - V(E))) of {H = level}; rows (E, w, H)."""
    rows = []
    for sgn in (1.0, -1.0):
        for E in np.linspace(*E_range, n_points):
            V = hamiltonian(E, 0.0, nM, p)
            if level - V >= 0:
                w = sgn * math.sqrt(2.0 * (level - V))
                rows.append((float(E), w, hamiltonian(E, w, nM, p)))
    return rows


# -- minimal back speed at the fold gate ---------------------------------------------------

def certify_back_connection(c: float, p: KarmaParams, radius: float = 1e-3, offset: float = 1e-6,
                            z_budget: float = 4000.0):
    """Integrate the stable manifold of p0 backward at n = 1 and require it to reach
    the disc of ``radius`` around p2 = (2, 0) without leaving w <= 0.

    Returns the backward orbit ``(z, E, w)``; raises CertificationFailed otherwise.
    """
    if c <= 0:
        raise DomainError("certification needs c > 0")
    nM = 1.0
    E2 = _E2(nM, p)
    lam = _eig_nM(0.0, nM, c, p)[1].real
    v = np.array([1.0, lam]) / math.hypot(1.0, lam)

    def near(z, y):
        return math.hypot(y[0] - E2, y[1]) - radius
    near.terminal = True

    def leave(z, y):
        return y[1]
    leave.terminal = True
    leave.direction = 1  # w becomes positive while z decreases

    sol = solve_ivp(_frozen_field(nM, c, p), (0.0, -z_budget), offset * v, method="DOP853",
                    rtol=RTOL, atol=ATOL, events=(near, leave))
    if sol.t_events[0].size:
        return sol.t, sol.y[0], sol.y[1]
    if sol.t_events[1].size:
        E = sol.y_events[1][0][0]
        raise CertificationFailed(f"c={c:.6g}: backward orbit crosses w=0 at E={E:.6g} before p2")
    raise CertificationFailed(f"c={c:.6g}: backward orbit did not approach p2 within z={z_budget}")


@dataclass(frozen=True)
class MinSpeedResult:
    c_min: float
    certified: dict


def min_speed_family(p: KarmaParams, samples=(1.5,)) -> MinSpeedResult:
    """c_min at the fold gate n = 1 and certification at ``c_min * s`` for each s."""
    c_min = find_heteroclinic_c(1.0, p).c
    cert = {}
    for s in samples:
        try:
            certify_back_connection(s * c_min, p)
            cert[s] = True
        except CertificationFailed as exc:
            log.info("%s", exc)
            cert[s] = False
    return MinSpeedResult(c_min, cert)


# -- singular pulse ------------------------------------------------------------------------------

def _front_orbit(c, p, offset=1e-6):
    s0, z0, E0, w0 = shoot_manifold("p0", "unstable", 0.0, c, p, offset, dense=True)
    s2, z2, E2, w2 = shoot_manifold("p2", "stable", 0.0, c, p, offset, dense=True)
    # stable shot runs backward from p2; reverse it and shift z to continue the front
    z2r = z2[::-1] - z2[-1] + z0[-1]
    return (np.concatenate([z0, z2r[1:]]), np.concatenate([E0, E2[::-1][1:]]),
            np.concatenate([w0, w2[::-1][1:]]))


def assemble_singular_pulse(p: KarmaParams, n_slow: int = 200) -> SingularPulse:
    """Front at n = 0, slow climb on the right branch to the fold, back jump at n = 1
    with the front speed, slow return along E = 0."""
    if p.I != 0:
        raise DomainError("pulse assembly assumes I = 0")
    front = find_heteroclinic_c(0.0, p)
    c = front.c
    c_min = find_heteroclinic_c(1.0, p).c
    if c < c_min:
        raise AssemblyInfeasible(f"front speed {c:.6g} below minimal back speed {c_min:.6g}")
    pulse = SingularPulse(c_front=c, c_min=c_min)

    z, E, w = _front_orbit(c, p)
    pulse.segments.append(PulseSegment("fast", "front", z, E, w, np.zeros_like(E)))

    iv = _branch_intervals(p)[-1]
    ns = np.linspace(0.0, 1.0, n_slow)
    Er = np.array([_branch_E(x, iv, p) if x > 0 else _E2(0.0, p) for x in ns])
    Er[-1] = _E2(1.0, p)
    pulse.segments.append(PulseSegment("slow", "right-branch", ns, Er, np.zeros_like(ns), ns))

    zb, Eb, wb = certify_back_connection(c, p)
    # orbit runs backward from p0; reverse so it departs from near p2
    zb, Eb, wb = zb[::-1] - zb[-1], Eb[::-1], wb[::-1]
    pulse.segments.append(PulseSegment("fast", "back", zb, Eb, wb, np.ones_like(Eb)))

    nr = np.linspace(1.0, 0.0, n_slow)
    pulse.segments.append(PulseSegment("slow", "left-branch", nr, np.zeros_like(nr), np.zeros_like(nr), nr))
    return pulse


# -- CSV --------------------------------------------------------------------------------------

def locus_rows(points):
    return [(pt.n, pt.c, pt.direction, pt.residual) for pt in points]


LOCUS_COLUMNS = ("n", "c", "direction", "residual")
PULSE_COLUMNS = ("segment", "kind", "param", "E", "w", "n")
LEVEL_COLUMNS = ("E", "w", "H")


def pulse_rows(pulse: SingularPulse):
    rows = []
    for i, seg in enumerate(pulse.segments):
        for k in range(len(seg.param)):
            rows.append((i, seg.kind, seg.param[k], seg.E[k], seg.w[k], seg.n[k]))
    return rows
