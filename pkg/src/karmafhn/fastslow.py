"""Singular-limit analysis of the Karma and FitzHugh-Nagumo ODEs.

Critical manifolds and their branch structure, equilibria of the full
systems, the external-current thresholds of the Karma model, singular
candidate orbits, and numerical measurements of the O(eps) slow-manifold
distance and the eps^(2/3) fold-passage law.
"""
from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import brentq, minimize_scalar

from .errors import AnalysisError, RegimeAmbiguous, ScalingInconclusive, ThresholdNotFound
from .integrate import IntegratorConfig, Section, Switch, integrate, section_crossing
from .model import (
    FhnParams, KarmaParams, PhaseState, karma_reaction, reaction_h, reaction_h_prime,
    vector_field,
)

log = logging.getLogger(__name__)

LEFT, MIDDLE, RIGHT, SINGLE = "left-attracting", "middle-repelling", "right-attracting", "single-attracting"


@dataclass(frozen=True)
class CriticalManifoldSample:
    E: float
    n: float
    branch: str
    layer_jacobian: float


@dataclass(frozen=True)
class EquilibriumInfo:
    position: PhaseState
    eigenvalues: tuple[complex, complex]
    classification: str


@dataclass(frozen=True)
class FoldCurves:
    I: float
    E_plus: float | None
    E_minus: float | None
    on_manifold_plus: bool
    on_manifold_minus: bool


@dataclass(frozen=True)
class Thresholds:
    I0: float
    I1: float
    I2: float
    E_cusp: float
    I2_crossings: tuple = ()


# -- critical manifold ---------------------------------------------------------------

def manifold_radicand(E, p: KarmaParams):
    """E* - (E - I) / h(E): the value n^M must take on C0 at voltage E."""
    return p.E_star - (E - p.I) / reaction_h(E, p.variant, p.delta)


def karma_manifold(E: float, p: KarmaParams) -> float | None:
    """Gate value n on the critical manifold at voltage E, or None off it.

    At I = 0 the line E = 0 is also part of C0 (for every n); it is not a
    graph over E and is reported by :func:`has_trivial_branch` instead.
    """
    if E <= 0 or (p.variant == "cubic" and E >= 1.0 / p.delta):
        return None
    r = manifold_radicand(E, p)
    if not np.isfinite(r) or r < 0:
        return None
    return float(r ** (1.0 / p.M))


def has_trivial_branch(p: KarmaParams) -> bool:
    return p.I == 0


def layer_jacobian(E, n, p: KarmaParams):
    """d/dE of the fast equation: -1 + (E* - n^M) h'(E)."""
    return -1.0 + (p.E_star - n ** p.M) * reaction_h_prime(E, p.variant, p.delta)


def fhn_manifold(v, p: FhnParams):
    return v - v ** 3 / 3.0 + p.I


def fhn_layer_jacobian(v):
    return 1.0 - v * v


def _fold_pair(I: float, delta: float):
    """Roots of 2E^2 - (1/delta + 3I) E + 2I/delta = 0, i.e. E_-(I), E_+(I)."""
    b = 1.0 / delta + 3.0 * I
    disc = b * b - 16.0 * I / delta
    if disc < 0:
        return None, None
    r = math.sqrt(disc)
    return (b - r) / 4.0, (b + r) / 4.0


def _require_cubic(p):
    if p.variant != "cubic":
        raise AnalysisError("closed-form fold analysis needs the cubic reaction")


def fold_curves(I: float, p: KarmaParams) -> FoldCurves:
    """Non-hyperbolic points E_+(I), E_-(I) of the layer problem and whether each lies on C0."""
    _require_cubic(p)
    if I < 0:
        raise AnalysisError("fold curves are defined for I >= 0")
    Em, Ep = _fold_pair(I, p.delta)
    q = p.with_(I=I)

    def on(E):
        if E is None or E <= 0:
            return False
        return bool(manifold_radicand(E, q) >= 0)

    return FoldCurves(I, Ep, Em, on(Ep), on(Em))


def branch_of(E: float, n: float, p: KarmaParams) -> str:
    J = layer_jacobian(E, n, p)
    if J > 0:
        return MIDDLE
    Em, Ep = _fold_pair(p.I, p.delta) if p.variant == "cubic" else (None, None)
    if Em is None or Em == Ep:
        return SINGLE
    return LEFT if E < Ep and (E <= Em or E < 0.5 * (Em + Ep)) else RIGHT


def sample_manifold(p: KarmaParams, n_points: int = 2000) -> list[CriticalManifoldSample]:
    """Sample C0 on E in (0, 1/delta); includes the E = 0 line (n in [0, 1.2]) when I = 0."""
    hi = 1.0 / p.delta if p.variant == "cubic" else 8.0
    out = []
    if has_trivial_branch(p):
        for n in np.linspace(0.0, 1.2, 25):
            out.append(CriticalManifoldSample(0.0, float(n), LEFT, float(layer_jacobian(0.0, n, p))))
    for E in np.linspace(0.0, hi, n_points + 2)[1:-1]:
        n = karma_manifold(E, p)
        if n is None:
            continue
        out.append(CriticalManifoldSample(float(E), n, branch_of(E, n, p),
                                          float(layer_jacobian(E, n, p))))
    return out


def sample_fhn_manifold(p: FhnParams, v_range=(-2.5, 2.5), n_points: int = 2000):
    out = []
    for v in np.linspace(*v_range, n_points):
        J = fhn_layer_jacobian(v)
        br = MIDDLE if J > 0 else (LEFT if v < 0 else RIGHT)
        out.append(CriticalManifoldSample(float(v), float(fhn_manifold(v, p)), br, float(J)))
    return out


# -- equilibria ----------------------------------------------------------------------------

def _classify(eigs) -> str:
    l1, l2 = eigs
    if abs(l1.imag) > 1e-14 or abs(l2.imag) > 1e-14:
        return "stable-spiral" if l1.real < 0 else "unstable-spiral"
    a, b = sorted((l1.real, l2.real))
    if a < 0 < b:
        return "saddle"
    if b < 0:
        return "stable-node"
    if a > 0:
        return "unstable-node"
    return "non-hyperbolic"


def karma_full_jacobian(E, n, p: KarmaParams, side: int):
    h = reaction_h(E, p.variant, p.delta)
    dEdn = -p.M * n ** (p.M - 1) * h if p.M > 1 else -h
    return np.array([[layer_jacobian(E, n, p), dEdn],
                     [p.eps * (1.0 if side > 0 else 0.0) / p.n_B, -p.eps]])


def _eig_info(J) -> tuple[tuple[complex, complex], str]:
    ev = np.linalg.eigvals(J).astype(complex)
    ev = tuple(sorted(ev, key=lambda z: (z.real, z.imag)))
    return ev, _classify(ev)


def _scalar_roots(F, lo, hi, n_grid=4000):
    xs = np.linspace(lo, hi, n_grid)
    vals = np.array([F(x) for x in xs])
    roots = []
    for i in range(n_grid - 1):
        if vals[i] == 0:
            roots.append(float(xs[i]))
        elif vals[i] * vals[i + 1] < 0:
            try:
                roots.append(brentq(F, xs[i], xs[i + 1], xtol=1e-15, rtol=4 * np.finfo(float).eps))
            except ValueError as exc:
                raise AnalysisError(f"root bracket [{xs[i]}, {xs[i + 1]}] failed: {exc}") from exc
    if vals[-1] == 0:
        roots.append(float(xs[-1]))
    return roots


def find_equilibria(p) -> list[EquilibriumInfo]:
    """All equilibria of the full ODE with linear-stability classification."""
    if isinstance(p, FhnParams):
        # v - v^3/3 - (v + a)/b + I = 0
        coeffs = [-1.0 / 3.0, 0.0, 1.0 - 1.0 / p.b, p.I - p.a / p.b]
        out = []
        for r in np.roots(coeffs):
            if abs(r.imag) > 1e-9:
                continue
            v = float(r.real)
            w = (v + p.a) / p.b
            J = np.array([[1 - v * v, -1.0], [p.eps, -p.eps * p.b]])
            ev, cls = _eig_info(J)
            out.append(EquilibriumInfo(PhaseState(v, w), ev, cls))
        return sorted(out, key=lambda e: e.position.fast)

    hi = 1.0 / p.delta if p.variant == "cubic" else 10.0
    found = []
    # piece E <= 1: n = 0
    F0 = lambda E: karma_reaction(E, 0.0, p)[0]
    for E in _scalar_roots(F0, 0.0, 1.0):
        found.append((E, 0.0))
    # piece E > 1: n = (E - 1) / n_B
    F1 = lambda E: karma_reaction(E, (E - 1.0) / p.n_B, p)[0]
    for E in _scalar_roots(F1, 1.0, hi):
        if E > 1.0:
            found.append((E, (E - 1.0) / p.n_B))
    out = []
    for E, n in found:
        # polish
        if E != 0.0:
            G = F0 if n == 0.0 else F1
            for _ in range(3):
                d = (G(E + 1e-7) - G(E - 1e-7)) / 2e-7
                if d != 0:
                    E = E - G(E) / d
            n = 0.0 if n == 0.0 else (E - 1.0) / p.n_B
        if abs(E - 1.0) < 1e-12:
            ev_l, c_l = _eig_info(karma_full_jacobian(E, n, p, -1))
            ev_r, c_r = _eig_info(karma_full_jacobian(E, n, p, +1))
            ev, cls = (ev_l, c_l) if c_l == c_r else (ev_l, "non-smooth-degenerate")
        else:
            ev, cls = _eig_info(karma_full_jacobian(E, n, p, 1 if E > 1 else -1))
        out.append(EquilibriumInfo(PhaseState(float(E), float(n)), ev, cls))
    return sorted(out, key=lambda e: e.position.fast)


def resting_state(p) -> PhaseState:
    """Stable equilibrium with the lowest fast value (the polarised rest state)."""
    stable = [e for e in find_equilibria(p) if e.classification.startswith("stable")]
    if not stable:
        raise AnalysisError("no stable equilibrium")
    return stable[0].position


# -- thresholds -------------------------------------------------------------------------------

def _fold_image(I, p, which):
    Em, Ep = _fold_pair(I, p.delta)
    E = Ep if which == "plus" else Em
    if E is None or E <= 0:
        return None, None
    return E, karma_manifold(E, p.with_(I=I))


def compute_thresholds(p: KarmaParams, n_scan: int = 400) -> Thresholds:
    """I0 (saddle-node of the rest state), I1 = 1/(9 delta) (cusp) and I2 (stability change)."""
    _require_cubic(p)
    I1 = 1.0 / (9.0 * p.delta)
    E_cusp = 1.0 / (3.0 * p.delta)

    def g0(I):
        Em, _ = _fold_pair(I, p.delta)
        return manifold_radicand(Em, p.with_(I=I))

    a, b = 1e-9, I1 * (1 - 1e-9)
    if not (g0(a) < 0 < g0(b)):
        raise ThresholdNotFound(f"I0 not bracketed: g(0)={g0(a):.3g}, g(I1)={g0(b):.3g}")
    I0 = brentq(g0, a, b, xtol=1e-14)

    crossings = []
    Is = np.linspace(1e-9, I1, n_scan)
    for which in ("plus", "minus"):
        def g2(I, which=which):
            E, n = _fold_image(I, p, which)
            if E is None or n is None or E <= 1.0:
                return np.nan
            return n - (E - 1.0) / p.n_B
        vals = np.array([g2(I) for I in Is])
        for i in range(n_scan - 1):
            if np.isfinite(vals[i]) and np.isfinite(vals[i + 1]) and vals[i] * vals[i + 1] <= 0:
                crossings.append((which, brentq(g2, Is[i], Is[i + 1], xtol=1e-14)))
    if not crossings:
        raise ThresholdNotFound("n-nullcline never crosses a fold curve for I in (0, I1]")
    if len(crossings) > 1:
        log.info("n-nullcline crosses fold curves at %s; reporting the smallest I", crossings)
    I2 = min(c[1] for c in crossings)
    return Thresholds(I0, I1, I2, E_cusp, tuple(crossings))


# -- singular orbits ---------------------------------------------------------------------------

@dataclass
class OrbitSegment:
    kind: str  # "fast" | "slow"
    points: np.ndarray


@dataclass
class SingularOrbit:
    segments: list = field(default_factory=list)
    outcome: str = ""  # "equilibrium" | "saddle" | "cycle"
    jump_points: list = field(default_factory=list)


def _layer_roots(n: float, p: KarmaParams):
    a = p.E_star - n ** p.M
    # -2 a delta E^3 + 2 a E^2 - E + I
    roots = np.roots([-2 * a * p.delta, 2 * a, -1.0, p.I]) if a != 0 else np.array([p.I])
    rs = sorted(float(r.real) for r in roots if abs(r.imag) < 1e-9)
    return [r for r in rs if r >= -1e-12]


def _branch_intervals(p: KarmaParams):
    hi = 1.0 / p.delta
    Em, Ep = _fold_pair(p.I, p.delta)
    if Em is None or p.I >= 1.0 / (9.0 * p.delta):
        return [(0.0, hi)]
    return [(0.0, Em), (Em, Ep), (Ep, hi)]


def _branch_E(n: float, interval, p: KarmaParams):
    lo, hi = interval
    target = n ** p.M
    g = lambda E: manifold_radicand(E, p) - target
    a, b = lo + 1e-12, hi - 1e-12
    ga, gb = g(a), g(b)
    if not (np.isfinite(ga) and np.isfinite(gb)) or ga * gb > 0:
        # the branch may end at n = 0 inside the interval; shrink from the infinite end
        xs = np.linspace(a, b, 2001)
        vs = np.array([g(x) for x in xs])
        idx = np.nonzero(np.isfinite(vs[:-1]) & np.isfinite(vs[1:]) & (vs[:-1] * vs[1:] <= 0))[0]
        if not idx.size:
            return None
        a, b = xs[idx[0]], xs[idx[0] + 1]
    return brentq(g, a, b, xtol=1e-14)


def _slow_rate(E, n, p):
    return max(E - 1.0, 0.0) / p.n_B - n


def singular_orbit(s0, p: KarmaParams, thresholds: Thresholds | None = None,
                   regime_tol: float = 1e-3, n_pts: int = 200, max_jumps: int = 10) -> SingularOrbit:
    """Candidate orbit at eps = 0 from ``s0``: alternating fast fibres and slow segments.

    Ends at an equilibrium (``outcome`` "equilibrium" or "saddle") or when a
    fold is revisited (``"cycle"``; the cycle's segments are the tail of the list).
    """
    _require_cubic(p)
    if p.I > 0:
        th = thresholds or compute_thresholds(p)
        for name, val in (("I0", th.I0), ("I1", th.I1), ("I2", th.I2)):
            if abs(p.I - val) < regime_tol:
                raise RegimeAmbiguous(f"I={p.I} within {regime_tol} of {name}={val:.6g}")
    eqs = find_equilibria(p)
    intervals = _branch_intervals(p)
    orbit = SingularOrbit()
    E, n = map(float, s0)

    def fast_to(E, n):
        roots = _layer_roots(n, p)
        stable = [r for r in roots if layer_jacobian(r, n, p) < 0]
        f = karma_reaction(E, n, p)[0]
        if abs(f) < 1e-12:
            return E
        cand = [r for r in stable if (r > E if f > 0 else r < E)]
        if not cand:
            raise AnalysisError(f"fast fibre from ({E}, {n}) has no attracting endpoint")
        return min(cand, key=lambda r: abs(r - E))

    visited = []
    for _ in range(max_jumps + 1):
        E1 = fast_to(E, n)
        if abs(E1 - E) > 1e-12:
            orbit.segments.append(OrbitSegment("fast", np.column_stack(
                [np.linspace(E, E1, n_pts), np.full(n_pts, n)])))
        E = E1
        # slow motion on the branch containing (E, n)
        on_trivial = has_trivial_branch(p) and abs(E) < 1e-12
        rate = -n if on_trivial else _slow_rate(E, n, p)
        if abs(rate) < 1e-12:
            orbit.outcome = _eq_outcome(E, n, eqs)
            return orbit
        direction = 1.0 if rate > 0 else -1.0
        if on_trivial:
            ns = np.linspace(n, 0.0, n_pts)
            orbit.segments.append(OrbitSegment("slow", np.column_stack([np.zeros(n_pts), ns])))
            orbit.outcome = "equilibrium"
            return orbit
        iv = next((iv for iv in intervals if iv[0] - 1e-9 <= E <= iv[1] + 1e-9), intervals[-1])
        # candidate stopping points along the branch in the flow direction
        stops = []
        for e in eqs:
            En, nn = e.position
            # E = 0 equilibria sit on the trivial branch, not on this one
            on_branch = karma_manifold(En, p) is not None
            if on_branch and iv[0] - 1e-9 <= En <= iv[1] + 1e-9 and (nn - n) * direction > 1e-12:
                stops.append((abs(nn - n), "eq", En, nn))
        for end in iv:
            if end <= 0 or end >= 1.0 / p.delta:
                continue
            n_end = karma_manifold(end, p)
            if n_end is not None and (n_end - n) * direction > 1e-12:
                stops.append((abs(n_end - n), "fold", end, n_end))
        if not stops:
            raise AnalysisError(f"slow flow from ({E:.4g}, {n:.4g}) leaves the analysed region")
        _, kind, E_end, n_end = min(stops)
        ns = np.linspace(n, n_end, n_pts)
        Es = [E] + [_branch_E(x, iv, p) if x > 0 or p.I > 0 else E_end for x in ns[1:-1]] + [E_end]
        orbit.segments.append(OrbitSegment("slow", np.column_stack([np.array(Es, float), ns])))
        if kind == "eq":
            orbit.outcome = _eq_outcome(E_end, n_end, eqs)
            return orbit
        key = (round(E_end, 9), round(n_end, 9))
        if key in visited:
            orbit.outcome = "cycle"
            return orbit
        visited.append(key)
        orbit.jump_points.append(PhaseState(E_end, n_end))
        # jump: push just past the fold in the slow direction and follow the fast fibre
        f_past = karma_reaction(E_end, n_end + 1e-9 * direction, p)[0]
        roots = [r for r in _layer_roots(n_end, p)
                 if layer_jacobian(r, n_end, p) < 0 and abs(r - E_end) > 1e-6]
        cand = [r for r in roots if (r > E_end if f_past > 0 else r < E_end)]
        if not cand:
            raise AnalysisError(f"no attracting branch to jump to from fold ({E_end}, {n_end})")
        target = min(cand, key=lambda r: abs(r - E_end))
        orbit.segments.append(OrbitSegment("fast", np.column_stack(
            [np.linspace(E_end, target, n_pts), np.full(n_pts, n_end)])))
        E, n = target, n_end
    raise AnalysisError("too many jumps without closing a cycle")


def _eq_outcome(E, n, eqs):
    e = min(eqs, key=lambda e: math.hypot(e.position.fast - E, e.position.slow - n))
    return "saddle" if e.classification == "saddle" else "equilibrium"


# -- slow-manifold and fold-passage scaling ------------------------------------------------------

@dataclass(frozen=True)
class ScalingResult:
    eps: tuple
    values: tuple
    slope: float


def distance_to_manifold(E: float, n: float, p: KarmaParams, interval) -> float:
    """Euclidean distance from (E, n) to the C0 branch over the E-interval, with local refinement."""
    lo, hi = interval
    Es = np.linspace(lo, hi, 2000)[1:-1]
    ns = np.array([karma_manifold(x, p) if karma_manifold(x, p) is not None else np.nan for x in Es])
    d = np.hypot(Es - E, ns - n)
    k = int(np.nanargmin(d))
    a, b = Es[max(k - 1, 0)], Es[min(k + 1, len(Es) - 1)]

    def dist(x):
        m = karma_manifold(x, p)
        return np.inf if m is None else math.hypot(x - E, m - n)

    r = minimize_scalar(dist, bounds=(a, b), method="bounded", options={"xatol": 1e-13})
    return float(min(r.fun, d[k]))


def _fit(eps_list, values, what):
    eps_arr = np.asarray(eps_list, float)
    v = np.asarray(values, float)
    order = np.argsort(-eps_arr)
    if np.any(v <= 0) or np.any(np.diff(v[order]) >= 0):
        raise ScalingInconclusive(f"{what} not monotone in eps: {dict(zip(eps_arr, v))}")
    return float(np.polyfit(np.log(eps_arr), np.log(v), 1)[0])


def _check_eps_list(eps_list):
    if len(eps_list) < 4:
        raise ScalingInconclusive("need at least 4 eps values for a scaling fit")
    if any(b >= a for a, b in zip(eps_list, eps_list[1:])):
        raise ScalingInconclusive("eps values must be strictly decreasing")


def fenichel_distance_scaling(p: KarmaParams, eps_list, n_check: float = 0.5,
                              s0=(3.7, 0.0), cfg: IntegratorConfig | None = None) -> ScalingResult:
    """Distance of an attracted trajectory from the right branch of C0 at gate ``n_check``.

    The right branch is used because at I = 0 the left branch E = 0 is exactly
    invariant, so its slow manifold sits at distance zero.
    """
    _require_cubic(p)
    _check_eps_list(eps_list)
    cfg = cfg or IntegratorConfig(rel_tol=1e-11, abs_tol=1e-13)
    iv = _branch_intervals(p)[-1]
    dists = []
    for eps in eps_list:
        q = p.with_(eps=eps)
        _, s = section_crossing(vector_field(q), s0, (0.0, 50.0 / eps),
                                Section(1, n_check, +1), cfg, switch=Switch())
        dists.append(distance_to_manifold(s[0], s[1], q, iv))
    return ScalingResult(tuple(eps_list), tuple(dists), _fit(eps_list, dists, "distance"))


def fold_exit_scaling(p: KarmaParams, eps_list, rho: float = 0.5,
                      s0=(3.7, 0.0), cfg: IntegratorConfig | None = None) -> ScalingResult:
    """Gate overshoot past the fold when the jump crosses E = E_fold - rho.

    In fold normal-form coordinates the exit section sits a distance rho along
    the jump direction, which for the upper Karma fold means lower E.
    """
    _require_cubic(p)
    _check_eps_list(eps_list)
    cfg = cfg or IntegratorConfig(rel_tol=1e-11, abs_tol=1e-13)
    _, Ep = _fold_pair(p.I, p.delta)
    n_fold = karma_manifold(Ep, p)
    heights = []
    for eps in eps_list:
        q = p.with_(eps=eps)
        _, s = section_crossing(vector_field(q), s0, (0.0, 50.0 / eps),
                                Section(0, Ep - rho, -1), cfg, switch=Switch())
        heights.append(s[1] - n_fold)
    return ScalingResult(tuple(eps_list), tuple(heights), _fit(eps_list, heights, "exit height"))


def scaling_study(p: KarmaParams, eps_list=(1e-2, 5e-3, 2e-3, 1e-3)):
    """Both exponents: ``(fenichel_slope_result, fold_slope_result)``."""
    return fenichel_distance_scaling(p, eps_list), fold_exit_scaling(p, eps_list)


def saddle_stable_manifold_reaches_node(p: KarmaParams, offset: float = 1e-7,
                                        cfg: IntegratorConfig | None = None):
    """Backward-integrate the saddle's stable manifold (n > 0 branch) and return
    ``(distance to the interior unstable equilibrium, end state)``."""
    eqs = find_equilibria(p)
    saddle = next(e for e in eqs if e.classification == "saddle")
    interior = [e for e in eqs if e.position.fast > 1.0]
    if not interior:
        raise AnalysisError("no interior equilibrium")
    node = interior[0].position
    E_s, n_s = saddle.position
    J = karma_full_jacobian(E_s, max(n_s, 0.0), p, -1)
    w, V = np.linalg.eig(J)
    v = np.real(V[:, int(np.argmin(w.real))])
    if v[1] < 0:
        v = -v
    cfg = cfg or IntegratorConfig(rel_tol=1e-11, abs_tol=1e-13)
    start = np.array([E_s, n_s]) + offset * v / np.linalg.norm(v)
    # backward time follows the repelling branch, which meets E = 1 almost
    # tangentially; the rectified field is continuous, so integrate it unsplit
    y, t, chunk = start, 0.0, 5.0
    for _ in range(int(120.0 / (p.eps * chunk))):
        y = integrate(vector_field(p), y, (t, t - chunk), cfg).final
        t -= chunk
        if math.hypot(y[0] - node.fast, y[1] - node.slow) < 1e-8:
            break
    return float(math.hypot(y[0] - node.fast, y[1] - node.slow)), y


# -- long-run behaviour of the ODE ---------------------------------------------------------------

@dataclass(frozen=True)
class Regime:
    kind: str  # "converge" | "oscillate"
    amplitude: float
    final: np.ndarray


def ode_regime(p, s0=None, t_end: float | None = None, late_fraction: float = 0.3,
               amp_tol: float = 1e-3, cfg: IntegratorConfig | None = None) -> Regime:
    """Integrate for ~30 slow time units and inspect the fast variable over the
    last ``late_fraction`` of the run: a peak-to-peak amplitude above
    ``amp_tol`` counts as a sustained oscillation."""
    if s0 is None:
        s0 = (3.0, 0.2) if isinstance(p, KarmaParams) else (2.0, 0.0)
    t_end = t_end or 30.0 / p.eps
    cfg = cfg or IntegratorConfig(rel_tol=1e-8, abs_tol=1e-10, max_step=0.5)
    sw = Switch() if isinstance(p, KarmaParams) else None
    traj = integrate(vector_field(p), s0, (0.0, t_end), cfg, switch=sw)
    late = traj.times >= (1.0 - late_fraction) * t_end
    amp = float(np.ptp(traj.states[late, 0]))
    return Regime("oscillate" if amp > amp_tol else "converge", amp, traj.final)
