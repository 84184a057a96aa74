"""Right-hand sides and parameter sets for the Karma and FitzHugh-Nagumo models.

The Karma model is used in its polynomial, mixed-scaling form

    E' = D E_xx - E + (E* - n^M) h(E) + I
    n' = eps * (max(E - 1, 0) / n_B - n)

with ``h(E) = 2(E^2 - delta E^3)`` (cubic) or the original
``h(E) = (1 - tanh(E - 3)) E^2 / 2`` (tanh93).  The FitzHugh-Nagumo model is

    v' = D v_xx + v - v^3/3 - w + I
    w' = eps * (v + a - b w)
"""
from __future__ import annotations

import logging
import math
from dataclasses import asdict, dataclass, fields, replace
from pathlib import Path
from typing import NamedTuple, Union

import numpy as np

from .errors import ConditionViolated, ConfigError, DomainError

log = logging.getLogger(__name__)

VARIANTS = ("cubic", "tanh93")


class PhaseState(NamedTuple):
    fast: float
    slow: float


@dataclass(frozen=True)
class KarmaParams:
    eps: float = 1e-2
    diff: float = 1.0
    M: int = 4
    n_B: float = 0.5
    I: float = 0.0
    E_star: float = 1.5
    delta: float = 0.25
    variant: str = "cubic"

    def __post_init__(self):
        if not self.eps > 0:
            raise DomainError(f"eps must be > 0, got {self.eps}")
        if not self.diff >= 0:
            raise DomainError(f"diffusion must be >= 0, got {self.diff}")
        if int(self.M) != self.M or self.M < 1:
            raise DomainError(f"M must be a positive integer, got {self.M}")
        object.__setattr__(self, "M", int(self.M))
        if not self.n_B > 0:
            raise DomainError(f"n_B must be > 0, got {self.n_B}")
        if self.variant not in VARIANTS:
            raise DomainError(f"unknown reaction variant {self.variant!r}")

    def with_(self, **kw) -> "KarmaParams":
        return replace(self, **kw)


@dataclass(frozen=True)
class FhnParams:
    eps: float = 1e-2
    diff: float = 1.0
    a: float = 0.7
    b: float = 0.8
    I: float = 0.0

    def __post_init__(self):
        if not self.eps > 0:
            raise DomainError(f"eps must be > 0, got {self.eps}")
        if not self.diff >= 0:
            raise DomainError(f"diffusion must be >= 0, got {self.diff}")

    @property
    def standard_regime(self) -> bool:
        """``0 < b < 1`` and ``1 - 2b/3 < a < 1``."""
        return 0 < self.b < 1 and 1 - 2 * self.b / 3 < self.a < 1

    def with_(self, **kw) -> "FhnParams":
        return replace(self, **kw)


@dataclass(frozen=True)
class Karma94Params:
    """Parameters of the 1994 formulation (original time and gate scaling)."""

    tau_E: float = 1.0
    tau_n: float = 100.0
    gamma: float = 1e-4
    Re: float = math.log(2.0)
    M: int = 4
    E_star: float = 1.5415

    def __post_init__(self):
        if not self.tau_E > 0:
            raise DomainError("tau_E must be > 0")
        if self.tau_n == 0:
            raise DomainError("tau_n = 0: time-scale ratio undefined")
        if not self.tau_n > 0:
            raise DomainError("tau_n must be > 0")
        if not self.gamma >= 0:
            raise DomainError("gamma must be >= 0")
        if not self.Re > 0:
            raise DomainError("Re must be > 0")


Params = Union[KarmaParams, FhnParams]


# -- scalar building blocks ----------------------------------------------------

def rectifier(x):
    """max(x, 0); works elementwise on arrays."""
    return np.maximum(x, 0.0) if isinstance(x, np.ndarray) else max(float(x), 0.0)


def reaction_h(E, variant: str = "cubic", delta: float = 0.25):
    """Reaction function h(E).

    ``cubic`` is ``2(E^2 - delta E^3)``; with delta = 1/4 it matches the
    ``tanh93`` function about E = 3 in value and first two derivatives.
    """
    if variant == "cubic":
        return 2.0 * (E * E - delta * E ** 3)
    if variant == "tanh93":
        return (1.0 - np.tanh(E - 3.0)) * E * E / 2.0
    raise DomainError(f"unknown reaction variant {variant!r}")


def reaction_h_prime(E, variant: str = "cubic", delta: float = 0.25):
    if variant == "cubic":
        return 2.0 * (2.0 * E - 3.0 * delta * E * E)
    if variant == "tanh93":
        th = np.tanh(E - 3.0)
        return (1.0 - th) * E - (1.0 - th * th) * E * E / 2.0
    raise DomainError(f"unknown reaction variant {variant!r}")


def gate_power(n, M: int):
    """n**M with negative overshoot clamped to zero (logged)."""
    if isinstance(n, np.ndarray):
        if np.any(n < 0):
            log.debug("clamped %d negative gate values before powering", int(np.sum(n < 0)))
            n = np.maximum(n, 0.0)
        return n ** M
    if n < 0:
        log.debug("clamped negative gate value %g before powering", n)
        n = 0.0
    return n ** M


def restitution_R(n, Re: float):
    if not Re > 0:
        raise DomainError(f"restitution needs Re > 0, got {Re}")
    q = -math.expm1(-Re)  # 1 - e^{-Re}
    return (1.0 - q * n) / q


def dispersion_D(n, M: int):
    return n ** M


# -- vector fields ---------------------------------------------------------------

def karma_reaction(E, n, p: KarmaParams, side: int | None = None):
    """Reaction terms (dE, dn) of the Karma model; vectorised over arrays.

    ``side`` forces the smooth piece of the rectifier: +1 uses ``E - 1``,
    -1 uses 0, ``None`` evaluates ``max(E - 1, 0)``.
    """
    dE = -E + (p.E_star - gate_power(n, p.M)) * reaction_h(E, p.variant, p.delta) + p.I
    if side is None:
        drive = rectifier(E - 1.0)
    elif side > 0:
        drive = E - 1.0
    else:
        drive = 0.0 * E
    dn = p.eps * (drive / p.n_B - n)
    return dE, dn


def karma_rhs(s, p: KarmaParams, side: int | None = None) -> PhaseState:
    """Time derivative of the Karma ODE at ``s = (E, n)`` (no diffusion)."""
    E, n = s
    return PhaseState(*karma_reaction(E, n, p, side))


def fhn_reaction(v, w, p: FhnParams):
    return v - v ** 3 / 3.0 - w + p.I, p.eps * (v + p.a - p.b * w)


def fhn_rhs(s, p: FhnParams) -> PhaseState:
    v, w = s
    return PhaseState(*fhn_reaction(v, w, p))


def vector_field(p: Params):
    """``f(t, y, side=None)`` suitable for :func:`karmafhn.integrate.integrate`."""
    if isinstance(p, KarmaParams):
        def f(t, y, side=None):
            return np.array(karma_reaction(y[0], y[1], p, side))
    else:
        def f(t, y, side=None):
            return np.array(fhn_reaction(y[0], y[1], p))
    return f


def _drive(E, side):
    if side is None:
        return rectifier(E - 1.0)
    return E - 1.0 if side > 0 else 0.0 * E


def karma94_rhs(s, q: Karma94Params, variant: str = "tanh93", delta: float = 0.25,
                side: int | None = None):
    """1994 form in original time and gate: dE/dt, dn/dt (no diffusion)."""
    E, n = s
    th = _drive(E, side)
    dE = (-E + (q.E_star - dispersion_D(max(n, 0.0), q.M)) * reaction_h(E, variant, delta)) / q.tau_E
    dn = (restitution_R(n, q.Re) * th - (1.0 - th) * n) / q.tau_n
    return PhaseState(dE, dn)


def karma93_rhs(s, eps: float, n_B: float, M: int, E_star: float = 1.5415,
                variant: str = "tanh93", delta: float = 0.25, side: int | None = None):
    """1993 form in slow time with the unscaled gate (n / n_B appears in the power)."""
    E, n = s
    dE = (-E + (E_star - (max(n, 0.0) / n_B) ** M) * reaction_h(E, variant, delta)) / eps
    dn = _drive(E, side) - n
    return PhaseState(dE, dn)


def rescale_94_to_93(q: Karma94Params, variant: str = "tanh93", delta: float = 0.25) -> KarmaParams:
    """Map 1994 parameters onto the mixed-form :class:`KarmaParams`.

    Time is measured in units of tau_E, the gate is left as the 1994 gate,
    eps = tau_E / tau_n, n_B = 1 - exp(-Re) and D = gamma * tau_E.  The 1993
    model's diffusion eps^2 is recovered when gamma * tau_E = eps^2.
    """
    if q.tau_n == 0:
        raise DomainError("tau_n = 0")
    return KarmaParams(
        eps=q.tau_E / q.tau_n,
        diff=q.gamma * q.tau_E,
        M=q.M,
        n_B=-math.expm1(-q.Re),
        I=0.0,
        E_star=q.E_star,
        delta=delta,
        variant=variant,
    )


# -- fitted constant ---------------------------------------------------------------

@dataclass(frozen=True)
class TangencyCheck:
    E_tangent: float
    residuals: tuple[float, float]


def check_estar_condition(p: KarmaParams, tol: float = 1e-10, n_grid: int = 400) -> TangencyCheck:
    """Locate E > 0 where the reaction RHS and its E-derivative vanish together at n^M = 1.

    Critical points of the RHS are found by damped Newton from a coarse grid;
    the one with the smallest |RHS| is reported.  Raises
    :class:`ConditionViolated` if no critical point has |RHS| <= tol.
    """
    a = p.E_star - 1.0
    f = lambda E: -E + a * reaction_h(E, p.variant, p.delta)
    df = lambda E: -1.0 + a * reaction_h_prime(E, p.variant, p.delta)

    def d2f(E, h=1e-5):
        return (df(E + h) - df(E - h)) / (2 * h)

    hi = 1.0 / p.delta if p.variant == "cubic" else 8.0
    grid = np.linspace(hi * 1e-3, hi * (1 - 1e-3), n_grid)
    vals = df(grid)
    seeds = [0.5 * (grid[i] + grid[i + 1]) for i in np.nonzero(np.diff(np.sign(vals)))[0]]
    best = None
    for E in seeds:
        for _ in range(60):
            step = df(E) / d2f(E)
            lam = 1.0
            while lam > 1e-6 and abs(df(E - lam * step)) > abs(df(E)):
                lam *= 0.5
            E -= lam * step
            if abs(step) < 1e-15:
                break
        r = (float(f(E)), float(df(E)))
        if 0 < E < hi and (best is None or abs(r[0]) < abs(best.residuals[0])):
            best = TangencyCheck(float(E), r)
    if best is None or abs(best.residuals[0]) > tol or abs(best.residuals[1]) > tol:
        raise ConditionViolated(
            f"E_star={p.E_star}: no simultaneous zero of f and df/dE in (0, {hi:g})"
            + (f"; closest residuals {best.residuals}" if best else "")
        )
    return best


# -- flat key/value config -----------------------------------------------------------

# config key -> dataclass field
_KEYS = {
    "eps": "eps", "D": "diff", "M": "M", "n_B": "n_B", "I": "I",
    "a": "a", "b": "b", "E_star": "E_star", "delta": "delta", "variant": "variant",
}
CONFIG_KEYS = ("model",) + tuple(_KEYS)


def _coerce(key, raw):
    if key in ("model", "variant"):
        return str(raw).strip()
    if key == "M":
        v = float(raw)
        if v != int(v):
            raise ConfigError(f"M must be an integer, got {raw}")
        return int(v)
    return float(raw)


def params_from_mapping(mapping: dict) -> Params:
    """Build a parameter set from a flat mapping; unknown keys are an error."""
    unknown = set(mapping) - set(CONFIG_KEYS)
    if unknown:
        raise ConfigError(f"unknown config keys: {sorted(unknown)}")
    model = str(mapping.get("model", "karma")).strip().lower()
    cls = {"karma": KarmaParams, "fhn": FhnParams}.get(model)
    if cls is None:
        raise ConfigError(f"unknown model {model!r}")
    names = {f.name for f in fields(cls)}
    kw = {}
    for key, raw in mapping.items():
        if key == "model":
            continue
        field = _KEYS[key]
        if field not in names:
            raise ConfigError(f"key {key!r} does not apply to model {model!r}")
        kw[field] = _coerce(key, raw)
    try:
        return cls(**kw)
    except DomainError as exc:
        raise ConfigError(str(exc)) from exc


def params_to_mapping(p: Params) -> dict:
    inv = {v: k for k, v in _KEYS.items()}
    out = {"model": "karma" if isinstance(p, KarmaParams) else "fhn"}
    for k, v in asdict(p).items():
        out[inv[k]] = v
    return out


def parse_config_text(text: str) -> dict:
    """Parse ``key = value`` lines; ``#`` starts a comment."""
    out = {}
    for lineno, line in enumerate(text.splitlines(), 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"line {lineno}: expected key = value")
        k, v = (s.strip() for s in line.split("=", 1))
        if k in out:
            raise ConfigError(f"line {lineno}: duplicate key {k!r}")
        out[k] = v
    return out


def load_params(path) -> Params:
    return params_from_mapping(parse_config_text(Path(path).read_text()))


def dump_params(p: Params, path=None) -> str:
    text = "".join(f"{k} = {v!r}\n" if isinstance(v, float) else f"{k} = {v}\n"
                   for k, v in params_to_mapping(p).items())
    if path is not None:
        Path(path).write_text(text)
    return text
