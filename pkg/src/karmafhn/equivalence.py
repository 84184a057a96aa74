"""Numerical check that the 1994 Karma formulation, its 1993 rescaling and the
mixed form used everywhere else produce the same trajectories.

The 1994 form runs in time t with gate n.  The 1993 form runs in slow time
t / tau_n with gate n_B * n.  The mixed form runs in time t / tau_E with the
1994 gate.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .integrate import IntegratorConfig, Switch, sample_states
from .model import Karma94Params, karma93_rhs, karma94_rhs, rescale_94_to_93, vector_field


@dataclass(frozen=True)
class FormulationGap:
    times: np.ndarray
    max_dE_93: float
    max_dn_93: float
    max_dE_mixed: float
    max_dn_mixed: float

    @property
    def worst(self) -> float:
        return max(self.max_dE_93, self.max_dn_93, self.max_dE_mixed, self.max_dn_mixed)


def compare_formulations(q: Karma94Params = Karma94Params(), s0=(3.0, 0.0), t_end: float = 300.0,
                         n_samples: int = 61, variant: str = "tanh93", delta: float = 0.25,
                         cfg: IntegratorConfig = IntegratorConfig(rel_tol=1e-11, abs_tol=1e-13)
                         ) -> FormulationGap:
    """Largest pointwise differences over ``n_samples`` times in [0, t_end] (1994 time units)."""
    p = rescale_94_to_93(q, variant, delta)
    t94 = np.linspace(0.0, t_end, n_samples)
    sw = Switch()

    def f94(t, y, side=None):
        return np.array(karma94_rhs(y, q, variant, delta, side=side))

    def f93(t, y, side=None):
        return np.array(karma93_rhs(y, p.eps, p.n_B, q.M, q.E_star, variant, delta, side=side))

    a = sample_states(f94, s0, t94, cfg, sw)
    b = sample_states(f93, (s0[0], p.n_B * s0[1]), t94 / q.tau_n, cfg, sw)
    c = sample_states(vector_field(p), s0, t94 / q.tau_E, cfg, sw)
    return FormulationGap(
        t94,
        float(np.max(np.abs(a[:, 0] - b[:, 0]))),
        float(np.max(np.abs(a[:, 1] - b[:, 1] / p.n_B))),
        float(np.max(np.abs(a[:, 0] - c[:, 0]))),
        float(np.max(np.abs(a[:, 1] - c[:, 1]))),
    )
