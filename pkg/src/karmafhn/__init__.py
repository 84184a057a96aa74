"""Karma and FitzHugh-Nagumo excitable-media toolkit: phase plane, fast-slow
analysis, travelling-wave shooting and 1D reaction-diffusion simulation."""

from .model import (  # noqa: F401
    FhnParams, Karma94Params, KarmaParams, PhaseState, check_estar_condition,
    dispersion_D, fhn_rhs, karma_rhs, reaction_h, rectifier, rescale_94_to_93, restitution_R,
)

__version__ = "0.1.0"
