"""Polar blow-up of the planar example z' = (z1^2 - 2 z1 z2, z2^2 - 2 z1 z2).

The origin is a degenerate (quadratic) equilibrium.  In polar coordinates
the field is r times a regular field; dividing by r leaves a smooth system
on the cylinder whose restriction to the circle r = 0 has hyperbolic
equilibria.
"""
from __future__ import annotations

import math

import numpy as np

from .csvio import write_csv

TWO_PI = 2.0 * math.pi
CIRCLE_ANGLES = (0.0, math.pi / 4, math.pi / 2, math.pi, 5 * math.pi / 4, 3 * math.pi / 2)


def wrap(theta: float) -> float:
    t = math.fmod(theta, TWO_PI)
    if t < 0:
        t += TWO_PI
    # tiny negative inputs round up to exactly 2 pi
    return 0.0 if t >= TWO_PI else t


def example_field(z1: float, z2: float) -> tuple[float, float]:
    return z1 * z1 - 2 * z1 * z2, z2 * z2 - 2 * z1 * z2


def rescaled_blowup(theta: float, r: float) -> tuple[float, float]:
    c, s = math.cos(theta), math.sin(theta)
    dtheta = 3 * c * s * (s - c)
    dr = 0.25 * r * (c + 3 * math.cos(3 * theta) + s - 3 * math.sin(3 * theta))
    return dtheta, dr


def polar_pushforward(theta: float, r: float) -> tuple[float, float]:
    """(theta', r') of ``example_field`` at (r cos theta, r sin theta), divided by r."""
    c, s = math.cos(theta), math.sin(theta)
    f1, f2 = example_field(r * c, r * s)
    rdot = c * f1 + s * f2
    thetadot = (c * f2 - s * f1) / r
    return thetadot / r, rdot / r


def rescaled_jacobian(theta: float, r: float) -> np.ndarray:
    """Jacobian of the rescaled field with respect to (theta, r)."""
    c, s = math.cos(theta), math.sin(theta)
    d_th_th = 3 * ((c * c - s * s) * (s - c) + c * s * (c + s))
    g = c + 3 * math.cos(3 * theta) + s - 3 * math.sin(3 * theta)
    dg = -s - 9 * math.sin(3 * theta) + c - 9 * math.cos(3 * theta)
    return np.array([[d_th_th, 0.0], [0.25 * r * dg, 0.25 * g]])


def circle_equilibria() -> list[tuple[float, bool]]:
    """Zeros of the angular equation on r = 0 with a hyperbolicity flag.

    cos(theta) sin(theta) (sin(theta) - cos(theta)) vanishes exactly at
    multiples of pi/2 and at pi/4 + k pi.
    """
    out = []
    for th in CIRCLE_ANGLES:
        ev = np.linalg.eigvals(rescaled_jacobian(th, 0.0))
        out.append((th, bool(np.all(np.abs(ev.real) > 1e-8))))
    return out


def field_grid(n_theta: int = 73, r_values=(0.0, 0.25, 0.5, 0.75, 1.0)):
    rows = []
    for th in np.linspace(0.0, TWO_PI, n_theta):
        for r in r_values:
            d_th, d_r = rescaled_blowup(float(th), float(r))
            rows.append((float(th), float(r), d_th, d_r))
    return rows


def equilibrium_rows():
    rows = []
    for th, hyp in circle_equilibria():
        ev = np.linalg.eigvals(rescaled_jacobian(th, 0.0))
        ev = sorted(ev.real)
        rows.append((th, ev[0], ev[1], hyp))
    return rows


def export(path_grid, path_eq, n_theta: int = 73, r_values=(0.0, 0.25, 0.5, 0.75, 1.0)):
    write_csv(path_grid, ("theta", "r", "dtheta", "dr"), field_grid(n_theta, r_values))
    write_csv(path_eq, ("theta", "lambda_1", "lambda_2", "hyperbolic"), equilibrium_rows())
