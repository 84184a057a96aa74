import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from karmafhn import blowup

angles = st.floats(0.0, 2 * math.pi)


def test_example_field_values():
    assert blowup.example_field(0.0, 0.0) == (0.0, 0.0)
    assert blowup.example_field(1.0, 0.0) == (1.0, 0.0)
    assert blowup.example_field(1.0, 1.0) == (-1.0, -1.0)


def test_circle_samples():
    assert blowup.rescaled_blowup(math.pi / 4, 0.0) == pytest.approx((0.0, 0.0), abs=1e-15)
    assert blowup.rescaled_blowup(math.pi / 2, 0.0) == pytest.approx((0.0, 0.0), abs=1e-15)
    th = math.pi / 6
    expected = 3 * (math.sqrt(3) / 2) * 0.5 * (0.5 - math.sqrt(3) / 2)
    assert blowup.rescaled_blowup(th, 0.0)[0] == pytest.approx(expected)


@given(angles, st.floats(0.01, 3.0))
def test_rescaled_field_is_polar_pushforward(theta, r):
    assert blowup.rescaled_blowup(theta, r) == pytest.approx(blowup.polar_pushforward(theta, r),
                                                             abs=1e-12)


@given(angles, st.floats(0.0, 3.0))
def test_jacobian_matches_difference_quotient(theta, r):
    h = 1e-6
    J = blowup.rescaled_jacobian(theta, r)
    col_th = (np.subtract(blowup.rescaled_blowup(theta + h, r), blowup.rescaled_blowup(theta - h, r))
              / (2 * h))
    col_r = (np.subtract(blowup.rescaled_blowup(theta, r + h), blowup.rescaled_blowup(theta, r - h))
             / (2 * h))
    np.testing.assert_allclose(J, np.column_stack([col_th, col_r]), atol=1e-7)


def test_six_hyperbolic_equilibria():
    eqs = blowup.circle_equilibria()
    assert len(eqs) == 6 and all(h for _, h in eqs)


def test_equilibria_are_the_factor_roots():
    # zeros of cos sin (sin - cos) on a fine grid sit next to the listed angles
    th = np.linspace(0, 2 * math.pi, 200001)[:-1]
    g = np.cos(th) * np.sin(th) * (np.sin(th) - np.cos(th))
    roots = th[np.nonzero(np.sign(g[:-1]) != np.sign(g[1:]))[0]]
    listed = np.array([t for t, _ in blowup.circle_equilibria()])
    assert len(roots) == len(listed)
    for r in roots:
        assert np.min(np.abs(listed - r)) < 1e-4


def test_grid_resolution_does_not_change_equilibria(tmp_path):
    blowup.export(tmp_path / "a.csv", tmp_path / "ea.csv", n_theta=73)
    blowup.export(tmp_path / "b.csv", tmp_path / "eb.csv", n_theta=37)
    assert (tmp_path / "ea.csv").read_bytes() == (tmp_path / "eb.csv").read_bytes()


def test_field_is_finite_down_to_the_circle():
    rows = blowup.field_grid(n_theta=91, r_values=(0.0, 1e-8, 0.5))
    assert np.all(np.isfinite(np.array(rows, float)))


@given(st.floats(-20, 20))
def test_wrap_lands_in_period(theta):
    t = blowup.wrap(theta)
    assert 0.0 <= t < 2 * math.pi
    assert math.isclose(math.cos(t), math.cos(theta), abs_tol=1e-9)
