import math

import numpy as np
import pytest
from hypothesis import assume, given
from hypothesis import strategies as st
from scipy.optimize import brentq

from karmafhn import fastslow as fs
from karmafhn.errors import AnalysisError, RegimeAmbiguous, ScalingInconclusive
from karmafhn.model import FhnParams, KarmaParams, karma_rhs


def test_manifold_values(karma):
    assert fs.karma_manifold(2.0, karma) == pytest.approx(1.0, abs=1e-14)
    assert fs.karma_manifold(8 / 3, karma) == pytest.approx((15 / 16) ** 0.25, abs=1e-14)
    assert fs.karma_manifold(0.2, karma) is None
    assert fs.karma_manifold(0.0, karma) is None


@given(st.floats(0.05, 3.99))
def test_manifold_points_are_fast_equilibria(E):
    p = KarmaParams()
    n = fs.karma_manifold(E, p)
    assume(n is not None)
    assert karma_rhs((E, n), p)[0] == pytest.approx(0.0, abs=1e-10)


@given(st.floats(0.05, 0.6), st.floats(0.0, 1.3))
def test_layer_jacobian_matches_difference_quotient(E, n):
    p = KarmaParams()
    h = 1e-6
    fd = (karma_rhs((E + h, n), p)[0] - karma_rhs((E - h, n), p)[0]) / (2 * h)
    assert fs.layer_jacobian(E, n, p) == pytest.approx(fd, abs=1e-6)


def test_layer_jacobian_values(karma):
    assert fs.layer_jacobian(2.0, 1.0, karma) == pytest.approx(0.0, abs=1e-14)
    assert fs.layer_jacobian(0.0, 0.7, karma) == -1.0
    E_right = (3 + math.sqrt(6)) / 1.5
    assert fs.layer_jacobian(E_right, 0.0, karma) < 0


def test_equilibria_at_rest(karma):
    eqs = fs.find_equilibria(karma)
    assert len(eqs) == 3
    kinds = [e.classification for e in eqs]
    assert kinds[0] == "stable-node" and kinds[1] == "saddle"
    assert eqs[1].position.fast == pytest.approx((3 - math.sqrt(6)) / 1.5, abs=1e-9)
    assert eqs[0].position == pytest.approx((0.0, 0.0), abs=1e-12)


def test_equilibria_residuals_vanish(karma):
    for I in (0.0, 0.05, 0.2, 0.5):
        for e in fs.find_equilibria(karma.with_(I=I)):
            assert np.allclose(karma_rhs(e.position, karma.with_(I=I)), 0.0, atol=1e-10)


def test_unique_equilibrium_between_I0_and_I1(karma):
    assert len(fs.find_equilibria(karma.with_(I=0.2))) == 1


def test_fhn_equilibrium(fhn):
    (e,) = fs.find_equilibria(fhn)
    assert e.position == pytest.approx((-1.1994, -0.6243), abs=1e-3)
    assert e.classification.startswith("stable")
    assert fs.resting_state(fhn) == e.position


def test_fold_curves(karma):
    fc = fs.fold_curves(0.0, karma)
    assert (fc.E_plus, fc.E_minus) == pytest.approx((2.0, 0.0), abs=1e-14)
    fc = fs.fold_curves(0.2, karma)
    assert fc.E_plus == pytest.approx(1.8728, abs=1e-4)
    assert fc.E_minus == pytest.approx(0.4271, abs=1e-4)
    assert fc.on_manifold_plus and fc.on_manifold_minus
    assert fs.fold_curves(0.5, karma).E_plus is None


@given(st.floats(0.001, 0.44))
def test_fold_points_are_non_hyperbolic(I):
    p = KarmaParams(I=I)
    fc = fs.fold_curves(I, p)
    for E in (fc.E_plus, fc.E_minus):
        n = fs.karma_manifold(E, p)
        if n is not None:
            assert fs.layer_jacobian(E, n, p) == pytest.approx(0.0, abs=1e-8)


def test_I0_against_saddle_node_of_rest_state(karma):
    # on n = 0 the rest equation is I = E - 3E^2 + 0.75E^3; its local max is I0
    E = (6 - math.sqrt(27)) / 4.5
    I0 = E - 3 * E ** 2 + 0.75 * E ** 3
    assert fs.compute_thresholds(karma).I0 == pytest.approx(I0, abs=1e-9)


def test_I2_against_equilibrium_reaching_fold(karma):
    def E_eq(I):
        g = lambda E: karma_rhs((E, (E - 1) / karma.n_B), karma.with_(I=I))[0]
        return brentq(g, 1.0 + 1e-12, 4.0)

    oracle = brentq(lambda I: E_eq(I) - fs.fold_curves(I, karma).E_plus, 0.3, 0.44)
    th = fs.compute_thresholds(karma)
    assert th.I2 == pytest.approx(oracle, abs=1e-8)
    assert 0 < th.I2 <= 4 / 9
    assert th.I1 == 4 / 9 and th.E_cusp == 4 / 3


def test_manifold_sampling(karma):
    samples = fs.sample_manifold(karma)
    branches = {s.branch for s in samples}
    assert {fs.LEFT, fs.MIDDLE, fs.RIGHT} <= branches
    for s in samples:
        if s.branch == fs.MIDDLE:
            assert s.layer_jacobian > 0
        else:
            assert s.layer_jacobian <= 1e-12


# -- singular orbits --------------------------------------------------------------------------

def test_singular_orbit_returns_to_rest(karma):
    orb = fs.singular_orbit((3.0, 0.2), karma)
    assert [s.kind for s in orb.segments] == ["fast", "slow", "fast", "slow"]
    assert orb.outcome == "equilibrium"
    assert orb.jump_points[0] == pytest.approx((2.0, 1.0), abs=1e-9)
    assert orb.segments[-1].points[-1] == pytest.approx((0.0, 0.0), abs=1e-12)
    assert orb.segments[2].points[-1][0] == pytest.approx(0.0, abs=1e-9)


def test_singular_cycle_in_oscillatory_window(karma):
    orb = fs.singular_orbit((3.0, 0.2), karma.with_(I=0.2))
    assert orb.outcome == "cycle"
    jumps = {(round(j.fast, 4), round(j.slow, 4)) for j in orb.jump_points}
    assert (1.8728, 1.0127) in jumps and (0.4272, 0.9467) in jumps


def test_middle_branch_slides_into_saddle(karma):
    n = 0.5
    E = fs._branch_E(n, fs._branch_intervals(karma)[1], karma)
    orb = fs.singular_orbit((E, n), karma)
    assert orb.outcome == "saddle"


def test_regime_near_threshold_is_refused(karma):
    th = fs.compute_thresholds(karma)
    with pytest.raises(RegimeAmbiguous):
        fs.singular_orbit((3.0, 0.2), karma.with_(I=th.I0 + 1e-4), thresholds=th)


def test_saddle_stable_manifold_comes_from_the_focus(karma):
    dist, _ = fs.saddle_stable_manifold_reaches_node(karma)
    assert dist < 1e-6


# -- scaling ------------------------------------------------------------------------------------

def test_scaling_needs_four_values(karma):
    with pytest.raises(ScalingInconclusive):
        fs.fenichel_distance_scaling(karma, [1e-2])
    with pytest.raises(ScalingInconclusive):
        fs.fold_exit_scaling(karma, [1e-3, 2e-3, 5e-3, 1e-2])


def test_fit_recovers_power_law():
    eps = [1e-2, 5e-3, 2e-3, 1e-3]
    assert fs._fit(eps, [3 * e ** (2 / 3) for e in eps], "x") == pytest.approx(2 / 3)


def test_tanh_variant_refuses_closed_form(karma):
    with pytest.raises(AnalysisError):
        fs.fold_curves(0.0, karma.with_(variant="tanh93"))


@pytest.mark.parametrize("p, kind", [(FhnParams(I=1.0), "oscillate"), (KarmaParams(), "converge")])
def test_ode_regime(p, kind):
    assert fs.ode_regime(p).kind == kind
