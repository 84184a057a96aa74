import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from scipy.optimize import brentq

from karmafhn.errors import ConditionViolated, ConfigError, DomainError
from karmafhn.model import (
    FhnParams, Karma94Params, KarmaParams, check_estar_condition, dispersion_D, dump_params,
    fhn_rhs, karma_rhs, params_from_mapping, params_to_mapping, parse_config_text, reaction_h,
    reaction_h_prime, rectifier, rescale_94_to_93, restitution_R,
)

finite = st.floats(-50, 50, allow_nan=False)


@pytest.mark.parametrize("x, expected", [(2.0, 2.0), (-1.5, 0.0), (0.0, 0.0)])
def test_rectifier(x, expected):
    assert rectifier(x) == expected


def test_rectifier_on_arrays():
    np.testing.assert_array_equal(rectifier(np.array([-1.0, 0.5])), [0.0, 0.5])


@given(finite)
def test_rectifier_is_nonnegative_and_idempotent(x):
    assert rectifier(x) >= 0
    assert rectifier(rectifier(x)) == rectifier(x)


def test_reaction_h_values():
    assert reaction_h(3.0, "tanh93") == 4.5
    assert reaction_h(3.0, "cubic") == 4.5
    assert reaction_h(0.0, "cubic") == 0.0
    assert reaction_h(4.0, "cubic") == 0.0


def test_cubic_osculates_tanh_form_at_3():
    # value, slope and curvature agree at 3, so the gap shrinks like (E-3)^3
    gaps = [abs(reaction_h(3 + d, "cubic") - reaction_h(3 + d, "tanh93")) for d in (0.02, 0.01)]
    assert gaps[0] / gaps[1] == pytest.approx(8, rel=0.05)


def test_unknown_variant():
    with pytest.raises(DomainError):
        reaction_h(1.0, "quartic")


@given(st.floats(-2, 6), st.sampled_from(["cubic", "tanh93"]))
def test_reaction_derivative_matches_difference_quotient(E, variant):
    h = 1e-6
    fd = (reaction_h(E + h, variant) - reaction_h(E - h, variant)) / (2 * h)
    assert reaction_h_prime(E, variant) == pytest.approx(fd, abs=1e-6)


def test_karma_rhs_examples(karma):
    assert karma_rhs((0.0, 0.0), karma) == (0.0, 0.0)
    dE, dn = karma_rhs((1.0, 0.0), karma)
    assert dE == pytest.approx(1.25) and dn == 0.0
    dE, dn = karma_rhs((2.0, 1.0), karma)
    assert dE == pytest.approx(0.0, abs=1e-14)
    assert dn == pytest.approx(karma.eps * (1 / karma.n_B - 1))


def test_fhn_rhs_examples(fhn):
    dv, dw = fhn_rhs((0.0, 0.0), fhn)
    assert dv == 0.0 and dw == pytest.approx(0.7 * fhn.eps)
    dv, dw = fhn_rhs((1.0, 0.0), fhn)
    assert dv == pytest.approx(2 / 3) and dw == pytest.approx(1.7 * fhn.eps)


def test_fhn_equilibrium_against_scalar_root(fhn):
    # w = (v + a)/b on the nullcline; substitute and solve for v
    v = brentq(lambda v: v - v ** 3 / 3 - (v + fhn.a) / fhn.b, -3, 0)
    w = (v + fhn.a) / fhn.b
    assert (v, w) == pytest.approx((-1.1994, -0.6243), abs=1e-3)
    assert np.allclose(fhn_rhs((v, w), fhn), 0.0, atol=1e-12)


def test_fhn_standard_regime(fhn):
    assert fhn.standard_regime
    assert not fhn.with_(a=0.3).standard_regime


def test_restitution():
    Re = 0.7
    assert restitution_R(0.0, Re) == pytest.approx(1 / (1 - math.exp(-Re)))
    assert restitution_R(1 / (1 - math.exp(-Re)), Re) == pytest.approx(0.0, abs=1e-14)
    assert restitution_R(1.0, math.log(2)) == pytest.approx(1.0)
    with pytest.raises(DomainError):
        restitution_R(0.5, 0.0)


def test_dispersion():
    assert dispersion_D(1.0, 7) == 1.0
    assert dispersion_D(0.5, 4) == 0.0625
    x = 0.984
    assert dispersion_D(x, 4) == pytest.approx(x * x * x * x, abs=1e-12)


def test_rescale_defaults():
    p = rescale_94_to_93(Karma94Params())
    assert p.eps == pytest.approx(0.01)
    assert p.n_B == pytest.approx(0.5)
    assert p.diff == pytest.approx(p.eps ** 2)


def test_rescale_limits():
    assert rescale_94_to_93(Karma94Params(tau_E=3.0, tau_n=3.0)).eps == 1.0
    assert rescale_94_to_93(Karma94Params(Re=50.0)).n_B == pytest.approx(1.0)
    with pytest.raises(DomainError):
        Karma94Params(tau_n=0.0)


def test_estar_tangency_at_defaults(karma):
    chk = check_estar_condition(karma)
    assert chk.E_tangent == pytest.approx(2.0, abs=1e-8)
    assert max(map(abs, chk.residuals)) < 1e-10


def test_estar_condition_fails_off_value(karma):
    with pytest.raises(ConditionViolated):
        check_estar_condition(karma.with_(E_star=1.6))


@pytest.mark.parametrize("kw", [dict(eps=0.0), dict(diff=-1.0), dict(M=0), dict(M=2.5), dict(n_B=0.0)])
def test_karma_params_validation(kw):
    with pytest.raises(DomainError):
        KarmaParams(**kw)


def test_fhn_params_validation():
    with pytest.raises(DomainError):
        FhnParams(eps=-1.0)


# -- config -------------------------------------------------------------------------------------

def test_config_text_round_trip(karma):
    text = dump_params(karma.with_(I=0.2, M=10))
    assert params_from_mapping(parse_config_text(text)) == karma.with_(I=0.2, M=10)


@given(st.floats(1e-4, 0.5), st.floats(0.0, 5.0), st.integers(1, 40), st.floats(0.05, 1.0),
       st.floats(-1.0, 1.0))
def test_config_round_trip_property(eps, D, M, nB, I):
    p = KarmaParams(eps=eps, diff=D, M=M, n_B=nB, I=I)
    assert params_from_mapping(parse_config_text(dump_params(p))) == p
    assert params_from_mapping(params_to_mapping(p)) == p


def test_config_errors():
    with pytest.raises(ConfigError):
        params_from_mapping({"bogus": "1"})
    with pytest.raises(ConfigError):
        params_from_mapping({"model": "fhn", "M": "4"})
    with pytest.raises(ConfigError):
        params_from_mapping({"eps": "-1"})
    with pytest.raises(ConfigError):
        parse_config_text("eps = 1\neps = 2")
    with pytest.raises(ConfigError):
        parse_config_text("no equals sign")


def test_config_comments_and_model_switch():
    p = params_from_mapping(parse_config_text("# run\nmodel = fhn  # FHN\nI = 1\n"))
    assert p == FhnParams(I=1.0)
