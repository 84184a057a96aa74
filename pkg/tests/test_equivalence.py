import pytest

from karmafhn.equivalence import compare_formulations
from karmafhn.model import Karma94Params


@pytest.mark.parametrize("variant, E_star", [("tanh93", 1.5415), ("cubic", 1.5)])
def test_three_forms_agree(variant, E_star):
    gap = compare_formulations(Karma94Params(E_star=E_star), s0=(2.5, 0.3), t_end=150.0,
                               n_samples=16, variant=variant)
    assert gap.worst < 1e-7


def test_time_scales_other_than_default():
    gap = compare_formulations(Karma94Params(tau_E=2.0, tau_n=50.0, Re=1.0), t_end=100.0, n_samples=11)
    assert gap.worst < 1e-7
