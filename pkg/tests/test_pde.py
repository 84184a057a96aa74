import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from karmafhn import pde
from karmafhn.errors import BlowUpError, DomainError, GeometryError, WaveLost
from karmafhn.integrate import IntegratorConfig, Switch, integrate
from karmafhn.model import KarmaParams, vector_field

K = KarmaParams()
SMALL = pde.Protocol(length=120.0, n_points=301, center=15.0, width=5.0, t_end=40.0, t_start=10.0,
                     every=2.0, edge_margin=15.0)


def test_bump_shape():
    g = pde.Grid1D()
    f = pde.init_bump(g, 50.0, 10.0, 3.0)
    assert g.x[np.argmax(f.fast)] == 50.0 and f.fast.max() == 3.0
    support = g.x[f.fast > 0]
    assert support.min() > 40.0 and support.max() < 60.0
    assert not pde.init_bump(g, 50.0, 10.0, 0.0).fast.any()
    with pytest.raises(GeometryError):
        pde.init_bump(g, 50.0, 500.0, 3.0)


def test_rest_state_is_preserved():
    g = pde.Grid1D(50.0, 101)
    f = pde.Field1D(g, np.zeros(101), np.zeros(101))
    out = pde.step_pde(f, K, pde.stable_dt(g, K))
    assert not out.fast.any() and not out.slow.any()


def test_uniform_field_follows_the_ode():
    g = pde.Grid1D(10.0, 21)
    f = pde.Field1D(g, np.full(21, 3.0), np.full(21, 0.2))
    snaps = pde.run_simulation(f, K, 20.0, [20.0], dt=0.01)
    ode = integrate(vector_field(K), [3.0, 0.2], (0.0, 20.0), IntegratorConfig(1e-12, 1e-14),
                    switch=Switch()).final
    assert snaps[-1].fast == pytest.approx(np.full(21, ode[0]), abs=1e-7)
    assert snaps[-1].slow == pytest.approx(np.full(21, ode[1]), abs=1e-7)


def test_subthreshold_kick_decays():
    g = pde.Grid1D(50.0, 101)
    u = np.zeros(101)
    u[50] = 0.3
    out = pde.run_simulation(pde.Field1D(g, u, np.zeros(101)), K, 20.0, [20.0])[-1]
    assert np.abs(out.fast).max() < 1e-3


def test_zero_time_returns_initial_field():
    g = pde.Grid1D(50.0, 101)
    f = pde.init_bump(g, 25.0, 5.0, 3.0)
    out = pde.run_simulation(f, K, 0.0)
    assert len(out) == 1 and np.array_equal(out[0].fast, f.fast)


def test_unstable_dt_is_refused():
    g = pde.Grid1D(50.0, 501)
    with pytest.raises(DomainError):
        pde.step_pde(pde.init_bump(g, 25.0, 5.0, 3.0), K, 0.1)


def test_blowup_is_detected():
    g = pde.Grid1D(50.0, 101)
    f = pde.Field1D(g, np.full(101, 1e120), np.zeros(101))
    with pytest.raises(BlowUpError):
        pde.step_pde(f, K, 0.01)


@given(arrays(float, 40, elements=st.floats(-10, 10)))
def test_zero_flux_laplacian_conserves_mass(u):
    w = np.ones_like(u)
    w[0] = w[-1] = 0.5
    assert np.dot(w, pde.laplacian(u, 0.3)) == pytest.approx(0.0, abs=1e-9)


def test_laplacian_of_quadratic():
    x = np.linspace(0, 1, 11)
    lap = pde.laplacian(x ** 2, 0.1)
    assert lap[1:-1] == pytest.approx(np.full(9, 2.0))


# -- measurements ------------------------------------------------------------------------------

def _pulse(g, center):
    return pde.Field1D(g, 3.0 * np.exp(-((g.x - center) / 5.0) ** 2), np.zeros(g.n_points))


@given(st.floats(0.2, 3.0))
def test_speed_of_translated_profile(c):
    g = pde.Grid1D(400.0, 4001)
    snaps = [pde.Field1D(g, _pulse(g, 100 + c * t).fast, np.zeros(4001), t) for t in (0, 10, 20, 30)]
    m = pde.measure_wave(snaps, level=1.0)
    assert m.speed == pytest.approx(c, abs=1e-3)
    assert m.pulse_width == pytest.approx(2 * 5.0 * np.sqrt(np.log(3.0)), abs=1e-2)


def test_flat_snapshots_lose_the_wave():
    g = pde.Grid1D(50.0, 101)
    snaps = [pde.Field1D(g, np.zeros(101), np.zeros(101), t) for t in (0, 1, 2)]
    with pytest.raises(WaveLost):
        pde.measure_wave(snaps)


def test_alignment_overlays_translates():
    g = pde.Grid1D(200.0, 2001)
    a, b = pde.profile_align([_pulse(g, 80.0), _pulse(g, 120.0)])
    xi = np.linspace(-30, 10, 50)
    np.testing.assert_allclose(pde.resample(a, xi)[0], pde.resample(b, xi)[0], atol=1e-3)


def test_phase_projection_of_zero_field():
    g = pde.Grid1D(50.0, 101)
    assert not pde.project_phase(pde.Field1D(g, np.zeros(101), np.zeros(101))).any()


# -- protocol -----------------------------------------------------------------------------------

def test_small_protocol_run():
    run = pde.standard_run(K, SMALL)
    assert run.status == "ok"
    assert 1.5 < run.measurement.speed < 2.0


def test_sweep_rows_in_input_order():
    rows = pde.sweep(K, "I", [0.04, 0.0], SMALL, workers=1)
    assert [r.value for r in rows] == [0.04, 0.0]
    table = pde.sweep_rows(rows)
    assert all(len(r) == len(pde.SWEEP_COLUMNS) for r in table)
    assert table[0][1] > table[1][1]


def test_failed_ignition_is_wave_lost():
    run = pde.standard_run(K, SMALL.with_(height=0.3))
    assert run.status == "wave-lost"


def test_sweep_rejects_unknown_parameter():
    with pytest.raises(DomainError):
        pde.sweep(K, "gamma", [1.0], SMALL)
