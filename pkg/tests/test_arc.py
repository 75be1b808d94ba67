"""Single-arc Godunov solver: stability, conservation, convergence."""

import numpy as np
import pytest

from junctionflow import (ArcConfig, ArcState, BoundaryFluxError, CFLViolation,
                          FluxModel, Orientation, cfl_dt, mass, run_single_arc,
                          sample_initial, step, trace_at)
from junctionflow.oracles import boundary_layer_l1_distance


LWR = FluxModel.quadratic(4.0, 1.0)


def make_state(values, dx=0.05):
    return ArcState(np.asarray(values, dtype=float), 0.0, dx)


def incoming_config(n_cells=100, length=5.0, datum=lambda x: 0.0 * x + 0.5):
    return ArcConfig(Orientation.INCOMING, -length, 0.0, n_cells, datum)


# ---------------------------------------------------------------------------
# time-step rule
# ---------------------------------------------------------------------------

def test_cfl_global_fallback_at_the_crest():
    # |f'| vanishes at the critical density; the global constant takes over
    state = make_state(np.full(100, 0.5))
    assert cfl_dt(state, LWR, 0.9) == pytest.approx(0.9 * 0.05 / 4.0)


def test_cfl_at_vacuum():
    state = make_state(np.zeros(100))
    assert cfl_dt(state, LWR, 0.5) == pytest.approx(0.5 * 0.05 / 4.0)


def test_cfl_from_cell_speeds():
    # |f'(0.25)| = 2 with f = 4u(1-u)
    state = make_state(np.full(10, 0.25), dx=0.1)
    assert cfl_dt(state, LWR, 1.0) == pytest.approx(0.05)
    with pytest.raises(ValueError):
        cfl_dt(state, LWR, 1.5)


# ---------------------------------------------------------------------------
# stepping
# ---------------------------------------------------------------------------

def test_uniform_state_with_matching_flux_is_stationary():
    state = make_state(np.full(40, 0.5))
    new, applied, _ = step(state, LWR, 0.01, float(LWR.flux(0.5)),
                           Orientation.INCOMING)
    np.testing.assert_array_equal(new.cells, state.cells)
    assert applied == 1.0
    assert new.time == pytest.approx(0.01)


def test_flux_bound_contract():
    state = make_state(np.full(40, 0.25))
    bound = float(LWR.demand(0.25))
    with pytest.raises(BoundaryFluxError):
        step(state, LWR, 0.001, bound + 1e-6, Orientation.INCOMING)
    # within the 1e-12 slack the flux clamps onto the bound
    new, applied, _ = step(state, LWR, 0.001, bound + 1e-13, Orientation.INCOMING)
    assert applied == bound
    out = ArcConfig(Orientation.OUTGOING, 0.0, 2.0, 40, lambda x: 0.0 * x + 0.75)
    st = sample_initial(out, LWR)
    with pytest.raises(BoundaryFluxError):
        step(st, LWR, 0.001, float(LWR.supply(0.75)) + 1e-6, Orientation.OUTGOING)


def test_cfl_violation_raises():
    state = make_state(np.full(40, 0.25))
    with pytest.raises(CFLViolation):
        step(state, LWR, 1.0, 0.0, Orientation.INCOMING)


def test_zero_flux_wall_respects_maximum_principle():
    # a closed junction against mid-range density piles up but stays <= umax;
    # the implied ghost state is jam density, so the stable step is small
    state = make_state(np.full(40, 0.4), dx=0.05)
    dt = 0.9 * 0.05 / 4.0
    for _ in range(200):
        state, _, _ = step(state, LWR, dt, 0.0, Orientation.INCOMING)
    assert state.cells.max() <= 1.0
    assert state.cells.min() >= 0.0
    assert state.cells[-1] > 0.9   # queue forms at the closed end


def test_maximum_principle_random_runs():
    rng = np.random.default_rng(3)
    for _ in range(20):
        n = int(rng.integers(10, 40))
        cells = rng.random(n)
        orientation = Orientation.INCOMING if rng.random() < 0.5 else Orientation.OUTGOING
        state = ArcState(cells.copy(), 0.0, 0.1)
        for _ in range(50):
            ub = cells[-1] if orientation == Orientation.INCOMING else cells[0]
            bound = float(LWR.demand(ub) if orientation == Orientation.INCOMING
                          else LWR.supply(ub))
            g = rng.random() * bound
            state, _, _ = step(state, LWR, 0.9 * 0.1 / 4.0, g, orientation)
            cells = state.cells
            assert cells.min() >= 0.0 and cells.max() <= 1.0


def test_mass_arithmetic():
    assert mass(make_state(np.full(100, 0.5))) == pytest.approx(2.5)
    assert mass(make_state(np.zeros(60))) == 0.0
    cfg = incoming_config(datum=lambda x: np.full_like(x, 0.5))
    assert mass(sample_initial(cfg, LWR)) == pytest.approx(2.5)


# ---------------------------------------------------------------------------
# histories and traces
# ---------------------------------------------------------------------------

def test_trace_constant_solution():
    cfg = incoming_config(n_cells=40, length=2.0,
                          datum=lambda x: np.full_like(x, 0.25))
    _, hist = run_single_arc(cfg, LWR, float(LWR.demand(0.25)), horizon=0.3)
    for x0 in (-2.0, -1.0, 0.0):
        tr = trace_at(hist, x0)
        np.testing.assert_allclose(tr.values, 0.75, atol=1e-14)


def test_trace_snaps_with_warning():
    cfg = incoming_config(n_cells=10, length=1.0,
                          datum=lambda x: np.full_like(x, 0.25))
    _, hist = run_single_arc(cfg, LWR, 0.1, horizon=0.1)
    with pytest.warns(UserWarning):
        tr = trace_at(hist, -0.333)
    np.testing.assert_array_equal(tr.values, hist.face_flux[:, 7])


def test_junction_face_trace_equals_applied_flux():
    cfg = incoming_config(n_cells=30, length=1.5,
                          datum=lambda x: np.full_like(x, 0.45))
    request = lambda t: 0.5 + 0.4 * np.sin(9.0 * t)
    _, hist = run_single_arc(cfg, LWR, request, horizon=0.5)
    tr = trace_at(hist, 0.0)
    np.testing.assert_array_equal(tr.values, hist.face_flux[:, -1])
    # never exceeds the request nor the demand bound
    for k, t in enumerate(hist.times[:-1]):
        assert tr.values[k] <= float(request(t)) + 1e-12


def test_discrete_box_balance():
    # sum_k dt_k (F_p - F_q) telescopes exactly against the mass change
    cfg = incoming_config(n_cells=50, length=2.5,
                          datum=lambda x: np.where(x < -1.2, 0.2, 0.55))
    state, hist = run_single_arc(cfg, LWR, 0.35, horizon=0.8)
    dts = np.diff(hist.times)
    dx = cfg.dx
    for p, q in ((0, 50), (10, 30), (0, 25), (25, 50)):
        through = float(np.dot(hist.face_flux[:, p] - hist.face_flux[:, q], dts))
        gained = dx * float(np.sum(state.cells[p:q] - hist.initial_cells[p:q]))
        assert abs(through - gained) <= 1e-10


# ---------------------------------------------------------------------------
# convergence against the closed-form solution
# ---------------------------------------------------------------------------

def test_first_order_convergence_to_layer_limit():
    model = FluxModel.quadratic(1.0, 1.0)
    datum = lambda x: np.where(x < -1.0, 0.125, 0.25)
    request = float(model.flux(0.75))           # 3/16, congested inflow
    errors = []
    for dx in (0.05, 0.025, 0.0125):
        cfg = ArcConfig(Orientation.INCOMING, -5.0, 0.0, round(5.0 / dx), datum)
        state, _ = run_single_arc(cfg, model, request, horizon=1.0)
        errors.append(boundary_layer_l1_distance(state.cells, cfg.faces(), 1.0))
    assert errors[-1] <= 0.02
    orders = [np.log2(errors[k] / errors[k + 1]) for k in range(len(errors) - 1)]
    assert min(orders) >= 0.6
