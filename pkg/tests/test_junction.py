"""Node coupling: bounds, projection, the flux-maximizing solver, stepping."""

import numpy as np
import pytest

from junctionflow import (ArcConfig, FluxModel, JunctionNetwork, Orientation,
                          clip_control, junction_riemann_solver,
                          lp_vertex_oracle)
from junctionflow.paths import (PiecewiseConstantPath,
                                distribution_matrix_path)

LWR = FluxModel.quadratic(4.0, 1.0)
A22 = np.array([[0.5, 0.3], [0.5, 0.7]])


def const(v):
    return lambda x: np.full_like(np.asarray(x, dtype=float), v)


def make_network(u_in=(0.5, 0.5), u_out=(0.1, 0.1), matrix=A22, n_cells=20,
                 length=1.0):
    inc = [ArcConfig(Orientation.INCOMING, -length, 0.0, n_cells, const(u))
           for u in u_in]
    out = [ArcConfig(Orientation.OUTGOING, 0.0, length, n_cells, const(u))
           for u in u_out]
    a_path = distribution_matrix_path([0.0], [np.asarray(matrix)])
    return JunctionNetwork(LWR, inc, out, a_path)


# ---------------------------------------------------------------------------
# bounds and projection
# ---------------------------------------------------------------------------

def test_gamma_bounds_at_crest():
    net = make_network(u_in=(0.5, 0.5), u_out=(0.5, 0.5))
    D, S = net.gamma_bounds()
    np.testing.assert_allclose(D, [1.0, 1.0])
    np.testing.assert_allclose(S, [1.0, 1.0])


def test_gamma_bounds_mixed():
    net = make_network(u_in=(0.25, 0.5), u_out=(0.75, 0.1))
    D, S = net.gamma_bounds()
    np.testing.assert_allclose(D, [0.75, 1.0])
    np.testing.assert_allclose(S, [0.75, 1.0])


def test_jammed_outgoing_blocks_routing():
    net = make_network(u_out=(1.0, 0.1))
    D, S = net.gamma_bounds()
    assert S[0] == 0.0
    g = junction_riemann_solver(A22, D, S)
    assert np.all(A22 @ g <= S + 1e-15)
    np.testing.assert_allclose((A22 @ g)[0], 0.0, atol=1e-15)


def test_clip_worked_example():
    D = np.array([1.0, 1.0])
    S = np.array([1.0, 1.0])
    realized = clip_control(np.array([1.0, 1.0]), A22, D, S)
    np.testing.assert_allclose(realized, [5.0 / 6.0, 5.0 / 6.0], atol=1e-15)
    np.testing.assert_allclose(A22 @ realized, [2.0 / 3.0, 1.0], atol=1e-15)


def test_clip_zero_and_slack():
    D = np.array([0.4, 0.4])
    S = np.array([1.0, 1.0])     # supplies exceed total demand: no scaling
    np.testing.assert_array_equal(clip_control(np.zeros(2), A22, D, S), 0.0)
    req = np.array([0.3, 0.2])
    np.testing.assert_array_equal(clip_control(req, A22, D, S), req)


def test_clip_always_feasible():
    rng = np.random.default_rng(5)
    for _ in range(300):
        m = int(rng.integers(1, 4))
        n = int(rng.integers(1, 4))
        A = rng.random((n, m))
        A /= A.sum(axis=0, keepdims=True)
        D = rng.random(m)
        S = rng.random(n)
        req = rng.random(m) * 2.0 - 0.5        # may be negative or above D
        g = clip_control(req, A, D, S)
        assert np.all(g >= -1e-15) and np.all(g <= D + 1e-15)
        assert np.all(A @ g <= S + 1e-12)


# ---------------------------------------------------------------------------
# the flux-maximizing node solver
# ---------------------------------------------------------------------------

def test_solver_worked_example():
    g = junction_riemann_solver(A22, np.ones(2), np.ones(2))
    np.testing.assert_allclose(g, [1.0, 5.0 / 7.0], atol=1e-12)


def test_solver_trivial_cases():
    np.testing.assert_allclose(
        junction_riemann_solver(A22, np.ones(2), np.zeros(2)), 0.0, atol=1e-15)
    D = np.array([0.2, 0.3])              # demands jointly feasible
    np.testing.assert_allclose(
        junction_riemann_solver(A22, D, np.ones(2)), D, atol=1e-12)


def test_solver_lexicographic_tie_break():
    # total flux is capped at 1 along a whole face; arc 1 gets priority
    A = np.array([[0.5, 0.5], [0.5, 0.5]])
    g = junction_riemann_solver(A, np.ones(2), np.array([0.5, 0.5]))
    np.testing.assert_allclose(g, [1.0, 0.0], atol=1e-12)
    go, _ = lp_vertex_oracle(A, np.ones(2), np.array([0.5, 0.5]))
    np.testing.assert_allclose(go, g, atol=1e-12)


def test_solver_single_incoming():
    A = np.array([[0.6], [0.4]])
    g = junction_riemann_solver(A, np.array([1.0]), np.array([0.3, 1.0]))
    np.testing.assert_allclose(g, [0.5], atol=1e-14)


def test_solver_matches_oracle_on_random_instances():
    rng = np.random.default_rng(20240917)
    worst = 0.0
    for _ in range(1000):
        m = int(rng.integers(1, 4))
        n = int(rng.integers(1, 4))
        A = rng.random((n, m))
        A /= A.sum(axis=0, keepdims=True)
        D = rng.random(m)
        S = rng.random(n)
        got = junction_riemann_solver(A, D, S)
        want, _ = lp_vertex_oracle(A, D, S)
        worst = max(worst, float(np.max(np.abs(got - want))))
    assert worst <= 1e-10


def test_solver_scale_equivariance():
    rng = np.random.default_rng(99)
    for _ in range(100):
        A = rng.random((2, 2))
        A /= A.sum(axis=0, keepdims=True)
        D = rng.random(2)
        S = rng.random(2)
        lam = float(rng.uniform(0.5, 2.0))
        g1 = junction_riemann_solver(A, D, S)
        g2 = junction_riemann_solver(A, lam * D, lam * S)
        np.testing.assert_allclose(g2, lam * g1, atol=1e-11)


# ---------------------------------------------------------------------------
# network stepping
# ---------------------------------------------------------------------------

def test_matrix_validation():
    bad = np.array([[0.5, 0.4], [0.5, 0.5]])        # second column sums to 0.9
    with pytest.raises(ValueError):
        distribution_matrix_path([0.0], [bad])


def test_kirchhoff_and_distribution_condition():
    net = make_network(u_in=(0.4, 0.55), u_out=(0.6, 0.3))
    control = PiecewiseConstantPath(np.array([0.0]), np.array([[0.9, 0.8]]))
    for _ in range(40):
        rec = net.advance(control=control, cfl=0.9)
        assert abs(rec.outgoing.sum() - rec.incoming.sum()) <= 1e-14
        np.testing.assert_array_equal(rec.outgoing,
                                      net.matrix_at(rec.t) @ rec.incoming)
        assert np.all(rec.incoming <= rec.demand + 1e-12)
        assert np.all(rec.outgoing <= rec.supply + 1e-12)


def test_baseline_step_uses_flux_maximizer():
    net = make_network(u_in=(0.5, 0.5), u_out=(0.1, 0.1))
    _, D, S, _, gamma, phi = net.node_fluxes(0.0, control=None)
    np.testing.assert_allclose(gamma, [1.0, 5.0 / 7.0], atol=1e-12)
    np.testing.assert_allclose(phi, A22 @ gamma, atol=1e-15)


def test_zero_control_walls_off_the_node():
    net = make_network(u_in=(0.3, 0.6), u_out=(0.2, 0.4))
    control = PiecewiseConstantPath(np.array([0.0]), np.array([[0.0, 0.0]]))
    for _ in range(30):
        rec = net.advance(control=control, cfl=0.9)
        np.testing.assert_array_equal(rec.incoming, 0.0)
        np.testing.assert_array_equal(rec.outgoing, 0.0)
    for st in net.incoming_states + net.outgoing_states:
        assert st.cells.min() >= 0.0 and st.cells.max() <= 1.0


def test_time_varying_matrix_revalidated_per_piece():
    mats = [A22, np.array([[0.2, 0.8], [0.8, 0.2]])]
    a_path = distribution_matrix_path([0.0, 0.05], mats)
    inc = [ArcConfig(Orientation.INCOMING, -1.0, 0.0, 20, const(0.4))
           for _ in range(2)]
    out = [ArcConfig(Orientation.OUTGOING, 0.0, 1.0, 20, const(0.2))
           for _ in range(2)]
    net = JunctionNetwork(LWR, inc, out, a_path)
    control = PiecewiseConstantPath(np.array([0.0]), np.array([[0.5, 0.5]]))
    seen = set()
    for _ in range(30):
        rec = net.advance(control=control, cfl=0.9, dt_cap=0.05 - net.time
                          if net.time < 0.05 else None)
        seen.add(tuple(net.matrix_at(rec.t).ravel()))
    assert len(seen) == 2
