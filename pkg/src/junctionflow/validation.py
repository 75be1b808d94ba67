"""Self-contained oracle suites behind the `validate` CLI command.

Each check compares a solver path against an independent reference
(closed form, brute force, or an exact discrete identity) and prints
one PASS/FAIL line.  The test suite runs the same checks (and more)
under pytest; this module exists so a deployed install can be smoke
tested without the test tree.
"""

from __future__ import annotations

import numpy as np

from .arc import ArcConfig, Orientation, run_single_arc
from .costs import delta_sweep
from .flux import FluxModel
from .junction import junction_riemann_solver
from .optimize import exhaustive_oracle
from .oracles import (boundary_layer_l1_distance, exact_riemann,
                      lp_vertex_oracle)
from .scenarios import builtin_scenario, tiny_scenario
from .simulate import run_scenario


def check_godunov_vs_riemann() -> tuple[bool, str]:
    model = FluxModel.quadratic(4.0, 1.0)
    grid = np.linspace(0.0, 1.0, 51)
    worst = 0.0
    for ul in grid:
        for ur in grid:
            g = float(model.godunov_flux(ul, ur))
            u0 = exact_riemann(model, ul, ur, 0.0)
            worst = max(worst, abs(g - float(model.flux(u0))))
    return worst <= 1e-12, f"max |godunov - f(riemann at 0)| = {worst:.2e}"


def check_node_lp(instances: int = 1000, seed: int = 20240917) -> tuple[bool, str]:
    rng = np.random.default_rng(seed)
    worst = 0.0
    for _ in range(instances):
        m = int(rng.integers(1, 4))
        n = int(rng.integers(1, 4))
        A = rng.random((n, m))
        A /= A.sum(axis=0, keepdims=True)
        D = rng.random(m)
        S = rng.random(n)
        got = junction_riemann_solver(A, D, S)
        want, _ = lp_vertex_oracle(A, D, S)
        worst = max(worst, float(np.max(np.abs(got - want))))
    return worst <= 1e-10, f"max |solver - oracle| over {instances} instances = {worst:.2e}"


def check_convergence() -> tuple[bool, str]:
    model = FluxModel.quadratic(1.0, 1.0)
    datum = lambda x: np.where(x < -1.0, 0.125, 0.25)
    target = float(model.flux(0.75))  # = 3/16, the congested inflow trace
    errors = []
    meshes = [0.05, 0.025, 0.0125]
    for dx in meshes:
        cfg = ArcConfig(Orientation.INCOMING, -5.0, 0.0, round(5.0 / dx), datum)
        state, _ = run_single_arc(cfg, model, target, horizon=1.0)
        errors.append(boundary_layer_l1_distance(state.cells, cfg.faces(), 1.0))
    orders = [np.log2(errors[k] / errors[k + 1]) for k in range(len(errors) - 1)]
    ok = min(orders) >= 0.6 and errors[-1] <= 0.02
    return ok, (f"L1 errors {['%.4f' % e for e in errors]}, "
                f"orders {['%.2f' % o for o in orders]}")


def check_conservation() -> tuple[bool, str]:
    # over any window of faces p < q and any step range, the scheme
    # telescopes exactly: sum_k dt_k (F_p - F_q) = dx * (mass(T) - mass(0))
    # over the cells in between
    scn = builtin_scenario("case1")
    res = run_scenario(scn, baseline=True, record_faces=True)
    fmax = scn.flux_model().fmax
    horizon = scn.cost.horizon
    tol = 1e-10 * fmax * horizon
    dts = res.dts
    worst = 0.0
    for a, faces in enumerate(res.face_flux):
        n_faces = faces.shape[1]
        dx = res.x_faces[a][1] - res.x_faces[a][0]
        u0 = res.initial_cells[a]
        uT = res.final_states[a].cells
        for p, q in ((0, n_faces - 1), (n_faces // 3, 2 * n_faces // 3)):
            through = float(np.dot(faces[:, p] - faces[:, q], dts))
            gained = dx * float(np.sum(uT[p:q] - u0[p:q]))
            worst = max(worst, abs(through - gained))
    return worst <= tol, f"worst box-balance residual = {worst:.2e} (tol {tol:.1e})"


def check_delta_monotonicity() -> tuple[bool, str]:
    scn = tiny_scenario()
    levels = (0.0, 0.5, 1.0)

    def handle(s):
        control, cost, _ = exhaustive_oracle(s, levels)
        from .costs import cost_breakdown
        from .simulate import run_scenario as rs
        res = rs(s, control=control)
        return control, cost_breakdown(s.cost, res.incoming, res.dts,
                                       matrix_path=res.matrix_path)

    deltas = [0.4, 0.2, 0.1, 0.05, 0.0]
    entries = delta_sweep(scn, deltas, handle)
    costs = [e.cost for e in entries]          # decreasing delta order
    ok = all(costs[k] <= costs[k + 1] + 1e-12 for k in range(len(costs) - 1))
    return ok, "I(delta) over " + ", ".join(f"{e.delta:g}:{e.cost:.4f}" for e in entries)


def run_all(verbose: bool = True) -> bool:
    checks = [
        ("interface flux vs exact Riemann solution", check_godunov_vs_riemann),
        ("node LP vs vertex-enumeration oracle", check_node_lp),
        ("solver convergence vs closed-form solution", check_convergence),
        ("discrete conservation identity", check_conservation),
        ("penalty sweep monotonicity (exhaustive)", check_delta_monotonicity),
    ]
    all_ok = True
    for name, fn in checks:
        ok, detail = fn()
        all_ok &= ok
        if verbose:
            print(f"{'PASS' if ok else 'FAIL'}  {name}: {detail}")
    return all_ok
