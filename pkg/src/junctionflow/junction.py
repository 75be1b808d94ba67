"""Coupling of m incoming and n outgoing arcs through a single node.

The node state at time t is summarized by the demand vector D (per
incoming arc) and supply vector S (per outgoing arc), both read off the
cells adjacent to x = 0.  A column-stochastic n x m matrix A routes the
incoming fluxes: arc j receives (A @ gamma)_j.  Feasible inflow vectors
form the polytope

    Gamma = { 0 <= gamma_i <= D_i,  (A @ gamma)_j <= S_j }.

Two ways of picking gamma are provided:

* ``clip_control``            -- project a requested inflow vector onto
                                 Gamma by demand-capping followed by one
                                 uniform scaling, preserving the routing
                                 proportions exactly;
* ``junction_riemann_solver`` -- the uncontrolled baseline: maximize the
                                 total flux through the node over Gamma,
                                 ties broken by lexicographic maximization.

Either way the outgoing fluxes are A @ gamma, so the node conserves the
total flux identically.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field

import numpy as np

from .arc import ArcConfig, ArcState, Orientation, sample_initial, step
from .flux import FluxModel
from .paths import PiecewiseConstantPath, validate_distribution_matrix


def gamma_bounds(models_in, states_in, models_out, states_out):
    """Demand of each incoming junction cell, supply of each outgoing one."""
    D = np.array([float(m.demand(s.cells[-1])) for m, s in zip(models_in, states_in)])
    S = np.array([float(m.supply(s.cells[0])) for m, s in zip(models_out, states_out)])
    return D, S


def clip_control(requested, A, D, S):
    """Project a requested inflow vector onto the feasible polytope.

    Demand-cap first, then scale the whole vector by the largest
    s <= 1 keeping every outgoing flux within supply.  Scaling uniformly
    keeps the distribution condition exact and never lifts a component
    above its demand cap.
    """
    A = np.asarray(A, dtype=float)
    g = np.minimum(np.maximum(np.asarray(requested, dtype=float), 0.0), D)
    y = A @ g
    s = 1.0
    for yj, sj in zip(y, S):
        if yj > 0.0:
            s = min(s, sj / yj)
    return s * g


# ---------------------------------------------------------------------------
# Flux-maximizing node solver
# ---------------------------------------------------------------------------

# Active-set index combinations per (m, n_constraints); the feasible set is a
# bounded polytope whose vertices each satisfy m of the constraints
#   gamma_i = 0, gamma_i = D_i, (A gamma)_j = S_j
# with equality, so scanning all combinations visits every vertex.
_COMBO_CACHE: dict = {}


def _combos(m: int, n_rows: int):
    key = (m, n_rows)
    got = _COMBO_CACHE.get(key)
    if got is None:
        got = np.array(list(itertools.combinations(range(n_rows), m)))
        _COMBO_CACHE[key] = got
    return got


def junction_riemann_solver(A, D, S):
    """Maximize total flux through the node subject to demand, supply and
    the routing matrix; lexicographic tie-break on (gamma_1, gamma_2, ...).

    Solved exactly by enumerating active-set vertices (m is tiny).  All
    candidate linear systems are batched through one vectorized solve.
    """
    A = np.asarray(A, dtype=float)
    D = np.asarray(D, dtype=float)
    S = np.asarray(S, dtype=float)
    n, m = A.shape

    if m == 1:
        # single incoming arc: the LP is a chain of scalar caps
        g = float(D[0])
        for j in range(n):
            if A[j, 0] > 0.0:
                g = min(g, float(S[j]) / A[j, 0])
        return np.array([max(g, 0.0)])

    scale = max(1.0, float(D.max(initial=0.0)), float(S.max(initial=0.0)))
    rows = np.vstack([np.eye(m), np.eye(m), A])
    rhs = np.concatenate([np.zeros(m), D, S])
    combos = _combos(m, rows.shape[0])

    mats = rows[combos]               # (K, m, m)
    bs = rhs[combos]                  # (K, m)
    dets = np.linalg.det(mats)
    ok = np.abs(dets) > 1e-12
    if not np.any(ok):
        return np.zeros(m)
    sols = np.linalg.solve(mats[ok], bs[ok][..., None])[..., 0]  # (K', m)

    tol = 1e-9 * scale
    feas = (
        (sols.min(axis=1) >= -tol)
        & ((sols - D).max(axis=1) <= tol)
        & ((sols @ A.T - S).max(axis=1) <= tol)
    )
    if not np.any(feas):
        return np.zeros(m)
    cand = np.clip(sols[feas], 0.0, D)

    tie = 1e-12 * scale
    totals = cand.sum(axis=1)
    best = float(totals.max())
    cand = cand[totals >= best - tie]
    for i in range(m):               # lexicographic max among optimal vertices
        top = float(cand[:, i].max())
        cand = cand[cand[:, i] >= top - tie]
    return cand[0].copy()


# ---------------------------------------------------------------------------
# The coupled network
# ---------------------------------------------------------------------------

@dataclass
class StepRecord:
    t: float
    dt: float
    requested: np.ndarray
    incoming: np.ndarray
    outgoing: np.ndarray
    demand: np.ndarray
    supply: np.ndarray
    faces: list | None = None


class JunctionNetwork:
    """m incoming and n outgoing arc solvers sharing one node at x = 0."""

    def __init__(self, model, incoming_configs, outgoing_configs, a_path,
                 incoming_models=None, outgoing_models=None):
        self.incoming_configs = list(incoming_configs)
        self.outgoing_configs = list(outgoing_configs)
        if not self.incoming_configs or not self.outgoing_configs:
            raise ValueError("need at least one incoming and one outgoing arc")
        for cfg in self.incoming_configs:
            if cfg.orientation != Orientation.INCOMING:
                raise ValueError("incoming arc with wrong orientation")
        for cfg in self.outgoing_configs:
            if cfg.orientation != Orientation.OUTGOING:
                raise ValueError("outgoing arc with wrong orientation")
        self.models_in = list(incoming_models or [model] * len(self.incoming_configs))
        self.models_out = list(outgoing_models or [model] * len(self.outgoing_configs))
        self.model = model
        self.a_path = a_path
        m, n = len(self.incoming_configs), len(self.outgoing_configs)
        if a_path.values.shape[1:] != (n, m):
            raise ValueError(f"distribution matrices must be {n} x {m}")
        self.incoming_states = [sample_initial(c, mod)
                                for c, mod in zip(self.incoming_configs, self.models_in)]
        self.outgoing_states = [sample_initial(c, mod)
                                for c, mod in zip(self.outgoing_configs, self.models_out)]
        self._a_piece = -1

    # -- basic queries ----------------------------------------------------

    @property
    def m(self) -> int:
        return len(self.incoming_configs)

    @property
    def n(self) -> int:
        return len(self.outgoing_configs)

    @property
    def time(self) -> float:
        return self.incoming_states[0].time

    def gamma_bounds(self):
        return gamma_bounds(self.models_in, self.incoming_states,
                            self.models_out, self.outgoing_states)

    def matrix_at(self, t: float):
        idx = int(np.searchsorted(self.a_path.times, t, side="right")) - 1
        idx = max(idx, 0)
        if idx != self._a_piece:
            validate_distribution_matrix(self.a_path.values[idx])
            self._a_piece = idx
        return self.a_path.values[idx]

    # -- stepping ----------------------------------------------------------

    def stable_dt(self, cfl: float, gamma, phi) -> float:
        """Shared CFL step: wave speeds over all cells plus the ghost states
        implied by the junction fluxes about to be imposed."""
        dt = np.inf
        for mod, st, cfg, g in zip(self.models_in, self.incoming_states,
                                   self.incoming_configs, gamma):
            ghost = mod.congested_density(g)
            v = max(mod.max_wave_speed(st.cells), abs(float(mod.dflux(ghost))))
            if v < 1e-12:
                v = mod.lipschitz
            dt = min(dt, cfl * cfg.dx / v)
        for mod, st, cfg, p in zip(self.models_out, self.outgoing_states,
                                   self.outgoing_configs, phi):
            ghost = mod.free_density(p)
            v = max(mod.max_wave_speed(st.cells), abs(float(mod.dflux(ghost))))
            if v < 1e-12:
                v = mod.lipschitz
            dt = min(dt, cfl * cfg.dx / v)
        return dt

    def node_fluxes(self, t: float, control=None):
        """Requested and realized fluxes at time t.

        ``control`` is a PiecewiseConstantPath of inflow vectors (or any
        object with ``value_at``); None selects the flux-maximization
        baseline.
        """
        A = self.matrix_at(t)
        D, S = self.gamma_bounds()
        if control is None:
            gamma = junction_riemann_solver(A, D, S)
            requested = gamma
        else:
            requested = np.asarray(control.value_at(t), dtype=float)
            gamma = clip_control(requested, A, D, S)
        phi = A @ gamma
        return A, D, S, requested, gamma, phi

    def advance(self, control=None, dt=None, cfl: float = 0.9,
                dt_cap=None, record_faces: bool = False) -> StepRecord:
        """One synchronous step of the whole network.

        The junction fluxes are evaluated first (they do not depend on
        dt), then the shared step is the minimum stable step over all
        arcs, optionally capped (used to land exactly on control
        breakpoints).  Passing ``dt`` overrides the automatic choice.
        """
        t = self.time
        A, D, S, requested, gamma, phi = self.node_fluxes(t, control)
        if dt is None:
            dt = self.stable_dt(cfl, gamma, phi)
            if dt_cap is not None:
                dt = min(dt, dt_cap)
        faces_rec = [] if record_faces else None
        applied_in = np.empty(self.m)
        for i in range(self.m):
            st, applied, faces = step(self.incoming_states[i], self.models_in[i],
                                      dt, float(gamma[i]), Orientation.INCOMING)
            self.incoming_states[i] = st
            applied_in[i] = applied
            if record_faces:
                faces_rec.append(faces)
        applied_out = np.empty(self.n)
        for j in range(self.n):
            st, applied, faces = step(self.outgoing_states[j], self.models_out[j],
                                      dt, float(phi[j]), Orientation.OUTGOING)
            self.outgoing_states[j] = st
            applied_out[j] = applied
            if record_faces:
                faces_rec.append(faces)
        return StepRecord(t, dt, requested.copy(), applied_in, applied_out,
                          D, S, faces_rec)

    def states(self):
        return [s.copy() for s in self.incoming_states + self.outgoing_states]

    def set_states(self, states):
        m = self.m
        self.incoming_states = [s.copy() for s in states[:m]]
        self.outgoing_states = [s.copy() for s in states[m:]]
