"""Closed-form reference solutions and brute-force solvers used for validation.

Nothing in here is needed to run simulations; these routines provide
independent answers that the solver modules are tested against:

* ``exact_riemann``            -- self-similar solution of a single Riemann
                                  problem for a strictly concave flux;
* ``boundary_layer_solution``  -- explicit entropy solution of a mixed
                                  initial-boundary value problem on x <= 0
                                  for f(u) = u*(1-u), with a two-plateau
                                  datum and a constant congested inflow
                                  datum; the finite-parameter solutions
                                  carry a boundary layer that vanishes in
                                  the limit;
* ``lp_vertex_oracle``         -- exhaustive active-set enumeration for the
                                  node flux-maximization linear program.
"""

from __future__ import annotations

import itertools
import math

import numpy as np

from .flux import DomainError, FluxModel


# ---------------------------------------------------------------------------
# Exact Riemann solution for concave flux
# ---------------------------------------------------------------------------

def exact_riemann(model: FluxModel, u_left: float, u_right: float, xi: float) -> float:
    """Sample the entropy solution of a Riemann problem at speed xi = x/t.

    For strictly concave flux, u_left < u_right is an admissible shock
    (density jumps up in x) and u_left > u_right opens a rarefaction fan
    spanning speeds [f'(u_left), f'(u_right)].  At a shock the value is
    sampled from the left side; fluxes agree from both sides there.
    """
    ul = float(u_left)
    ur = float(u_right)
    model._check_density(ul)
    model._check_density(ur)
    if ul == ur:
        return ul
    if ul < ur:
        s = (float(model.flux(ur)) - float(model.flux(ul))) / (ur - ul)
        return ul if xi <= s else ur
    # rarefaction; f' is strictly decreasing so the fan is monotone
    sl = float(model.dflux(ul))
    sr = float(model.dflux(ur))
    if xi <= sl:
        return ul
    if xi >= sr:
        return ur
    if model.kind == "quadratic":
        # f'(u) = c*(umax - 2u) = xi
        return 0.5 * (model.umax - xi / model.coefficient)
    from scipy.optimize import brentq

    return brentq(lambda u: float(model.dflux(u)) - xi, min(ul, ur), max(ul, ur),
                  xtol=1e-14 * model.umax)


# ---------------------------------------------------------------------------
# Explicit IBVP solution on x <= 0 for f(u) = u*(1-u)
# ---------------------------------------------------------------------------
#
# Initial datum: u = 1/8 for x < -1 and u = 1/4 for -1 < x < 0.
# Inflow datum: constant congested density 3/4 + 1/nu (nu > 8), whose flux
# trace equals f(3/4 + 1/nu); the nu -> inf limit carries boundary flux
# f(3/4) = 3/16 and no boundary layer.
#
# The 1/8 | 1/4 shock travels at speed 5/8.  For finite nu a thin layer at
# density 3/4 + 1/nu grows from the boundary at speed -1/nu until the shock
# absorbs it, after which the merged shock moves right at speed
# (nu - 8) / (8 nu) and exits at x = 0.

_U_FAR = 1.0 / 8.0
_U_NEAR = 1.0 / 4.0


def _layer_profile(t: float, nu: float):
    """Piecewise-constant profile in x at time t: (breaks, values).

    ``values[i]`` holds on (breaks[i-1], breaks[i]] with breaks padded by
    -inf / 0; evaluation is left continuous in x.
    """
    if t < 0:
        raise DomainError("t must be nonnegative")
    if math.isinf(nu):
        t_exit = 8.0 / 5.0
        if t >= t_exit:
            return [0.0], [_U_FAR]
        return [-1.0 + 5.0 * t / 8.0, 0.0], [_U_FAR, _U_NEAR]
    if nu <= 8.0:
        raise DomainError("the layer parameter must exceed 8")
    u_layer = 0.75 + 1.0 / nu
    t_meet = 8.0 * nu / (5.0 * nu + 8.0)
    t_exit = 8.0 * nu * nu / ((5.0 * nu + 8.0) * (nu - 8.0))
    if t < t_meet:
        return (
            [-1.0 + 5.0 * t / 8.0, -t / nu, 0.0],
            [_U_FAR, _U_NEAR, u_layer],
        )
    if t < t_exit:
        xs = (-8.0 / (5.0 * nu + 8.0)
              + (nu - 8.0) * ((5.0 * nu + 8.0) * t - 8.0 * nu)
              / (8.0 * nu * (5.0 * nu + 8.0)))
        return [xs, 0.0], [_U_FAR, u_layer]
    return [0.0], [_U_FAR]


def boundary_layer_solution(t: float, x: float, nu: float = math.inf) -> float:
    """Evaluate the explicit solution at (t, x); x <= 0, t >= 0.

    Region membership on a dividing line resolves by left continuity
    in x, matching the trace convention on incoming arcs.
    """
    if x > 0:
        raise DomainError("the solution lives on x <= 0")
    breaks, values = _layer_profile(float(t), float(nu))
    idx = int(np.searchsorted(np.asarray(breaks), x, side="left"))
    idx = min(idx, len(values) - 1)
    return values[idx]


def boundary_layer_trace(t: float, nu: float = math.inf) -> float:
    """Boundary value u(t, 0) of the explicit solution (left x-limit)."""
    return boundary_layer_solution(t, 0.0, nu)


def boundary_layer_l1_distance(cells: np.ndarray, x_faces: np.ndarray, t: float,
                               nu: float = math.inf) -> float:
    """Exact L1 distance between a piecewise-constant numeric profile and
    the explicit solution at time t (both are step functions in x)."""
    cells = np.asarray(cells, dtype=float)
    faces = np.asarray(x_faces, dtype=float)
    breaks, values = _layer_profile(float(t), float(nu))
    edges = np.concatenate(([-np.inf], np.asarray(breaks, dtype=float)))
    total = 0.0
    for k in range(cells.size):
        a, b = faces[k], faces[k + 1]
        for i, v in enumerate(values):
            lo = max(a, edges[i])
            hi = min(b, edges[i + 1])
            if hi > lo:
                total += (hi - lo) * abs(cells[k] - v)
    return total


def boundary_layer_cell_averages(x_faces: np.ndarray, t: float,
                                 nu: float = math.inf) -> np.ndarray:
    """Exact cell averages of the explicit solution on a face grid <= 0."""
    faces = np.asarray(x_faces, dtype=float)
    if faces[-1] > 1e-12:
        raise DomainError("the solution lives on x <= 0")
    breaks, values = _layer_profile(float(t), float(nu))
    edges = np.concatenate(([-np.inf], np.asarray(breaks, dtype=float)))
    out = np.empty(faces.size - 1)
    for k in range(faces.size - 1):
        a, b = faces[k], faces[k + 1]
        acc = 0.0
        for i, v in enumerate(values):
            lo = max(a, edges[i])
            hi = min(b, edges[i + 1])
            if hi > lo:
                acc += (hi - lo) * v
        out[k] = acc / (b - a)
    return out


# ---------------------------------------------------------------------------
# Brute-force LP oracle for the node flux maximization
# ---------------------------------------------------------------------------

def lp_vertex_oracle(A, D, S, tie_tol: float = 1e-12):
    """Maximize sum(gamma) over {0 <= gamma <= D, A @ gamma <= S}.

    Enumerates every intersection of m active constraints taken from
    {gamma_i = 0}, {gamma_i = D_i}, {(A gamma)_j = S_j}, keeps the feasible
    ones and returns the vertex with the largest total, breaking ties by
    lexicographic maximization of (gamma_1, gamma_2, ...).

    Returns (gamma, value).  Plain loops and Cramer-style solves on purpose:
    this is the slow, obviously-correct reference.
    """
    A = np.asarray(A, dtype=float)
    D = np.asarray(D, dtype=float)
    S = np.asarray(S, dtype=float)
    n, m = A.shape
    if D.shape != (m,) or S.shape != (n,):
        raise ValueError("inconsistent shapes for A, D, S")
    if m + n > 8:
        raise ValueError("oracle is limited to m + n <= 8")

    scale = max(1.0, float(np.max(D, initial=0.0)), float(np.max(S, initial=0.0)))
    feas_tol = 1e-9 * scale
    tie = tie_tol * scale

    # equality list: (normal row, rhs)
    normals = []
    rhs = []
    for i in range(m):
        e = np.zeros(m)
        e[i] = 1.0
        normals.append(e)
        rhs.append(0.0)
        normals.append(e.copy())
        rhs.append(float(D[i]))
    for j in range(n):
        normals.append(A[j].copy())
        rhs.append(float(S[j]))

    best = None
    best_key = None
    for combo in itertools.combinations(range(len(normals)), m):
        M = np.array([normals[k] for k in combo])
        b = np.array([rhs[k] for k in combo])
        det = np.linalg.det(M) if m > 1 else M[0, 0]
        if abs(det) < 1e-12:
            continue
        g = np.linalg.solve(M, b) if m > 1 else np.array([b[0] / M[0, 0]])
        if np.min(g) < -feas_tol or np.max(g - D) > feas_tol:
            continue
        if np.max(A @ g - S) > feas_tol:
            continue
        g = np.clip(g, 0.0, D)
        key = (float(np.sum(g)), g)
        if best is None or _lex_better(key, best_key, tie):
            best = g
            best_key = key
    if best is None:  # 0 is always feasible; only hit on degenerate input
        best = np.zeros(m)
    return best, float(np.sum(best))


def _lex_better(key, best_key, tie):
    total, g = key
    btotal, bg = best_key
    if total > btotal + tie:
        return True
    if total < btotal - tie:
        return False
    for a, b in zip(g, bg):
        if a > b + tie:
            return True
        if a < b - tie:
            return False
    return False
