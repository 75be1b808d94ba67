"""First-order Godunov finite-volume solver on a single truncated arc.

An arc is a uniform mesh on (x_min, x_max) with the junction sitting at
x = 0: incoming arcs end there (x_max = 0, junction face on the right),
outgoing arcs start there (x_min = 0, junction face on the left).  The
junction face carries a prescribed flux -- already clipped to the local
demand/supply bound by the caller -- while the far face is a free
boundary realized with a zero-gradient ghost cell.

Prescribing the flux g at the junction face of an incoming arc is
exactly the Godunov scheme against a congested ghost density w with
f(w) = g: min(demand(u), supply(w)) = min(demand(u), g) = g whenever
g <= demand(u).  The stability bound therefore has to include the wave
speed |f'(w)| of that implied ghost state, not just the cell values;
``step`` checks this and the network driver budgets for it.
"""

from __future__ import annotations

import enum
import warnings
from dataclasses import dataclass
from typing import Callable

import numpy as np

from .flux import FluxModel
from .paths import PiecewiseConstantPath


class CFLViolation(RuntimeError):
    """The requested time step exceeds the stable bound."""


class BoundaryFluxError(RuntimeError):
    """A prescribed junction flux exceeds the local demand/supply bound."""


class InvariantViolation(RuntimeError):
    """An internal scheme invariant failed (bug guard, not user error)."""


class Orientation(str, enum.Enum):
    INCOMING = "incoming"
    OUTGOING = "outgoing"


@dataclass(frozen=True)
class ArcConfig:
    orientation: Orientation
    x_min: float
    x_max: float
    n_cells: int
    initial: Callable[[np.ndarray], np.ndarray]

    def __post_init__(self):
        if self.x_min >= self.x_max:
            raise ValueError("x_min must be below x_max")
        if self.n_cells < 1:
            raise ValueError("n_cells must be positive")
        if self.orientation == Orientation.INCOMING and self.x_max != 0.0:
            raise ValueError("incoming arcs must end at x = 0")
        if self.orientation == Orientation.OUTGOING and self.x_min != 0.0:
            raise ValueError("outgoing arcs must start at x = 0")

    @property
    def dx(self) -> float:
        return (self.x_max - self.x_min) / self.n_cells

    def faces(self) -> np.ndarray:
        return np.linspace(self.x_min, self.x_max, self.n_cells + 1)

    def centers(self) -> np.ndarray:
        return self.x_min + (np.arange(self.n_cells) + 0.5) * self.dx


@dataclass
class ArcState:
    cells: np.ndarray
    time: float
    dx: float

    def copy(self) -> "ArcState":
        return ArcState(self.cells.copy(), self.time, self.dx)


def sample_initial(config: ArcConfig, model: FluxModel) -> ArcState:
    """Midpoint-sample the initial datum onto the mesh."""
    u0 = np.asarray(config.initial(config.centers()), dtype=float)
    if u0.shape != (config.n_cells,):
        u0 = np.broadcast_to(u0, (config.n_cells,)).astype(float)
    model._check_density(u0)
    return ArcState(np.clip(u0, 0.0, model.umax), 0.0, config.dx)


def mass(state: ArcState) -> float:
    """dx times the sum of cell averages."""
    return state.dx * float(np.sum(state.cells))


def cfl_dt(state: ArcState, model: FluxModel, cfl_number: float) -> float:
    """Stable step from the current cell values alone.

    Falls back to the global Lipschitz constant max(|f'(0)|, |f'(umax)|)
    when every cell sits near the critical density, where |f'| vanishes.
    Note this bound knows nothing about the junction flux about to be
    imposed; the network driver widens the speed estimate with the
    implied ghost states before stepping.
    """
    if not 0.0 < cfl_number <= 1.0:
        raise ValueError("cfl_number must lie in (0, 1]")
    speed = model.max_wave_speed(state.cells)
    if speed < 1e-12:
        speed = model.lipschitz
    return cfl_number * state.dx / speed


def boundary_cell(state: ArcState, orientation: Orientation) -> float:
    idx = -1 if orientation == Orientation.INCOMING else 0
    return float(state.cells[idx])


def junction_ghost_speed(model: FluxModel, flux_value: float,
                         orientation: Orientation) -> float:
    """|f'| at the ghost density implied by a prescribed junction flux."""
    if orientation == Orientation.INCOMING:
        ghost = model.congested_density(flux_value)
    else:
        ghost = model.free_density(flux_value)
    return abs(float(model.dflux(ghost)))


def _face_fluxes(model: FluxModel, cells: np.ndarray, junction_flux: float,
                 incoming: bool) -> np.ndarray:
    faces = np.empty(cells.size + 1)
    faces[1:-1] = model.interface_flux(cells[:-1], cells[1:])
    if incoming:
        faces[0] = model._flux(cells[0])  # zero-gradient ghost upstream
        faces[-1] = junction_flux
    else:
        faces[0] = junction_flux
        faces[-1] = model._flux(cells[-1])  # zero-gradient ghost downstream
    return faces


def step(state: ArcState, model: FluxModel, dt: float, junction_flux: float,
         orientation: Orientation):
    """One conservative update; returns (new state, applied junction flux, faces).

    The prescribed flux must not exceed the demand (incoming) or supply
    (outgoing) of the cell adjacent to the junction by more than 1e-12;
    within that slack it is clamped onto the bound.
    """
    incoming = orientation == Orientation.INCOMING
    u = state.cells
    ub = u[-1] if incoming else u[0]
    bound = float(model.demand(ub) if incoming else model.supply(ub))
    slack = 1e-12 * max(model.fmax, 1.0)
    if junction_flux > bound + slack or junction_flux < -slack:
        kind = "demand" if incoming else "supply"
        raise BoundaryFluxError(
            f"prescribed flux {junction_flux} violates the {kind} bound {bound}"
        )
    applied = min(max(junction_flux, 0.0), bound)

    speed = max(model.max_wave_speed(u),
                junction_ghost_speed(model, applied, orientation))
    if speed > 0.0 and dt > state.dx / speed * (1.0 + 1e-9):
        raise CFLViolation(f"dt = {dt} exceeds stable bound {state.dx / speed}")

    faces = _face_fluxes(model, u, applied, incoming)
    new = u - (dt / state.dx) * np.diff(faces)

    tol = 1e-10 * max(model.umax, 1.0)
    if new.min() < -tol or new.max() > model.umax + tol:
        raise InvariantViolation(
            f"cell range [{new.min()}, {new.max()}] left [0, {model.umax}]"
        )
    np.clip(new, 0.0, model.umax, out=new)
    return ArcState(new, state.time + dt, state.dx), applied, faces


@dataclass
class ArcHistory:
    """Per-step face fluxes plus the matching time grid and snapshots."""
    x_faces: np.ndarray
    times: np.ndarray          # (K+1,) step boundaries, last one = horizon
    face_flux: np.ndarray      # (K, n_cells + 1)
    initial_cells: np.ndarray
    final_cells: np.ndarray
    dx: float


def trace_at(history: ArcHistory, x0: float) -> PiecewiseConstantPath:
    """Flux trace at a mesh face, one sample per time step.

    Off-mesh positions snap to the nearest face with a warning.
    """
    idx = int(np.argmin(np.abs(history.x_faces - x0)))
    if abs(history.x_faces[idx] - x0) > 1e-9 * max(history.dx, 1.0):
        warnings.warn(
            f"x0 = {x0} is not a mesh face; snapping to {history.x_faces[idx]}",
            stacklevel=2,
        )
    return PiecewiseConstantPath(history.times[:-1], history.face_flux[:, idx].copy())


def run_single_arc(config: ArcConfig, model: FluxModel, requested_flux,
                   horizon: float, cfl: float = 0.9):
    """Drive one arc with a requested junction flux, clipping to feasibility.

    ``requested_flux`` is a float or a callable of time.  Returns the final
    state and an ArcHistory.  This is the single-arc workhorse used for
    convergence studies against closed-form solutions.
    """
    state = sample_initial(config, model)
    request = requested_flux if callable(requested_flux) else (lambda t: requested_flux)
    incoming = config.orientation == Orientation.INCOMING
    times = [0.0]
    fluxes = []
    eps = 1e-12 * max(horizon, 1.0)
    while state.time < horizon - eps:
        ub = boundary_cell(state, config.orientation)
        bound = float(model.demand(ub) if incoming else model.supply(ub))
        g = min(max(float(request(state.time)), 0.0), bound)
        speed = max(model.max_wave_speed(state.cells),
                    junction_ghost_speed(model, g, config.orientation))
        if speed < 1e-12:
            speed = model.lipschitz
        dt = min(cfl * state.dx / speed, horizon - state.time)
        state, _, faces = step(state, model, dt, g, config.orientation)
        fluxes.append(faces)
        times.append(state.time)
    history = ArcHistory(
        x_faces=config.faces(),
        times=np.asarray(times),
        face_flux=np.asarray(fluxes),
        initial_cells=sample_initial(config, model).cells,
        final_cells=state.cells.copy(),
        dx=config.dx,
    )
    return state, history
