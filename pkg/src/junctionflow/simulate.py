"""Time integration of a junction network over a finite horizon.

The driver recomputes the shared stable step every iteration (the wave
speed scan includes the ghost states implied by the junction fluxes)
and additionally lands exactly on every control breakpoint, matrix
breakpoint and requested snapshot time, so realized traces are honest
step functions on the union mesh.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .junction import JunctionNetwork
from .paths import PiecewiseConstantPath


@dataclass
class SimulationResult:
    times: np.ndarray            # (K+1,) step boundaries, times[-1] = horizon
    incoming: np.ndarray         # (m, K) realized inflow traces
    outgoing: np.ndarray         # (n, K) realized outgoing traces at the node
    requested: np.ndarray        # (m, K) requested inflows (baseline: = incoming)
    demand: np.ndarray           # (m, K)
    supply: np.ndarray           # (n, K)
    matrix_path: PiecewiseConstantPath
    final_states: list
    snapshots: dict              # time -> list of per-arc density arrays
    face_flux: Optional[list]    # per arc (K, faces) when recorded
    point_traces: Optional[np.ndarray]  # (n, K) fluxes at eval points
    x_faces: list                # per arc face coordinates
    initial_cells: list

    @property
    def dts(self) -> np.ndarray:
        return np.diff(self.times)

    @property
    def m(self) -> int:
        return self.incoming.shape[0]

    @property
    def n(self) -> int:
        return self.outgoing.shape[0]

    def arc_labels(self):
        return [f"i{k + 1}" for k in range(self.m)] + \
               [f"o{k + 1 + self.m}" for k in range(self.n)]


def _breakpoint_grid(horizon, control, a_path, snapshot_times):
    pts = {float(horizon)}
    if control is not None:
        pts.update(float(t) for t in control.times if 0.0 < t < horizon)
    pts.update(float(t) for t in a_path.times if 0.0 < t < horizon)
    for t in snapshot_times:
        if 0.0 < float(t) <= horizon:
            pts.add(float(t))
    return sorted(pts)


def simulate(network: JunctionNetwork, horizon: float, control=None,
             cfl: float = 0.9, record_faces: bool = False,
             snapshot_times=(), eval_points=None,
             max_steps: int = 2_000_000) -> SimulationResult:
    """Run the network from its current state up to ``horizon``.

    ``control=None`` selects the flux-maximization baseline at the node;
    otherwise ``control`` is a PiecewiseConstantPath of requested inflow
    vectors, clipped to feasibility at every step.  ``eval_points`` maps
    outgoing arcs to face positions whose flux trace is recorded.
    """
    if horizon <= network.time:
        raise ValueError("horizon must exceed the network's current time")
    marks = _breakpoint_grid(horizon, control, network.a_path, snapshot_times)
    snapshot_set = {float(t) for t in snapshot_times}

    eval_idx = None
    if eval_points is not None:
        eval_idx = []
        for j, x in enumerate(eval_points):
            faces = network.outgoing_configs[j].faces()
            eval_idx.append(int(np.argmin(np.abs(faces - float(x)))))
        record_faces = True

    times = [network.time]
    inc, out, req, dem, sup = [], [], [], [], []
    faces_hist = [[] for _ in range(network.m + network.n)] if record_faces else None
    initial_cells = [s.cells.copy() for s in network.states()]
    snapshots = {}
    if 0.0 in snapshot_set:
        snapshots[0.0] = [c.copy() for c in initial_cells]

    eps = 1e-12 * max(horizon, 1.0)
    mark_pos = 0
    steps = 0
    while network.time < horizon - eps:
        while marks[mark_pos] <= network.time + eps:
            mark_pos += 1
        cap = marks[mark_pos] - network.time
        rec = network.advance(control=control, cfl=cfl, dt_cap=cap,
                              record_faces=record_faces)
        # land exactly on the mark when the cap was binding
        if abs(network.time - marks[mark_pos]) <= eps:
            landed = marks[mark_pos]
            for st in network.incoming_states + network.outgoing_states:
                st.time = landed
        times.append(network.time)
        inc.append(rec.incoming)
        out.append(rec.outgoing)
        req.append(rec.requested)
        dem.append(rec.demand)
        sup.append(rec.supply)
        if record_faces:
            for a, f in enumerate(rec.faces):
                faces_hist[a].append(f)
        t_now = network.time
        for ts in snapshot_set:
            if abs(t_now - ts) <= eps and ts not in snapshots:
                snapshots[ts] = [s.cells.copy() for s in network.states()]
        steps += 1
        if steps > max_steps:
            raise RuntimeError("step budget exhausted; check the CFL setup")

    times = np.asarray(times)
    times[-1] = horizon
    face_arrays = None
    point_traces = None
    if record_faces:
        face_arrays = [np.asarray(h) for h in faces_hist]
        if eval_idx is not None:
            point_traces = np.stack([
                face_arrays[network.m + j][:, idx] for j, idx in enumerate(eval_idx)
            ])
    configs = network.incoming_configs + network.outgoing_configs
    return SimulationResult(
        times=times,
        incoming=np.asarray(inc).T.copy(),
        outgoing=np.asarray(out).T.copy(),
        requested=np.asarray(req).T.copy(),
        demand=np.asarray(dem).T.copy(),
        supply=np.asarray(sup).T.copy(),
        matrix_path=network.a_path,
        final_states=network.states(),
        snapshots=snapshots,
        face_flux=face_arrays,
        point_traces=point_traces,
        x_faces=[c.faces() for c in configs],
        initial_cells=initial_cells,
    )


def run_scenario(scenario, control=None, baseline=False, record_faces=False,
                 snapshot_times=None, cfl=None):
    """Build a fresh network from a scenario and simulate it.

    ``baseline=True`` ignores ``control`` and runs the flux-maximization
    node solver.  Snapshot times default to the scenario's.
    """
    network = scenario.build_network()
    spec = scenario.cost
    if snapshot_times is None:
        snapshot_times = scenario.snapshot_times
    return simulate(
        network,
        spec.horizon,
        control=None if baseline else control,
        cfl=scenario.cfl if cfl is None else cfl,
        record_faces=record_faces,
        snapshot_times=snapshot_times,
        eval_points=spec.eval_points,
    )
