"""Heuristic search over piecewise-constant inflow controls.

``local_search`` is deterministic coordinate ascent: controls are
piecewise constant on a uniform partition of the horizon, and for each
piece (in time order) and each incoming arc the current value is
perturbed by every configured variation step; each candidate is scored
by a full forward simulation of the penalized cost and the best
strictly improving one is committed before moving on.  Sweeps repeat
until no move improves (or the sweep budget runs out), so the cost
history is nondecreasing by construction.

Because a candidate only differs from the incumbent from the start of
the perturbed piece onward, each sweep carries the network state forward
piece by piece and restarts candidate simulations from the cached
checkpoint; the steps taken agree exactly with a from-scratch run.

``exhaustive_oracle`` enumerates every combination of a finite level set
and is the exact reference on tiny instances.
"""

from __future__ import annotations

import itertools
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from .costs import CostBreakdown, CostSpec, cost_breakdown
from .junction import JunctionNetwork
from .paths import PiecewiseConstantPath
from .simulate import simulate


@dataclass(frozen=True)
class SearchConfig:
    n_intervals: int = 20                 # interior breakpoints; pieces = n + 1
    variation_steps: tuple = (0.05, -0.05, 0.1, -0.1)   # fractions of fmax
    max_sweeps: int = 50
    improvement_tol: float = 1e-6
    init_mode: str = "baseline_trace"     # | "constant_theta" | "zero"
    optimize_matrix: bool = False

    def __post_init__(self):
        if self.n_intervals < 0:
            raise ValueError("n_intervals must be nonnegative")
        if any(s == 0.0 for s in self.variation_steps):
            raise ValueError("variation steps must be nonzero")
        if self.init_mode not in ("baseline_trace", "constant_theta", "zero"):
            raise ValueError(f"unknown init mode {self.init_mode!r}")
        object.__setattr__(self, "variation_steps", tuple(self.variation_steps))


@dataclass
class SearchResult:
    control: PiecewiseConstantPath
    breakdown: CostBreakdown
    result: object                        # SimulationResult of the best control
    history: list                         # accepted costs, nondecreasing
    progress: list                        # (sweep, interval, arc, candidate, cost)
    sweeps: int
    budget_exhausted: bool


# ---------------------------------------------------------------------------
# checkpointed evaluation
# ---------------------------------------------------------------------------

@dataclass
class _Checkpoint:
    t: float
    states: list
    integral: float          # cost integral accumulated on [0, t)
    tv: np.ndarray           # per-arc trace variation accumulated so far
    last_sample: Optional[np.ndarray]   # realized inflows of the last step


class _Evaluator:
    """Scores controls on a scenario, restarting from cached prefixes.

    Steps are capped at every control piece boundary and matrix
    breakpoint, exactly as the main driver does, so a score equals the
    penalized cost of a from-scratch simulation of the same control.
    """

    def __init__(self, scenario, control_times, threads: int = 1):
        self.scenario = scenario
        self.spec: CostSpec = scenario.cost
        if self.spec.kind == "custom" and self.spec.eval_points is not None:
            raise ValueError(
                "the incremental evaluator does not support costs over "
                "interior point traces"
            )
        self.cfl = scenario.cfl
        a_times = scenario.matrix_path().times
        marks = {float(t) for t in control_times if t > 0.0}
        marks.update(float(t) for t in a_times if t > 0.0)
        marks.add(float(self.spec.horizon))
        self._marks = np.array(sorted(marks))
        self.threads = max(1, int(threads))
        self._pool = ThreadPoolExecutor(self.threads) if self.threads > 1 else None

    def close(self):
        if self._pool is not None:
            self._pool.shutdown()

    def fresh_network(self) -> JunctionNetwork:
        return self.scenario.build_network()

    def initial_checkpoint(self) -> _Checkpoint:
        net = self.fresh_network()
        return _Checkpoint(0.0, net.states(), 0.0, np.zeros(net.m), None)

    def _segment(self, net: JunctionNetwork, control, t_end: float,
                 chk: _Checkpoint) -> _Checkpoint:
        """Advance net to t_end, folding traces into running cost terms."""
        spec = self.spec
        integral = chk.integral
        tvacc = chk.tv.copy()
        last = None if chk.last_sample is None else chk.last_sample.copy()
        eps = 1e-12 * max(spec.horizon, 1.0)
        marks = self._marks
        while net.time < t_end - eps:
            pos = int(np.searchsorted(marks, net.time + eps, side="left"))
            mark = t_end if pos >= marks.size else min(float(marks[pos]), t_end)
            rec = net.advance(control=control, cfl=self.cfl,
                              dt_cap=mark - net.time)
            if abs(net.time - mark) <= eps:
                for st in net.incoming_states + net.outgoing_states:
                    st.time = mark
            g = rec.incoming
            integral += float(spec.running(g[:, None])[0]) * rec.dt
            if last is not None:
                tvacc += np.abs(g - last)
            last = g
        return _Checkpoint(t_end, net.states(), integral, tvacc, last)

    def extend(self, chk: _Checkpoint, control, t_end: float) -> _Checkpoint:
        net = self.fresh_network()
        net.set_states(chk.states)
        for st in net.incoming_states + net.outgoing_states:
            st.time = chk.t
        return self._segment(net, control, t_end, chk)

    def cost_from(self, chk: _Checkpoint, control) -> float:
        """Penalized cost of ``control``, whose values must match the
        incumbent's on every piece ending at or before chk.t."""
        spec = self.spec
        final = self.extend(chk, control, spec.horizon)
        penalty = float(final.tv.sum())
        if spec.penalize_matrix:
            penalty += self.scenario.matrix_path().total_variation()
        return final.integral - spec.delta * penalty

    def full_cost(self, control) -> float:
        return self.cost_from(self.initial_checkpoint(), control)

    def map_costs(self, chk: _Checkpoint, controls) -> list:
        if self._pool is None or len(controls) <= 1:
            return [self.cost_from(chk, c) for c in controls]
        return list(self._pool.map(lambda c: self.cost_from(chk, c), controls))


# ---------------------------------------------------------------------------
# initial controls
# ---------------------------------------------------------------------------

def control_times(horizon: float, n_intervals: int) -> np.ndarray:
    return np.linspace(0.0, horizon, n_intervals + 2)[:-1]


def baseline_trace_control(scenario, n_intervals: int) -> PiecewiseConstantPath:
    """Interval averages of the realized baseline inflow traces."""
    res = simulate(scenario.build_network(), scenario.cost.horizon,
                   control=None, cfl=scenario.cfl)
    times = control_times(scenario.cost.horizon, n_intervals)
    edges = np.concatenate([times, [scenario.cost.horizon]])
    dts = res.dts
    starts = res.times[:-1]
    values = np.empty((n_intervals + 1, res.m))
    for k in range(n_intervals + 1):
        sel = (starts >= edges[k] - 1e-12) & (starts < edges[k + 1] - 1e-12)
        w = dts[sel]
        if w.sum() <= 0:
            values[k] = res.incoming[:, -1]
        else:
            values[k] = (res.incoming[:, sel] * w).sum(axis=1) / w.sum()
    return PiecewiseConstantPath(times, values)


def initial_control(scenario, config: SearchConfig) -> PiecewiseConstantPath:
    times = control_times(scenario.cost.horizon, config.n_intervals)
    m = len(scenario.incoming)
    model = scenario.flux_model()
    if config.init_mode == "baseline_trace":
        return baseline_trace_control(scenario, config.n_intervals)
    if config.init_mode == "constant_theta":
        values = np.full((times.size, m), model.fmax)
    else:
        values = np.zeros((times.size, m))
    return PiecewiseConstantPath(times, values)


# ---------------------------------------------------------------------------
# the search
# ---------------------------------------------------------------------------

def local_search(scenario, config: Optional[SearchConfig] = None,
                 threads: int = 1, record_progress: bool = True,
                 start: Optional[PiecewiseConstantPath] = None) -> SearchResult:
    config = config or scenario.search
    model = scenario.flux_model()
    fmax = model.fmax
    steps = [s * fmax for s in config.variation_steps]

    control = start if start is not None else initial_control(scenario, config)
    n_pieces = control.n_pieces
    m = control.values.shape[1]

    ev = _Evaluator(scenario, control.times, threads=threads)
    try:
        current_cost = ev.full_cost(control)
        history = [current_cost]
        progress = []
        sweeps = 0
        budget_exhausted = False
        while sweeps < config.max_sweeps:
            sweeps += 1
            sweep_gain = 0.0
            chk = ev.initial_checkpoint()
            for k in range(n_pieces):
                for i in range(m):
                    base = control.values[k, i]
                    candidates = []
                    cand_values = []
                    for s in steps:
                        v = min(max(base + s, 0.0), fmax)
                        if v == base or v in cand_values:
                            continue
                        values = control.values.copy()
                        values[k, i] = v
                        candidates.append(control.with_values(values))
                        cand_values.append(v)
                    if not candidates:
                        continue
                    costs = ev.map_costs(chk, candidates)
                    if record_progress:
                        for v, c in zip(cand_values, costs):
                            progress.append((sweeps, k, i, v, c))
                    best_idx = -1
                    best_cost = current_cost
                    for idx, c in enumerate(costs):
                        if c > best_cost:
                            best_cost = c
                            best_idx = idx
                    if best_idx >= 0:
                        control = candidates[best_idx]
                        sweep_gain += best_cost - current_cost
                        current_cost = best_cost
                        history.append(current_cost)
                if k + 1 < n_pieces:
                    chk = ev.extend(chk, control, float(control.times[k + 1]))
            if sweep_gain <= config.improvement_tol:
                break
        else:
            budget_exhausted = True
    finally:
        ev.close()

    res = simulate(scenario.build_network(), scenario.cost.horizon,
                   control=control, cfl=scenario.cfl,
                   eval_points=scenario.cost.eval_points)
    breakdown = cost_breakdown(scenario.cost, res.incoming, res.dts,
                               matrix_path=res.matrix_path,
                               point_traces=res.point_traces)
    return SearchResult(control, breakdown, res, history, progress,
                        sweeps, budget_exhausted)


# ---------------------------------------------------------------------------
# exhaustive reference
# ---------------------------------------------------------------------------

def exhaustive_oracle(scenario, levels: Sequence[float],
                      config: Optional[SearchConfig] = None,
                      max_combinations: int = 100_000):
    """Exact optimum over controls drawn from a finite level set.

    Every (arc, piece) slot independently takes each value in ``levels``;
    all combinations are simulated.  Returns (best control, best cost,
    table) where the table rows are (flat level tuple, penalized cost).
    Ties keep the first combination in enumeration order.
    """
    config = config or scenario.search
    m = len(scenario.incoming)
    n_pieces = config.n_intervals + 1
    slots = m * n_pieces
    total = len(levels) ** slots
    if total > max_combinations:
        raise ValueError(
            f"{total} combinations exceed the exhaustive budget {max_combinations}"
        )
    times = control_times(scenario.cost.horizon, config.n_intervals)
    ev = _Evaluator(scenario, times, threads=1)
    table = []
    best = None
    best_cost = -np.inf
    try:
        for combo in itertools.product(levels, repeat=slots):
            values = np.asarray(combo, dtype=float).reshape(n_pieces, m)
            control = PiecewiseConstantPath(times, values)
            cost = ev.full_cost(control)
            table.append((combo, cost))
            if cost > best_cost:
                best_cost = cost
                best = control
    finally:
        ev.close()
    return best, best_cost, table
