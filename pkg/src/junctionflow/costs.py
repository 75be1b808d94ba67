"""Cost functionals over realized node flux traces.

The running cost J acts on the vector of incoming fluxes (sum or
scaled product out of the box, or any callable), integrated over the
horizon with left-endpoint quadrature on the step mesh -- exact for the
piecewise-constant traces the scheme produces.  The penalized cost
subtracts delta times the total variation of each incoming trace and,
optionally, of every distribution coefficient.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Optional, Sequence

import numpy as np

from .paths import PiecewiseConstantPath, sampled_tv


@dataclass(frozen=True)
class CostSpec:
    horizon: float
    kind: str = "sum"              # "sum" | "product" | "custom"
    scale: float = 1.0             # J = scale * (sum or product)
    delta: float = 0.0
    penalize_matrix: bool = False
    eval_points: Optional[tuple] = None   # positions on outgoing arcs to record
    custom: Optional[Callable] = None     # J(g_incoming [, g_at_eval_points])

    def __post_init__(self):
        if self.horizon <= 0:
            raise ValueError("horizon must be positive")
        if self.delta < 0:
            raise ValueError("delta must be nonnegative")
        if self.kind not in ("sum", "product", "custom"):
            raise ValueError(f"unknown cost kind {self.kind!r}")
        if self.kind == "custom" and self.custom is None:
            raise ValueError("custom cost needs a callable")

    def running(self, traces: np.ndarray, point_traces=None) -> np.ndarray:
        """J evaluated per step; traces has shape (m, K)."""
        if self.kind == "sum":
            return self.scale * traces.sum(axis=0)
        if self.kind == "product":
            return self.scale * traces.prod(axis=0)
        if point_traces is not None:
            return np.asarray(self.custom(traces, point_traces), dtype=float)
        return np.asarray(self.custom(traces), dtype=float)


@dataclass(frozen=True)
class CostBreakdown:
    integral: float
    tv_controls: np.ndarray      # per incoming arc
    tv_matrix: float             # summed over all coefficients
    delta: float
    penalized: float

    @property
    def tv_controls_total(self) -> float:
        return float(np.sum(self.tv_controls))


def integral_cost(spec: CostSpec, traces, dts, point_traces=None) -> float:
    """Left-endpoint quadrature of J along the (non-uniform) step mesh."""
    traces = np.atleast_2d(np.asarray(traces, dtype=float))
    dts = np.asarray(dts, dtype=float)
    if traces.shape[1] != dts.size:
        raise ValueError("one trace sample per time step is required")
    covered = float(dts.sum())
    if covered < spec.horizon * (1.0 - 1e-9):
        raise ValueError(
            f"traces cover [0, {covered}] but the horizon is {spec.horizon}"
        )
    return float(np.dot(spec.running(traces, point_traces), dts))


def tv(path_or_samples):
    """Total variation: interior jumps of a path, or consecutive-sample
    differences of a sampled trace (endpoint jumps never counted)."""
    if isinstance(path_or_samples, PiecewiseConstantPath):
        return path_or_samples.tv()
    return sampled_tv(np.asarray(path_or_samples, dtype=float))


def cost_breakdown(spec: CostSpec, traces, dts, matrix_path=None,
                   point_traces=None) -> CostBreakdown:
    traces = np.atleast_2d(np.asarray(traces, dtype=float))
    integral = integral_cost(spec, traces, dts, point_traces)
    tv_controls = sampled_tv(traces, axis=1)
    tv_matrix = 0.0
    if spec.penalize_matrix:
        if matrix_path is None:
            raise ValueError("matrix penalty requested but no matrix path given")
        tv_matrix = float(matrix_path.total_variation())
    penalized = integral - spec.delta * (float(tv_controls.sum()) + tv_matrix)
    return CostBreakdown(integral, tv_controls, tv_matrix, spec.delta, penalized)


def penalized_cost(result, spec: CostSpec) -> CostBreakdown:
    """Cost breakdown of a simulation result (realized traces only)."""
    return cost_breakdown(spec, result.incoming, result.dts,
                          matrix_path=result.matrix_path,
                          point_traces=result.point_traces)


@dataclass(frozen=True)
class SweepEntry:
    delta: float
    cost: float
    integral: float
    tv_controls: float
    tv_matrix: float
    control: object


def delta_sweep(scenario, deltas: Sequence[float], optimizer) -> list[SweepEntry]:
    """Best penalized cost per penalty weight.

    ``optimizer`` maps a scenario to (control, breakdown); pair it with
    the exhaustive oracle for exact sweeps on tiny instances or with the
    local search for full-size ones.  Deltas are processed in decreasing
    order.
    """
    entries = []
    for d in sorted(deltas, reverse=True):
        scn = scenario.with_delta(float(d))
        control, breakdown = optimizer(scn)
        entries.append(SweepEntry(float(d), breakdown.penalized, breakdown.integral,
                                  breakdown.tv_controls_total, breakdown.tv_matrix,
                                  control))
    return entries
