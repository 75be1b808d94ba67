"""Right-continuous step functions of time.

``PiecewiseConstantPath`` represents inflow controls, distribution
coefficients and realized flux traces: a sorted list of piece start
times (the first one at t = 0) and one value per piece, where
``values[k]`` holds on [times[k], times[k+1]).  Values may carry any
trailing shape (scalars for a single trace, (m,) for an inflow control
vector, (n, m) for a distribution matrix).

Total variation is the sum of absolute jumps at the interior
breakpoints; jumps at the endpoints of the horizon are not counted,
matching the essential variation of the right-continuous representative
on the open interval.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np


@dataclass(frozen=True)
class PiecewiseConstantPath:
    times: np.ndarray
    values: np.ndarray

    def __post_init__(self):
        times = np.asarray(self.times, dtype=float)
        values = np.asarray(self.values, dtype=float)
        if times.ndim != 1 or times.size == 0:
            raise ValueError("times must be a nonempty 1-d array")
        if values.shape[0] != times.size:
            raise ValueError("need exactly one value per piece")
        if times[0] != 0.0:
            raise ValueError("the first piece must start at t = 0")
        if times.size > 1 and np.min(np.diff(times)) <= 0.0:
            raise ValueError("piece start times must be strictly increasing")
        object.__setattr__(self, "times", times)
        object.__setattr__(self, "values", values)

    @property
    def n_pieces(self) -> int:
        return self.times.size

    def value_at(self, t: float):
        idx = int(np.searchsorted(self.times, t, side="right")) - 1
        if idx < 0:
            idx = 0
        return self.values[idx]

    __call__ = value_at

    def tv(self):
        """Per-component sum of |jumps| at interior breakpoints."""
        if self.n_pieces < 2:
            return np.zeros(self.values.shape[1:])
        return np.abs(np.diff(self.values, axis=0)).sum(axis=0)

    def total_variation(self) -> float:
        return float(np.sum(self.tv()))

    def with_values(self, values) -> "PiecewiseConstantPath":
        return PiecewiseConstantPath(self.times.copy(), np.asarray(values, dtype=float))

    @staticmethod
    def constant(value) -> "PiecewiseConstantPath":
        return PiecewiseConstantPath(np.array([0.0]), np.asarray([value], dtype=float))

    @staticmethod
    def uniform(horizon: float, n_breaks: int, values) -> "PiecewiseConstantPath":
        """Uniform partition of [0, horizon] into n_breaks + 1 pieces."""
        if n_breaks < 0:
            raise ValueError("n_breaks must be nonnegative")
        times = np.linspace(0.0, horizon, n_breaks + 2)[:-1]
        return PiecewiseConstantPath(times, np.asarray(values, dtype=float))


def sampled_tv(samples, axis=-1):
    """Total variation of a sampled step-function trace.

    One value per time step; consecutive-sample differences equal the
    essential variation of the underlying step function on the open
    horizon.
    """
    samples = np.asarray(samples, dtype=float)
    if samples.shape[axis] < 2:
        return np.zeros(np.diff(samples, axis=axis).shape[:axis] or ())
    return np.abs(np.diff(samples, axis=axis)).sum(axis=axis)


def distribution_matrix_path(times, matrices) -> PiecewiseConstantPath:
    """Validated path of column-stochastic n x m distribution matrices."""
    path = PiecewiseConstantPath(np.asarray(times, dtype=float),
                                 np.asarray(matrices, dtype=float))
    if path.values.ndim != 3:
        raise ValueError("matrix path values must have shape (pieces, n, m)")
    validate_distribution_matrix(path.values)
    return path


def validate_distribution_matrix(matrices) -> None:
    mats = np.asarray(matrices, dtype=float)
    if np.min(mats) < 0.0 or np.max(mats) > 1.0:
        raise ValueError("distribution coefficients must lie in [0, 1]")
    col_sums = mats.sum(axis=-2)
    if np.max(np.abs(col_sums - 1.0)) > 1e-12:
        raise ValueError("each column of a distribution matrix must sum to 1")
