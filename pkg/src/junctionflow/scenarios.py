"""Problem instances: flux, arcs, initial data, routing matrix, cost, search.

A ``Scenario`` is a plain, JSON-serializable description of a complete
problem; ``build_network`` turns it into live solver state.  Three
bundled instances cover the standard 2-in/2-out test battery (quadratic
flux 4u(1-u), arcs of length 5 at dx = 0.05, routing matrix
[[0.5, 0.3], [0.5, 0.7]]):

* ``case1`` -- a rarefaction and a shock reach the node from arc 1;
               additive cost, horizon 5, penalty 0.2;
* ``case2`` -- platoons separated by empty road on arc 1; product cost
               scaled by 50, horizon 1.1, penalty 0.4;
* ``case3`` -- sinusoidal congestion on arc 1 and a congested outgoing
               arc 3; product cost, horizon 5, no penalty.

``tiny_scenario`` is a deliberately small instance whose control lattice
can be enumerated exhaustively; the search variations are aligned with
that lattice so ascent never leaves it.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, replace
from typing import Optional

import numpy as np

from .arc import ArcConfig, Orientation
from .costs import CostSpec
from .flux import FluxModel
from .junction import JunctionNetwork
from .optimize import SearchConfig
from .paths import PiecewiseConstantPath, distribution_matrix_path


@dataclass(frozen=True)
class FluxSpec:
    kind: str = "quadratic"
    coefficient: float = 4.0
    umax: float = 1.0

    def build(self) -> FluxModel:
        if self.kind != "quadratic":
            raise ValueError("only quadratic fluxes are serializable")
        return FluxModel.quadratic(self.coefficient, self.umax)

    def to_dict(self):
        return {"kind": self.kind, "coefficient": self.coefficient,
                "umax": self.umax}

    @staticmethod
    def from_dict(d) -> "FluxSpec":
        return FluxSpec(d["kind"], float(d["coefficient"]), float(d["umax"]))


@dataclass(frozen=True)
class InitialSpec:
    """Initial density profile: constant, piecewise constant, or sinusoid."""
    kind: str
    value: float = 0.0
    breaks: tuple = ()
    values: tuple = ()
    offset: float = 0.0
    amplitude: float = 0.0
    frequency: float = 1.0
    phase: float = 0.0
    wave: str = "sin"

    @staticmethod
    def constant(value: float) -> "InitialSpec":
        return InitialSpec("constant", value=float(value))

    @staticmethod
    def piecewise(breaks, values) -> "InitialSpec":
        breaks = tuple(float(b) for b in breaks)
        values = tuple(float(v) for v in values)
        if len(values) != len(breaks) + 1:
            raise ValueError("piecewise data needs one more value than breaks")
        if any(b2 <= b1 for b1, b2 in zip(breaks, breaks[1:])):
            raise ValueError("piecewise breaks must be increasing")
        return InitialSpec("piecewise", breaks=breaks, values=values)

    @staticmethod
    def sinusoid(offset, amplitude, frequency=1.0, phase=0.0, wave="sin") -> "InitialSpec":
        if wave not in ("sin", "cos"):
            raise ValueError("wave must be 'sin' or 'cos'")
        return InitialSpec("sinusoid", offset=float(offset),
                           amplitude=float(amplitude), frequency=float(frequency),
                           phase=float(phase), wave=wave)

    def build(self):
        if self.kind == "constant":
            v = self.value
            return lambda x: np.full_like(np.asarray(x, dtype=float), v)
        if self.kind == "piecewise":
            breaks = np.asarray(self.breaks)
            values = np.asarray(self.values)
            return lambda x: values[np.searchsorted(breaks, np.asarray(x, dtype=float),
                                                    side="right")]
        if self.kind == "sinusoid":
            fn = np.sin if self.wave == "sin" else np.cos
            return lambda x: (self.offset + self.amplitude
                              * fn(self.frequency * np.asarray(x, dtype=float)
                                   + self.phase))
        raise ValueError(f"unknown initial profile kind {self.kind!r}")

    def to_dict(self):
        if self.kind == "constant":
            return {"kind": "constant", "value": self.value}
        if self.kind == "piecewise":
            return {"kind": "piecewise", "breaks": list(self.breaks),
                    "values": list(self.values)}
        return {"kind": "sinusoid", "offset": self.offset,
                "amplitude": self.amplitude, "frequency": self.frequency,
                "phase": self.phase, "wave": self.wave}

    @staticmethod
    def from_dict(d) -> "InitialSpec":
        kind = d["kind"]
        if kind == "constant":
            return InitialSpec.constant(d["value"])
        if kind == "piecewise":
            return InitialSpec.piecewise(d["breaks"], d["values"])
        if kind == "sinusoid":
            return InitialSpec.sinusoid(d["offset"], d["amplitude"],
                                        d.get("frequency", 1.0),
                                        d.get("phase", 0.0),
                                        d.get("wave", "sin"))
        raise ValueError(f"unknown initial profile kind {kind!r}")


@dataclass(frozen=True)
class ArcSpec:
    """One arc: incoming arcs span (-length, 0), outgoing ones (0, length)."""
    length: float
    n_cells: int
    initial: InitialSpec

    def __post_init__(self):
        if self.length <= 0:
            raise ValueError("arc length must be positive")
        if self.n_cells < 1:
            raise ValueError("n_cells must be positive")

    def config(self, orientation: Orientation) -> ArcConfig:
        if orientation == Orientation.INCOMING:
            return ArcConfig(orientation, -self.length, 0.0, self.n_cells,
                             self.initial.build())
        return ArcConfig(orientation, 0.0, self.length, self.n_cells,
                         self.initial.build())

    def to_dict(self):
        return {"length": self.length, "n_cells": self.n_cells,
                "initial": self.initial.to_dict()}

    @staticmethod
    def from_dict(d) -> "ArcSpec":
        return ArcSpec(float(d["length"]), int(d["n_cells"]),
                       InitialSpec.from_dict(d["initial"]))


@dataclass(frozen=True)
class Scenario:
    name: str
    flux: FluxSpec
    incoming: tuple
    outgoing: tuple
    matrix_times: tuple
    matrices: tuple               # nested tuples, one (n, m) matrix per piece
    cost: CostSpec
    search: SearchConfig
    cfl: float = 0.9
    snapshot_times: tuple = ()

    def __post_init__(self):
        if not self.incoming or not self.outgoing:
            raise ValueError("need at least one incoming and one outgoing arc")
        mats = np.asarray(self.matrices, dtype=float)
        if mats.shape[1:] != (len(self.outgoing), len(self.incoming)):
            raise ValueError("matrix dimensions do not match the arc counts")
        if len(self.matrix_times) != mats.shape[0]:
            raise ValueError("one matrix per matrix piece is required")
        if self.cost.horizon <= 0:
            raise ValueError("horizon must be positive")

    # -- builders ---------------------------------------------------------

    def flux_model(self) -> FluxModel:
        return self.flux.build()

    def matrix_path(self) -> PiecewiseConstantPath:
        return distribution_matrix_path(self.matrix_times, self.matrices)

    def build_network(self) -> JunctionNetwork:
        model = self.flux_model()
        return JunctionNetwork(
            model,
            [a.config(Orientation.INCOMING) for a in self.incoming],
            [a.config(Orientation.OUTGOING) for a in self.outgoing],
            self.matrix_path(),
        )

    def with_delta(self, delta: float) -> "Scenario":
        return replace(self, cost=replace(self.cost, delta=float(delta)))

    # -- serialization ------------------------------------------------------

    def to_dict(self) -> dict:
        if self.cost.custom is not None:
            raise ValueError("custom cost callables are not serializable")
        return {
            "name": self.name,
            "flux": self.flux.to_dict(),
            "incoming": [a.to_dict() for a in self.incoming],
            "outgoing": [a.to_dict() for a in self.outgoing],
            "distribution": {
                "times": list(self.matrix_times),
                "matrices": [np.asarray(mat, dtype=float).tolist()
                             for mat in self.matrices],
            },
            "cost": {
                "kind": self.cost.kind,
                "scale": self.cost.scale,
                "delta": self.cost.delta,
                "penalize_matrix": self.cost.penalize_matrix,
                "horizon": self.cost.horizon,
                "eval_points": (None if self.cost.eval_points is None
                                else list(self.cost.eval_points)),
            },
            "search": {
                "n_intervals": self.search.n_intervals,
                "variation_steps": list(self.search.variation_steps),
                "max_sweeps": self.search.max_sweeps,
                "improvement_tol": self.search.improvement_tol,
                "init_mode": self.search.init_mode,
                "optimize_matrix": self.search.optimize_matrix,
            },
            "cfl": self.cfl,
            "snapshot_times": list(self.snapshot_times),
        }

    @staticmethod
    def from_dict(d: dict) -> "Scenario":
        cost = d["cost"]
        search = d["search"]
        dist = d["distribution"]
        return Scenario(
            name=d["name"],
            flux=FluxSpec.from_dict(d["flux"]),
            incoming=tuple(ArcSpec.from_dict(a) for a in d["incoming"]),
            outgoing=tuple(ArcSpec.from_dict(a) for a in d["outgoing"]),
            matrix_times=tuple(float(t) for t in dist["times"]),
            matrices=tuple(tuple(tuple(float(x) for x in row) for row in mat)
                           for mat in dist["matrices"]),
            cost=CostSpec(
                horizon=float(cost["horizon"]),
                kind=cost["kind"],
                scale=float(cost["scale"]),
                delta=float(cost["delta"]),
                penalize_matrix=bool(cost["penalize_matrix"]),
                eval_points=(None if cost.get("eval_points") is None
                             else tuple(float(x) for x in cost["eval_points"])),
            ),
            search=SearchConfig(
                n_intervals=int(search["n_intervals"]),
                variation_steps=tuple(float(s) for s in search["variation_steps"]),
                max_sweeps=int(search["max_sweeps"]),
                improvement_tol=float(search["improvement_tol"]),
                init_mode=search["init_mode"],
                optimize_matrix=bool(search["optimize_matrix"]),
            ),
            cfl=float(d.get("cfl", 0.9)),
            snapshot_times=tuple(float(t) for t in d.get("snapshot_times", [])),
        )

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=True)

    @staticmethod
    def from_json(text: str) -> "Scenario":
        return Scenario.from_dict(json.loads(text))


# ---------------------------------------------------------------------------
# bundled instances
# ---------------------------------------------------------------------------

_MATRIX = ((0.5, 0.3), (0.5, 0.7))


def _init(v) -> InitialSpec:
    return v if isinstance(v, InitialSpec) else InitialSpec.constant(v)


def _standard(name, u1, cost, snapshot_times=(), dx=0.05,
              u2=0.5, u3=0.1, u4=0.1):
    n_cells = round(5.0 / dx)
    arcs = [_init(u1), _init(u2), _init(u3), _init(u4)]
    return Scenario(
        name=name,
        flux=FluxSpec("quadratic", 4.0, 1.0),
        incoming=(ArcSpec(5.0, n_cells, arcs[0]), ArcSpec(5.0, n_cells, arcs[1])),
        outgoing=(ArcSpec(5.0, n_cells, arcs[2]), ArcSpec(5.0, n_cells, arcs[3])),
        matrix_times=(0.0,),
        matrices=(_MATRIX,),
        cost=cost,
        search=SearchConfig(n_intervals=20),
        cfl=0.9,
        snapshot_times=tuple(snapshot_times) or (cost.horizon,),
    )


def builtin_scenario(name: str) -> Scenario:
    """The bundled 2-in/2-out instances: 'case1', 'case2' or 'case3'."""
    if name == "case1":
        return _standard(
            "case1",
            InitialSpec.piecewise((-2.1, -1.0), (0.47, 0.25, 0.5)),
            CostSpec(horizon=5.0, kind="sum", scale=1.0, delta=0.2),
        )
    if name == "case2":
        return _standard(
            "case2",
            InitialSpec.piecewise((-2.0, -1.5, -1.0, -0.5),
                                  (0.25, 0.0, 0.25, 0.0, 0.5)),
            CostSpec(horizon=1.1, kind="product", scale=50.0, delta=0.4),
        )
    if name == "case3":
        return _standard(
            "case3",
            InitialSpec.sinusoid(0.5, 0.3, frequency=2.0),
            CostSpec(horizon=5.0, kind="product", scale=1.0, delta=0.0),
            u2=0.2,
            u3=InitialSpec.sinusoid(0.75, 0.2, frequency=1.0, wave="cos"),
            u4=0.1,
        )
    raise ValueError(f"unknown scenario {name!r}; choose case1, case2 or case3")


def tiny_scenario(delta: float = 0.0, symmetric: bool = False) -> Scenario:
    """A coarse 2-in/2-out instance for exhaustive-search studies.

    One interior control breakpoint (two constant pieces per arc) and
    search variations of +-0.5 and +-1.0 times fmax, so ascent stays on
    the level lattice {0, fmax/2, fmax} when started on it.
    """
    if symmetric:
        data = (0.4, 0.4, 0.3, 0.3)
        matrix = ((0.5, 0.5), (0.5, 0.5))
    else:
        data = (0.4, 0.55, 0.6, 0.3)
        matrix = _MATRIX
    mk = InitialSpec.constant
    return Scenario(
        name="tiny-symmetric" if symmetric else "tiny",
        flux=FluxSpec("quadratic", 4.0, 1.0),
        incoming=(ArcSpec(2.0, 16, mk(data[0])), ArcSpec(2.0, 16, mk(data[1]))),
        outgoing=(ArcSpec(2.0, 16, mk(data[2])), ArcSpec(2.0, 16, mk(data[3]))),
        matrix_times=(0.0,),
        matrices=(matrix,),
        cost=CostSpec(horizon=1.0, kind="sum", scale=1.0, delta=float(delta)),
        search=SearchConfig(n_intervals=1,
                            variation_steps=(0.5, -0.5, 1.0, -1.0)),
        cfl=0.9,
        snapshot_times=(1.0,),
    )


def load_scenario(source: str) -> Scenario:
    """A bundled name, or a path to a scenario JSON file."""
    try:
        return builtin_scenario(source)
    except ValueError:
        pass
    try:
        with open(source, "r", encoding="utf-8") as fh:
            return Scenario.from_json(fh.read())
    except FileNotFoundError:
        raise ValueError(
            f"{source!r} is neither a bundled scenario name nor a readable file"
        ) from None
