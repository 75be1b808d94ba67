"""CSV artifacts: traces, snapshots, cost reports, controls, progress logs.

All floats are written with shortest round-trip precision so files read
back to the exact binary values; determinism checks compare these files
byte for byte.
"""

from __future__ import annotations

import csv
import os

import numpy as np

from .paths import PiecewiseConstantPath


def _fmt(x) -> str:
    return format(float(x), ".17g")


def write_node_traces(path, result) -> None:
    """`t,g1..gm,f{m+1}..f{m+n}`; a closing row at the horizon repeats the
    last samples so consecutive time differences recover the step mesh."""
    m, n = result.m, result.n
    header = (["t"] + [f"g{i + 1}" for i in range(m)]
              + [f"f{m + j + 1}" for j in range(n)])
    K = result.incoming.shape[1]
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(header)
        for k in range(K):
            w.writerow([_fmt(result.times[k])]
                       + [_fmt(v) for v in result.incoming[:, k]]
                       + [_fmt(v) for v in result.outgoing[:, k]])
        w.writerow([_fmt(result.times[-1])]
                   + [_fmt(v) for v in result.incoming[:, -1]]
                   + [_fmt(v) for v in result.outgoing[:, -1]])


def read_node_traces(path):
    """Returns (times (K+1,), incoming (m, K), outgoing (n, K))."""
    with open(path, newline="") as fh:
        rows = list(csv.reader(fh))
    header = rows[0]
    m = sum(1 for h in header if h.startswith("g"))
    data = np.array([[float(x) for x in row] for row in rows[1:]])
    times = data[:, 0]
    incoming = data[:-1, 1:1 + m].T
    outgoing = data[:-1, 1 + m:].T
    return times, incoming, outgoing


def write_snapshot(path, x, u) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["x", "u"])
        for xi, ui in zip(x, u):
            w.writerow([_fmt(xi), _fmt(ui)])


def write_trace(path, t, flux) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["t", "flux"])
        for ti, fi in zip(t, flux):
            w.writerow([_fmt(ti), _fmt(fi)])


def write_cost_report(path, rows) -> None:
    """Rows of (delta, integral, tv_g_total, tv_A_total, penalized)."""
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["delta", "integral", "tv_g_total", "tv_A_total", "penalized"])
        for row in rows:
            w.writerow([_fmt(v) for v in row])


def read_cost_report(path):
    with open(path, newline="") as fh:
        rows = list(csv.reader(fh))
    return [dict(zip(rows[0], map(float, row))) for row in rows[1:]]


def write_control(path, control: PiecewiseConstantPath, horizon: float) -> None:
    """`t_start,t_end,g1..gm`, one row per constant piece."""
    values = np.atleast_2d(control.values)
    ends = np.concatenate([control.times[1:], [horizon]])
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["t_start", "t_end"]
                   + [f"g{i + 1}" for i in range(values.shape[1])])
        for k in range(values.shape[0]):
            w.writerow([_fmt(control.times[k]), _fmt(ends[k])]
                       + [_fmt(v) for v in values[k]])


def read_control(path) -> PiecewiseConstantPath:
    with open(path, newline="") as fh:
        rows = list(csv.reader(fh))
    data = np.array([[float(x) for x in row] for row in rows[1:]])
    return PiecewiseConstantPath(data[:, 0], data[:, 2:])


def write_progress(path, progress) -> None:
    """`sweep,interval,arc,candidate,cost` evaluation log of the search."""
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["sweep", "interval", "arc", "candidate", "cost"])
        for sweep, interval, arc, candidate, cost in progress:
            w.writerow([sweep, interval, arc, _fmt(candidate), _fmt(cost)])


def write_snapshots(outdir, result, prefix="snapshot") -> list:
    paths = []
    labels = result.arc_labels()
    for t, cells in sorted(result.snapshots.items()):
        for a, u in enumerate(cells):
            faces = result.x_faces[a]
            centers = 0.5 * (faces[:-1] + faces[1:])
            name = f"{prefix}_{labels[a]}_t{t:.6f}.csv"
            p = os.path.join(outdir, name)
            write_snapshot(p, centers, u)
            paths.append(p)
    return paths
