"""Readers and writers for trajectories (CSV) and reports (JSON).

CSV files are wide: the first column is time (``tau`` or ``t_fs``), then one
population column per site. Floats are written with ``repr`` so they read back
bit-for-bit. All writes go through a temporary file and ``os.replace``.
"""

from __future__ import annotations

import csv
import io
import json
import os
import tempfile
from pathlib import Path

import numpy as np

from .model import DYNAMICS_KINDS, Trajectory
from .rca import DeviationReport

TIME_COLUMNS = {"tau": "tau", "fs": "t_fs"}


def atomic_write_text(path, text: str) -> None:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.", suffix=".tmp")
    try:
        with os.fdopen(fd, "w", newline="") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def trajectory_csv_text(traj: Trajectory, site_labels=None) -> str:
    labels = list(site_labels) if site_labels is not None else [
        f"site_{i}" for i in range(traj.n_sites)]
    if len(labels) != traj.n_sites:
        raise ValueError("one label per site required")
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow([TIME_COLUMNS.get(traj.time_unit, traj.time_unit)] + labels)
    for t, row in zip(traj.times, traj.populations):
        w.writerow([repr(float(t))] + [repr(float(p)) for p in row])
    return buf.getvalue()


def write_trajectory_csv(traj: Trajectory, path, site_labels=None) -> None:
    atomic_write_text(path, trajectory_csv_text(traj, site_labels))


def read_trajectory_csv(path, label=None) -> tuple[Trajectory, list[str]]:
    """Read a population CSV back; ``label`` defaults to the file stem."""
    path = Path(path)
    with open(path, newline="") as fh:
        rows = list(csv.reader(fh))
    header, body = rows[0], rows[1:]
    units = {v: k for k, v in TIME_COLUMNS.items()}
    unit = units.get(header[0], header[0])
    data = np.array([[float(x) for x in r] for r in body]) if body else np.zeros((0, len(header)))
    kind = label or path.stem
    if kind not in DYNAMICS_KINDS:
        raise ValueError(f"cannot infer dynamics kind from {path.name!r}; pass label=")
    pops = data[:, 1:]
    tail = None
    if kind == "analytic":
        tail = np.clip(1.0 - pops.sum(axis=1), 0.0, None)
    return Trajectory(data[:, 0], pops, kind, unit, tail_mass=tail), header[1:]


SWEEP_COLUMNS = ("v_over_eps", "stable", "max_pop_dev", "mean_pop_dev", "max_coherence_dev",
                 "coupling_ratio")


def write_sweep_csv(points, path) -> None:
    """One row per sweep point; unstable points carry ``stable=0`` and NaN metrics."""
    lines = [",".join(SWEEP_COLUMNS)]
    for p in points:
        if p.stable:
            r = p.report
            vals = [r.max_pop_dev, r.mean_pop_dev, r.max_coherence_dev, r.coupling_ratio]
            lines.append(",".join([repr(float(p.v_over_eps)), "1"] + [repr(float(x)) for x in vals]))
        else:
            lines.append(f"{float(p.v_over_eps)!r},0,nan,nan,nan,nan")
    atomic_write_text(path, "\n".join(lines) + "\n")


def read_sweep_csv(path) -> list[tuple[float, "DeviationReport | None"]]:
    """Inverse of :func:`write_sweep_csv`; per-site deviations are not stored."""
    with open(path, newline="") as fh:
        rows = list(csv.DictReader(fh))
    out = []
    for row in rows:
        ratio = float(row["v_over_eps"])
        if row["stable"] == "1":
            out.append((ratio, DeviationReport(float(row["max_pop_dev"]),
                                               float(row["mean_pop_dev"]),
                                               float(row["max_coherence_dev"]), (),
                                               float(row["coupling_ratio"]))))
        else:
            out.append((ratio, None))
    return out


def json_text(obj) -> str:
    return json.dumps(obj, indent=2, sort_keys=True, allow_nan=False) + "\n"


def write_json(obj, path) -> None:
    atomic_write_text(path, json_text(obj))


def read_json(path):
    with open(path) as fh:
        return json.load(fh)
