"""Reproducible experiments: the uniform chain and the seven-site FMO complex."""

from __future__ import annotations

import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace
from importlib import resources
from pathlib import Path
from typing import Optional

import numpy as np

from .analytics import VelocityFit, chain_analytic_trajectory, spread_velocity
from .classical import ClassicalInstabilityError, propagate_classical, quantum_to_classical_init
from .hamiltonian import build_coupling
from .model import AggregateSpec, QuantumState
from .quantum import propagate_quantum
from .rca import DeviationReport, SecondOrderTerms, compare, propagate_rca, second_order_residuals
from .units import FEMTOSECONDS, chain_timescale

FMO_SITES = 7
FMO_DATA_FILE = "fmo_adolphs_renger_2006.txt"


class FmoFormatError(ValueError):
    """The FMO Hamiltonian file is malformed."""


def default_fmo_path() -> Path:
    return Path(str(resources.files("eetsim") / "data" / FMO_DATA_FILE))


@dataclass(frozen=True)
class ChainScenario:
    """Uniform nearest-neighbour chain started on one site, in tau = 2Vt/hbar.

    ``origin`` defaults to the centre site, which needs an odd ``n_sites``.
    """

    n_sites: int = 19
    v_over_eps: float = 1 / 40
    origin: Optional[int] = None
    tau_max: float = 8.0
    samples: int = 400
    site_energy: float = 12000.0

    def __post_init__(self):
        if self.n_sites < 1:
            raise ValueError("n_sites must be positive")
        if self.origin is None and self.n_sites % 2 == 0:
            raise ValueError(f"odd site count required for a centred start, got {self.n_sites}")
        if self.origin is not None and not 0 <= self.origin < self.n_sites:
            raise ValueError(f"origin {self.origin} outside the chain")
        if not self.v_over_eps > 0:
            raise ValueError("v_over_eps must be positive")
        if self.tau_max < 0 or self.samples < 1:
            raise ValueError("tau_max must be >= 0 and samples >= 1")

    @property
    def start(self) -> int:
        return self.n_sites // 2 if self.origin is None else self.origin

    @property
    def coupling(self) -> float:
        return self.site_energy * self.v_over_eps

    def times(self) -> np.ndarray:
        if self.tau_max == 0 or self.samples == 1:
            return np.array([0.0])
        return np.linspace(0.0, self.tau_max, self.samples)

    def aggregate(self) -> AggregateSpec:
        n = self.n_sites
        v = np.zeros((n, n))
        idx = np.arange(n - 1)
        v[idx, idx + 1] = v[idx + 1, idx] = self.coupling
        return AggregateSpec(np.full(n, self.site_energy), explicit_coupling=v)


@dataclass
class ScenarioResult:
    spec: AggregateSpec
    coupling: np.ndarray
    trajectories: dict = field(default_factory=dict)
    reports: dict = field(default_factory=dict)
    velocity: Optional[VelocityFit] = None
    residuals: Optional[SecondOrderTerms] = None


def run_chain(sc: ChainScenario) -> ScenarioResult:
    """Quantum, full classical, RCA and analytic dynamics on a shared tau grid."""
    spec = sc.aggregate()
    v = build_coupling(spec)
    ts = chain_timescale(sc.coupling)
    times = sc.times()
    c0 = QuantumState.localized(sc.n_sites, sc.start, time_unit=ts.unit)
    quantum = propagate_quantum(spec, v, c0, times, ts)
    classical = propagate_classical(spec, v, quantum_to_classical_init(c0), times, ts)
    rca = propagate_rca(spec, v, c0, times, ts)
    analytic = chain_analytic_trajectory(sc.n_sites, sc.start, times)
    trajs = {"quantum": quantum, "classical": classical, "rca": rca, "analytic": analytic}
    reports = {
        "quantum_vs_analytic": compare(quantum, analytic),
        "classical_vs_quantum": compare(classical, quantum),
        "rca_vs_quantum": compare(rca, quantum),
        "classical_vs_analytic": compare(classical, analytic),
    }
    try:
        velocity = spread_velocity(quantum, sc.start)
    except ValueError:
        velocity = None
    return ScenarioResult(spec, v.v, trajs, reports, velocity,
                          second_order_residuals(quantum, spec, v))


def load_fmo(path=None) -> AggregateSpec:
    """Read a 7x7 site-basis Hamiltonian (cm^-1) with '#' comment lines."""
    path = Path(path) if path is not None else default_fmo_path()
    if not path.is_file():
        raise FileNotFoundError(f"FMO Hamiltonian file not found: {path}")
    rows = []
    for line in path.read_text().splitlines():
        text = line.strip()
        if not text or text.startswith("#"):
            continue
        row = []
        for col, tok in enumerate(text.split(), start=1):
            try:
                val = float(tok)
            except ValueError:
                raise FmoFormatError(f"row {len(rows) + 1}, column {col}: cannot parse {tok!r}")
            if not math.isfinite(val):
                raise FmoFormatError(f"row {len(rows) + 1}, column {col}: non-finite value {tok!r}")
            row.append(val)
        rows.append(row)
    if len(rows) != FMO_SITES or any(len(r) != FMO_SITES for r in rows):
        shape = f"{len(rows)} rows with lengths {sorted({len(r) for r in rows})}"
        raise FmoFormatError(f"expected a {FMO_SITES}x{FMO_SITES} matrix, got {shape}")
    h = np.array(rows)
    asym = np.max(np.abs(h - h.T))
    if asym > 1e-9:
        raise FmoFormatError(f"Hamiltonian is not symmetric (max |H - H^T| = {asym:.3g})")
    diag = np.diag(h)
    if np.any(diag < 1e3) or np.any(diag > 1e5):
        raise FmoFormatError("site energies should be of order 1e4 cm^-1")
    v = 0.5 * (h + h.T)
    np.fill_diagonal(v, 0.0)
    return AggregateSpec(diag, explicit_coupling=v)


@dataclass(frozen=True)
class FmoScenario:
    """FMO dynamics from one localized monomer (1-based ``initial_site``), times in fs."""

    hamiltonian_file: Optional[str] = None
    initial_site: int = 1
    t_max: float = 1000.0
    samples: int = 1000
    energy_shift: float = 0.0

    def __post_init__(self):
        if not 1 <= self.initial_site <= FMO_SITES:
            raise ValueError(f"initial_site must be in 1..{FMO_SITES}")
        if self.t_max < 0 or self.samples < 1:
            raise ValueError("t_max must be >= 0 and samples >= 1")

    def times(self) -> np.ndarray:
        if self.t_max == 0 or self.samples == 1:
            return np.array([0.0])
        return np.linspace(0.0, self.t_max, self.samples)


def run_fmo(sc: FmoScenario) -> ScenarioResult:
    base = load_fmo(sc.hamiltonian_file)
    spec = base.with_energy_shift(sc.energy_shift) if sc.energy_shift else base
    v = build_coupling(spec)
    times = sc.times()
    c0 = QuantumState.localized(FMO_SITES, sc.initial_site - 1)
    quantum = propagate_quantum(spec, v, c0, times, FEMTOSECONDS)
    classical = propagate_classical(spec, v, quantum_to_classical_init(c0), times, FEMTOSECONDS)
    rca = propagate_rca(spec, v, c0, times, FEMTOSECONDS)
    trajs = {"quantum": quantum, "classical": classical, "rca": rca}
    reports = {
        "classical_vs_quantum": compare(classical, quantum),
        "rca_vs_quantum": compare(rca, quantum),
    }
    return ScenarioResult(spec, v.v, trajs, reports, None,
                          second_order_residuals(quantum, spec, v))


@dataclass(frozen=True)
class SweepPoint:
    v_over_eps: float
    report: Optional[DeviationReport]
    error: Optional[str] = None

    @property
    def stable(self) -> bool:
        return self.report is not None


def _sweep_one(sc: ChainScenario) -> SweepPoint:
    try:
        res = run_chain(sc)
    except ClassicalInstabilityError as exc:
        return SweepPoint(sc.v_over_eps, None, str(exc))
    return SweepPoint(sc.v_over_eps, res.reports["classical_vs_quantum"])


def run_sweep(grid, base: ChainScenario = ChainScenario(), workers: int = 1) -> list[SweepPoint]:
    """Classical-vs-quantum deviation for each V/eps in ``grid``.

    Unstable classical points are kept with ``report=None`` and the error text.
    """
    scenarios = [replace(base, v_over_eps=float(r)) for r in grid]
    if workers > 1 and len(scenarios) > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            return list(pool.map(_sweep_one, scenarios))
    return [_sweep_one(sc) for sc in scenarios]


def is_monotone_increasing(points: list[SweepPoint]) -> bool:
    devs = [p.report.max_pop_dev for p in sorted(points, key=lambda p: p.v_over_eps) if p.stable]
    return all(b > a for a, b in zip(devs, devs[1:]))

