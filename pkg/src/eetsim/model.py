"""Aggregate description, state containers and trajectory records.

All containers are frozen dataclasses holding read-only numpy arrays, so they
can be shared freely between threads and worker processes.
"""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Optional

import numpy as np

SPEC_SCHEMA_VERSION = 1
DYNAMICS_KINDS = ("quantum", "classical", "rca", "analytic")


class InvalidSpecError(ValueError):
    """Raised when an aggregate spec fails validation where a usable one is needed."""


def frozen_array(a, dtype=float):
    if a is None:
        return None
    arr = np.array(a, dtype=dtype, copy=True)
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True, eq=False)
class AggregateSpec:
    """Monomers of an aggregate and how they couple.

    Either the geometry fields (``dipole_magnitudes``, ``dipole_orientations``,
    ``positions``) or ``explicit_coupling`` define the couplings. Energies are
    in cm^-1; when both are given the explicit matrix wins.
    """

    site_energies: np.ndarray
    dipole_magnitudes: Optional[np.ndarray] = None
    dipole_orientations: Optional[np.ndarray] = None
    positions: Optional[np.ndarray] = None
    explicit_coupling: Optional[np.ndarray] = None

    def __post_init__(self):
        for name in ("site_energies", "dipole_magnitudes", "dipole_orientations",
                     "positions", "explicit_coupling"):
            object.__setattr__(self, name, frozen_array(getattr(self, name)))

    @property
    def n_sites(self) -> int:
        return len(self.site_energies)

    @property
    def has_geometry(self) -> bool:
        return (self.dipole_magnitudes is not None and self.dipole_orientations is not None
                and self.positions is not None)

    @property
    def mode(self) -> str:
        return "explicit" if self.explicit_coupling is not None else "geometry"

    def with_energy_shift(self, shift_cm: float) -> "AggregateSpec":
        """Copy with every site energy moved by ``shift_cm``."""
        return AggregateSpec(self.site_energies + shift_cm, self.dipole_magnitudes,
                             self.dipole_orientations, self.positions, self.explicit_coupling)

    def to_dict(self) -> dict:
        def lst(a):
            return None if a is None else a.tolist()

        return {
            "schema": SPEC_SCHEMA_VERSION,
            "site_energies": lst(self.site_energies),
            "dipole_magnitudes": lst(self.dipole_magnitudes),
            "dipole_orientations": lst(self.dipole_orientations),
            "positions": lst(self.positions),
            "explicit_coupling": lst(self.explicit_coupling),
        }

    @classmethod
    def from_dict(cls, d: dict) -> "AggregateSpec":
        if d.get("schema") != SPEC_SCHEMA_VERSION:
            raise InvalidSpecError(f"unsupported spec schema {d.get('schema')!r}, "
                                   f"expected {SPEC_SCHEMA_VERSION}")
        if "site_energies" not in d:
            raise InvalidSpecError("spec is missing 'site_energies'")
        return cls(
            site_energies=d["site_energies"],
            dipole_magnitudes=d.get("dipole_magnitudes"),
            dipole_orientations=d.get("dipole_orientations"),
            positions=d.get("positions"),
            explicit_coupling=d.get("explicit_coupling"),
        )

    def digest(self) -> str:
        """Stable short hash of the spec contents."""
        blob = json.dumps(self.to_dict(), sort_keys=True).encode()
        return hashlib.sha256(blob).hexdigest()[:16]


def load_spec(path) -> AggregateSpec:
    with open(path) as fh:
        return AggregateSpec.from_dict(json.load(fh))


def dump_spec(spec: AggregateSpec, path) -> None:
    Path(path).write_text(json.dumps(spec.to_dict(), indent=2) + "\n")


@dataclass(frozen=True)
class ValidationReport:
    violations: tuple = ()
    warnings: tuple = ()

    @property
    def ok(self) -> bool:
        return not self.violations

    def __iter__(self):
        return iter(self.violations)

    def __len__(self):
        return len(self.violations)


def validate(spec: AggregateSpec) -> ValidationReport:
    """List every invariant the spec violates; an empty report means usable."""
    bad = []
    warn = []
    eps = spec.site_energies
    n = len(eps)
    if eps.ndim != 1 or n == 0:
        bad.append("site_energies must be a non-empty vector")
        return ValidationReport(tuple(bad))
    if not np.all(np.isfinite(eps)):
        bad.append("site_energies contain non-finite values")
    for i in np.flatnonzero(~(eps > 0)):
        bad.append(f"site {i}: energy {eps[i]!r} is not positive")

    if spec.explicit_coupling is not None:
        v = spec.explicit_coupling
        if v.shape != (n, n):
            bad.append(f"explicit_coupling has shape {v.shape}, expected {(n, n)}")
        elif not np.all(np.isfinite(v)):
            bad.append("explicit_coupling contains non-finite values")
        else:
            asym = np.abs(v - v.T)
            if asym.max() > 1e-12:
                i, j = np.unravel_index(np.argmax(asym), asym.shape)
                bad.append(f"explicit_coupling is not symmetric: V[{i},{j}] - V[{j},{i}] = "
                           f"{v[i, j] - v[j, i]:.3g}")
            for i in np.flatnonzero(np.diag(v) != 0):
                bad.append(f"explicit_coupling diagonal entry {i} is {v[i, i]!r}, expected 0")
        if spec.has_geometry:
            warn.append("both geometry and explicit_coupling given; explicit_coupling is used")
        return ValidationReport(tuple(bad), tuple(warn))

    if not spec.has_geometry:
        bad.append("no explicit_coupling and incomplete geometry "
                   "(need dipole_magnitudes, dipole_orientations, positions)")
        return ValidationReport(tuple(bad), tuple(warn))

    mu, ori, pos = spec.dipole_magnitudes, spec.dipole_orientations, spec.positions
    if mu.shape != (n,):
        bad.append(f"dipole_magnitudes has shape {mu.shape}, expected {(n,)}")
    if ori.shape != (n, 3):
        bad.append(f"dipole_orientations has shape {ori.shape}, expected {(n, 3)}")
    else:
        norms = np.linalg.norm(ori, axis=1)
        for i in np.flatnonzero(~(np.abs(norms - 1.0) <= 1e-12)):
            bad.append(f"site {i}: orientation norm {norms[i]:.17g} is not 1")
    if pos.shape != (n, 3):
        bad.append(f"positions has shape {pos.shape}, expected {(n, 3)}")
    else:
        for i in range(n):
            for j in range(i + 1, n):
                if np.array_equal(pos[i], pos[j]):
                    bad.append(f"sites {i} and {j} share a position")
    return ValidationReport(tuple(bad), tuple(warn))


@dataclass(frozen=True, eq=False)
class QuantumState:
    amplitudes: np.ndarray
    time: float = 0.0
    time_unit: str = "fs"

    def __post_init__(self):
        object.__setattr__(self, "amplitudes", frozen_array(self.amplitudes, complex))

    @classmethod
    def localized(cls, n_sites: int, site: int, time: float = 0.0, time_unit: str = "fs"):
        c = np.zeros(n_sites, dtype=complex)
        c[site] = 1.0
        return cls(c, time, time_unit)

    @property
    def norm(self) -> float:
        return float(np.sum(np.abs(self.amplitudes) ** 2))


@dataclass(frozen=True, eq=False)
class ClassicalState:
    """Dimensionless oscillator coordinates; ``z = xtilde + i ptilde``."""

    xtilde: np.ndarray
    ptilde: np.ndarray
    time: float = 0.0
    time_unit: str = "fs"

    def __post_init__(self):
        object.__setattr__(self, "xtilde", frozen_array(self.xtilde))
        object.__setattr__(self, "ptilde", frozen_array(self.ptilde))
        if self.xtilde.shape != self.ptilde.shape:
            raise ValueError("xtilde and ptilde must have the same shape")
        if not (np.all(np.isfinite(self.xtilde)) and np.all(np.isfinite(self.ptilde))):
            raise ValueError("classical state has non-finite entries")

    @property
    def z(self) -> np.ndarray:
        return self.xtilde + 1j * self.ptilde


@dataclass(frozen=True, eq=False)
class Trajectory:
    """Population time series for one kind of dynamics.

    ``norm`` holds sum_n |amplitude_n|^2 before normalisation (classical and
    RCA paths), ``tail_mass`` the probability outside the finite site range
    (analytic infinite-chain solution only).
    """

    times: np.ndarray
    populations: np.ndarray
    label: str
    time_unit: str = "fs"
    amplitudes: Optional[np.ndarray] = None
    norm: Optional[np.ndarray] = None
    tail_mass: Optional[np.ndarray] = None
    metadata: dict = field(default_factory=dict)

    def __post_init__(self):
        object.__setattr__(self, "times", frozen_array(self.times))
        object.__setattr__(self, "populations", frozen_array(self.populations))
        object.__setattr__(self, "amplitudes", frozen_array(self.amplitudes, complex))
        object.__setattr__(self, "norm", frozen_array(self.norm))
        object.__setattr__(self, "tail_mass", frozen_array(self.tail_mass))
        if self.label not in DYNAMICS_KINDS:
            raise ValueError(f"unknown dynamics kind {self.label!r}")
        t, p = self.times, self.populations
        if p.ndim != 2 or p.shape[0] != len(t):
            raise ValueError(f"populations shape {p.shape} does not match {len(t)} times")
        if len(t) > 1 and np.any(np.diff(t) <= 0):
            raise ValueError("times must be strictly increasing")
        if np.any(p < 0) or np.any(p > 1 + 1e-12):
            raise ValueError("populations outside [0, 1]")
        total = p.sum(axis=1)
        if self.tail_mass is not None:
            total = total + self.tail_mass
        if len(total) and np.max(np.abs(total - 1.0)) > 1e-9:
            raise ValueError(f"population rows do not sum to 1 (worst {np.max(np.abs(total - 1)):.3g})")

    @property
    def n_sites(self) -> int:
        return self.populations.shape[1]

    def window(self, t_max: float) -> "Trajectory":
        """Sub-trajectory with times <= ``t_max``."""
        keep = self.times <= t_max + 1e-12 * max(1.0, abs(t_max))

        def cut(a):
            return None if a is None else a[keep]

        return Trajectory(self.times[keep], self.populations[keep], self.label, self.time_unit,
                          cut(self.amplitudes), cut(self.norm), cut(self.tail_mass),
                          dict(self.metadata))

    def normalized_amplitudes(self) -> Optional[np.ndarray]:
        """Amplitudes scaled so each row has unit norm (the same scaling as the populations)."""
        if self.amplitudes is None:
            return None
        if self.label == "analytic":
            return self.amplitudes
        n = np.sqrt(np.sum(np.abs(self.amplitudes) ** 2, axis=1, keepdims=True))
        return self.amplitudes / n

    def initial_norm_populations(self) -> np.ndarray:
        """|amplitude|^2 divided by the t=0 norm instead of the instantaneous one."""
        if self.amplitudes is None:
            return np.array(self.populations)
        raw = np.abs(self.amplitudes) ** 2
        return raw / raw[0].sum()


def populations_from_amplitudes(amps: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Instantaneously normalised |a_n|^2 and the norm it was divided by."""
    raw = np.abs(amps) ** 2
    norm = raw.sum(axis=1)
    return raw / norm[:, None], norm


def trajectory_metadata(spec: AggregateSpec, v, timescale, **settings: Any) -> dict:
    """Standard metadata block: aggregate hash, coupling ratio, time scale and settings."""
    vm = np.asarray(v)
    eps_min = float(np.min(spec.site_energies))
    meta = {
        "aggregate": spec.digest(),
        "coupling_ratio": float(np.max(np.abs(vm)) / eps_min) if eps_min > 0 else float("nan"),
        "rad_per_wavenumber": timescale.rad_per_wavenumber,
    }
    meta.update(settings)
    return meta
