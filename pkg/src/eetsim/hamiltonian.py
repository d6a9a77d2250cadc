"""Point-dipole couplings and the equivalent classical oscillator network."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np

from .model import AggregateSpec, InvalidSpecError, frozen_array, validate
from .units import FEMTOSECONDS, HARTREE_IN_WAVENUMBERS, TimeScale


@dataclass(frozen=True, eq=False)
class CouplingMatrix:
    """Symmetric, zero-diagonal coupling matrix V_nm in cm^-1."""

    v: np.ndarray

    def __post_init__(self):
        v = frozen_array(self.v)
        if v.ndim != 2 or v.shape[0] != v.shape[1]:
            raise ValueError(f"coupling matrix must be square, got shape {v.shape}")
        if not np.all(np.isfinite(v)):
            raise ValueError("coupling matrix has non-finite entries")
        if np.max(np.abs(v - v.T), initial=0.0) > 1e-12:
            raise ValueError("coupling matrix is not symmetric")
        if np.any(np.diag(v) != 0):
            raise ValueError("coupling matrix must have a zero diagonal")
        object.__setattr__(self, "v", v)

    @property
    def n_sites(self) -> int:
        return self.v.shape[0]

    def __array__(self, dtype=None, copy=None):
        return np.array(self.v, dtype=dtype)


def dipole_tensor(r_m, r_n) -> np.ndarray:
    """Dipole-dipole kernel (I - 3 R R^T) / R^3 for the separation of two points."""
    d = np.asarray(r_n, dtype=float) - np.asarray(r_m, dtype=float)
    dist = np.linalg.norm(d)
    if dist == 0.0:
        raise ValueError("dipole tensor undefined for coincident positions")
    u = d / dist
    return (np.eye(3) - 3.0 * np.outer(u, u)) / dist**3


def build_coupling(spec: AggregateSpec) -> CouplingMatrix:
    """V_nm = mu_n e_n . T_nm . e_m mu_m for n != m, or the explicit matrix as given."""
    report = validate(spec)
    if not report.ok:
        raise InvalidSpecError("; ".join(report.violations))
    if spec.explicit_coupling is not None:
        return CouplingMatrix(spec.explicit_coupling)
    n = spec.n_sites
    mu, ori, pos = spec.dipole_magnitudes, spec.dipole_orientations, spec.positions
    v = np.zeros((n, n))
    for i in range(n):
        for j in range(i + 1, n):
            v[i, j] = v[j, i] = mu[i] * mu[j] * (ori[i] @ dipole_tensor(pos[i], pos[j]) @ ori[j])
    return CouplingMatrix(v)


def hamiltonian_matrix(spec: AggregateSpec, v, timescale: TimeScale = FEMTOSECONDS) -> np.ndarray:
    """One-exciton Hamiltonian diag(eps) + V in rad per time unit (hbar = 1)."""
    return timescale.frequencies(np.diag(spec.site_energies) + np.asarray(v))


@dataclass(frozen=True, eq=False)
class OscillatorMap:
    """Classical oscillator network equivalent to an aggregate.

    ``k`` is the coupling matrix per unit oscillator mass, in (rad/time)^2:
    K_nm / m = sqrt(w_n w_m) * 2 V_nm. ``f`` holds oscillator strengths when
    dipole magnitudes are known (taken as e*bohr), else ``None``.
    """

    omega: np.ndarray
    k: np.ndarray
    coupling: np.ndarray
    f: Optional[np.ndarray] = None

    def stiffness(self) -> np.ndarray:
        """Omega^2 + K/m, the force matrix for mass-weighted coordinates."""
        return np.diag(self.omega**2) + self.k

    def identity_residual(self) -> float:
        """max |K_nm / (m sqrt(w_n w_m)) - 2 V_nm| over all pairs."""
        lhs = self.k / np.sqrt(np.outer(self.omega, self.omega))
        return float(np.max(np.abs(lhs - 2.0 * self.coupling)))


def oscillator_strengths(spec: AggregateSpec) -> Optional[np.ndarray]:
    """f_n = 2 m_e eps_n mu_n^2 / (e hbar)^2 in atomic units."""
    if spec.dipole_magnitudes is None:
        return None
    eps_hartree = spec.site_energies / HARTREE_IN_WAVENUMBERS
    return 2.0 * eps_hartree * spec.dipole_magnitudes**2


def oscillator_map(spec: AggregateSpec, v, timescale: TimeScale = FEMTOSECONDS) -> OscillatorMap:
    eps = spec.site_energies
    if np.any(~(eps > 0)):
        raise InvalidSpecError("oscillator map needs positive site energies")
    omega = timescale.frequencies(eps)
    coupling = timescale.frequencies(np.asarray(v))
    k = 2.0 * np.sqrt(np.outer(omega, omega)) * coupling
    return OscillatorMap(frozen_array(omega), frozen_array(k), frozen_array(coupling),
                         frozen_array(oscillator_strengths(spec)))
