"""Quantum amplitude dynamics on the one-exciton manifold.

The Hamiltonian is time independent, so the primary path is exact:
``c(t) = Q exp(-i L t) Q^T c0`` from a Jacobi eigendecomposition. The RK4
path integrates the same equations step by step and exists to cross-check it.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

import numpy as np

from . import _core
from .hamiltonian import hamiltonian_matrix
from .model import AggregateSpec, QuantumState, Trajectory, frozen_array, trajectory_metadata
from .units import FEMTOSECONDS, TimeScale

JACOBI_REL_TOL = 1e-14


@dataclass(frozen=True, eq=False)
class SpectralDecomposition:
    """Eigenvalues (ascending) and orthonormal eigenvector columns."""

    eigenvalues: np.ndarray
    eigenvectors: np.ndarray
    sweeps: int = 0

    def reconstruct(self) -> np.ndarray:
        q = self.eigenvectors
        return (q * self.eigenvalues) @ q.T


def diagonalize(h) -> SpectralDecomposition:
    """Cyclic Jacobi eigendecomposition of a real symmetric matrix.

    Sweeps stop once the off-diagonal Frobenius norm drops below
    ``1e-14 * ||h||_F``.
    """
    h = np.asarray(h, dtype=float)
    if h.ndim != 2 or h.shape[0] != h.shape[1]:
        raise ValueError(f"expected a square matrix, got shape {h.shape}")
    scale = max(np.max(np.abs(h), initial=0.0), np.finfo(float).tiny)
    if np.max(np.abs(h - h.T), initial=0.0) > 1e-12 * scale:
        raise ValueError("matrix is not symmetric")
    w, q, sweeps = _core.jacobi_eigh(0.5 * (h + h.T), JACOBI_REL_TOL)
    order = np.argsort(w, kind="stable")
    return SpectralDecomposition(frozen_array(w[order]), frozen_array(q[:, order]), sweeps)


def check_start(c0: QuantumState, times) -> np.ndarray:
    if abs(c0.norm - 1.0) > 1e-10:
        raise ValueError(f"initial state must be normalised (norm {c0.norm:.17g})")
    times = np.asarray(times, dtype=float)
    if times.ndim != 1 or (len(times) > 1 and np.any(np.diff(times) <= 0)):
        raise ValueError("times must be a strictly increasing vector")
    if len(times) and times[0] < c0.time:
        raise ValueError("times must not precede the initial state's time")
    return times


def propagate_quantum(spec: AggregateSpec, v, c0: QuantumState, times,
                      timescale: TimeScale = FEMTOSECONDS,
                      decomposition: Optional[SpectralDecomposition] = None) -> Trajectory:
    """Exact propagation of i dc/dt = H c by spectral decomposition.

    ``times`` are absolute; evolution runs from ``c0.time``.
    """
    times = check_start(c0, times)
    h = hamiltonian_matrix(spec, v, timescale)
    dec = decomposition or diagonalize(h)
    q, lam = dec.eigenvectors, dec.eigenvalues
    coeff = q.T @ c0.amplitudes
    phases = np.exp(-1j * np.outer(times - c0.time, lam))
    amps = (phases * coeff) @ q.T
    pops = np.abs(amps) ** 2
    meta = trajectory_metadata(spec, v, timescale, method="spectral-jacobi", sweeps=dec.sweeps)
    return Trajectory(times, pops, "quantum", timescale.unit, amplitudes=amps,
                      norm=pops.sum(axis=1), metadata=meta)


def default_rk4_step(h) -> float:
    """0.02 / (Gershgorin bound on the spectral radius of h)."""
    radius = np.max(np.sum(np.abs(h), axis=1))
    return 0.02 / radius if radius > 0 else math.inf


def propagate_quantum_ode(spec: AggregateSpec, v, c0: QuantumState, times,
                          dt_max: Optional[float] = None,
                          timescale: TimeScale = FEMTOSECONDS) -> Trajectory:
    """Fixed-step classical Runge-Kutta integration of the amplitude equations.

    Each output interval is split into equal steps no longer than ``dt_max``.
    Populations are renormalised per row; the raw norm is kept in ``norm``.
    """
    if dt_max is not None and not dt_max > 0:
        raise ValueError(f"dt_max must be positive, got {dt_max!r}")
    times = check_start(c0, times)
    h = hamiltonian_matrix(spec, v, timescale)
    dt = dt_max if dt_max is not None else default_rk4_step(h)
    if not math.isfinite(dt):
        dt = max(float(times[-1] - c0.time), 1.0) if len(times) else 1.0
    amps = _core.rk4_propagate(h, c0.amplitudes, times, float(c0.time), float(dt))
    raw = np.abs(amps) ** 2
    norm = raw.sum(axis=1)
    meta = trajectory_metadata(spec, v, timescale, method="rk4", dt_max=float(dt),
                               backend=_core.BACKEND)
    return Trajectory(times, raw / norm[:, None], "quantum", timescale.unit, amplitudes=amps,
                      norm=norm, metadata=meta)


def quantum_energy(spec: AggregateSpec, v, amplitudes, timescale: TimeScale = FEMTOSECONDS):
    """<c|H|c> for each row of ``amplitudes`` (rad per time unit)."""
    h = hamiltonian_matrix(spec, v, timescale)
    a = np.atleast_2d(amplitudes)
    return np.real(np.einsum("ti,ij,tj->t", a.conj(), h, a))
