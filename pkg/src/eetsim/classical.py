"""Classical dipole-oscillator dynamics.

Each monomer is a harmonic oscillator of frequency w_n; oscillators couple
linearly in position. In the dimensionless coordinates (xtilde, ptilde) the
motion is generated by

    E = 1/2 sum_n w_n (ptilde_n^2 + xtilde_n^2) + sum_{n<m} 2 V_nm xtilde_n xtilde_m

which gives i dz_n/dt = w_n z_n + sum_m 2 V_nm Re(z_m) for z = xtilde + i ptilde.
The exact path solves the equivalent second-order system in mass-weighted
coordinates y_n = xtilde_n / sqrt(w_n), where the force matrix
Omega^2 + 2 sqrt(w_n w_m) V_nm is symmetric.
"""

from __future__ import annotations

import math
from typing import Optional

import numpy as np

from . import _core
from .hamiltonian import OscillatorMap, oscillator_map
from .model import (AggregateSpec, ClassicalState, QuantumState, Trajectory,
                    populations_from_amplitudes, trajectory_metadata)
from .quantum import SpectralDecomposition, diagonalize
from .units import FEMTOSECONDS, TimeScale


class ClassicalInstabilityError(ArithmeticError):
    """The force matrix has a non-positive eigenvalue: some normal mode is unbound."""

    def __init__(self, eigenvalue: float):
        self.eigenvalue = eigenvalue
        super().__init__(f"classical oscillator network is unstable: force-matrix eigenvalue "
                         f"{eigenvalue:.6g} <= 0 (coupling too strong for the site frequencies)")


def quantum_to_classical_init(c0: QuantumState) -> ClassicalState:
    """xtilde = Re c, ptilde = Im c."""
    if abs(c0.norm - 1.0) > 1e-10:
        raise ValueError(f"initial state must be normalised (norm {c0.norm:.17g})")
    c = c0.amplitudes
    return ClassicalState(c.real, c.imag, c0.time, c0.time_unit)


def classical_to_quantum(state: ClassicalState) -> QuantumState:
    """Read a classical state as quantum amplitudes, normalised to unit norm."""
    z = state.z
    return QuantumState(z / np.linalg.norm(z), state.time, state.time_unit)


def classical_energy(omap: OscillatorMap, xtilde, ptilde) -> np.ndarray:
    """Total oscillator energy (hbar = 1, rad per time unit) for rows of x, p."""
    x = np.atleast_2d(xtilde)
    p = np.atleast_2d(ptilde)
    w = omap.omega
    e = 0.5 * np.sum(w * (p**2 + x**2), axis=1)
    return e + np.einsum("ti,ij,tj->t", x, omap.coupling, x)


def verlet_shadow_energy(omap: OscillatorMap, xtilde, ptilde, step: float) -> np.ndarray:
    """Quadratic form conserved exactly by the kick-drift-kick Verlet map.

    For H = 1/2 p.A.p + 1/2 x.B.x this is H - (step^2 / 8) x.B.A.B.x.
    """
    x = np.atleast_2d(xtilde)
    p = np.atleast_2d(ptilde)
    a = np.diag(omap.omega)
    b = a + 2.0 * omap.coupling
    m = b - 0.25 * step**2 * (b @ a @ b)
    return 0.5 * np.einsum("ti,ij,tj->t", p, a, p) + 0.5 * np.einsum("ti,ij,tj->t", x, m, x)


def force_decomposition(omap: OscillatorMap) -> SpectralDecomposition:
    """Eigendecomposition of the mass-weighted force matrix, checked for stability."""
    dec = diagonalize(omap.stiffness())
    lowest = float(dec.eigenvalues[0])
    if not lowest > 0:
        raise ClassicalInstabilityError(lowest)
    return dec


def solve_second_order(dec: SpectralDecomposition, y0, ydot0, elapsed):
    """y(t), y'(t) for y'' = -S y given the eigendecomposition of S.

    Works for real or complex initial data; ``elapsed`` is a vector of times
    since the initial point.
    """
    u = dec.eigenvectors
    freq = np.sqrt(dec.eigenvalues)
    a = u.T @ y0
    b = (u.T @ ydot0) / freq
    wt = np.outer(elapsed, freq)
    cos, sin = np.cos(wt), np.sin(wt)
    y = (a * cos + b * sin) @ u.T
    ydot = (freq * (b * cos - a * sin)) @ u.T
    return y, ydot


def _check_times(z0, times):
    times = np.asarray(times, dtype=float)
    if times.ndim != 1 or (len(times) > 1 and np.any(np.diff(times) <= 0)):
        raise ValueError("times must be a strictly increasing vector")
    if len(times) and times[0] < z0.time:
        raise ValueError("times must not precede the initial state's time")
    return times


def _trajectory(spec, v, times, x, p, timescale, **settings) -> Trajectory:
    z = x + 1j * p
    pops, norm = populations_from_amplitudes(z)
    meta = trajectory_metadata(spec, v, timescale, normalization="instantaneous", **settings)
    return Trajectory(times, pops, "classical", timescale.unit, amplitudes=z, norm=norm,
                      metadata=meta)


def propagate_classical(spec: AggregateSpec, v, z0: ClassicalState, times,
                        timescale: TimeScale = FEMTOSECONDS) -> Trajectory:
    """Exact evolution of the full classical oscillator equations.

    Populations are |z_n|^2 / sum_m |z_m|^2 at each time; the raw sum is kept
    in ``Trajectory.norm``. Raises :class:`ClassicalInstabilityError` when the
    coupling makes a normal mode unbound.
    """
    times = _check_times(z0, times)
    omap = oscillator_map(spec, v, timescale)
    dec = force_decomposition(omap)
    sw = np.sqrt(omap.omega)
    y, ydot = solve_second_order(dec, z0.xtilde / sw, z0.ptilde * sw, times - z0.time)
    return _trajectory(spec, v, times, y * sw, ydot / sw, timescale, method="normal-modes",
                       sweeps=dec.sweeps)


def default_verlet_step(omap: OscillatorMap) -> float:
    """One two-hundredth of the shortest site period."""
    return (2.0 * math.pi / float(np.max(omap.omega))) / 200.0


def propagate_classical_ode(spec: AggregateSpec, v, z0: ClassicalState, times,
                            dt_max: Optional[float] = None,
                            timescale: TimeScale = FEMTOSECONDS) -> Trajectory:
    """Velocity-Verlet integration of the same equations as :func:`propagate_classical`."""
    if dt_max is not None and not dt_max > 0:
        raise ValueError(f"dt_max must be positive, got {dt_max!r}")
    times = _check_times(z0, times)
    omap = oscillator_map(spec, v, timescale)
    dt = dt_max if dt_max is not None else default_verlet_step(omap)
    b = np.diag(omap.omega) + 2.0 * omap.coupling
    x, p = _core.verlet_propagate(omap.omega, b, z0.xtilde, z0.ptilde, times,
                                  float(z0.time), float(dt))
    return _trajectory(spec, v, times, x, p, timescale, method="velocity-verlet",
                       dt_max=float(dt), backend=_core.BACKEND)
