"""Analytic chain solution and observables.

For a uniform nearest-neighbour chain started on one site, the amplitudes are
Bessel functions of the dimensionless time tau, P_k(tau) = J_k(tau)^2 for a
site k steps from the start, and the spread grows ballistically:
sum_k k^2 J_k(tau)^2 = tau^2 / 2, so sqrt(<k^2>) = tau / sqrt(2).
The Bessel values come from Miller's backward recurrence.
"""

from __future__ import annotations

import math
from typing import NamedTuple

import numpy as np

from . import _core
from .model import Trajectory

MAX_ORDER = 200
MAX_ARGUMENT = 500.0
_AGREEMENT = 1e-13
# Below this argument the recurrence's 2k/x factors overflow; four series terms
# are then accurate far beyond double precision.
_SERIES_BELOW = 1e-3


def _check_domain(n: int, x: float, max_order: int = MAX_ORDER) -> None:
    if abs(n) > max_order:
        raise ValueError(f"Bessel order {n} outside validated range |n| <= {max_order}")
    if not 0.0 <= x <= MAX_ARGUMENT:
        raise ValueError(f"Bessel argument {x} outside validated range [0, {MAX_ARGUMENT}]")


def _small_argument_series(nmax: int, x: float) -> np.ndarray:
    out = np.zeros(nmax + 1)
    if x == 0.0:
        out[0] = 1.0
        return out
    q = -0.25 * x * x  # may underflow to 0, which is harmless
    for n in range(nmax + 1):
        log_lead = n * (math.log(x) - math.log(2.0)) - math.lgamma(n + 1)
        if log_lead < -745.0:
            break
        term, total = 1.0, 1.0
        for k in range(1, 4):
            term *= q / (k * (n + k))
            total += term
        out[n] = math.exp(log_lead) * total
    return out


def bessel_j_orders(nmax: int, x: float) -> np.ndarray:
    """J_0(x) .. J_nmax(x).

    The recurrence starts at order max(nmax, ceil(x)) + 40; the start order is
    doubled until two successive runs agree to 1e-13. Orders beyond
    ``MAX_ORDER`` are allowed here (sum rules need them) up to
    ``2 * (MAX_ORDER + MAX_ARGUMENT)``.
    """
    _check_domain(nmax, x, max_order=int(2 * (MAX_ORDER + MAX_ARGUMENT)))
    if nmax < 0:
        raise ValueError("nmax must be non-negative")
    x = float(x)
    if x < _SERIES_BELOW:
        return _small_argument_series(nmax, x)
    start = max(nmax, math.ceil(x)) + 40
    prev = _core.bessel_miller(x, nmax, start)
    while True:
        start *= 2
        cur = _core.bessel_miller(x, nmax, start)
        if np.max(np.abs(cur - prev)) < _AGREEMENT:
            return cur
        if start > 64 * (MAX_ORDER + MAX_ARGUMENT):
            raise ArithmeticError(f"Miller recurrence did not settle for x={x}, nmax={nmax}")
        prev = cur


def bessel_j(n: int, x: float) -> float:
    """Bessel function of the first kind of integer order, J_{-n} = (-1)^n J_n."""
    n = int(n)
    _check_domain(n, x)
    value = float(bessel_j_orders(abs(n), x)[abs(n)])
    return -value if n < 0 and n % 2 else value


class ChainSolution(NamedTuple):
    populations: np.ndarray  # (time, site)
    amplitudes: np.ndarray  # (time, site), no on-site phase
    tail_mass: np.ndarray  # probability beyond the chain ends


def chain_populations_analytic(n_sites: int, origin: int, tau, coupling_sign: int = 1):
    """Infinite-chain solution restricted to ``n_sites`` sites.

    Amplitudes are (-i s)^k J_k(tau) with k = n - origin and s the sign of
    the coupling, i.e. the solution of i dc_n/dtau = s/2 (c_{n-1} + c_{n+1})
    without the common on-site phase.
    """
    if not 0 <= origin < n_sites:
        raise ValueError(f"origin {origin} outside chain of {n_sites} sites")
    taus = np.atleast_1d(np.asarray(tau, dtype=float))
    if np.any(taus < 0):
        raise ValueError("tau must be non-negative")
    k = np.arange(n_sites) - origin
    kmax = int(np.max(np.abs(k)))
    sign = np.where((k < 0) & (k % 2 == 1), -1.0, 1.0)
    phase = (-1j * (1 if coupling_sign >= 0 else -1)) ** k
    amps = np.empty((len(taus), n_sites), dtype=complex)
    for i, t in enumerate(taus):
        j = bessel_j_orders(kmax, t)
        amps[i] = phase * sign * j[np.abs(k)]
    pops = np.abs(amps) ** 2
    tail = np.clip(1.0 - pops.sum(axis=1), 0.0, None)
    return ChainSolution(pops, amps, tail)


def chain_analytic_trajectory(n_sites: int, origin: int, taus) -> Trajectory:
    sol = chain_populations_analytic(n_sites, origin, taus)
    return Trajectory(np.asarray(taus, dtype=float), sol.populations, "analytic", "tau",
                      amplitudes=sol.amplitudes, tail_mass=sol.tail_mass,
                      metadata={"origin": origin, "n_sites": n_sites})


def mean_square_displacement(populations, origin: int) -> np.ndarray:
    """<(n - origin)^2> for each row of a population matrix."""
    p = np.atleast_2d(populations)
    k = np.arange(p.shape[1]) - origin
    return p @ (k.astype(float) ** 2)


def escape_mass(traj: Trajectory) -> np.ndarray:
    """Probability that has reached the chain ends or beyond, per time."""
    edge = traj.populations[:, 0] + traj.populations[:, -1]
    if traj.tail_mass is not None:
        edge = edge + traj.tail_mass
    return edge


class VelocityFit(NamedTuple):
    slope: float
    residual: float
    n_points: int
    t_end: float


def spread_velocity(traj: Trajectory, origin: int, max_tail: float = 1e-10) -> VelocityFit:
    """Least-squares slope through the origin of sqrt(<(n - origin)^2>) against time.

    Only the leading stretch of times where :func:`escape_mass` stays below
    ``max_tail`` is used, so finite-chain reflections do not bias the fit.
    The slope is in sites per time unit; for the infinite chain in tau units
    it is 1/sqrt(2).
    """
    esc = escape_mass(traj)
    bad = np.flatnonzero(esc >= max_tail)
    stop = bad[0] if len(bad) else len(esc)
    if stop < 5:
        raise ValueError(f"only {stop} time points before the spread reaches the chain ends; "
                         "need at least 5")
    t = traj.times[:stop]
    r = np.sqrt(mean_square_displacement(traj.populations[:stop], origin))
    denom = float(t @ t)
    slope = float(t @ r) / denom if denom > 0 else 0.0
    residual = float(np.sqrt(np.mean((r - slope * t) ** 2)))
    return VelocityFit(slope, residual, int(stop), float(t[-1]))


class Concurrence(NamedTuple):
    values: np.ndarray
    is_population: bool


def concurrence(traj: Trajectory, i: int, j: int) -> Concurrence:
    """|rho_ij(t)| = |c_i^* c_j| from normalised amplitudes.

    Classical trajectories use z scaled by the same instantaneous norm as the
    populations. With ``i == j`` the population is returned and flagged.
    """
    amps = traj.normalized_amplitudes()
    if amps is None:
        vals = np.sqrt(traj.populations[:, i] * traj.populations[:, j])
    else:
        vals = np.abs(np.conj(amps[:, i]) * amps[:, j])
    return Concurrence(vals, i == j)
