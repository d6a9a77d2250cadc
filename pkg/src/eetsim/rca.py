"""Second-order forms of the quantum and classical equations, the truncated
(realistic coupling) dynamics, and quantum/classical deviation metrics.

Differentiating the amplitude equations once more gives, with W = 2V:

quantum    c'' = -w^2 c - w W c - D c - V V c
classical  z'' = -w^2 z - w W z - 2i D p

where (D c)_n = sum_m (w_m - w_n) V_nm c_m is the detuning coupling and
p = Im z. Dropping the last two quantum terms (or the last classical one)
leaves the same equation for both, which is what :func:`propagate_rca` solves.
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass

import numpy as np

from .classical import force_decomposition, solve_second_order
from .hamiltonian import hamiltonian_matrix, oscillator_map
from .model import (AggregateSpec, QuantumState, Trajectory, populations_from_amplitudes,
                    trajectory_metadata)
from .quantum import check_start, diagonalize
from .units import FEMTOSECONDS, TimeScale


class GridMismatchError(ValueError):
    pass


def propagate_rca(spec: AggregateSpec, v, c0: QuantumState, times,
                  timescale: TimeScale = FEMTOSECONDS) -> Trajectory:
    """Exact solution of c'' = -w^2 c - w (2V) c.

    Starts from c(0) = c0 and c'(0) = -i H c0, the slope the amplitude
    equations give. Populations are normalised per time like the classical ones.
    """
    times = check_start(c0, times)
    omap = oscillator_map(spec, v, timescale)
    dec = force_decomposition(omap)
    h = hamiltonian_matrix(spec, v, timescale)
    c = c0.amplitudes
    cdot = -1j * (h @ c)
    sw = np.sqrt(omap.omega)
    y, _ = solve_second_order(dec, c / sw, cdot / sw, times - c0.time)
    amps = y * sw
    pops, norm = populations_from_amplitudes(amps)
    meta = trajectory_metadata(spec, v, timescale, method="normal-modes", sweeps=dec.sweeps,
                               normalization="instantaneous")
    return Trajectory(times, pops, "rca", timescale.unit, amplitudes=amps, norm=norm,
                      metadata=meta)


def _frequencies(spec, v, timescale):
    w = timescale.frequencies(spec.site_energies)
    vw = timescale.frequencies(np.asarray(v))
    return w, vw


def _detuning_matrix(w, vw):
    return (w[None, :] - w[:, None]) * vw


def quantum_second_order_terms(spec, v, amps, timescale: TimeScale = FEMTOSECONDS) -> dict:
    """The four right-hand-side terms of the quantum second-order equation, per time and site."""
    w, vw = _frequencies(spec, v, timescale)
    a = np.atleast_2d(amps)
    return {
        "leading": -(w**2) * a,
        "coupling": -w * (a @ (2.0 * vw).T),
        "detuning": -(a @ _detuning_matrix(w, vw).T),
        "quadratic": -(a @ (vw @ vw).T),
    }


def classical_second_order_terms(spec, v, z, timescale: TimeScale = FEMTOSECONDS) -> dict:
    """The three right-hand-side terms of the classical second-order equation."""
    w, vw = _frequencies(spec, v, timescale)
    z = np.atleast_2d(z)
    return {
        "leading": -(w**2) * z,
        "coupling": -w * (z @ (2.0 * vw).T),
        "detuning": -2j * (z.imag @ _detuning_matrix(w, vw).T),
    }


@dataclass(frozen=True)
class SecondOrderTerms:
    """Time-averaged sizes (site-vector 2-norms) of the second-order terms."""

    kind: str
    magnitudes: dict

    def ratio(self, term: str, reference: str = "coupling") -> float:
        ref = self.magnitudes[reference]
        return self.magnitudes[term] / ref if ref > 0 else math.inf


def _timescale_of(traj: Trajectory) -> TimeScale:
    factor = traj.metadata.get("rad_per_wavenumber")
    if factor is None:
        raise ValueError("trajectory metadata lacks 'rad_per_wavenumber'")
    return TimeScale(traj.time_unit, float(factor))


def second_order_residuals(traj: Trajectory, spec: AggregateSpec, v) -> SecondOrderTerms:
    """Average magnitude of each second-order term along a trajectory.

    Quantum and RCA trajectories are evaluated with the four quantum terms,
    classical ones with the three classical terms.
    """
    if traj.amplitudes is None:
        raise ValueError("trajectory carries no amplitudes")
    ts = _timescale_of(traj)
    if traj.label == "classical":
        terms = classical_second_order_terms(spec, v, traj.amplitudes, ts)
    else:
        terms = quantum_second_order_terms(spec, v, traj.amplitudes, ts)
    mags = {k: float(np.mean(np.linalg.norm(t, axis=1))) for k, t in terms.items()}
    return SecondOrderTerms(traj.label, mags)


# Central 9-point stencil for f'' (eighth order).
_FD_OFFSETS = np.arange(-4, 5)
_FD_WEIGHTS = np.array([-1 / 560, 8 / 315, -1 / 5, 8 / 5, -205 / 72, 8 / 5, -1 / 5, 8 / 315,
                        -1 / 560])


@dataclass(frozen=True)
class SecondOrderCheck:
    max_abs_residual: float
    max_rel_residual: float
    step: float
    scale: float


def second_order_consistency(spec: AggregateSpec, v, c0: QuantumState, times,
                             timescale: TimeScale = FEMTOSECONDS) -> SecondOrderCheck:
    """Compare a finite-difference c'' of the exact amplitudes with the four-term sum.

    The step is 1e-3 of the fastest eigen-period; stencil points are reached
    by propagating each sample by small offsets so phase round-off stays at
    the size of the offsets. The relative residual divides by the largest
    |w_n^2 c_n| on the grid.
    """
    times = check_start(c0, times)
    h = hamiltonian_matrix(spec, v, timescale)
    dec = diagonalize(h)
    q, lam = dec.eigenvectors, dec.eigenvalues
    step = 1e-3 * 2.0 * math.pi / float(np.max(np.abs(lam)))
    base = (np.exp(-1j * np.outer(times - c0.time, lam)) * (q.T @ c0.amplitudes))
    shifts = np.exp(-1j * np.outer(_FD_OFFSETS * step, lam))
    # samples[k, t, :] = c(t + offset_k * step)
    samples = np.einsum("kl,tl,nl->ktn", shifts, base, q)
    cdd = np.tensordot(_FD_WEIGHTS, samples, axes=1) / step**2
    amps = samples[4]
    terms = quantum_second_order_terms(spec, v, amps, timescale)
    rhs = sum(terms.values())
    resid = np.abs(cdd - rhs)
    scale = float(np.max(np.abs(terms["leading"])))
    return SecondOrderCheck(float(resid.max()), float(resid.max() / scale), step, scale)


@dataclass(frozen=True)
class DeviationReport:
    max_pop_dev: float
    mean_pop_dev: float
    max_coherence_dev: float
    per_site_dev: tuple
    coupling_ratio: float

    def to_dict(self) -> dict:
        d = asdict(self)
        d["per_site_dev"] = list(self.per_site_dev)
        return d

    @classmethod
    def from_dict(cls, d: dict) -> "DeviationReport":
        return cls(float(d["max_pop_dev"]), float(d["mean_pop_dev"]),
                   float(d["max_coherence_dev"]), tuple(float(x) for x in d["per_site_dev"]),
                   float(d["coupling_ratio"]) if d["coupling_ratio"] is not None else math.nan)


def _bilinears(traj: Trajectory) -> np.ndarray:
    amps = traj.normalized_amplitudes()
    if amps is None:
        a = np.sqrt(traj.populations)
        return a[:, :, None] * a[:, None, :]
    m = np.abs(amps)
    return m[:, :, None] * m[:, None, :]


def compare(traj_a: Trajectory, traj_b: Trajectory) -> DeviationReport:
    """Population and coherence deviations between two trajectories on the same grid."""
    if traj_a.populations.shape != traj_b.populations.shape:
        raise GridMismatchError(f"shape mismatch: {traj_a.populations.shape} vs "
                                f"{traj_b.populations.shape}")
    if not np.allclose(traj_a.times, traj_b.times, rtol=1e-12, atol=1e-12):
        raise GridMismatchError("time grids differ")
    dp = np.abs(traj_a.populations - traj_b.populations)
    dc = np.abs(_bilinears(traj_a) - _bilinears(traj_b))
    n = dp.shape[1]
    off = ~np.eye(n, dtype=bool)
    max_coh = float(dc[:, off].max()) if n > 1 and dp.size else 0.0
    ratios = [t.metadata.get("coupling_ratio") for t in (traj_a, traj_b)]
    ratios = [r for r in ratios if r is not None]
    return DeviationReport(
        max_pop_dev=float(dp.max()) if dp.size else 0.0,
        mean_pop_dev=float(dp.mean()) if dp.size else 0.0,
        max_coherence_dev=max_coh,
        per_site_dev=tuple(float(x) for x in (dp.max(axis=0) if dp.size else np.zeros(n))),
        coupling_ratio=float(max(ratios)) if ratios else math.nan,
    )


def rca_sweep_grid(n_points: int = 9, lo: float = 1 / 160, hi: float = 1 / 2) -> np.ndarray:
    """Logarithmic grid of coupling-to-energy ratios."""
    return np.geomspace(lo, hi, n_points)


def detuning_slope(deltas, deviations) -> tuple[float, float]:
    """Least-squares line through (detuning, deviation); returns slope and R^2."""
    x = np.asarray(deltas, dtype=float)
    y = np.asarray(deviations, dtype=float)
    a = np.vstack([x, np.ones_like(x)]).T
    coef, *_ = np.linalg.lstsq(a, y, rcond=None)
    fit = a @ coef
    ss_res = float(np.sum((y - fit) ** 2))
    ss_tot = float(np.sum((y - y.mean()) ** 2))
    return float(coef[0]), 1.0 - ss_res / ss_tot if ss_tot > 0 else 1.0
