"""Acceptance criteria, each at its stated tolerance.

A failing criterion here is a measured fact about the model, not a bug to be
hidden: thresholds are never widened to force a pass.
"""

import math
import time

import numpy as np

from eetsim import (AggregateSpec, ChainScenario, FmoScenario, QuantumState, build_coupling,
                    chain_timescale, propagate_classical, propagate_classical_ode,
                    propagate_quantum, propagate_quantum_ode, quantum_to_classical_init,
                    run_chain, run_fmo, run_sweep)
from eetsim.analytics import (bessel_j, chain_analytic_trajectory, concurrence, escape_mass,
                              spread_velocity)
from eetsim.classical import classical_energy
from eetsim.hamiltonian import oscillator_map
from eetsim.quantum import quantum_energy
from eetsim.rca import quantum_second_order_terms, second_order_consistency

# Calibrated by brute-force runs of the bundled FMO data, initial monomer 1:
# realistic energies 4.882e-3, energies shifted by -12000 cm^-1 give 0.1790.
SINGLE_CURVE_THRESHOLD = 1e-2
FMO_SHIFT_FACTOR = 36.66
TAIL_WINDOW = 1e-10


def _chain(**kw):
    sc = ChainScenario(**kw)
    spec = sc.aggregate()
    v = build_coupling(spec)
    ts = chain_timescale(sc.coupling)
    c0 = QuantumState.localized(sc.n_sites, sc.start, time_unit="tau")
    return sc, spec, v, ts, c0


def test_criterion_1_bessel_oracle(measured):
    start = time.perf_counter()
    sc, spec, v, ts, c0 = _chain()
    taus = np.linspace(0.0, 6.0, 301)
    q = propagate_quantum(spec, v, c0, taus, ts)
    a = chain_analytic_trajectory(sc.n_sites, sc.start, taus)
    elapsed = time.perf_counter() - start
    dev = float(np.max(np.abs(q.populations - a.populations)))
    measured.update(max_dP=dev, runtime_s=elapsed)
    assert dev < 1e-6
    assert elapsed < 1.0


def test_criterion_2_weak_coupling_classical_matches_quantum(measured):
    start = time.perf_counter()
    res = run_chain(ChainScenario(v_over_eps=1 / 40, tau_max=8.0))
    elapsed = time.perf_counter() - start
    dev = res.reports["classical_vs_quantum"].max_pop_dev
    measured.update(max_dP=dev, runtime_s=elapsed)
    assert dev < 1e-2
    assert elapsed < 5.0


def test_criterion_3_deviation_grows_with_coupling(measured):
    grid = [1 / 160, 1 / 80, 1 / 40, 1 / 20, 1 / 6]
    points = run_sweep(grid)
    devs = [p.report.max_pop_dev for p in points]
    measured.update({f"dP(1/{round(1 / r)})": d for r, d in zip(grid, devs)})
    assert devs[-1] > devs[2]
    assert all(b > a for a, b in zip(devs, devs[1:]))


def test_criterion_4_spread_velocity(measured):
    sc = ChainScenario()
    res = run_chain(sc)
    fit = spread_velocity(res.trajectories["quantum"], sc.start, max_tail=TAIL_WINDOW)
    measured.update(slope=fit.slope, points=fit.n_points, tau_end=fit.t_end)
    assert abs(fit.slope - 1.0) <= 1e-3


def test_criterion_5_fmo(measured):
    start = time.perf_counter()
    real = run_fmo(FmoScenario(initial_site=1))
    shifted = run_fmo(FmoScenario(initial_site=1, energy_shift=-12000.0))
    elapsed = time.perf_counter() - start
    d_real = real.reports["classical_vs_quantum"].max_pop_dev
    d_shift = shifted.reports["classical_vs_quantum"].max_pop_dev
    pops = real.trajectories["quantum"].populations
    factor = d_shift / d_real
    measured.update(dP_real=d_real, dP_shifted=d_shift, factor=factor,
                    peak2=float(pops[:, 1].max()), peak3=float(pops[:, 2].max()),
                    runtime_s=elapsed)
    assert d_real < SINGLE_CURVE_THRESHOLD
    assert math.isclose(factor, FMO_SHIFT_FACTOR, rel_tol=1e-3)
    assert pops[:, 1].max() > pops[:, 2].max()
    assert elapsed < 5.0


def test_criterion_6_concurrence(measured):
    sc = ChainScenario()
    res = run_chain(sc)
    q = res.trajectories["quantum"]
    window = np.flatnonzero(escape_mass(res.trajectories["analytic"]) < TAIL_WINDOW)
    taus = q.times[window]
    oracle = np.abs([bessel_j(0, t) * bessel_j(1, t) for t in taus])
    i, j = sc.start, sc.start + 1
    dq = float(np.max(np.abs(concurrence(q, i, j).values[window] - oracle)))
    dc = float(np.max(np.abs(concurrence(res.trajectories["classical"], i, j).values[window]
                             - oracle)))
    measured.update(quantum=dq, classical=dc, tau_end=float(taus[-1]))
    assert dq < 1e-8
    assert dc < 1e-2


def test_criterion_7_conservation(measured):
    sc, spec, v, ts, c0 = _chain()
    taus = np.linspace(0.0, 8.0, 401)
    q = propagate_quantum(spec, v, c0, taus, ts)
    norm_dev = float(np.max(np.abs(np.sum(np.abs(q.amplitudes) ** 2, axis=1) - 1.0)))
    e_q = quantum_energy(spec, v, q.amplitudes, ts)
    eq_dev = float(np.max(np.abs(e_q - e_q[0])) / abs(e_q[0]))

    omap = oscillator_map(spec, v, ts)
    z0 = quantum_to_classical_init(c0)
    c = propagate_classical(spec, v, z0, taus, ts)
    e_c = classical_energy(omap, c.amplitudes.real, c.amplitudes.imag)
    ec_dev = float(np.max(np.abs(e_c - e_c[0])) / abs(e_c[0]))

    step = 3e-4 / float(np.max(omap.omega))
    sym_times = np.arange(1, 101) * (1000 * step)
    s = propagate_classical_ode(spec, v, z0, np.concatenate([[0.0], sym_times]), step, ts)
    e_s = classical_energy(omap, s.amplitudes.real, s.amplitudes.imag)
    es_dev = float(np.max(np.abs(e_s - e_s[0])) / abs(e_s[0]))

    sums = np.abs(c.populations.sum(axis=1) - 1.0)
    measured.update(norm=norm_dev, quantum_energy=eq_dev, classical_exact=ec_dev,
                    classical_verlet_1e5=es_dev, pop_sum=float(sums.max()))
    assert norm_dev < 1e-9
    assert eq_dev < 1e-9
    assert ec_dev < 1e-9
    assert es_dev < 1e-7
    # exact up to the round-off of summing n_sites terms
    assert sums.max() <= sc.n_sites * np.finfo(float).eps


def _random_aggregate(seed):
    rng = np.random.default_rng(seed)
    n = int(rng.integers(5, 11))
    eps = 12000.0 + rng.uniform(-300.0, 300.0, n)
    v = np.triu(rng.normal(0.0, 100.0, (n, n)), 1)
    return AggregateSpec(eps, explicit_coupling=v + v.T), int(rng.integers(n))


def test_criterion_8_integrators_agree(measured):
    times = np.linspace(0.0, 100.0, 51)
    worst_q = worst_c = 0.0
    for seed in range(100):
        spec, site = _random_aggregate(seed)
        v = build_coupling(spec)
        c0 = QuantumState.localized(spec.n_sites, site)
        a = propagate_quantum(spec, v, c0, times)
        b = propagate_quantum_ode(spec, v, c0, times)
        worst_q = max(worst_q, float(np.max(np.abs(a.populations - b.populations))))
        z0 = quantum_to_classical_init(c0)
        step = 5e-4 / float(np.max(oscillator_map(spec, v).omega))
        c = propagate_classical(spec, v, z0, times)
        d = propagate_classical_ode(spec, v, z0, times, dt_max=step)
        worst_c = max(worst_c, float(np.max(np.abs(c.populations - d.populations))))
    measured.update(spectral_vs_rk4=worst_q, eigensolve_vs_verlet=worst_c)
    assert worst_q < 1e-6
    assert worst_c < 1e-6


def test_criterion_9_second_order_residual(measured):
    sc, spec, v, ts, c0 = _chain()
    taus = np.linspace(0.0, 8.0, 81)
    check = second_order_consistency(spec, v, c0, taus, ts)
    q = propagate_quantum(spec, v, c0, taus, ts)
    detuning = quantum_second_order_terms(spec, v, q.amplitudes, ts)["detuning"]
    measured.update(rel_residual=check.max_rel_residual, abs_residual=check.max_abs_residual,
                    max_detuning=float(np.max(np.abs(detuning))))
    assert check.max_rel_residual < 1e-8
    assert np.all(detuning == 0.0)
