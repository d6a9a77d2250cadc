import math

import mpmath
import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from eetsim.analytics import (MAX_ARGUMENT, bessel_j, bessel_j_orders, chain_analytic_trajectory,
                              chain_populations_analytic, concurrence, escape_mass,
                              mean_square_displacement, spread_velocity)
from eetsim.model import Trajectory


def test_values_at_origin():
    assert bessel_j(0, 0.0) == 1.0
    for n in (1, 2, 7, -3):
        assert bessel_j(n, 0.0) == 0.0


def test_power_series_oracle():
    # J_1(2) from 40 terms of sum (-1)^k (x/2)^(2k+1) / (k! (k+1)!)
    series = math.fsum((-1) ** k / (math.factorial(k) * math.factorial(k + 1)) for k in range(40))
    assert bessel_j(1, 2.0) == pytest.approx(series, abs=1e-14)
    assert series == pytest.approx(0.5767248078, abs=1e-10)


@settings(max_examples=60, deadline=None)
@given(st.integers(-60, 60), st.floats(0.0, 80.0))
def test_against_mpmath(n, x):
    assert abs(bessel_j(n, x) - float(mpmath.besselj(n, x))) < 1e-12


@pytest.mark.parametrize("x", [5e-324, 1e-300, 1e-12, 9.99e-4, 1.001e-3, 0.01])
def test_small_arguments(x):
    j = bessel_j_orders(5, x)
    ref = [float(mpmath.besselj(n, x)) for n in range(6)]
    np.testing.assert_allclose(j, ref, rtol=1e-13, atol=1e-300)


def test_large_argument_and_order():
    for n, x in [(0, 500.0), (200, 500.0), (200, 150.0), (137, 499.9)]:
        assert abs(bessel_j(n, x) - float(mpmath.besselj(n, x))) < 1e-12


@pytest.mark.parametrize("x", [0.5, 3.0, 10.0, 120.0, MAX_ARGUMENT])
def test_sum_rule(x):
    j = bessel_j_orders(int(x) + 60, x)
    total = j[0] ** 2 + 2 * np.sum(j[1:] ** 2)
    assert abs(total - 1.0) < 1e-12


@settings(max_examples=30, deadline=None)
@given(st.floats(0.1, 100.0), st.integers(1, 120))
def test_recurrence(x, n):
    j = bessel_j_orders(n + 1, x)
    assert abs(j[n - 1] + j[n + 1] - 2 * n / x * j[n]) < 1e-10 * max(1.0, 2 * n / x)


def test_negative_order_sign():
    assert bessel_j(-3, 2.5) == pytest.approx(-bessel_j(3, 2.5))
    assert bessel_j(-4, 2.5) == pytest.approx(bessel_j(4, 2.5))


def test_domain_limits():
    with pytest.raises(ValueError):
        bessel_j(201, 1.0)
    with pytest.raises(ValueError):
        bessel_j(1, -0.1)
    with pytest.raises(ValueError):
        bessel_j(1, 501.0)


def test_start_is_localized():
    sol = chain_populations_analytic(11, 5, 0.0)
    np.testing.assert_array_equal(sol.populations[0], np.eye(11)[5])


def test_symmetric_about_origin():
    sol = chain_populations_analytic(21, 10, np.linspace(0, 5, 11))
    np.testing.assert_allclose(sol.populations, sol.populations[:, ::-1], atol=1e-15)


def test_phase_convention():
    # amplitudes (-i)^k J_k solve i dc_n/dtau = (c_{n-1} + c_{n+1}) / 2
    taus = np.array([0.7, 0.7 + 1e-5, 0.7 - 1e-5])
    a = chain_populations_analytic(41, 20, taus).amplitudes
    deriv = (a[1] - a[2]) / 2e-5
    rhs = -0.5j * (np.roll(a[0], 1) + np.roll(a[0], -1))
    assert np.max(np.abs(deriv - rhs)[1:-1]) < 1e-8


def test_sums_to_one_when_tail_negligible():
    sol = chain_populations_analytic(61, 30, [2.0, 5.0])
    assert np.all(sol.tail_mass < 1e-14)
    np.testing.assert_allclose(sol.populations.sum(axis=1), 1.0, atol=1e-12)


def test_mean_square_displacement_identity():
    # sum_k k^2 J_k(x)^2 = x^2 / 2
    for x in (0.5, 1.0, 3.0):
        s = float(mpmath.nsum(lambda k: k**2 * mpmath.besselj(k, x) ** 2, [-mpmath.inf, mpmath.inf]))
        assert s == pytest.approx(x * x / 2, rel=1e-12)
    n = 201
    taus = np.linspace(0, (n - 1) / 4, 50)
    sol = chain_populations_analytic(n, 100, taus)
    msd = mean_square_displacement(sol.populations, 100)
    assert np.max(np.abs(msd - taus**2 / 2)) < 1e-10 * max(1.0, taus[-1] ** 2)


def test_mean_square_displacement_short_chain():
    # on 19 sites the identity holds while the truncated tail is negligible
    taus = np.linspace(0, 2.0, 41)
    sol = chain_populations_analytic(19, 9, taus)
    msd = mean_square_displacement(sol.populations, 9)
    assert np.max(np.abs(msd - taus**2 / 2)) < 1e-10


def test_velocity_of_analytic_solution():
    taus = np.linspace(0, 20, 201)
    traj = chain_analytic_trajectory(201, 100, taus)
    fit = spread_velocity(traj, 100)
    assert fit.slope == pytest.approx(1 / math.sqrt(2), abs=1e-6)
    assert fit.residual < 1e-8


def test_velocity_uses_tail_window():
    taus = np.linspace(0, 8, 401)
    traj = chain_analytic_trajectory(19, 9, taus)
    fit = spread_velocity(traj, 9)
    assert fit.t_end < 4.0
    assert np.all(escape_mass(traj)[: fit.n_points] < 1e-10)


def test_velocity_zero_without_coupling():
    t = np.linspace(0, 5, 20)
    p = np.zeros((20, 5))
    p[:, 2] = 1.0
    fit = spread_velocity(Trajectory(t, p, "quantum"), 2)
    assert fit.slope == 0.0


def test_velocity_too_short():
    t = np.linspace(0, 1, 4)
    p = np.tile(np.eye(3)[1], (4, 1))
    with pytest.raises(ValueError):
        spread_velocity(Trajectory(t, p, "quantum"), 1)


def test_concurrence_product_of_bessels():
    taus = np.linspace(0, 3, 31)
    traj = chain_analytic_trajectory(41, 20, taus)
    c = concurrence(traj, 20, 21)
    expected = np.abs([bessel_j(0, t) * bessel_j(1, t) for t in taus])
    np.testing.assert_allclose(c.values, expected, atol=1e-14)
    assert c.values[0] == 0.0
    assert not c.is_population
    np.testing.assert_array_equal(concurrence(traj, 21, 20).values, c.values)


def test_concurrence_peak_location():
    taus = np.linspace(0.9, 1.3, 40001)
    vals = np.abs([bessel_j(0, t) * bessel_j(1, t) for t in taus[::100]])
    coarse = taus[::100][np.argmax(vals)]
    assert abs(coarse - 1.08) < 0.01


def test_concurrence_diagonal_flagged():
    traj = chain_analytic_trajectory(11, 5, [0.0, 1.0])
    c = concurrence(traj, 5, 5)
    assert c.is_population
    np.testing.assert_allclose(c.values, traj.populations[:, 5])


def test_concurrence_from_populations_only():
    traj = chain_analytic_trajectory(11, 5, [0.0, 1.0])
    bare = Trajectory(traj.times, traj.populations, "analytic", "tau", tail_mass=traj.tail_mass)
    np.testing.assert_allclose(concurrence(bare, 5, 6).values, concurrence(traj, 5, 6).values)
