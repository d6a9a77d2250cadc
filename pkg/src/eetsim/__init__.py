"""Quantum and classical excitation-energy transfer in molecular aggregates."""

__version__ = "0.1.0"

from . import _core
from .analytics import (bessel_j, chain_analytic_trajectory, chain_populations_analytic,
                        concurrence, mean_square_displacement, spread_velocity)
from .classical import (ClassicalInstabilityError, classical_to_quantum, propagate_classical,
                        propagate_classical_ode, quantum_to_classical_init)
from .hamiltonian import CouplingMatrix, build_coupling, hamiltonian_matrix, oscillator_map
from .model import (AggregateSpec, ClassicalState, InvalidSpecError, QuantumState, Trajectory,
                    load_spec, validate)
from .quantum import propagate_quantum, propagate_quantum_ode
from .rca import DeviationReport, compare, propagate_rca, second_order_residuals
from .scenarios import ChainScenario, FmoScenario, load_fmo, run_chain, run_fmo, run_sweep
from .units import FEMTOSECONDS, TimeScale, chain_timescale, energy_to_angular_frequency

BACKEND = _core.BACKEND
