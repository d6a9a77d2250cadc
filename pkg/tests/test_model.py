import json

import numpy as np
import pytest

from eetsim.model import (AggregateSpec, ClassicalState, InvalidSpecError, QuantumState,
                          Trajectory, dump_spec, load_spec, populations_from_amplitudes, validate)


def dimer_geometry(**kw):
    base = dict(site_energies=[12000.0, 12100.0], dipole_magnitudes=[1.0, 1.0],
                dipole_orientations=[[0, 0, 1], [0, 0, 1]], positions=[[0, 0, 0], [1, 0, 0]])
    base.update(kw)
    return AggregateSpec(**base)


def test_well_formed_geometry_validates():
    report = validate(dimer_geometry())
    assert report.ok
    assert len(report) == 0


def test_zero_orientation_named():
    report = validate(dimer_geometry(dipole_orientations=[[0, 0, 1], [0, 0, 0]]))
    assert not report.ok
    assert any("site 1" in v and "orientation" in v for v in report)


def test_asymmetric_explicit_coupling():
    v = np.array([[0.0, 50.0], [50.001, 0.0]])
    report = validate(AggregateSpec([12000.0, 12000.0], explicit_coupling=v))
    assert any("symmetric" in msg and "V[" in msg for msg in report.violations)


def test_other_violations():
    assert not validate(AggregateSpec([12000.0, -1.0], explicit_coupling=np.zeros((2, 2)))).ok
    assert not validate(AggregateSpec([12000.0, 12000.0], explicit_coupling=np.eye(2))).ok
    assert not validate(AggregateSpec([12000.0, 12000.0], explicit_coupling=np.zeros((3, 3)))).ok
    assert not validate(AggregateSpec([12000.0, 12000.0])).ok
    assert not validate(dimer_geometry(positions=[[0, 0, 0], [0, 0, 0]])).ok


def test_both_modes_warns():
    spec = dimer_geometry(explicit_coupling=np.zeros((2, 2)))
    report = validate(spec)
    assert report.ok and report.warnings
    assert spec.mode == "explicit"


def test_spec_json_round_trip(tmp_path):
    spec = dimer_geometry()
    path = tmp_path / "spec.json"
    dump_spec(spec, path)
    back = load_spec(path)
    assert back.digest() == spec.digest()
    np.testing.assert_array_equal(back.positions, spec.positions)


def test_spec_schema_checked(tmp_path):
    d = dimer_geometry().to_dict()
    d["schema"] = 99
    path = tmp_path / "spec.json"
    path.write_text(json.dumps(d))
    with pytest.raises(InvalidSpecError):
        load_spec(path)


def test_spec_is_immutable():
    spec = dimer_geometry()
    with pytest.raises(ValueError):
        spec.site_energies[0] = 1.0
    shifted = spec.with_energy_shift(-100.0)
    np.testing.assert_allclose(shifted.site_energies, [11900.0, 12000.0])
    assert shifted.digest() != spec.digest()


def test_quantum_state():
    c = QuantumState.localized(3, 1)
    assert c.norm == 1.0
    assert c.amplitudes[1] == 1.0


def test_classical_state_checks():
    z = ClassicalState([1.0, 0.0], [0.0, 0.5])
    np.testing.assert_array_equal(z.z, [1.0, 0.5j])
    with pytest.raises(ValueError):
        ClassicalState([1.0], [0.0, 0.0])
    with pytest.raises(ValueError):
        ClassicalState([np.nan], [0.0])


def test_trajectory_invariants():
    t = np.array([0.0, 1.0])
    p = np.array([[1.0, 0.0], [0.5, 0.5]])
    traj = Trajectory(t, p, "quantum")
    assert traj.n_sites == 2
    with pytest.raises(ValueError):
        Trajectory(t, p, "other")
    with pytest.raises(ValueError):
        Trajectory(t[::-1], p, "quantum")
    with pytest.raises(ValueError):
        Trajectory(t, p * 0.9, "quantum")
    with pytest.raises(ValueError):
        Trajectory(t, p[:1], "quantum")
    tail = Trajectory(t, p * 0.9, "analytic", tail_mass=[0.1, 0.1])
    assert tail.window(0.5).times.tolist() == [0.0]


def test_populations_from_amplitudes():
    amps = np.array([[2.0, 0.0], [1.0, 1.0j]])
    pops, norm = populations_from_amplitudes(amps)
    np.testing.assert_allclose(pops, [[1.0, 0.0], [0.5, 0.5]])
    np.testing.assert_allclose(norm, [4.0, 2.0])
