import numpy as np
import pytest

from atomchain import dynamics, exact, fermion, protocols
from atomchain.errors import NotFermionizableError, NumericalError, OutOfRangeError
from atomchain.model import ChainConfig, CouplingFrame, RampSegment, Schedule


def ground(frame):
    return fermion.ground_covariance(fermion.build_majorana_matrix(frame))


def random_ramp(seed, N=5, T=3.0, sign=-1.0):
    rng = np.random.default_rng(seed)
    a = CouplingFrame(rng.uniform(1.5, 3, N), np.zeros(N), sign * rng.uniform(0, 1, N - 1))
    b = CouplingFrame(rng.uniform(-1, 3, N), np.zeros(N), sign * rng.uniform(0, 2, N - 1))
    return Schedule(ChainConfig(N, "ferro" if sign < 0 else "antiferro"), (RampSegment(a, b, T),))


def test_propagator_identity_for_empty_interval():
    s = random_ramp(0)
    np.testing.assert_array_equal(dynamics.propagator(s, 1.0, 1.0), np.eye(10))


def test_propagator_is_orthogonal():
    O = dynamics.propagator(random_ramp(1), 0.0, 3.0, dt=0.05)
    assert np.max(np.abs(O @ O.T - np.eye(10))) < 1e-13
    assert np.linalg.det(O) == pytest.approx(1.0)


def test_propagator_requires_fermionizable_and_forward():
    s = random_ramp(0)
    with pytest.raises(OutOfRangeError):
        dynamics.propagator(s, 2.0, 1.0)
    bad = Schedule(s.config, s.segments, fermionizable=False)
    with pytest.raises(NotFermionizableError):
        dynamics.propagator(bad, 0.0, 1.0)


def test_constant_frame_ground_state_is_stationary():
    f = CouplingFrame.uniform(6, Jx=1.7, W=-1.0)
    s = Schedule(ChainConfig(6), (RampSegment(f, f, 5.0),))
    g = ground(f)
    out = dynamics.evolve_covariance(g, s, 0.0, 5.0)
    assert np.max(np.abs(out.Gamma - g.Gamma)) < 1e-12


@pytest.mark.parametrize("seed", range(3))
def test_moments_match_oracle(seed):
    s = random_ramp(seed)
    a, b = s.eval_frame(0.0), s.eval_frame(3.0)
    cov = dynamics.evolve_covariance(ground(a), s, 0.0, 3.0, dt=0.05)
    m = dynamics.excitation_moments(cov, b)
    _, V = exact.eigensystem(exact.build_dense_hamiltonian(a), 1)
    psi = exact.evolve_state(exact.StateVector(V[:, 0].astype(complex)), s, 0.0, 3.0, dt=0.05)
    P = exact.excitation_distribution(psi, b)
    k = np.arange(P.size)
    assert m.A1 == pytest.approx(P @ k, abs=1e-10)
    assert m.A2 == pytest.approx(P @ k**2, abs=1e-10)
    F1, F2 = dynamics.fidelity_bounds(m)
    assert F1 - 1e-10 <= P[0] <= F2 + 1e-10


def test_frozen_bounds_n4():
    s = protocols.linear_quench(-1.0, 5.0, 0.0, 20.0, 4)
    cov = dynamics.evolve_covariance(ground(s.eval_frame(0.0)), s, 0, 20.0, 0.1)
    m = dynamics.excitation_moments(cov, s.eval_frame(20.0))
    assert m.A1 == pytest.approx(0.031310163343893305, abs=1e-12)
    assert m.A2 == pytest.approx(0.06265185951279478, abs=1e-12)


def test_mode_occupations_first_moment_only():
    f = CouplingFrame.uniform(4, Jx=2.0, W=-1.0)
    m = dynamics.mode_occupations(ground(f), CouplingFrame.uniform(4, Jx=0.5, W=-1.0))
    assert m.A2 is None
    assert m.A1 == pytest.approx(m.n.sum())
    with pytest.raises(OutOfRangeError):
        dynamics.fidelity_bounds(m)


def test_bound_quality_flags():
    assert dynamics.bound_quality(0.5, 0.7) == "ok"
    assert dynamics.bound_quality(-0.1, 0.7) == "F1<0"
    assert dynamics.bound_quality(0.5, 1.2) == "inconsistent"
    assert dynamics.bound_quality(-2.0, 3.0) == "F1<0;inconsistent"


def test_parity_of_ground_states():
    assert dynamics.fermion_parity(ground(CouplingFrame.uniform(5, Jx=2.0, W=-1.0))) == 1
    assert dynamics.fermion_parity(ground(CouplingFrame.uniform(5, Jx=-2.0, W=-1.0))) == -1


def test_parity_refuses_mixed_state():
    with pytest.raises(NumericalError, match="not pure"):
        dynamics.fermion_parity(fermion.CovarianceMatrix(np.zeros((4, 4))))


def test_time_reverse_round_trip():
    s = random_ramp(4)
    g0 = ground(s.eval_frame(0.0))
    g1 = dynamics.evolve_covariance(g0, s, 0.0, 3.0, dt=0.05)
    back = dynamics.time_reverse(dynamics.evolve_covariance(dynamics.time_reverse(g1), s.reversed(), 0.0, 3.0, dt=0.05))
    assert np.max(np.abs(back.Gamma - g0.Gamma)) < 1e-9


def test_check_convergence_reports_small_difference():
    s = random_ramp(5)
    g = ground(s.eval_frame(0.0))
    coarse = dynamics.check_convergence(g, s, 0.0, 3.0, dt=0.1)
    fine = dynamics.check_convergence(g, s, 0.0, 3.0, dt=0.05)
    assert coarse["max_abs_diff"] < 1e-5
    assert fine["max_abs_diff"] < coarse["max_abs_diff"] / 8    # fourth order
    assert fine["purity_error"] < 1e-12
