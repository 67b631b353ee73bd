import math

import numpy as np
import pytest

from atomchain import exact, protocols
from atomchain.errors import OutOfRangeError, UnsafePathError
from atomchain.model import validate


def test_linear_quench_midpoint_and_theta():
    s = protocols.linear_quench(-1.0, 5.0, 0.0, 10.0, 6)
    assert s.eval_frame(5.0).Jx[0] == pytest.approx(2.5)
    assert protocols.linear_quench(-1.0, 0.0, -2.0, 4.0, 4).metadata["Theta"] == -0.5
    assert validate(s) == []


def test_linear_quench_is_homogeneous():
    s = protocols.linear_quench(-1.0, 5.0, 0.0, 10.0, 6)
    for t in np.linspace(0, 10, 7):
        assert s.eval_frame(t).is_homogeneous()


def test_linear_quench_rejects_nonpositive_T():
    with pytest.raises(OutOfRangeError):
        protocols.linear_quench(-1.0, 5.0, 0.0, 0.0, 4)


def test_suggested_time():
    assert protocols.suggested_time(10, -2.0) == pytest.approx(protocols.KAPPA * 50)
    with pytest.raises(OutOfRangeError):
        protocols.suggested_time(10, 0.0)


# -- beam splitter --------------------------------------------------------------------

def test_zone_tails_and_peak():
    z = protocols.ZoneProfile(w=0.2)
    N = 6
    f0 = z.frame_at(N, 0.0)
    assert np.all(np.abs(f0.W) < 1e-12)
    assert np.allclose(f0.Jx, z.jx0, rtol=1e-12)
    # bond (1,2) sits on the zone centre at this time
    t_peak = (z.positions(N, 0.0)[0] + 0.25 * z.lam - z.xc) / z.v
    assert z.frame_at(N, t_peak).W[0] == pytest.approx(z.W0)


def test_beam_splitter_invariants():
    z = protocols.ZoneProfile(w=0.1)
    N = 5
    s = protocols.beam_splitter_profile(z, N)
    assert validate(s) == []
    assert np.all(s.eval_frame(s.total_duration).Jx <= 1e-3 * z.jx0)
    ts = np.linspace(0, s.total_duration, 4001)
    peaks = np.min([s.eval_frame(t).W for t in ts], axis=0)
    np.testing.assert_allclose(peaks, z.W0, rtol=1e-3)


def test_beam_splitter_too_short():
    z = protocols.ZoneProfile(w=0.1)
    with pytest.raises(OutOfRangeError, match="clearing time"):
        protocols.beam_splitter_profile(z, 4, T=10.0)


def test_zone_validation():
    with pytest.raises(OutOfRangeError):
        protocols.ZoneProfile(w=0.0)
    with pytest.raises(OutOfRangeError):
        protocols.ZoneProfile(shapeJ="step")


def test_zone_shapes_selectable():
    z = protocols.ZoneProfile(shapeW="sech2", shapeJ="logistic")
    assert validate(protocols.beam_splitter_profile(z, 4)) == []


# -- staggered phase ------------------------------------------------------------------

def test_staggered_offsets_alternate():
    np.testing.assert_array_equal(protocols.staggered(4, 0.5), [-0.5, 0.5, -0.5, 0.5])


def test_staggered_phase_formula():
    assert protocols.staggered_phase(2, 0.25, math.pi) == pytest.approx(math.pi)
    assert protocols.staggered_phase(4, 0.1, 0.0) == 0.0


@pytest.mark.parametrize("N", [2, 4, 6, 8])
def test_staggered_phase_matches_oracle(N):
    Jz, tau = 0.03, 1.3
    s = protocols.staggered_phase_protocol(Jz, tau, N)
    assert validate(s) == []
    q0, q1 = exact.neel_states(N)
    psi = exact.superpose([q0, q1], [1, 1])
    out = exact.evolve_state(psi, s, 0.0, tau, dt=0.5)
    assert exact.relative_phase(out, q0, q1) == pytest.approx(protocols.staggered_phase(N, Jz, tau), abs=1e-6)


def test_staggered_zero_time_is_identity():
    s = protocols.staggered_phase_protocol(0.1, 0.0, 4)
    psi = exact.superpose(exact.neel_states(4), [1, 1j])
    np.testing.assert_array_equal(exact.evolve_state(psi, s, 0.0, 0.0).amp, psi.amp)
    assert s.metadata["predicted_phase"] == 0.0


def test_staggered_rejects_zero_field():
    with pytest.raises(OutOfRangeError):
        protocols.staggered_phase_protocol(0.0, 1.0, 4)


# -- Hadamard path --------------------------------------------------------------------

def test_hadamard_path_shape():
    path, s = protocols.hadamard_path(8, 1.0, 2.0, 0.1, 10.0)
    assert path.safe
    assert validate(s) == []
    for t in (0.0, s.total_duration):
        f = s.eval_frame(t)
        assert np.all(f.Jx == 0) and np.all(f.Jz == 0)
    assert s.eval_frame(20.0).Jx[0] == 2.0 and s.eval_frame(20.0).Jz[1] == pytest.approx(0.1)


def test_hadamard_unsafe_refused():
    with pytest.raises(UnsafePathError, match=r"W/\(N-1\)"):
        protocols.hadamard_path(8, 1.0, 2.0, 0.2, 10.0)
    path, _ = protocols.hadamard_path(8, 1.0, 2.0, 0.2, 10.0, allow_unsafe=True)
    assert not path.safe


@pytest.mark.parametrize("kw", [dict(W=-1.0), dict(Jx_max=0.5), dict(leg_durations=(1.0, 1.0, 1.0))])
def test_hadamard_preconditions(kw):
    args = dict(N=4, W=1.0, Jx_max=2.0, Jz_hold=0.1, leg_durations=5.0)
    args.update(kw)
    with pytest.raises(OutOfRangeError):
        protocols.hadamard_path(**args)


def test_hadamard_small_chain_is_adiabatic():
    N = 4
    _, s = protocols.hadamard_path(N, 1.0, 2.0, 0.2, (10.0, 10.0, 40.0, 10.0))
    q0, q1 = exact.neel_states(N)
    out = exact.evolve_state(exact.superpose([q0, q1], [1, 1]), s, 0.0, s.total_duration, dt=0.25)
    assert exact.state_fidelity(out, q0) > 0.99


# -- two-qubit phase ------------------------------------------------------------------

def test_two_qubit_truth_table():
    phi2, table = protocols.two_qubit_phase_model(4, 1.0, math.pi / 2)
    assert phi2 == pytest.approx(math.pi)
    assert table[(0, 0)] == 1 and table[(1, 1)] == 1
    assert table[(0, 1)] == pytest.approx(-1) and table[(1, 0)] == pytest.approx(-1)


def test_two_qubit_identity_at_zero_time():
    _, table = protocols.two_qubit_phase_model(6, 2.0, 0.0)
    assert all(v == 1 for v in table.values())


def test_two_qubit_odd_N():
    with pytest.raises(OutOfRangeError):
        protocols.two_qubit_phase_model(3, 1.0, 1.0)


@pytest.mark.parametrize("N", [2, 4, 6])
def test_two_qubit_microscopic(N):
    tau2 = 0.2
    phi2, _ = protocols.two_qubit_phase_model(N, 0.7, tau2)
    ph = protocols.two_qubit_microscopic_phases(N, 0.7, tau2)
    assert ph[(0, 0)] == 0.0
    assert ph[(1, 1)] == pytest.approx(0.0, abs=1e-12)
    assert ph[(0, 1)] == pytest.approx(phi2, abs=1e-10)
    assert ph[(1, 0)] == pytest.approx(phi2, abs=1e-10)
