"""Property-based checks of the structural invariants."""
import numpy as np
from hypothesis import assume, given, settings
from hypothesis import strategies as st

from atomchain import dynamics, exact, fermion, protocols
from atomchain.model import ChainConfig, CouplingFrame, RampSegment, Schedule, validate

couplings = st.floats(-3.0, 3.0, allow_nan=False)


@st.composite
def frames(draw, n_min=2, n_max=6):
    N = draw(st.integers(n_min, n_max))
    jx = draw(st.lists(couplings, min_size=N, max_size=N))
    w = draw(st.lists(couplings, min_size=N - 1, max_size=N - 1))
    return CouplingFrame(np.array(jx), np.zeros(N), np.array(w))


@st.composite
def frame_pairs(draw, n_max=6):
    """A gapped paramagnetic start frame and an arbitrary end frame of the same size."""
    N = draw(st.integers(2, n_max))
    jx = draw(st.lists(st.floats(1.5, 3.0), min_size=N, max_size=N))
    w = draw(st.lists(st.floats(-1.0, 1.0), min_size=N - 1, max_size=N - 1))
    a = CouplingFrame(np.array(jx), np.zeros(N), np.array(w))
    jx = draw(st.lists(couplings, min_size=N, max_size=N))
    w = draw(st.lists(couplings, min_size=N - 1, max_size=N - 1))
    return a, CouplingFrame(np.array(jx), np.zeros(N), np.array(w))


@settings(max_examples=40, deadline=None)
@given(frames())
def test_spectrum_matches_dense(f):
    levels = fermion.excitation_spectrum(fermion.build_majorana_matrix(f)).levels()
    np.testing.assert_allclose(levels, np.linalg.eigvalsh(exact.build_dense_hamiltonian(f).H), atol=1e-9)


@settings(max_examples=40, deadline=None)
@given(frames(n_max=10))
def test_majorana_matrix_structure(f):
    A = fermion.build_majorana_matrix(f).A
    assert np.array_equal(A, -A.T)
    eps = fermion.excitation_spectrum(fermion.build_majorana_matrix(f)).eps
    assert np.all(eps >= 0) and np.all(np.diff(eps) >= 0)


@settings(max_examples=25, deadline=None)
@given(frame_pairs(n_max=8), st.floats(0.1, 4.0))
def test_evolution_keeps_purity_and_parity(pair, T):
    a, b = pair
    s = Schedule(ChainConfig(a.N), (RampSegment(a, b, T),), metadata={})
    g0 = fermion.ground_covariance(fermion.build_majorana_matrix(a))
    p0 = dynamics.fermion_parity(g0)
    g = g0
    for t0, t1 in zip(np.linspace(0, T, 4)[:-1], np.linspace(0, T, 4)[1:]):
        g = dynamics.evolve_covariance(g, s, t0, t1, dt=0.1)
        assert g.purity_error() < 1e-8
        assert dynamics.fermion_parity(g) == p0


@settings(max_examples=25, deadline=None)
@given(frame_pairs(n_max=6))
def test_bounds_bracket_projection(pair):
    a, b = pair
    eb = fermion.excitation_spectrum(fermion.build_majorana_matrix(b)).eps
    assume(eb[0] > 1e-2 * b.scale)
    # sudden switch: ground state of a measured in the modes of b
    m = dynamics.excitation_moments(fermion.ground_covariance(fermion.build_majorana_matrix(a)), b)
    F1, F2 = dynamics.fidelity_bounds(m)
    _, V = exact.eigensystem(exact.build_dense_hamiltonian(a), 1)
    P0 = exact.excitation_distribution(exact.StateVector(V[:, 0].astype(complex)), b)[0]
    assert F1 - 1e-8 <= P0 <= F2 + 1e-8
    assert m.A2 >= m.A1 - 1e-10          # <n^2> >= <n> for integer n


@settings(max_examples=30, deadline=None)
@given(st.integers(2, 12), st.floats(-3, 3).filter(lambda x: abs(x) > 1e-3), st.floats(0, 5), st.floats(0.1, 50))
def test_linear_quench_builder(N, W, jx0, T):
    s = protocols.linear_quench(W, jx0, 0.0, T, N)
    assert validate(s) == []
    assert s.eval_frame(0.0).Jx[0] == jx0
    assert abs(s.eval_frame(T).Jx[0]) < 1e-12 * max(1.0, jx0)


@settings(max_examples=20, deadline=None)
@given(st.integers(2, 20), st.sampled_from([0.1, 0.2, 0.4]), st.floats(-2, -0.2), st.sampled_from(["erf", "logistic"]))
def test_beam_splitter_builder(N, w, W0, shapeJ):
    z = protocols.ZoneProfile(W0=W0, w=w, shapeJ=shapeJ)
    s = protocols.beam_splitter_profile(z, N)
    assert validate(s) == []
    assert np.all(s.eval_frame(s.total_duration).Jx <= 1e-3 * z.jx0)


@settings(max_examples=20, deadline=None)
@given(st.integers(1, 6).map(lambda k: 2 * k), st.floats(-2, 2), st.floats(0, 10))
def test_two_qubit_table_property(N, Wp, tau2):
    phi2, table = protocols.two_qubit_phase_model(N, Wp, tau2)
    assert phi2 == N * Wp * tau2 / 2
    assert table[(0, 0)] == table[(1, 1)] == 1
    assert table[(0, 1)] == table[(1, 0)]
    assert abs(abs(table[(0, 1)]) - 1) < 1e-12
