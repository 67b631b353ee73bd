"""Brute-force 2^N reference: dense Hamiltonians, spectra and state evolution.

Basis ordering: computational sigma^z product states, site 1 is the most
significant bit, bit 0 = up (Z = +1), bit 1 = down (Z = -1).  Index 0 is
therefore |up up ... up> and index 2^N - 1 is |down ... down>.

Time stepping uses the fourth-order commutator-free exponential integrator
with Hamiltonians sampled at the two Gauss-Legendre nodes of each step; each
exponential is applied by a short Lanczos recursion (see :func:`lanczos_expm`).
"""
from __future__ import annotations

import csv
import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np
import scipy.linalg
import scipy.sparse as sp
from scipy.sparse.linalg import expm_multiply

from . import fermion
from .errors import CapacityError, NotFermionizableError, NumericalError, OutOfRangeError, StiffnessError
from .model import CouplingFrame, Schedule

N_MAX = 12
INTEGRATOR = "cf4-gauss"

# two-exponential commutator-free scheme, 4th order
CF4_ALPHA1 = (3.0 - 2.0 * math.sqrt(3.0)) / 12.0
CF4_ALPHA2 = (3.0 + 2.0 * math.sqrt(3.0)) / 12.0
CF4_NODES = (0.5 - math.sqrt(3.0) / 6.0, 0.5 + math.sqrt(3.0) / 6.0)


@dataclass(frozen=True, eq=False)
class StateVector:
    amp: np.ndarray
    t: float = 0.0

    def __post_init__(self):
        a = np.asarray(self.amp, dtype=complex)
        n = int(round(math.log2(a.size))) if a.size else 0
        if a.ndim != 1 or a.size < 2 or 2**n != a.size:
            raise OutOfRangeError(f"amplitude vector must have length 2^N, got {a.size}")
        norm = np.linalg.norm(a)
        if abs(norm - 1.0) > 1e-10:
            raise NumericalError(f"state norm {norm!r} differs from 1")
        object.__setattr__(self, "amp", a)

    @property
    def N(self) -> int:
        return int(round(math.log2(self.amp.size)))


@dataclass(frozen=True, eq=False)
class DenseHamiltonian:
    H: np.ndarray
    frame_ref: CouplingFrame


def _check_capacity(N: int, n_max: int = N_MAX):
    if N > n_max:
        raise CapacityError(f"N = {N} exceeds the dense oracle limit N_max = {n_max}")


@lru_cache(maxsize=None)
def _bits(N: int) -> np.ndarray:
    """``bits[l, i]``: occupation bit of site l in basis index i."""
    idx = np.arange(2**N)
    return np.array([(idx >> (N - 1 - l)) & 1 for l in range(N)], dtype=np.int64)


@lru_cache(maxsize=None)
def _z_signs(N: int) -> np.ndarray:
    return (1 - 2 * _bits(N)).astype(float)


@lru_cache(maxsize=None)
def _flip_index(N: int) -> np.ndarray:
    idx = np.arange(2**N)
    return np.array([idx ^ (1 << (N - 1 - l)) for l in range(N)], dtype=np.int64)


def _diagonal(frame: CouplingFrame) -> np.ndarray:
    z = _z_signs(frame.N)
    return (frame.W[:, None] * z[:-1] * z[1:]).sum(axis=0) - (frame.Jz[:, None] * z).sum(axis=0)


def build_dense_hamiltonian(frame: CouplingFrame, n_max: int = N_MAX) -> DenseHamiltonian:
    """``H = sum W_l Z_l Z_{l+1} - sum (Jx_l X_l + Jz_l Z_l)`` as a dense real matrix."""
    N = frame.N
    _check_capacity(N, n_max)
    dim = 2**N
    H = np.diag(_diagonal(frame))
    rows = np.arange(dim)
    flips = _flip_index(N)
    for l in range(N):
        H[rows, flips[l]] -= frame.Jx[l]
    return DenseHamiltonian(H, frame)


def sparse_hamiltonian(frame: CouplingFrame, n_max: int = N_MAX) -> sp.csr_matrix:
    N = frame.N
    _check_capacity(N, n_max)
    dim = 2**N
    rows = np.concatenate([np.arange(dim)] + [np.arange(dim)] * N)
    cols = np.concatenate([np.arange(dim)] + list(_flip_index(N)))
    data = np.concatenate([_diagonal(frame)] + [np.full(dim, -jx) for jx in frame.Jx])
    return sp.csr_matrix((data, (rows, cols)), shape=(dim, dim))


def eigensystem(H: DenseHamiltonian, k: int | None = None) -> tuple[np.ndarray, np.ndarray]:
    """Lowest ``k`` eigenpairs (all when ``k`` is None), energies ascending."""
    dim = H.H.shape[0]
    k = dim if k is None else int(k)
    if not 1 <= k <= dim:
        raise OutOfRangeError(f"k must lie in [1, {dim}]")
    try:
        return scipy.linalg.eigh(H.H, subset_by_index=[0, k - 1])
    except (np.linalg.LinAlgError, ValueError) as exc:
        raise NumericalError(f"dense eigensolver failed for dim {dim}") from exc


# -- reference states ---------------------------------------------------------

def basis_state(bits, t: float = 0.0) -> StateVector:
    """Product state from a sequence of bits (0 = up, 1 = down), site 1 first."""
    bits = list(bits)
    idx = int("".join(str(int(b)) for b in bits), 2)
    amp = np.zeros(2 ** len(bits), complex)
    amp[idx] = 1.0
    return StateVector(amp, t)


def product_plus(N: int) -> StateVector:
    """|+ + ... +>, the sigma^x-polarised product state."""
    _check_capacity(N)
    return StateVector(np.full(2**N, 2 ** (-N / 2), complex))


def ghz_target(N: int, relative_sign: int = 1) -> StateVector:
    """(|up...up> + sign |down...down>)/sqrt(2)."""
    _check_capacity(N)
    if relative_sign not in (1, -1):
        raise OutOfRangeError("relative_sign must be +1 or -1")
    amp = np.zeros(2**N, complex)
    amp[0] = 1 / math.sqrt(2)
    amp[-1] = relative_sign / math.sqrt(2)
    return StateVector(amp)


def neel_states(N: int) -> tuple[StateVector, StateVector]:
    """``|0> = |down up ... down up>`` and ``|1> = |up down ... up down>``."""
    if N % 2:
        raise OutOfRangeError("Neel qubit states need an even number of sites")
    _check_capacity(N)
    q0 = basis_state([1, 0] * (N // 2))
    q1 = basis_state([0, 1] * (N // 2))
    return q0, q1


def superpose(states, coeffs) -> StateVector:
    amp = sum(c * s.amp for c, s in zip(coeffs, states))
    return StateVector(amp / np.linalg.norm(amp))


def total_z_action(psi: StateVector) -> np.ndarray:
    """(sum_l Z_l) psi, unnormalised."""
    return _z_signs(psi.N).sum(axis=0) * psi.amp


def state_fidelity(psi: StateVector, target: StateVector) -> float:
    if psi.amp.shape != target.amp.shape:
        raise OutOfRangeError(f"dimension mismatch: {psi.amp.size} vs {target.amp.size}")
    return float(min(1.0, abs(np.vdot(target.amp, psi.amp)) ** 2))


def relative_phase(psi: StateVector, a: StateVector, b: StateVector) -> float:
    """arg(<a|psi>) - arg(<b|psi>), wrapped to (-pi, pi]."""
    z = np.vdot(a.amp, psi.amp) * np.conj(np.vdot(b.amp, psi.amp))
    return float(np.angle(z))


# -- time evolution -----------------------------------------------------------

def lanczos_expm(H, v: np.ndarray, tau: float, tol: float = 1e-13, m_max: int = 40) -> np.ndarray:
    """exp(-i tau H) v for Hermitian ``H`` via a Krylov subspace.

    Convergence is tested every few Lanczos steps through the residual
    estimate ``beta_m |y_m|``; if ``m_max`` steps do not suffice the step is
    split in halves.
    """
    beta0 = np.linalg.norm(v)
    if beta0 == 0.0 or tau == 0.0:
        return v.astype(complex, copy=True)
    dim = v.size
    m_max = min(m_max, dim)
    V = np.empty((m_max + 1, dim), complex)
    T = np.zeros((m_max + 1, m_max + 1))
    V[0] = v / beta0
    for j in range(m_max):
        w = H @ V[j]
        T[j, j] = np.vdot(V[j], w).real
        w = w - V[: j + 1].T @ (V[: j + 1].conj() @ w)
        b = np.linalg.norm(w)
        last = j + 1 == m_max or j + 1 == dim or b < 1e-14 * max(1.0, abs(T[j, j]))
        if j >= 3 and (j % 3 == 0 or last) or last:
            lam, S = np.linalg.eigh(T[: j + 1, : j + 1])
            y = S @ (np.exp(-1j * tau * lam) * S[0])
            if b * abs(y[-1]) < tol or last and (j + 1 == dim or b < 1e-14 * max(1.0, abs(T[j, j]))):
                return beta0 * (V[: j + 1].T @ y)
            if last:
                break
        V[j + 1] = w / b
        T[j, j + 1] = T[j + 1, j] = b
    half = lanczos_expm(H, v, tau / 2, tol, m_max)
    return lanczos_expm(H, half, tau / 2, tol, m_max)


def _step_grid(schedule: Schedule, t0: float, t1: float, dt: float):
    """Yield (start, length, n_steps) pieces aligned with segment boundaries."""
    if dt <= 0 or not math.isfinite(dt):
        raise StiffnessError(f"invalid step size {dt!r}")
    tol = 1e-12 * max(1.0, abs(t1))     # breakpoints within roundoff of an edge are merged into it
    cuts = [t0] + [b for b in schedule.breakpoints if t0 + tol < b < t1 - tol] + [t1]
    for a, b in zip(cuts[:-1], cuts[1:]):
        n = max(1, math.ceil((b - a) / dt - 1e-9))
        h = (b - a) / n
        if h < 1e-14 * max(1.0, abs(b)) and b > a:
            raise StiffnessError(f"step size {h!r} underflows")
        yield a, h, n


def evolve_state(psi0: StateVector, schedule: Schedule, t0: float, t1: float,
                 dt: float = 0.01, n_max: int = N_MAX) -> StateVector:
    """Integrate i d/dt psi = H(t) psi from t0 to t1 (t0 <= t1)."""
    N = psi0.N
    _check_capacity(N, n_max)
    if N != schedule.N:
        raise OutOfRangeError("state and schedule have different N")
    if t1 < t0:
        raise OutOfRangeError("evolve_state integrates forward in time only")
    psi = psi0.amp.copy()
    if t1 == t0:
        return StateVector(psi, t1)
    c1, c2 = CF4_NODES
    for a, h, n in _step_grid(schedule, t0, t1, dt):
        for k in range(n):
            t = a + k * h
            H1 = sparse_hamiltonian(schedule.eval_frame(t + c1 * h), n_max)
            H2 = sparse_hamiltonian(schedule.eval_frame(t + c2 * h), n_max)
            psi = lanczos_expm(CF4_ALPHA2 * H1 + CF4_ALPHA1 * H2, psi, h)
            psi = lanczos_expm(CF4_ALPHA1 * H1 + CF4_ALPHA2 * H2, psi, h)
    return StateVector(psi, t1)


def evolve_static(psi0: StateVector, H, tau: float) -> StateVector:
    """exp(-i H tau) psi0 for a time-independent (dense or sparse) Hamiltonian."""
    Hs = sp.csr_matrix(H.H if isinstance(H, DenseHamiltonian) else H)
    return StateVector(expm_multiply(-1j * tau * Hs, psi0.amp), psi0.t + tau)


def dump_state_csv(psi: StateVector, path) -> None:
    """Write ``index,real,imag`` rows (basis ordering as documented above)."""
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["index", "real", "imag"])
        for i, z in enumerate(psi.amp):
            w.writerow([i, repr(float(z.real)), repr(float(z.imag))])


# -- fermionic labelling of many-body states ----------------------------------

@lru_cache(maxsize=None)
def _majorana_tables(N: int):
    """Flip index and phase of each Majorana operator acting on basis states.

    ``(a_j psi)[flip[j, i]] = phase[j, i] * psi[i]`` with the same convention
    as :mod:`atomchain.fermion`.
    """
    bits = _bits(N)
    idx = np.arange(2**N)
    flips, phases = [], []
    for l in range(N):
        mask = sum(1 << (N - 1 - k) for k in range(l))
        string_flip = idx ^ mask
        zsign = 1.0 - 2.0 * bits[l]
        # Z_l then X string: phase from Z on the original bit l (string leaves l alone)
        flips.append(string_flip)
        phases.append(zsign.astype(complex))
        # Y_l |b> = i (-1)^b |1-b>
        flips.append(string_flip ^ (1 << (N - 1 - l)))
        phases.append(1j * zsign)
    return np.array(flips), np.array(phases)


def apply_majorana(j: int, vec: np.ndarray, N: int) -> np.ndarray:
    flips, phases = _majorana_tables(N)
    out = np.empty_like(vec, dtype=complex)
    out[flips[j]] = phases[j] * vec
    return out


def _number_distribution(psi: StateVector, frame: CouplingFrame) -> np.ndarray:
    """P(m) by projecting onto quasiparticle number states built from JW modes."""
    N = psi.N
    eps, Q, n_zero = fermion.mode_basis(fermion.build_majorana_matrix(frame))
    if n_zero > 1:
        raise NumericalError("more than one zero mode: excitation numbers are not well defined")
    a_psi = None
    comps = [psi.amp.astype(complex)]
    for nu in range(N):
        x, y = Q[:, 2 * nu], Q[:, 2 * nu + 1]
        new = [np.zeros_like(comps[0]) for _ in range(len(comps) + 1)]
        for m, phi in enumerate(comps):
            a_psi = [apply_majorana(k, phi, N) for k in range(2 * N)]
            yphi = sum(y[k] * a_psi[k] for k in range(2 * N) if y[k] != 0.0)
            xyphi = sum(x[j] * apply_majorana(j, yphi, N) for j in range(2 * N) if x[j] != 0.0)
            occ = 0.5 * (phi + 1j * xyphi)  # n_nu = (1 + i d_x d_y)/2
            new[m] += phi - occ
            new[m + 1] += occ
        comps = new
    return np.array([np.vdot(c, c).real for c in comps])


def excitation_distribution(psi: StateVector, final_frame: CouplingFrame,
                            tol: float = 1e-8, return_method: bool = False):
    """Probability P(m) of m quasiparticles of ``final_frame`` in ``psi``.

    Exact eigenstates are labelled by matching their energies to
    ``E0 + sum_S eps``; when two labels with different ``|S|`` share an energy
    the number-state construction from Jordan-Wigner modes is used instead.
    """
    N = psi.N
    _check_capacity(N)
    if not final_frame.fermionizable:
        raise NotFermionizableError("excitation numbers need a Jz = 0 frame")
    if final_frame.N != N:
        raise OutOfRangeError("state and frame have different N")
    spec = fermion.excitation_spectrum(fermion.build_majorana_matrix(final_frame))
    levels, counts = spec.levels_with_counts()
    order = np.argsort(levels, kind="stable")
    levels, counts = levels[order], counts[order]
    energies, vecs = eigensystem(build_dense_hamiltonian(final_frame))
    atol = tol * final_frame.scale
    lo = np.searchsorted(levels, energies - atol, side="left")
    hi = np.searchsorted(levels, energies + atol, side="right")
    labels = np.empty(energies.size, dtype=int)
    ambiguous = False
    for k in range(energies.size):
        ms = np.unique(counts[lo[k]:hi[k]])
        if ms.size != 1:
            ambiguous = True
            break
        labels[k] = ms[0]
    if ambiguous:
        P, method = _number_distribution(psi, final_frame), "number-states"
    else:
        w = np.abs(vecs.conj().T @ psi.amp) ** 2
        P = np.bincount(labels, weights=w, minlength=N + 1)
        method = "energy-labels"
    return (P, method) if return_method else P
