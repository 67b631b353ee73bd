"""Jordan-Wigner / Majorana reduction of the J^z = 0 chain.

Majorana convention (0-based sites ``l``)::

    a[2l]   = X_0 ... X_{l-1} Z_l
    a[2l+1] = X_0 ... X_{l-1} Y_l

so that ``X_l = i a[2l] a[2l+1]`` and ``Z_l Z_{l+1} = i a[2l+1] a[2l+2]``.
With ``{a_j, a_k} = 2 delta_jk`` the spin Hamiltonian

    H = sum_l W_l Z_l Z_{l+1} - sum_l Jx_l X_l

becomes ``H = (i/4) a^T A a`` with ``A`` real, antisymmetric and
tridiagonal.  Writing the half-normalised operators ``c = a/2`` this is
``H = i c^T A c`` and the Heisenberg equations read ``dc/dt = A c``.
The string of X operators is the axis rotation that turns the sigma^z sigma^z
coupling into the textbook transverse-field form before Jordan-Wigner.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.linalg

from .errors import (DegenerateGroundStateError, InhomogeneousFrameError, NotFermionizableError, NumericalError,
                     OutOfRangeError)
from .linalg import antisymmetry_error
from .model import CouplingFrame

# Calibration against the N=2 dense spectra (see tests/test_fermion.py):
#   eps_nu = SPECTRUM_SCALE * |eig(A)|,  dc/dt = GENERATOR_SCALE * A c,
#   Gamma Gamma^T = COVARIANCE_NORM**2 * 1  for pure states.
SPECTRUM_SCALE = 1.0
GENERATOR_SCALE = 1.0
COVARIANCE_NORM = 1.0

DEGENERACY_TOL = 1e-8   # relative; smaller eps means "no unique vacuum"
ZERO_MODE_TOL = 1e-12   # relative; below this a mode's orientation is a convention


@dataclass(frozen=True, eq=False)
class MajoranaMatrix:
    A: np.ndarray
    frame_ref: CouplingFrame

    @property
    def N(self) -> int:
        return self.A.shape[0] // 2

    @property
    def odd_even_block(self) -> np.ndarray:
        """``A[2l, 2m+1]``: the only nonzero block; lower bidiagonal."""
        return self.A[0::2, 1::2]


@dataclass(frozen=True, eq=False)
class ExcitationSpectrum:
    eps: np.ndarray
    E0: float

    def levels(self) -> np.ndarray:
        """All 2^N many-body energies ``E0 + sum_{nu in S} eps_nu``, sorted."""
        e = np.array([self.E0])
        for x in self.eps:
            e = np.concatenate([e, e + x])
        return np.sort(e)

    def levels_with_counts(self) -> tuple[np.ndarray, np.ndarray]:
        """Many-body energies and their excitation numbers, unsorted."""
        e = np.array([self.E0])
        m = np.array([0])
        for x in self.eps:
            e = np.concatenate([e, e + x])
            m = np.concatenate([m, m + 1])
        return e, m


@dataclass(frozen=True, eq=False)
class CovarianceMatrix:
    """Majorana two-point matrix ``Gamma_jk = i <a_j a_k>`` (j != k)."""

    Gamma: np.ndarray
    t: float = 0.0

    def __post_init__(self):
        G = np.asarray(self.Gamma, dtype=float)
        if G.ndim != 2 or G.shape[0] != G.shape[1] or G.shape[0] % 2:
            raise NumericalError(f"covariance must be 2N x 2N, got shape {G.shape}")
        err = antisymmetry_error(G)
        if err > 1e-10:
            raise NumericalError(f"covariance not antisymmetric (max |G + G^T| = {err:.3e})")
        object.__setattr__(self, "Gamma", G)
        object.__setattr__(self, "t", float(self.t))

    @property
    def N(self) -> int:
        return self.Gamma.shape[0] // 2

    def purity_error(self) -> float:
        G = self.Gamma
        return float(np.max(np.abs(G @ G.T - COVARIANCE_NORM**2 * np.eye(G.shape[0]))))


def build_majorana_matrix(frame: CouplingFrame) -> MajoranaMatrix:
    if not frame.fermionizable:
        raise NotFermionizableError("Jz != 0: the chain does not map to free fermions")
    N = frame.N
    A = np.zeros((2 * N, 2 * N))
    idx = np.arange(N)
    A[2 * idx, 2 * idx + 1] = -2.0 * frame.Jx
    b = np.arange(N - 1)
    A[2 * b + 1, 2 * b + 2] = 2.0 * frame.W
    A -= A.T
    return MajoranaMatrix(A, frame)


def _svd(M: np.ndarray, compute_uv: bool):
    try:
        return scipy.linalg.svd(M, compute_uv=compute_uv)
    except (np.linalg.LinAlgError, ValueError):
        try:
            return scipy.linalg.svd(M, compute_uv=compute_uv, lapack_driver="gesvd")
        except (np.linalg.LinAlgError, ValueError) as exc:
            raise NumericalError(f"SVD failed; cond estimate {np.linalg.cond(M):.3e}") from exc


def excitation_spectrum(A: MajoranaMatrix) -> ExcitationSpectrum:
    # eig(A) = +-i sigma(M) because A only couples even and odd Majoranas
    s = SPECTRUM_SCALE * np.sort(_svd(A.odd_even_block, False))
    return ExcitationSpectrum(s, -0.5 * float(np.sum(s)))


def mode_basis(A: MajoranaMatrix) -> tuple[np.ndarray, np.ndarray, int]:
    """Real orthogonal ``Q`` bringing ``A`` to ``(+) [[0, eps], [-eps, 0]]``.

    Returns ``(eps, Q, n_zero)``.  Column ``2 nu`` of ``Q`` lives on even
    Majoranas and column ``2 nu + 1`` on odd ones.  When zero modes exist
    the first one is oriented so that the vacuum has ``<prod_l X_l> = +1``.
    """
    N = A.N
    U, s, Vt = _svd(A.odd_even_block, True)
    order = np.argsort(s, kind="stable")
    s, U, V = s[order], U[:, order], Vt.T[:, order]
    n_zero = int(np.sum(s < ZERO_MODE_TOL * A.frame_ref.scale))
    if n_zero:
        # vacuum parity = det(Q) * (-1)^N and det(Q) = det(U) det(V)
        if np.sign(np.linalg.det(U) * np.linalg.det(V)) * (-1) ** N < 0:
            U[:, 0] = -U[:, 0]
    Q = np.zeros((2 * N, 2 * N))
    Q[0::2, 0::2] = U
    Q[1::2, 1::2] = V
    return SPECTRUM_SCALE * s, Q, n_zero


def vacuum_block(N: int) -> np.ndarray:
    """Mode-basis covariance of the quasiparticle vacuum."""
    G = np.zeros((2 * N, 2 * N))
    i = np.arange(N)
    G[2 * i, 2 * i + 1] = -COVARIANCE_NORM
    G[2 * i + 1, 2 * i] = COVARIANCE_NORM
    return G


def ground_covariance(A: MajoranaMatrix) -> CovarianceMatrix:
    eps, Q, _ = mode_basis(A)
    scale = A.frame_ref.scale
    if eps[0] < DEGENERACY_TOL * scale:
        raise DegenerateGroundStateError(
            f"smallest excitation energy {eps[0]:.3e} is below {DEGENERACY_TOL:g} x scale; "
            "start from a gapped frame (e.g. Jx >> |W|)"
        )
    G = Q @ vacuum_block(A.N) @ Q.T
    return CovarianceMatrix(0.5 * (G - G.T), A.frame_ref.t)


def covariance_energy(A: MajoranaMatrix, cov: CovarianceMatrix) -> float:
    """``<H> = (1/4) sum_jk A_jk Gamma_jk`` for the half-normalised convention."""
    return 0.25 * float(np.sum(A.A * cov.Gamma)) / COVARIANCE_NORM


def bulk_gap(frame: CouplingFrame) -> float:
    """Closed-form bulk gap ``2 | |W| - |Jx| |`` of a homogeneous chain."""
    if not frame.fermionizable:
        raise NotFermionizableError("bulk gap is defined for Jz = 0")
    if not frame.is_homogeneous():
        raise InhomogeneousFrameError("bulk gap needs homogeneous couplings")
    return 2.0 * abs(abs(float(frame.W[0])) - abs(float(frame.Jx[0])))


def boundary_mode_energy(frame: CouplingFrame) -> float:
    """Smallest excitation energy; decays like (Jx/|W|)^N in the ordered phase."""
    if not frame.is_homogeneous():
        raise InhomogeneousFrameError("boundary mode scaling is defined for homogeneous chains")
    if not abs(frame.Jx[0]) < abs(frame.W[0]):
        raise OutOfRangeError("boundary mode needs |Jx| < |W| (ordered phase)")
    return float(excitation_spectrum(build_majorana_matrix(frame)).eps[0])
