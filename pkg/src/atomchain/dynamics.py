"""Gaussian-state evolution and excitation statistics of the fermionised chain.

The Heisenberg operators obey ``a(t) = O(t) a(0)`` with ``dO/dt = A(t) O``.
``O`` is integrated with the fourth-order commutator-free exponential scheme
(exponentials of real antisymmetric matrices are orthogonal, so purity is
kept structurally) and re-orthogonalised by QR every few steps.  The
covariance follows as ``Gamma(t) = O Gamma(0) O^T``.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import fermion
from .errors import DegenerateGroundStateError, NotFermionizableError, NumericalError, OutOfRangeError
from .exact import CF4_ALPHA1, CF4_ALPHA2, CF4_NODES, _step_grid
from .fermion import CovarianceMatrix, build_majorana_matrix
from .linalg import pfaffian, reorthogonalize
from .model import CouplingFrame, Schedule

DEFAULT_DT = 0.1
REORTHO_EVERY = 50
PURITY_TOL = 1e-8

__all__ = [
    "CovarianceMatrix", "ExcitationMoments", "evolve_covariance", "propagator", "mode_occupations",
    "excitation_moments", "fidelity_bounds", "bound_quality", "fermion_parity", "time_reverse",
    "check_convergence",
]


@dataclass(frozen=True, eq=False)
class ExcitationMoments:
    A1: float
    A2: float | None
    n: np.ndarray


def _odd_even_block(schedule: Schedule, t: float) -> np.ndarray:
    return fermion.GENERATOR_SCALE * build_majorana_matrix(schedule.eval_frame(t)).odd_even_block


def _apply_exp(M: np.ndarray, h: float, Oe: np.ndarray, Oo: np.ndarray):
    """Left-multiply ``O`` by ``exp(h A)`` where ``A`` has odd-even block ``M``.

    With ``M = U diag(s) V^T``::

        exp(hA) = [[U cos(hs) U^T,  U sin(hs) V^T],
                   [-V sin(hs) U^T, V cos(hs) V^T]]

    in the (even, odd) Majorana ordering.
    """
    U, s, Vt = np.linalg.svd(M)
    c, sn = np.cos(h * s)[:, None], np.sin(h * s)[:, None]
    a, b = U.T @ Oe, Vt @ Oo
    return U @ (c * a + sn * b), Vt.T @ (c * b - sn * a)


def propagator(schedule: Schedule, t0: float, t1: float, dt: float = DEFAULT_DT,
               reortho_every: int = REORTHO_EVERY) -> np.ndarray:
    """Orthogonal single-particle propagator ``O(t1, t0)``."""
    if not schedule.fermionizable:
        raise NotFermionizableError("schedule is not flagged fermionizable")
    if t1 < t0:
        raise OutOfRangeError("propagator integrates forward in time only")
    n2 = 2 * schedule.N
    O = np.eye(n2)
    if t1 == t0:
        return O
    Oe, Oo = O[0::2].copy(), O[1::2].copy()
    c1, c2 = CF4_NODES
    steps = 0
    for a, h, n in _step_grid(schedule, t0, t1, dt):
        for k in range(n):
            t = a + k * h
            M1 = _odd_even_block(schedule, t + c1 * h)
            M2 = _odd_even_block(schedule, t + c2 * h)
            Oe, Oo = _apply_exp(CF4_ALPHA2 * M1 + CF4_ALPHA1 * M2, h, Oe, Oo)
            Oe, Oo = _apply_exp(CF4_ALPHA1 * M1 + CF4_ALPHA2 * M2, h, Oe, Oo)
            steps += 1
            if steps % reortho_every == 0:
                O[0::2], O[1::2] = Oe, Oo
                O = reorthogonalize(O)
                Oe, Oo = O[0::2].copy(), O[1::2].copy()
    O[0::2], O[1::2] = Oe, Oo
    return reorthogonalize(O)


def evolve_covariance(cov: CovarianceMatrix, schedule: Schedule, t0: float, t1: float,
                      dt: float = DEFAULT_DT, reortho_every: int = REORTHO_EVERY) -> CovarianceMatrix:
    if cov.N != schedule.N:
        raise OutOfRangeError("covariance and schedule have different N")
    if t1 == t0:
        return CovarianceMatrix(cov.Gamma.copy(), t1)
    O = propagator(schedule, t0, t1, dt, reortho_every)
    G = O @ cov.Gamma @ O.T
    return CovarianceMatrix(0.5 * (G - G.T), t1)


def _mode_covariance(cov: CovarianceMatrix, frame: CouplingFrame) -> tuple[np.ndarray, np.ndarray]:
    eps, Q, n_zero = fermion.mode_basis(build_majorana_matrix(frame))
    if n_zero > 1:
        raise DegenerateGroundStateError(
            f"{n_zero} zero modes in the reference frame: excitation numbers are ambiguous")
    return eps, Q.T @ cov.Gamma @ Q / fermion.COVARIANCE_NORM


def mode_occupations(cov: CovarianceMatrix, final_frame: CouplingFrame) -> ExcitationMoments:
    """Occupations of the instantaneous eigenmodes of ``final_frame``."""
    if cov.N != final_frame.N:
        raise OutOfRangeError("covariance and frame have different N")
    _, G = _mode_covariance(cov, final_frame)
    n = 0.5 * (1.0 + np.diagonal(G, offset=1)[0::2])
    return ExcitationMoments(float(n.sum()), None, n)


def excitation_moments(cov: CovarianceMatrix, final_frame: CouplingFrame) -> ExcitationMoments:
    """First two moments of the total quasiparticle number (Wick's theorem).

    With ``n_nu = (1 + G[2nu, 2nu+1]) / 2`` in the mode basis,
    ``<n_nu n_mu> - <n_nu><n_mu> = (G[x_nu, y_mu] G[y_nu, x_mu] - G[x_nu, x_mu] G[y_nu, y_mu]) / 4``
    for ``nu != mu``.
    """
    if cov.N != final_frame.N:
        raise OutOfRangeError("covariance and frame have different N")
    _, G = _mode_covariance(cov, final_frame)
    n = 0.5 * (1.0 + np.diagonal(G, offset=1)[0::2])
    xx = G[0::2, 0::2]
    yy = G[1::2, 1::2]
    xy = G[0::2, 1::2]
    conn = 0.25 * (-xy * xy.T - xx * yy)
    np.fill_diagonal(conn, 0.0)
    A1 = float(n.sum())
    A2 = float(A1**2 + np.sum(n - n**2) + conn.sum())
    return ExcitationMoments(A1, A2, n)


def fidelity_bounds(m: ExcitationMoments) -> tuple[float, float]:
    """Lower and upper fidelity bounds from the first two number moments."""
    if m.A2 is None:
        raise OutOfRangeError("fidelity bounds need the second moment")
    return 1.0 - m.A1, 1.0 - (3.0 * m.A1 - m.A2) / 2.0


def bound_quality(F1: float, F2: float) -> str:
    flags = []
    if F1 < 0:
        flags.append("F1<0")
    if F2 > 1 + 1e-9 or F1 > F2 + 1e-9:
        flags.append("inconsistent")
    return ";".join(flags) if flags else "ok"


def fermion_parity(cov: CovarianceMatrix, tol: float = PURITY_TOL) -> int:
    """``<prod_l X_l> = Pf(Gamma)``, exactly +1 or -1 for pure states."""
    err = cov.purity_error()
    if err > tol:
        raise NumericalError(f"covariance is not pure (max |G G^T - 1| = {err:.3e}); parity undefined")
    pf = pfaffian(cov.Gamma / fermion.COVARIANCE_NORM)
    return 1 if pf > 0 else -1


def time_reverse(cov: CovarianceMatrix) -> CovarianceMatrix:
    """Covariance of the complex-conjugated state.

    Conjugation flips the sign of the Y-type Majoranas, so ``Gamma -> -D Gamma D``
    with ``D = diag(+1, -1, +1, -1, ...)``.  Evolving the conjugate under the
    reversed schedule and conjugating back undoes a forward evolution.
    """
    d = np.tile([1.0, -1.0], cov.N)
    return CovarianceMatrix(-(d[:, None] * cov.Gamma * d[None, :]), cov.t)


def check_convergence(cov: CovarianceMatrix, schedule: Schedule, t0: float, t1: float,
                      dt: float = DEFAULT_DT) -> dict:
    """Step-halving estimate of the final-covariance error."""
    coarse = evolve_covariance(cov, schedule, t0, t1, dt)
    fine = evolve_covariance(cov, schedule, t0, t1, dt / 2)
    return {"dt": dt, "max_abs_diff": float(np.max(np.abs(coarse.Gamma - fine.Gamma))),
            "purity_error": fine.purity_error()}
