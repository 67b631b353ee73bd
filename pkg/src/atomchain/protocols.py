"""Schedule builders for the transfer, beam-splitter and gate protocols.

Site labels ``l`` in formulas are 1-based (``l = 1..N``); arrays are 0-based.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np
import scipy.sparse as sp
from scipy.special import erfc, expit

from .errors import OutOfRangeError, UnsafePathError
from .model import ANTIFERRO, FERRO, ChainConfig, CouplingFrame, ConstantSegment, RampSegment, Schedule, Segment

# T = KAPPA * N^2 / |W| for the linear quench Jx: 5|W| -> 0.  Chosen so that the
# fermionic lower bound F1 reaches 0.95 at both N = 8 and N = 16 (the ratio
# T/N^2 needed for F1 = 0.95 falls with N: 0.531 at N = 8, 0.389 at N = 16).
KAPPA = 0.54
JX_START_FACTOR = 5.0

# zone tails are cut at ZONE_MARGIN widths (Gaussian tail e^-32)
ZONE_MARGIN = 8.0


def _sign_of(W: float) -> str:
    return ANTIFERRO if W > 0 else FERRO


def staggered(N: int, Jz: float) -> np.ndarray:
    """``J^z_l = Jz (-1)^l`` for ``l = 1..N``."""
    return Jz * (-1.0) ** np.arange(1, N + 1)


# -- linear quench ------------------------------------------------------------

def linear_quench(W: float, Jx_start: float, Jx_end: float, T: float, N: int) -> Schedule:
    """Homogeneous ramp ``Jx(t) = Jx_start + Theta t`` at fixed ``W`` and ``Jz = 0``."""
    if not T > 0:
        raise OutOfRangeError(f"quench duration must be positive, got T={T!r}")
    cfg = ChainConfig(N, _sign_of(W))
    a = CouplingFrame.uniform(N, Jx=Jx_start, W=W)
    b = CouplingFrame.uniform(N, Jx=Jx_end, W=W)
    theta = (Jx_end - Jx_start) / T
    meta = {"protocol": "linear_quench", "W": W, "Jx_start": Jx_start, "Jx_end": Jx_end, "T": T, "Theta": theta}
    return Schedule(cfg, (RampSegment(a, b, T, "linear_quench"),), True, meta)


def suggested_time(N: int, W: float, kappa: float = KAPPA) -> float:
    """Adiabatic duration ``kappa N^2 / |W|``."""
    if W == 0:
        raise OutOfRangeError("W must be nonzero")
    return kappa * N * N / abs(W)


# -- moving interaction zone ---------------------------------------------------

def _gaussian(u):
    return np.exp(-0.5 * u * u)


def _sech2(u):
    return 1.0 / np.cosh(np.clip(u, -300, 300)) ** 2


def _logistic_off(u):
    # 1 ahead of the zone (u > 0), 0 behind it
    return expit(u)


def _erf_off(u):
    return 0.5 * erfc(-u / math.sqrt(2.0))


W_SHAPES: dict[str, Callable] = {"gaussian": _gaussian, "sech2": _sech2}
J_SHAPES: dict[str, Callable] = {"logistic": _logistic_off, "erf": _erf_off}


@dataclass(frozen=True)
class ZoneProfile:
    """Interaction zone of peak ``W0`` and width ``w`` swept at speed ``v``.

    Lengths are in units of ``lam`` (lattice constant ``lam/2``), speeds in
    ``lam |W0|``.  Site ``l`` sits at ``x_l(t) = x0 + l lam/2 - v t``.  The bond
    ``(l, l+1)`` gets ``W0 shapeW(u)`` and site ``l`` gets
    ``Jx0 shapeJ(u' - j_shift)``, where ``u`` and ``u'`` are the distances from
    ``xc`` of the bond's midpoint and of the midpoint of the bond behind site
    ``l``, both in units of ``w``.  Each site therefore loses its transverse
    field while it is coupled to the already ordered part of the string.
    ``j_shift > 0`` moves the turn-off ahead of the bond peak.

    The Jx turn-off must decay faster than the W zone: a logistic tail
    outlives a Gaussian zone and leaves every spin partly polarised along x,
    whatever the speed.  The default is therefore the Gaussian-tailed ``erf``.

    ``x0 = None`` starts site 1 ``ZONE_MARGIN`` widths before the zone.
    ``Jx0 = None`` means ``5 |W0|``.
    """

    W0: float = -1.0
    w: float = 0.1
    v: float = 0.01
    lam: float = 1.0
    x0: float | None = None
    xc: float = 0.0
    Jx0: float | None = None
    shapeW: str = "gaussian"
    shapeJ: str = "erf"
    j_shift: float = 1.0

    def __post_init__(self):
        if not math.isfinite(self.j_shift):
            raise OutOfRangeError("j_shift must be finite")
        for name in ("w", "v", "lam"):
            val = getattr(self, name)
            if not (math.isfinite(val) and val > 0):
                raise OutOfRangeError(f"{name} must be positive, got {val!r}")
        if not (math.isfinite(self.W0) and self.W0 != 0):
            raise OutOfRangeError("W0 must be finite and nonzero")
        if self.shapeW not in W_SHAPES:
            raise OutOfRangeError(f"unknown shapeW {self.shapeW!r}; choose from {sorted(W_SHAPES)}")
        if self.shapeJ not in J_SHAPES:
            raise OutOfRangeError(f"unknown shapeJ {self.shapeJ!r}; choose from {sorted(J_SHAPES)}")

    @property
    def start(self) -> float:
        # site 1 begins with its Jx fully on and its bond to site 2 fully off
        ahead = 0.25 * self.lam + (ZONE_MARGIN + max(self.j_shift, 0.0)) * self.w
        return self.xc + ahead - 0.5 * self.lam if self.x0 is None else self.x0

    @property
    def jx0(self) -> float:
        return JX_START_FACTOR * abs(self.W0) if self.Jx0 is None else self.Jx0

    def positions(self, N: int, t: float) -> np.ndarray:
        return self.start + np.arange(1, N + 1) * 0.5 * self.lam - self.v * t

    def clearing_time(self, N: int) -> float:
        """Time at which the last bond is ``ZONE_MARGIN`` widths past the centre."""
        exit_x = self.xc + 0.25 * self.lam - (ZONE_MARGIN - min(self.j_shift, 0.0)) * self.w
        return (self.positions(N, 0.0)[-1] - exit_x) / self.v

    def frame_at(self, N: int, t: float) -> CouplingFrame:
        x = self.positions(N, t)
        # u: position of the bond behind each site (toward site 1), in widths
        u = (x - 0.25 * self.lam - self.xc) / self.w
        u_bond = u[1:]
        Jx = self.jx0 * J_SHAPES[self.shapeJ](u - self.j_shift)
        W = self.W0 * W_SHAPES[self.shapeW](u_bond)
        return CouplingFrame(Jx, np.zeros(N), W, t)

    def reference_frame(self, N: int) -> CouplingFrame:
        """Ideal final couplings: ``Jx = 0`` and ``W = W0`` on every bond."""
        return CouplingFrame.uniform(N, Jx=0.0, W=self.W0)

    def params(self) -> dict:
        return {"W0": self.W0, "w": self.w, "v": self.v, "lam": self.lam, "x0": self.start, "xc": self.xc,
                "Jx0": self.jx0, "shapeW": self.shapeW, "shapeJ": self.shapeJ, "j_shift": self.j_shift}


@dataclass(frozen=True, eq=False)
class ZoneSegment(Segment):
    zone: ZoneProfile
    N: int
    duration: float
    kind: str = "zone"

    def couplings(self, tau):
        f = self.zone.frame_at(self.N, tau)
        return f.Jx, f.Jz, f.W

    def has_jz(self):
        return False

    def params(self):
        return {"kind": self.kind, "duration": self.duration, "N": self.N, "zone": self.zone.params()}


def beam_splitter_profile(zone: ZoneProfile, N: int, T: float | None = None) -> Schedule:
    """String of N atoms dragged through the zone; ``T = None`` picks the clearing time."""
    T_clear = zone.clearing_time(N)
    if T is None:
        T = T_clear
    if not T > 0:
        raise OutOfRangeError(f"duration must be positive, got T={T!r}")
    if T < T_clear * (1 - 1e-12):
        tail = zone.frame_at(N, T).Jx / zone.jx0
        stuck = [i + 1 for i in np.flatnonzero(tail > 1e-3)]
        raise OutOfRangeError(
            f"T={T!r} is shorter than the clearing time {T_clear!r}: sites {stuck} still have "
            "Jx > 1e-3 Jx0 at the end")
    cfg = ChainConfig(N, _sign_of(zone.W0))
    meta = {"protocol": "beam_splitter", "T": T, "clearing_time": T_clear, **zone.params()}
    return Schedule(cfg, (ZoneSegment(zone, N, T),), True, meta)


# -- single-qubit gates ---------------------------------------------------------

def staggered_phase(N: int, Jz: float, tau: float) -> float:
    """Relative phase ``arg(<0|psi>/<1|psi>)`` after holding the staggered offset."""
    return 2.0 * N * Jz * tau


def staggered_phase_protocol(Jz: float, tau: float, N: int, W: float = 1.0) -> Schedule:
    """Hold ``Jx = 0`` and ``J^z_l = Jz (-1)^l`` for a time ``tau``.

    ``tau = 0`` gives a zero-length schedule (identity evolution) that
    :func:`model.validate` reports as having a nonpositive segment.
    """
    if Jz == 0:
        raise OutOfRangeError("Jz must be nonzero")
    if not tau >= 0:
        raise OutOfRangeError(f"tau must be >= 0, got {tau!r}")
    cfg = ChainConfig(N, _sign_of(W))
    seg = ConstantSegment(np.zeros(N), staggered(N, Jz), np.full(N - 1, float(W)), float(tau), "staggered_hold")
    meta = {"protocol": "staggered_phase", "Jz": Jz, "tau": tau, "W": W,
            "predicted_phase": staggered_phase(N, Jz, tau)}
    return Schedule(cfg, (seg,), False, meta)


@dataclass(frozen=True)
class GatePath:
    """Polyline in the (Jx, Jz) plane; ``Jz`` is the staggered amplitude."""

    points: tuple
    durations: tuple
    W: float
    N: int
    safe: bool = field(init=False)

    def __post_init__(self):
        if len(self.points) != len(self.durations) + 1:
            raise OutOfRangeError("need one more control point than legs")
        object.__setattr__(self, "safe", self.max_jz < self.W / (self.N - 1))

    @property
    def max_jz(self) -> float:
        return max(abs(p[1]) for p in self.points)

    def frame(self, point) -> CouplingFrame:
        jx, jz = point
        return CouplingFrame(np.full(self.N, float(jx)), staggered(self.N, jz), np.full(self.N - 1, float(self.W)))


def hadamard_path(N: int, W: float, Jx_max: float, Jz_hold: float,
                  leg_durations: float | Sequence[float], allow_unsafe: bool = False) -> tuple[GatePath, Schedule]:
    """Four legs (0,0) -> (Jx_max,0) -> (Jx_max,Jz_hold) -> (0,Jz_hold) -> (0,0).

    ``J^z`` is staggered, ``J^z_l = Jz_hold (-1)^l``: with this offset the
    target Neel state (site 1 down) becomes the ground state for
    ``Jz_hold > 0``.  Paths with ``Jz_hold >= W/(N-1)`` cross the lowest
    one-domain-wall level and are refused unless ``allow_unsafe``.
    """
    if not W > 0:
        raise OutOfRangeError("the gate path needs antiferromagnetic W > 0")
    if not Jx_max > W:
        raise OutOfRangeError(f"Jx_max={Jx_max!r} must exceed W={W!r} to leave the protected regime")
    if np.isscalar(leg_durations):
        legs = (float(leg_durations),) * 4
    else:
        legs = tuple(float(d) for d in leg_durations)
    if len(legs) != 4 or not all(d > 0 for d in legs):
        raise OutOfRangeError(f"need four positive leg durations, got {leg_durations!r}")
    bound = W / (N - 1)
    if abs(Jz_hold) >= bound and not allow_unsafe:
        raise UnsafePathError(
            f"Jz_hold={Jz_hold!r} violates Jz < W/(N-1) = {bound!r} for N={N}: the path crosses "
            "the one-domain-wall level")
    pts = ((0.0, 0.0), (float(Jx_max), 0.0), (float(Jx_max), float(Jz_hold)), (0.0, float(Jz_hold)), (0.0, 0.0))
    path = GatePath(pts, legs, float(W), N)
    segs = tuple(RampSegment(path.frame(a), path.frame(b), d, f"leg{i + 1}")
                 for i, (a, b, d) in enumerate(zip(pts[:-1], pts[1:], legs)))
    meta = {"protocol": "hadamard", "W": W, "Jx_max": Jx_max, "Jz_hold": Jz_hold, "legs": list(legs),
            "safe": path.safe}
    return path, Schedule(ChainConfig(N, ANTIFERRO), segs, False, meta)


# -- two-qubit phase gate ---------------------------------------------------------

def two_qubit_phase_model(N: int, Wprime: float, tau2: float) -> tuple[float, dict]:
    """Entangling phase ``phi2 = N W' tau2 / 2`` and its truth table.

    The table maps ``(e1, e2)`` to the factor ``exp(i phi2 ((e1 + e2) mod 2))``.
    """
    if N % 2:
        raise OutOfRangeError(f"N must be even, got {N}")
    if not tau2 >= 0:
        raise OutOfRangeError(f"tau2 must be >= 0, got {tau2!r}")
    phi2 = N * Wprime * tau2 / 2.0
    table = {(e1, e2): (np.exp(1j * phi2) if (e1 + e2) % 2 else 1.0 + 0j) for e1 in (0, 1) for e2 in (0, 1)}
    return phi2, table


def two_qubit_microscopic_phases(N: int, Wprime: float, tau2: float, W: float = 1.0) -> dict:
    """Phases picked up by the four Neel product states of two N-site chains.

    The chains are joined into one ``2N``-site register (no bond between
    them) and coupled by ``H' = -W' sum_{l odd} (1 - z1_l z2_l) / 2``: each
    overlapping pair of opposite spins lowers the energy by ``W'``.  The
    state is evolved with the dense oracle, and each phase is quoted relative
    to ``|00>``.
    """
    from . import exact

    if N % 2:
        raise OutOfRangeError(f"N must be even, got {N}")
    n = 2 * N
    exact._check_capacity(n)
    frame = CouplingFrame(np.zeros(n), np.zeros(n), np.r_[np.full(N - 1, W), 0.0, np.full(N - 1, W)])
    z = exact._z_signs(n)
    odd = np.arange(0, N, 2)   # 1-based odd sites
    coupling = -Wprime * np.sum(0.5 * (1.0 - z[odd] * z[N + odd]), axis=0)
    H = exact.sparse_hamiltonian(frame, n) + sp.diags(coupling)
    q = exact.neel_states(N)
    amps = {}
    for e1 in (0, 1):
        for e2 in (0, 1):
            psi = exact.StateVector(np.kron(q[e1].amp, q[e2].amp))
            out = exact.evolve_static(psi, H, tau2)
            amps[(e1, e2)] = np.vdot(psi.amp, out.amp)
    ref = amps[(0, 0)]
    return {k: float(np.angle(a / ref)) for k, a in amps.items()}
