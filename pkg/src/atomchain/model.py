"""Chain configuration, coupling frames and piecewise time-dependent schedules.

Everything here is immutable. A :class:`Schedule` is an ordered list of
segments; each segment knows its own duration and returns the couplings
``(Jx, Jz, W)`` at a local time ``0 <= tau <= duration``.  Energies and times
are dimensionless (hbar = 1).
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Mapping, Sequence

import numpy as np

from .errors import OutOfRangeError

FERRO = "ferro"
ANTIFERRO = "antiferro"

# relative slack for t == T evaluations that accumulated rounding
_T_SLACK = 1e-12


def _frozen(x, n: int, name: str) -> np.ndarray:
    arr = np.array(np.broadcast_to(np.asarray(x, dtype=float), (n,)), dtype=float)
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True)
class ChainConfig:
    """Open chain of ``N`` sites with a fixed sign of the bond coupling W."""

    N: int
    interaction_sign: str = FERRO
    boundary: str = "open"

    def __post_init__(self):
        if int(self.N) != self.N or self.N < 2:
            raise OutOfRangeError(f"N must be an integer >= 2, got {self.N!r}")
        if self.interaction_sign not in (FERRO, ANTIFERRO):
            raise OutOfRangeError(f"interaction_sign must be 'ferro' or 'antiferro', got {self.interaction_sign!r}")
        if self.boundary != "open":
            raise OutOfRangeError("only open boundary conditions are supported")

    @property
    def sign(self) -> int:
        return -1 if self.interaction_sign == FERRO else 1


@dataclass(frozen=True, eq=False)
class CouplingFrame:
    """Instantaneous couplings of an N-site chain.

    ``Jx`` and ``Jz`` hold one value per site, ``W`` one value per bond
    ``(l, l+1)``.  Scalars are broadcast only through :meth:`uniform`.
    """

    Jx: np.ndarray
    Jz: np.ndarray
    W: np.ndarray
    t: float = 0.0

    def __post_init__(self):
        jx = np.asarray(self.Jx, dtype=float)
        n = jx.size
        if jx.ndim != 1 or n < 2:
            raise OutOfRangeError("Jx must be a 1D array with at least two sites")
        jz = np.asarray(self.Jz, dtype=float)
        w = np.asarray(self.W, dtype=float)
        if jz.shape != (n,) or w.shape != (n - 1,):
            raise OutOfRangeError(
                f"array lengths must be (N, N, N-1) = ({n}, {n}, {n - 1}); "
                f"got ({jx.size}, {jz.size}, {w.size})"
            )
        for name, arr in (("Jx", jx), ("Jz", jz), ("W", w)):
            if not np.all(np.isfinite(arr)):
                raise OutOfRangeError(f"{name} contains non-finite entries")
            object.__setattr__(self, name, _frozen(arr, arr.size, name))
        object.__setattr__(self, "t", float(self.t))

    @classmethod
    def uniform(cls, N: int, Jx: float = 0.0, W: float = 0.0, Jz: float = 0.0, t: float = 0.0) -> "CouplingFrame":
        return cls(np.full(N, Jx, float), np.full(N, Jz, float), np.full(N - 1, W, float), t)

    @property
    def N(self) -> int:
        return self.Jx.size

    @property
    def fermionizable(self) -> bool:
        return not np.any(self.Jz)

    def is_homogeneous(self) -> bool:
        return bool(np.ptp(self.Jx) == 0 and np.ptp(self.Jz) == 0 and np.ptp(self.W) == 0)

    @property
    def scale(self) -> float:
        """Largest coupling magnitude (1 for the empty frame)."""
        m = max(np.max(np.abs(self.Jx)), np.max(np.abs(self.Jz)), np.max(np.abs(self.W), initial=0.0))
        return float(m) if m > 0 else 1.0

    def with_time(self, t: float) -> "CouplingFrame":
        return CouplingFrame(self.Jx, self.Jz, self.W, t)


class Segment:
    """Base class for schedule pieces.

    Subclasses set ``duration`` and ``kind`` and implement :meth:`couplings`.
    """

    duration: float
    kind: str = "segment"

    def couplings(self, tau: float) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        raise NotImplementedError

    def has_jz(self) -> bool:
        """Whether J^z can be nonzero anywhere inside the segment."""
        return any(np.any(self.couplings(tau)[1]) for tau in self._probe_times())

    def params(self) -> dict:
        return {"kind": self.kind, "duration": self.duration}

    def _probe_times(self) -> Sequence[float]:
        d = max(self.duration, 0.0)
        return (0.0, 0.5 * d, d)


@dataclass(frozen=True, eq=False)
class ConstantSegment(Segment):
    Jx: np.ndarray
    Jz: np.ndarray
    W: np.ndarray
    duration: float
    kind: str = "constant"

    def __post_init__(self):
        n = np.asarray(self.Jx).size
        object.__setattr__(self, "Jx", _frozen(self.Jx, n, "Jx"))
        object.__setattr__(self, "Jz", _frozen(self.Jz, n, "Jz"))
        object.__setattr__(self, "W", _frozen(self.W, max(n - 1, 0), "W"))

    @classmethod
    def from_frame(cls, frame: CouplingFrame, duration: float, kind: str = "constant") -> "ConstantSegment":
        return cls(frame.Jx, frame.Jz, frame.W, duration, kind)

    def couplings(self, tau):
        return self.Jx, self.Jz, self.W

    def has_jz(self):
        return bool(np.any(self.Jz))

    def params(self):
        return {"kind": self.kind, "duration": self.duration, "Jx": self.Jx.tolist(),
                "Jz": self.Jz.tolist(), "W": self.W.tolist()}


@dataclass(frozen=True, eq=False)
class RampSegment(Segment):
    """Sitewise linear interpolation between two coupling sets."""

    start: CouplingFrame
    end: CouplingFrame
    duration: float
    kind: str = "linear"

    def __post_init__(self):
        if self.start.N != self.end.N:
            raise OutOfRangeError("ramp endpoints have different site counts")

    def couplings(self, tau):
        s = tau / self.duration if self.duration > 0 else 0.0
        a, b = self.start, self.end
        return (a.Jx + s * (b.Jx - a.Jx), a.Jz + s * (b.Jz - a.Jz), a.W + s * (b.W - a.W))

    def has_jz(self):
        return bool(np.any(self.start.Jz) or np.any(self.end.Jz))

    def params(self):
        return {"kind": self.kind, "duration": self.duration,
                "start": {"Jx": self.start.Jx.tolist(), "Jz": self.start.Jz.tolist(), "W": self.start.W.tolist()},
                "end": {"Jx": self.end.Jx.tolist(), "Jz": self.end.Jz.tolist(), "W": self.end.W.tolist()}}


@dataclass(frozen=True, eq=False)
class ReversedSegment(Segment):
    inner: Segment

    @property
    def duration(self):
        return self.inner.duration

    @property
    def kind(self):
        return f"reversed:{self.inner.kind}"

    def couplings(self, tau):
        return self.inner.couplings(self.inner.duration - tau)

    def has_jz(self):
        return self.inner.has_jz()

    def params(self):
        return {"kind": self.kind, "inner": self.inner.params()}


@dataclass(frozen=True)
class Diagnostic:
    segment: int | None
    invariant: str
    message: str


@dataclass(frozen=True, eq=False)
class Schedule:
    config: ChainConfig
    segments: tuple
    fermionizable: bool = True
    metadata: Mapping = field(default_factory=dict)

    def __post_init__(self):
        object.__setattr__(self, "segments", tuple(self.segments))
        starts = [0.0]
        for seg in self.segments:
            starts.append(starts[-1] + max(float(seg.duration), 0.0))
        object.__setattr__(self, "_starts", tuple(starts))

    @property
    def N(self) -> int:
        return self.config.N

    @property
    def total_duration(self) -> float:
        return self._starts[-1]

    @property
    def breakpoints(self) -> tuple[float, ...]:
        """Segment boundary times, including 0 and T."""
        return tuple(sorted(set(self._starts)))

    def eval_frame(self, t: float) -> CouplingFrame:
        T = self.total_duration
        slack = _T_SLACK * max(1.0, T)
        if not (-slack <= t <= T + slack) or math.isnan(t):
            raise OutOfRangeError(f"t = {t!r} outside schedule range [0, {T!r}]")
        t = min(max(t, 0.0), T)
        active = [i for i, s in enumerate(self.segments) if s.duration > 0]
        if not active:
            raise OutOfRangeError("schedule has no segment of positive duration")
        idx = active[-1]
        for i in active:
            if t < self._starts[i + 1]:
                idx = i
                break
        seg = self.segments[idx]
        tau = min(t - self._starts[idx], seg.duration)
        jx, jz, w = seg.couplings(tau)
        return CouplingFrame(jx, jz, w, t)

    def validate(self) -> list[Diagnostic]:
        return validate(self)

    def reversed(self) -> "Schedule":
        """Schedule traversing the same couplings backwards in time."""
        segs = tuple(ReversedSegment(s) for s in reversed(self.segments))
        return Schedule(self.config, segs, self.fermionizable, dict(self.metadata, reversed=True))

    def describe(self) -> dict:
        return {"N": self.N, "interaction_sign": self.config.interaction_sign,
                "fermionizable": self.fermionizable, "total_duration": self.total_duration,
                "segments": [s.params() for s in self.segments], "metadata": dict(self.metadata)}


def eval_frame(schedule: Schedule, t: float) -> CouplingFrame:
    return schedule.eval_frame(t)


def validate(schedule: Schedule) -> list[Diagnostic]:
    """Collect invariant violations instead of raising."""
    out: list[Diagnostic] = []
    if not schedule.segments:
        out.append(Diagnostic(None, "empty schedule", "schedule has no segments"))
    N = schedule.config.N
    for i, seg in enumerate(schedule.segments):
        if not seg.duration > 0:
            out.append(Diagnostic(i, "nonpositive duration", f"segment {i} has duration {seg.duration!r}"))
            continue
        if schedule.fermionizable and seg.has_jz():
            out.append(Diagnostic(i, "fermionizable violated", f"segment {i} ({seg.kind}) has nonzero Jz"))
        for tau in seg._probe_times():
            jx, jz, w = (np.asarray(a, dtype=float) for a in seg.couplings(tau))
            if jx.shape != (N,) or jz.shape != (N,) or w.shape != (N - 1,):
                out.append(Diagnostic(i, "shape mismatch",
                                      f"segment {i} returns lengths ({jx.size}, {jz.size}, {w.size}) for N={N}"))
                break
            if not (np.all(np.isfinite(jx)) and np.all(np.isfinite(jz)) and np.all(np.isfinite(w))):
                out.append(Diagnostic(i, "non-finite", f"segment {i} has non-finite couplings at tau={tau}"))
                break
            if np.any(w * schedule.config.sign < 0):
                out.append(Diagnostic(i, "interaction sign",
                                      f"segment {i} has W of sign opposite to {schedule.config.interaction_sign}"))
                break
    return out
