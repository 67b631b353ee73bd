"""Strict JSON experiment configuration.

A config file looks like::

    {"schema": "atomchain/1", "experiment": "quench", "seed": 0, "workers": 1,
     "integrator": {"dt": 0.1},
     "params": {"N": 8, "protocol": {"kind": "linear_quench", "W": -1.0}}}

Unknown keys anywhere are errors, and every number is range-checked before
any work starts.
"""
from __future__ import annotations

import json
import math
import typing
from dataclasses import MISSING, asdict, dataclass, field, fields
from pathlib import Path
from typing import Any, Optional, Union

from .errors import ConfigError
from .exact import N_MAX

SCHEMA = "atomchain/1"
EXPERIMENTS = ("spectrum", "quench", "sweep-t", "sweep-width", "gate", "oracle-compare")


# -- generic strict loader ---------------------------------------------------------

def _coerce(value: Any, typ: Any, where: str):
    origin = typing.get_origin(typ)
    args = typing.get_args(typ)
    if origin is Union:
        if value is None and type(None) in args:
            return None
        errors = []
        for a in args:
            if a is type(None):
                continue
            try:
                return _coerce(value, a, where)
            except ConfigError as exc:
                errors.append(str(exc))
        raise ConfigError(f"{where}: {value!r} matches none of {typ}")
    if origin is list:
        if not isinstance(value, list):
            raise ConfigError(f"{where}: expected a list, got {type(value).__name__}")
        return [_coerce(v, args[0], f"{where}[{i}]") for i, v in enumerate(value)]
    if typ is bool:
        if not isinstance(value, bool):
            raise ConfigError(f"{where}: expected true/false, got {value!r}")
        return value
    if typ is int:
        if isinstance(value, bool) or not isinstance(value, int):
            raise ConfigError(f"{where}: expected an integer, got {value!r}")
        return value
    if typ is float:
        if isinstance(value, bool) or not isinstance(value, (int, float)):
            raise ConfigError(f"{where}: expected a number, got {value!r}")
        if not math.isfinite(value):
            raise ConfigError(f"{where}: must be finite")
        return float(value)
    if typ is dict:
        if not isinstance(value, dict):
            raise ConfigError(f"{where}: expected an object, got {type(value).__name__}")
        return value
    if typ is str:
        if not isinstance(value, str):
            raise ConfigError(f"{where}: expected a string, got {value!r}")
        return value
    if isinstance(typ, type) and hasattr(typ, "__dataclass_fields__"):
        return from_dict(typ, value, where)
    raise ConfigError(f"{where}: unsupported type {typ}")


def from_dict(cls, data: Any, where: str = "config"):
    if not isinstance(data, dict):
        raise ConfigError(f"{where}: expected an object, got {type(data).__name__}")
    hints = typing.get_type_hints(cls)
    names = {f.name for f in fields(cls) if f.init}
    unknown = sorted(set(data) - names)
    if unknown:
        raise ConfigError(f"{where}: unknown key(s) {unknown}; allowed {sorted(names)}")
    kwargs = {}
    for f in fields(cls):
        if not f.init:
            continue
        if f.name in data:
            kwargs[f.name] = _coerce(data[f.name], hints[f.name], f"{where}.{f.name}")
        elif f.default is MISSING and f.default_factory is MISSING:
            raise ConfigError(f"{where}: missing required key {f.name!r}")
    obj = cls(**kwargs)
    check = getattr(obj, "check", None)
    if check is not None:
        check(where)
    return obj


def _require(cond: bool, where: str, msg: str):
    if not cond:
        raise ConfigError(f"{where}: {msg}")


def _check_N(N: int, where: str, cap: int | None = None):
    _require(N >= 2, where, f"N must be >= 2, got {N}")
    if cap is not None:
        _require(N <= cap, where, f"N = {N} exceeds the oracle limit {cap}")


# -- sections -------------------------------------------------------------------------

@dataclass
class IntegratorConfig:
    dt: float = 0.1
    oracle_dt: float = 0.05
    reortho_every: int = 50

    def check(self, where):
        _require(self.dt > 0, where, "dt must be positive")
        _require(self.oracle_dt > 0, where, "oracle_dt must be positive")
        _require(self.reortho_every >= 1, where, "reortho_every must be >= 1")


@dataclass
class ZoneConfig:
    W0: float = -1.0
    w: float = 0.1
    v: float = 0.01
    lam: float = 1.0
    x0: Optional[float] = None
    xc: float = 0.0
    Jx0: Optional[float] = None
    shapeW: str = "gaussian"
    shapeJ: str = "erf"
    j_shift: float = 1.0

    def check(self, where):
        from .protocols import J_SHAPES, W_SHAPES
        _require(self.w > 0 and self.v > 0 and self.lam > 0, where, "w, v and lam must be positive")
        _require(self.W0 != 0, where, "W0 must be nonzero")
        _require(self.shapeW in W_SHAPES, where, f"shapeW must be one of {sorted(W_SHAPES)}")
        _require(self.shapeJ in J_SHAPES, where, f"shapeJ must be one of {sorted(J_SHAPES)}")


PROTOCOL_KEYS = {
    "linear_quench": {"kind", "W", "Jx_start", "Jx_end", "T"},
    "beam_splitter": {"kind", "zone", "T"},
    "hadamard": {"kind", "W", "Jx_max", "Jz_hold", "legs"},
}


@dataclass
class ProtocolConfig:
    """One schedule; which keys apply depends on ``kind``.

    ``T = None`` means the suggested adiabatic time (linear quench) or the
    zone clearing time (beam splitter).
    """

    kind: str
    W: float = -1.0
    Jx_start: Optional[float] = None
    Jx_end: float = 0.0
    T: Optional[float] = None
    zone: Optional[ZoneConfig] = None
    Jx_max: float = 2.0
    Jz_hold: float = 0.1
    legs: Optional[Union[float, list[float]]] = None

    def check(self, where):
        _require(self.kind in PROTOCOL_KEYS, where, f"kind must be one of {sorted(PROTOCOL_KEYS)}")
        if self.T is not None:
            _require(self.T >= 0, where, "T must be >= 0")
        if self.kind == "linear_quench":
            _require(self.W != 0, where, "W must be nonzero")
        if self.kind == "hadamard":
            _require(self.W > 0, where, "hadamard needs W > 0")
            _require(self.Jx_max > self.W, where, "Jx_max must exceed W")
            if isinstance(self.legs, list):
                _require(len(self.legs) == 4 and all(d > 0 for d in self.legs), where, "legs needs 4 positive entries")
            elif self.legs is not None:
                _require(self.legs > 0, where, "legs must be positive")

    @classmethod
    def parse(cls, data, where):
        if isinstance(data, dict) and data.get("kind") in PROTOCOL_KEYS:
            extra = sorted(set(data) - PROTOCOL_KEYS[data["kind"]])
            _require(not extra, where, f"key(s) {extra} do not apply to kind {data['kind']!r}")
        return from_dict(cls, data, where)


@dataclass
class SpectrumParams:
    N: int
    mode: str = "homogeneous"
    W: float = 1.0
    jx_min: float = 0.0
    jx_max: float = 2.0
    points: int = 200
    protocol: Optional[dict] = None
    samples: int = 101
    levels: int = 8

    def check(self, where):
        _require(self.mode in ("homogeneous", "schedule"), where, "mode must be 'homogeneous' or 'schedule'")
        _require(self.points >= 1 and self.samples >= 2 and self.levels >= 1, where,
                 "points >= 1, samples >= 2, levels >= 1")
        if self.mode == "homogeneous":
            _check_N(self.N, where)
            _require(self.W != 0, where, "W must be nonzero")
            _require(self.jx_min <= self.jx_max, where, "jx_min must not exceed jx_max")
        else:
            _check_N(self.N, where, N_MAX)
            _require(self.protocol is not None, where, "schedule mode needs a protocol")
            ProtocolConfig.parse(self.protocol, f"{where}.protocol")


@dataclass
class QuenchParams:
    N: int
    protocol: dict
    samples: int = 11
    oracle: bool = False
    reference: str = "auto"
    check_convergence: bool = True

    def check(self, where):
        _check_N(self.N, where, N_MAX if self.oracle else None)
        p = ProtocolConfig.parse(self.protocol, f"{where}.protocol")
        _require(p.kind in ("linear_quench", "beam_splitter"), where, "quench needs a fermionizable protocol")
        _require(self.samples >= 1, where, "samples must be >= 1")
        _require(self.reference in ("auto", "instantaneous", "ideal"), where,
                 "reference must be 'auto', 'instantaneous' or 'ideal'")


@dataclass
class SweepTParams:
    N_values: list[int]
    F_target: float = 0.95
    W: float = -1.0
    Jx_start: Optional[float] = None
    Jx_end: float = 0.0
    T_cap: float = 1e5
    rtol: float = 1e-3

    def check(self, where):
        _require(len(self.N_values) >= 1, where, "N_values must not be empty")
        for N in self.N_values:
            _check_N(N, where)
        _require(0 < self.F_target < 1, where, "F_target must lie in (0, 1)")
        _require(self.W != 0, where, "W must be nonzero")
        _require(self.T_cap > 0 and 0 < self.rtol < 1, where, "T_cap > 0 and 0 < rtol < 1")


@dataclass
class WidthParams:
    N_values: list[int]
    widths: list[float]
    zone: ZoneConfig = field(default_factory=ZoneConfig)

    def check(self, where):
        _require(self.N_values and self.widths, where, "N_values and widths must not be empty")
        for N in self.N_values:
            _check_N(N, where)
        _require(all(w > 0 for w in self.widths), where, "widths must be positive")


@dataclass
class GateParams:
    gate: str
    N: int = 8
    W: float = 1.0
    Jx_max: float = 2.0
    Jz_hold: float = 0.1
    legs: Optional[Union[float, list[float]]] = None
    F_target: float = 0.99
    leg_cap: float = 1600.0
    levels: int = 6
    samples: int = 201
    Jz: float = 0.1
    tau: float = 1.0
    Wprime: float = 1.0
    N_values: list[int] = field(default_factory=lambda: [2, 4, 6])
    tau2_values: list[float] = field(default_factory=lambda: [0.1, 0.2, 0.3])

    def check(self, where):
        _require(self.gate in ("hadamard", "staggered", "two_qubit"), where,
                 "gate must be 'hadamard', 'staggered' or 'two_qubit'")
        if self.gate == "two_qubit":
            for N in self.N_values:
                _require(N % 2 == 0 and 2 <= N and 2 * N <= N_MAX, where,
                         f"two_qubit needs even N with 2N <= {N_MAX}, got {N}")
            _require(all(t >= 0 for t in self.tau2_values), where, "tau2_values must be >= 0")
            return
        _check_N(self.N, where, N_MAX)
        _require(self.W > 0, where, "qubit protocols need W > 0")
        if self.gate == "staggered":
            _require(self.Jz != 0 and self.tau >= 0, where, "staggered needs Jz != 0 and tau >= 0")
        else:
            _require(self.Jx_max > self.W, where, "Jx_max must exceed W")
            _require(0 < self.F_target < 1 and self.leg_cap > 0, where, "0 < F_target < 1 and leg_cap > 0")
            _require(self.levels >= 1 and self.samples >= 2, where, "levels >= 1 and samples >= 2")
            if isinstance(self.legs, list):
                _require(len(self.legs) == 4 and all(d > 0 for d in self.legs), where, "legs needs 4 positive entries")
            elif self.legs is not None:
                _require(self.legs > 0, where, "legs must be positive")


@dataclass
class OracleParams:
    n_schedules: int = 50
    N_min: int = 2
    N_max: int = 8
    segments_max: int = 3
    duration_min: float = 0.5
    duration_max: float = 5.0

    def check(self, where):
        _require(self.n_schedules >= 1, where, "n_schedules must be >= 1")
        _require(2 <= self.N_min <= self.N_max <= N_MAX, where, f"need 2 <= N_min <= N_max <= {N_MAX}")
        _require(self.segments_max >= 1, where, "segments_max must be >= 1")
        _require(0 < self.duration_min <= self.duration_max, where, "need 0 < duration_min <= duration_max")


PARAMS = {
    "spectrum": SpectrumParams, "quench": QuenchParams, "sweep-t": SweepTParams,
    "sweep-width": WidthParams, "gate": GateParams, "oracle-compare": OracleParams,
}


@dataclass
class ExperimentConfig:
    schema: str
    experiment: str
    params: dict
    integrator: IntegratorConfig = field(default_factory=IntegratorConfig)
    seed: int = 0
    workers: int = 1

    def check(self, where):
        _require(self.schema == SCHEMA, where, f"schema must be {SCHEMA!r}, got {self.schema!r}")
        _require(self.experiment in EXPERIMENTS, where, f"experiment must be one of {list(EXPERIMENTS)}")
        _require(0 <= self.seed < 2**64, where, "seed must be an unsigned 64-bit integer")
        _require(self.workers >= 1, where, "workers must be >= 1")
        object.__setattr__(self, "params", from_dict(PARAMS[self.experiment], self.params, f"{where}.params"))

    def to_dict(self) -> dict:
        return {"schema": self.schema, "experiment": self.experiment, "params": asdict(self.params),
                "integrator": asdict(self.integrator), "seed": self.seed, "workers": self.workers}


def parse_config(data: Any) -> ExperimentConfig:
    return from_dict(ExperimentConfig, data, "config")


def load_config(path) -> ExperimentConfig:
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc.strerror}") from exc
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{path}: invalid JSON at line {exc.lineno} column {exc.colno}: {exc.msg}") from exc
    return parse_config(data)
