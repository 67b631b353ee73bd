"""Experiment runners behind the command line.

Each ``run_*`` function takes a validated :class:`~atomchain.config.ExperimentConfig`
and returns a :class:`RunRecord` whose rows are fully determined by the config
and seed.  Wall-clock timings live in the metadata only, never in CSV rows.
"""
from __future__ import annotations

import csv
import json
import math
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import Callable, Iterable, Sequence

import numpy as np
from scipy.optimize import brentq

from . import __version__, dynamics, exact, fermion, protocols
from .config import ExperimentConfig, ProtocolConfig, ZoneConfig
from .errors import BracketError, DegenerateGroundStateError, OutOfRangeError
from .model import ChainConfig, CouplingFrame, RampSegment, Schedule

BRACKET_SLACK = 1e-6


@dataclass
class RunRecord:
    kind: str
    columns: list[str]
    rows: list[tuple]
    summary: dict = field(default_factory=dict)
    extra_tables: dict = field(default_factory=dict)   # name -> (columns, rows)
    timings: list = field(default_factory=list)


# -- helpers ------------------------------------------------------------------------

def _pmap(fn: Callable, tasks: Sequence, workers: int) -> list:
    """Order-preserving map, optionally over a process pool."""
    if workers <= 1 or len(tasks) <= 1:
        return [fn(t) for t in tasks]
    with ProcessPoolExecutor(max_workers=min(workers, len(tasks))) as pool:
        return list(pool.map(fn, tasks))


def _ground(frame: CouplingFrame) -> fermion.CovarianceMatrix:
    return fermion.ground_covariance(fermion.build_majorana_matrix(frame))


def _exact_ground(frame: CouplingFrame) -> exact.StateVector:
    _, vecs = exact.eigensystem(exact.build_dense_hamiltonian(frame), 1)
    return exact.StateVector(vecs[:, 0].astype(complex), frame.t)


def _bounds(cov: fermion.CovarianceMatrix, frame: CouplingFrame) -> tuple[float, float, float, float, str]:
    m = dynamics.excitation_moments(cov, frame)
    F1, F2 = dynamics.fidelity_bounds(m)
    return m.A1, m.A2, F1, F2, dynamics.bound_quality(F1, F2)


def cat_states(N: int, W: float) -> tuple[exact.StateVector, exact.StateVector]:
    """The two cat states of the ordered phase: all-up/all-down for W < 0, Neel for W > 0."""
    if W < 0:
        return exact.ghz_target(N, 1), exact.ghz_target(N, -1)
    q0, q1 = exact.neel_states(N)
    h = 1 / math.sqrt(2)
    return exact.superpose([q0, q1], [h, h]), exact.superpose([q0, q1], [h, -h])


def build_protocol(p: ProtocolConfig, N: int) -> tuple[Schedule | None, dict]:
    """Schedule for a protocol config; ``None`` for a sudden (``T = 0``) quench."""
    if p.kind == "linear_quench":
        jx0 = protocols.JX_START_FACTOR * abs(p.W) if p.Jx_start is None else p.Jx_start
        T = protocols.suggested_time(N, p.W) if p.T is None else p.T
        info = {"W": p.W, "Jx_start": jx0, "Jx_end": p.Jx_end, "T": T,
                "start": CouplingFrame.uniform(N, Jx=jx0, W=p.W),
                "end": CouplingFrame.uniform(N, Jx=p.Jx_end, W=p.W),
                "ideal": CouplingFrame.uniform(N, Jx=p.Jx_end, W=p.W)}
        if T == 0:
            return None, info
        return protocols.linear_quench(p.W, jx0, p.Jx_end, T, N), info
    if p.kind == "beam_splitter":
        zone = protocols.ZoneProfile(**asdict(p.zone or ZoneConfig()))
        s = protocols.beam_splitter_profile(zone, N, p.T)
        return s, {"W": zone.W0, "T": s.total_duration, "start": s.eval_frame(0.0),
                   "end": s.eval_frame(s.total_duration), "ideal": zone.reference_frame(N)}
    if p.kind == "hadamard":
        legs = 25.0 if p.legs is None else p.legs
        _, s = protocols.hadamard_path(N, p.W, p.Jx_max, p.Jz_hold, legs)
        return s, {"W": p.W, "T": s.total_duration, "start": s.eval_frame(0.0), "end": s.eval_frame(s.total_duration)}
    raise OutOfRangeError(f"unknown protocol kind {p.kind!r}")


def _fit(x, y) -> dict:
    x, y = np.asarray(x, float), np.asarray(y, float)
    if x.size < 2 or not np.all(np.isfinite(y)):
        return {"slope": None, "intercept": None, "r2": None}
    p = np.polyfit(x, y, 1)
    ss = float(np.sum((y - y.mean()) ** 2))
    r2 = 1.0 - float(np.sum((y - np.polyval(p, x)) ** 2)) / ss if ss > 0 else 1.0
    return {"slope": float(p[0]), "intercept": float(p[1]), "r2": r2}


# -- spectrum -----------------------------------------------------------------------

def run_spectrum_scan(cfg: ExperimentConfig) -> RunRecord:
    p = cfg.params
    rows = []
    if p.mode == "homogeneous":
        for r in np.linspace(p.jx_min, p.jx_max, p.points):
            frame = CouplingFrame.uniform(p.N, Jx=float(r) * abs(p.W), W=p.W)
            eps = fermion.excitation_spectrum(fermion.build_majorana_matrix(frame)).eps
            rows.extend((float(r), nu, float(e)) for nu, e in enumerate(eps))
        return RunRecord("spectrum", ["scan_parameter", "index", "energy"], rows,
                         {"mode": "homogeneous", "N": p.N, "W": p.W, "path": "fermionic"})
    proto = ProtocolConfig.parse(p.protocol, "params.protocol")
    sched, info = build_protocol(proto, p.N)
    if sched is None:
        raise OutOfRangeError("a spectrum scan along a schedule needs T > 0")
    k = min(p.levels, 2**p.N)
    for t in np.linspace(0.0, sched.total_duration, p.samples):
        e, _ = exact.eigensystem(exact.build_dense_hamiltonian(sched.eval_frame(float(t))), k)
        rows.extend((float(t), n, float(x)) for n, x in enumerate(e))
    return RunRecord("spectrum", ["scan_parameter", "index", "energy"], rows,
                     {"mode": "schedule", "N": p.N, "protocol": proto.kind, "T": sched.total_duration, "path": "oracle"})


# -- quench -------------------------------------------------------------------------

QUENCH_COLUMNS = ["t", "A1", "A2", "F1", "F2", "quality"]
ORACLE_COLUMNS = ["F_exact", "parity", "cat_plus", "cat_minus"]


def run_quench(cfg: ExperimentConfig) -> RunRecord:
    p, integ = cfg.params, cfg.integrator
    proto = ProtocolConfig.parse(p.protocol, "params.protocol")
    sched, info = build_protocol(proto, p.N)
    reference = p.reference if p.reference != "auto" else ("ideal" if proto.kind == "beam_splitter" else "instantaneous")
    columns = QUENCH_COLUMNS + (ORACLE_COLUMNS if p.oracle else [])
    cov = _ground(info["start"])
    psi = _exact_ground(info["start"]) if p.oracle else None
    cats = cat_states(p.N, info["W"]) if p.oracle else None
    rows = []

    def ref_frame(t):
        if reference == "ideal":
            return info["ideal"]
        return info["end"] if sched is None else sched.eval_frame(t)

    def row(t, cov, psi):
        frame = ref_frame(t)
        try:
            A1, A2, F1, F2, q = _bounds(cov, frame)
        except DegenerateGroundStateError:
            A1 = A2 = F1 = F2 = math.nan
            q = "degenerate-reference"
        out = [t, A1, A2, F1, F2, q]
        if p.oracle:
            Fx = float(exact.excitation_distribution(psi, frame)[0]) if q != "degenerate-reference" else math.nan
            out += [Fx, dynamics.fermion_parity(cov), exact.state_fidelity(psi, cats[0]),
                    exact.state_fidelity(psi, cats[1])]
        return tuple(out)

    summary = {"protocol": proto.kind, "N": p.N, "T": info["T"], "reference": reference}
    if sched is None:
        # sudden limit: the initial ground state measured against the final frame
        rows.append(row(0.0, cov, psi))
        return RunRecord("quench", columns, rows, summary)
    times = np.linspace(0.0, sched.total_duration, p.samples) if p.samples > 1 else np.array([sched.total_duration])
    t_prev = 0.0
    for t in times:
        t = float(t)
        cov = dynamics.evolve_covariance(cov, sched, t_prev, t, integ.dt, integ.reortho_every)
        if p.oracle:
            psi = exact.evolve_state(psi, sched, t_prev, t, integ.oracle_dt)
        t_prev = t
        rows.append(row(t, cov, psi))
    if p.check_convergence:
        g0 = _ground(info["start"])
        T = sched.total_duration
        c1 = dynamics.evolve_covariance(g0, sched, 0.0, T, integ.dt, integ.reortho_every)
        c2 = dynamics.evolve_covariance(g0, sched, 0.0, T, integ.dt / 2, integ.reortho_every)
        summary["convergence"] = {"dt": integ.dt, "max_abs_gamma_diff": float(np.max(np.abs(c1.Gamma - c2.Gamma))),
                                  "purity_error": c2.purity_error()}
    if p.oracle:
        viol = [r[0] for r in rows if not (r[3] - BRACKET_SLACK <= r[6] <= r[4] + BRACKET_SLACK)]
        summary["bracket_violations"] = viol
    return RunRecord("quench", columns, rows, summary)


# -- fidelity-time search --------------------------------------------------------------

@dataclass
class TimeSearch:
    N: int
    F_target: float
    T1: float
    T2: float
    flags: list[str]
    evaluations: int


def _final_bounds(N: int, T: float, W: float, jx0: float, jx1: float, dt: float) -> tuple[float, float]:
    start = CouplingFrame.uniform(N, Jx=jx0, W=W)
    end = CouplingFrame.uniform(N, Jx=jx1, W=W)
    cov = _ground(start)
    if T > 0:
        cov = dynamics.evolve_covariance(cov, protocols.linear_quench(W, jx0, jx1, T, N), 0.0, T, dt)
    return dynamics.fidelity_bounds(dynamics.excitation_moments(cov, end))


def find_time_for_fidelity(N: int, F_target: float, W: float = -1.0, Jx_start: float | None = None,
                           Jx_end: float = 0.0, dt: float = dynamics.DEFAULT_DT, T_cap: float = 1e5,
                           rtol: float = 1e-3, dense_points: int = 8) -> TimeSearch:
    """Shortest linear-quench durations with ``F1 >= F_target`` and ``F2 >= F_target``.

    The sample set is ``T = 0`` followed by ``T = 1/|W|, 2/|W|, 4/|W|, ...``
    until both bounds meet the target.  Each bound is then located at its
    last upward crossing: the bracket is the last sample below target and the
    next one, refined by Brent's method.  Small-``T`` bounds can be
    non-monotone (``F2`` even exceeds 1 there); if the sampled values are not
    nondecreasing the bracket is rescanned on a dense grid first, and the
    record is flagged.
    """
    if not 0 < F_target < 1:
        raise OutOfRangeError("F_target must lie in (0, 1)")
    jx0 = protocols.JX_START_FACTOR * abs(W) if Jx_start is None else Jx_start
    cache: dict[float, tuple[float, float]] = {}

    def F(T):
        if T not in cache:
            cache[T] = _final_bounds(N, T, W, jx0, Jx_end, dt)
        return cache[T]

    Ts = [0.0]
    T = 1.0 / abs(W)
    while True:
        f = F(Ts[-1])
        if f[0] >= F_target and f[1] >= F_target and len(Ts) > 1:
            break
        if T > T_cap:
            raise BracketError(f"N={N}: bounds did not reach F={F_target} below T_cap={T_cap} "
                               f"(last F1={f[0]:.6g}, F2={f[1]:.6g} at T={Ts[-1]:.6g})")
        Ts.append(T)
        T *= 2
    flags = []
    result = []
    for b, name in ((0, "F1"), (1, "F2")):
        vals = [F(t)[b] for t in Ts]
        below = [i for i, v in enumerate(vals) if v < F_target]
        if not below:
            result.append(0.0)
            continue
        k = below[-1]
        lo, hi = Ts[k], Ts[k + 1]
        if any(b2 < a2 - 1e-12 for a2, b2 in zip(vals, vals[1:])):
            flags.append(f"nonmonotone-{name}")
            grid = np.linspace(lo, hi, dense_points + 2)
            dvals = [F(float(t))[b] for t in grid]
            j = max(i for i, v in enumerate(dvals) if v < F_target)
            lo, hi = float(grid[j]), float(grid[j + 1])
        result.append(brentq(lambda t: F(t)[b] - F_target, lo, hi, xtol=rtol * hi, rtol=1e-12)
                      if F(hi)[b] > F_target else hi)
    return TimeSearch(N, F_target, result[0], result[1], flags, len(cache))


def _sweep_t_task(args):
    N, p, dt = args
    return find_time_for_fidelity(N, p.F_target, p.W, p.Jx_start, p.Jx_end, dt, p.T_cap, p.rtol)


def run_sweep_t(cfg: ExperimentConfig) -> RunRecord:
    p = cfg.params
    Ns = sorted(set(p.N_values))
    tasks = [(N, p, cfg.integrator.dt) for N in Ns]
    t0 = time.perf_counter()
    res = _pmap(_sweep_t_task, tasks, cfg.workers)
    rows = [(r.N, r.F_target, r.T1, r.T2, r.T1 / r.N**2, r.T2 / r.N**2, r.evaluations, ";".join(r.flags) or "ok")
            for r in res]
    logN = np.log(Ns)
    summary = {"kappa": protocols.KAPPA, "Jx_start": p.Jx_start if p.Jx_start is not None else
               protocols.JX_START_FACTOR * abs(p.W),
               "loglog_T1": _fit(logN, np.log([max(r.T1, 1e-300) for r in res])),
               "loglog_T2": _fit(logN, np.log([max(r.T2, 1e-300) for r in res]))}
    cols = ["N", "F_target", "T1", "T2", "T1_over_N2", "T2_over_N2", "evaluations", "flags"]
    return RunRecord("sweep-t", cols, rows, summary, timings=[time.perf_counter() - t0])


# -- width sweep --------------------------------------------------------------------

def width_point(N: int, zone: protocols.ZoneProfile, dt: float = dynamics.DEFAULT_DT,
                reortho_every: int = dynamics.REORTHO_EVERY) -> tuple:
    """Bounds for one string dragged through one zone, against the ideal frame."""
    s = protocols.beam_splitter_profile(zone, N)
    cov = dynamics.evolve_covariance(_ground(s.eval_frame(0.0)), s, 0.0, s.total_duration, dt, reortho_every)
    A1, A2, F1, F2, q = _bounds(cov, zone.reference_frame(N))
    return A1, A2, F1, F2, q, s.total_duration


def _width_task(args):
    N, w, zone_kw, dt, ro = args
    zone = protocols.ZoneProfile(**dict(zone_kw, w=w))
    return (N, w) + width_point(N, zone, dt, ro)


def run_width_sweep(cfg: ExperimentConfig) -> RunRecord:
    p = cfg.params
    zone_kw = asdict(p.zone)
    Ns, ws = sorted(set(p.N_values)), sorted(set(p.widths))
    tasks = [(N, w, zone_kw, cfg.integrator.dt, cfg.integrator.reortho_every) for w in ws for N in Ns]
    res = sorted(_pmap(_width_task, tasks, cfg.workers), key=lambda r: (r[1], r[0]))
    rows = [(N, w, 1 - F2, 1 - F1, A1, A2, T, q) for N, w, A1, A2, F1, F2, q, T in res]
    summary = {"zone": {k: v for k, v in zone_kw.items() if k != "w"}, "fits": {}, "ordering": {}}
    by_w = {w: [r for r in rows if r[1] == w] for w in ws}
    for w, rs in by_w.items():
        n = [r[0] for r in rs]
        inf1 = np.array([r[3] for r in rs])
        summary["fits"][repr(w)] = {
            "log_infidelity_vs_N": _fit(n, np.log(np.maximum(inf1, 1e-300))),
            "infidelity_vs_N": _fit(n, inf1),
            "log_infidelity_vs_logN": _fit(np.log(n), np.log(np.maximum(inf1, 1e-300))),
        }
    for N in Ns:
        inf = [next(r[3] for r in by_w[w] if r[0] == N) for w in ws]
        summary["ordering"][str(N)] = bool(all(b < a for a, b in zip(inf, inf[1:])))
    cols = ["N", "w", "one_minus_F2", "one_minus_F1", "A1", "A2", "T", "quality"]
    return RunRecord("sweep-width", cols, rows, summary)


# -- gates --------------------------------------------------------------------------

GATE_COLUMNS = ["gate", "case", "measured", "predicted", "abs_error"]


def hadamard_fidelities(N: int, W: float, Jx_max: float, Jz_hold: float, legs, dt: float) -> tuple[float, float]:
    """Fidelities of (|0>+|1>) -> |0> and (|0>-|1>) -> |1> along the path."""
    _, s = protocols.hadamard_path(N, W, Jx_max, Jz_hold, legs)
    q0, q1 = exact.neel_states(N)
    h = 1 / math.sqrt(2)
    out = []
    for sgn, tgt in ((1, q0), (-1, q1)):
        psi = exact.evolve_state(exact.superpose([q0, q1], [h, sgn * h]), s, 0.0, s.total_duration, dt)
        out.append(exact.state_fidelity(psi, tgt))
    return out[0], out[1]


def run_gate(cfg: ExperimentConfig) -> RunRecord:
    p, dt = cfg.params, cfg.integrator.oracle_dt
    rows, summary, extra = [], {"gate": p.gate}, {}
    if p.gate == "staggered":
        s = protocols.staggered_phase_protocol(p.Jz, p.tau, p.N, p.W)
        q0, q1 = exact.neel_states(p.N)
        h = 1 / math.sqrt(2)
        psi = exact.evolve_state(exact.superpose([q0, q1], [h, h]), s, 0.0, s.total_duration, dt)
        pred = protocols.staggered_phase(p.N, p.Jz, p.tau)
        meas = exact.relative_phase(psi, q0, q1)
        wrapped = float(np.angle(np.exp(1j * pred)))
        rows.append(("staggered", f"N={p.N}", meas, wrapped, abs(float(np.angle(np.exp(1j * (meas - pred)))))))
    elif p.gate == "two_qubit":
        for N in sorted(set(p.N_values)):
            for tau2 in sorted(set(p.tau2_values)):
                phi2, table = protocols.two_qubit_phase_model(N, p.Wprime, tau2)
                micro = protocols.two_qubit_microscopic_phases(N, p.Wprime, tau2, p.W)
                for key in sorted(table):
                    pred = float(np.angle(table[key]))
                    err = abs(float(np.angle(np.exp(1j * (micro[key] - pred)))))
                    rows.append(("two_qubit", f"N={N};tau2={tau2!r};e={key[0]}{key[1]}", micro[key], pred, err))
    else:
        path_legs = p.legs
        trace = []
        if path_legs is None:
            # equal legs, doubled until both fidelities move by less than 1e-3
            d, prev = 25.0, None
            while True:
                f = hadamard_fidelities(p.N, p.W, p.Jx_max, p.Jz_hold, d, dt)
                trace.append({"leg": d, "F_plus": f[0], "F_minus": f[1]})
                if prev is not None and max(abs(a - b) for a, b in zip(f, prev)) < 1e-3 and min(f) >= p.F_target:
                    break
                if 2 * d > p.leg_cap:
                    break
                prev, d = f, 2 * d
            path_legs = d
        else:
            f = hadamard_fidelities(p.N, p.W, p.Jx_max, p.Jz_hold, path_legs, dt)
        path, s = protocols.hadamard_path(p.N, p.W, p.Jx_max, p.Jz_hold, path_legs)
        rows.append(("hadamard", "plus->0", f[0], 1.0, 1.0 - f[0]))
        rows.append(("hadamard", "minus->1", f[1], 1.0, 1.0 - f[1]))
        k = min(p.levels, 2**p.N)
        lv = []
        for t in np.linspace(0.0, s.total_duration, p.samples):
            fr = s.eval_frame(float(t))
            e, _ = exact.eigensystem(exact.build_dense_hamiltonian(fr), k)
            lv.extend((float(t), float(fr.Jx[0]), float(abs(fr.Jz[0])), n, float(x)) for n, x in enumerate(e))
        extra["levels"] = (["t", "Jx", "Jz", "index", "energy"], lv)
        summary.update({"legs": list(s.metadata["legs"]), "safe": path.safe, "doubling": trace,
                        "constraint": {"Jz_hold": p.Jz_hold, "bound": p.W / (p.N - 1)}})
    return RunRecord("gate", GATE_COLUMNS, rows, summary, extra)


# -- oracle comparison ----------------------------------------------------------------

def random_schedule(rng: np.random.Generator, N: int, segments_max: int, dmin: float, dmax: float,
                    min_gap: float = 0.05, max_tries: int = 200) -> Schedule:
    """Piecewise-linear inhomogeneous schedule with gapped end points and one W sign."""
    sign = -1.0 if rng.random() < 0.5 else 1.0

    def frame(jx_lo, jx_hi, gapped):
        for _ in range(max_tries):
            f = CouplingFrame(rng.uniform(jx_lo, jx_hi, N), np.zeros(N), sign * rng.uniform(0.0, 2.0, N - 1))
            if not gapped:
                return f
            eps = fermion.excitation_spectrum(fermion.build_majorana_matrix(f)).eps
            if eps[0] > min_gap:
                return f
        raise OutOfRangeError("could not draw a gapped frame")

    nseg = int(rng.integers(1, segments_max + 1))
    frames = [frame(1.5, 3.0, True)] + [frame(-1.0, 3.0, False) for _ in range(nseg - 1)] + [frame(-1.0, 3.0, True)]
    segs = tuple(RampSegment(a, b, float(rng.uniform(dmin, dmax))) for a, b in zip(frames[:-1], frames[1:]))
    return Schedule(ChainConfig(N, "antiferro" if sign > 0 else "ferro"), segs, True, {"protocol": "random"})


def compare_schedule(s: Schedule, dt: float, oracle_dt: float) -> dict:
    """Gaussian bounds versus the oracle ground-state probability at the end of ``s``."""
    T = s.total_duration
    start, end = s.eval_frame(0.0), s.eval_frame(T)
    try:
        cov0 = _ground(start)
    except DegenerateGroundStateError as exc:
        return {"status": "skipped", "reason": str(exc)}
    t0 = time.perf_counter()
    cov = dynamics.evolve_covariance(cov0, s, 0.0, T, dt)
    A1, A2, F1, F2, q = _bounds(cov, end)
    t1 = time.perf_counter()
    psi = exact.evolve_state(_exact_ground(start), s, 0.0, T, oracle_dt)
    P = exact.excitation_distribution(psi, end)
    t2 = time.perf_counter()
    m = np.arange(P.size)
    A1x, A2x, Fx = float(P @ m), float(P @ m**2), float(P[0])
    margin = min(Fx - F1, F2 - Fx)
    return {"status": "ok", "A1": A1, "A2": A2, "A1_exact": A1x, "A2_exact": A2x, "F1": F1, "F_exact": Fx,
            "F2": F2, "margin": margin, "bracket_ok": margin >= -BRACKET_SLACK, "quality": q,
            "t_gauss": t1 - t0, "t_exact": t2 - t1}


def _oracle_task(args):
    i, seed, p, dt, odt = args
    rng = np.random.default_rng([seed, i])
    N = int(rng.integers(p.N_min, p.N_max + 1))
    s = random_schedule(rng, N, p.segments_max, p.duration_min, p.duration_max)
    return i, N, len(s.segments), s.total_duration, compare_schedule(s, dt, odt)


def run_oracle_compare(cfg: ExperimentConfig) -> RunRecord:
    p = cfg.params
    tasks = [(i, cfg.seed, p, cfg.integrator.dt, cfg.integrator.oracle_dt) for i in range(p.n_schedules)]
    res = sorted(_pmap(_oracle_task, tasks, cfg.workers), key=lambda r: r[0])
    keys = ["A1", "A2", "A1_exact", "A2_exact", "F1", "F_exact", "F2", "margin"]
    rows, timings = [], []
    for i, N, nseg, T, r in res:
        if r["status"] != "ok":
            rows.append((i, N, nseg, T, r["status"]) + (math.nan,) * len(keys) + ("", ""))
            continue
        rows.append((i, N, nseg, T, "ok") + tuple(r[k] for k in keys) + (r["bracket_ok"], r["quality"]))
        timings.append({"index": i, "N": N, "t_gauss": r["t_gauss"], "t_exact": r["t_exact"]})
    ok = [r for r in rows if r[4] == "ok"]
    summary = {"n_ok": len(ok), "n_skipped": len(rows) - len(ok),
               "all_bracket_ok": bool(all(r[-2] for r in ok)),
               "min_margin": min((r[-3] for r in ok), default=None),
               "max_moment_error": max((max(abs(r[5] - r[7]), abs(r[6] - r[8])) for r in ok), default=None)}
    cols = ["index", "N", "segments", "T", "status"] + keys + ["bracket_ok", "quality"]
    return RunRecord("oracle-compare", cols, rows, summary, timings=timings)


RUNNERS = {
    "spectrum": run_spectrum_scan, "quench": run_quench, "sweep-t": run_sweep_t,
    "sweep-width": run_width_sweep, "gate": run_gate, "oracle-compare": run_oracle_compare,
}


# -- output ---------------------------------------------------------------------------

def _cell(x) -> str:
    if isinstance(x, (bool, np.bool_)):
        return "true" if x else "false"
    if isinstance(x, (float, np.floating)):
        return repr(float(x))
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    return "" if x is None else str(x)


def write_csv(path: Path, columns: Iterable[str], rows: Iterable[tuple]) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(list(columns))
        for r in rows:
            w.writerow([_cell(x) for x in r])


def calibration() -> dict:
    return {"SPECTRUM_SCALE": fermion.SPECTRUM_SCALE, "GENERATOR_SCALE": fermion.GENERATOR_SCALE,
            "COVARIANCE_NORM": fermion.COVARIANCE_NORM, "KAPPA": protocols.KAPPA,
            "JX_START_FACTOR": protocols.JX_START_FACTOR, "ZONE_MARGIN": protocols.ZONE_MARGIN}


def write_record(record: RunRecord, cfg: ExperimentConfig, outdir, wall_clock: float) -> list[Path]:
    outdir = Path(outdir)
    outdir.mkdir(parents=True, exist_ok=True)
    stem = record.kind.replace("-", "_")
    paths = [outdir / f"{stem}.csv"]
    write_csv(paths[0], record.columns, record.rows)
    for name, (cols, rows) in sorted(record.extra_tables.items()):
        paths.append(outdir / f"{stem}_{name}.csv")
        write_csv(paths[-1], cols, rows)
    meta = {"config": cfg.to_dict(), "engine_version": __version__, "calibration": calibration(),
            "integrator": {"scheme": exact.INTEGRATOR, "dt": cfg.integrator.dt,
                           "oracle_dt": cfg.integrator.oracle_dt, "reortho_every": cfg.integrator.reortho_every},
            "summary": record.summary, "timings": record.timings, "wall_clock_s": wall_clock,
            "created": time.strftime("%Y-%m-%dT%H:%M:%S%z"), "files": [p.name for p in paths]}
    meta_path = outdir / f"{stem}.meta.json"
    meta_path.write_text(json.dumps(meta, indent=2, sort_keys=True, default=_json_default) + "\n")
    return paths + [meta_path]


def _json_default(x):
    if isinstance(x, (np.floating, np.integer, np.bool_)):
        return x.item()
    if isinstance(x, np.ndarray):
        return x.tolist()
    raise TypeError(f"not JSON serialisable: {type(x).__name__}")
