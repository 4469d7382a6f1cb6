"""Fixed-step time integration, parameter ramps, switchiness detection and
lambda sweeps."""

from __future__ import annotations

import csv
import enum
import itertools
import math
from dataclasses import dataclass
from typing import Callable, Iterable, Optional, Sequence

import numpy as np
from scipy.optimize import linear_sum_assignment

from .axials import CONSENSUS, DISSENSUS, AxialRecord, catalog
from .constants import (DIVERGENCE_BOUND, DT, INIT_SCALE, STEADY_TOL, SWITCH_THRESHOLD,
                        THETA_SIM, T_MAX)
from .dynamics import Model, drift
from .errors import DimensionMismatch, Diverged, ZeroState
from .state import DeviationState, classify_group, project_tangent
from .symmetry import subspace_basis


@dataclass(frozen=True)
class SimConfig:
    dt: float = DT
    t_max: float = T_MAX
    steady_tol: float = STEADY_TOL
    seed: int = 0
    init_scale: float = INIT_SCALE
    divergence_bound: float = DIVERGENCE_BOUND
    record_every: float = 1.0
    theta: float = THETA_SIM

    def __post_init__(self):
        if not 0 < self.dt < 1:
            raise ValueError(f"dt must lie in (0, 1), got {self.dt}")
        for name in ("t_max", "steady_tol", "divergence_bound", "record_every"):
            if not getattr(self, name) > 0:
                raise ValueError(f"{name} must be positive")
        if self.init_scale < 0 or self.theta < 0:
            raise ValueError("init_scale and theta must be nonnegative")


def _knot_arrays(knots) -> tuple[np.ndarray, np.ndarray]:
    arr = np.asarray(knots, dtype=float)
    if arr.ndim != 2 or arr.shape[1] != 2 or len(arr) == 0:
        raise ValueError("knots must be a nonempty list of (t, value) pairs")
    if np.any(np.diff(arr[:, 0]) <= 0):
        raise ValueError("knot times must be strictly increasing")
    if not np.all(np.isfinite(arr)):
        raise ValueError("knots must be finite")
    return arr[:, 0].copy(), arr[:, 1].copy()


@dataclass(frozen=True)
class RampSpec:
    """Piecewise-linear schedules for lambda and, optionally, delta.

    Values are held constant outside the knot range.
    """

    lambda_knots: tuple
    delta_knots: Optional[tuple] = None

    def __post_init__(self):
        for name in ("lambda_knots", "delta_knots"):
            knots = getattr(self, name)
            if knots is None:
                continue
            _knot_arrays(knots)
            object.__setattr__(self, name, tuple((float(t), float(v)) for t, v in knots))

    @classmethod
    def linear(cls, t0: float, t1: float, lam0: float, lam1: float) -> "RampSpec":
        return cls(((t0, lam0), (t1, lam1)))

    @classmethod
    def constant(cls, lam: float) -> "RampSpec":
        return cls(((0.0, lam),))

    @classmethod
    def from_functions(cls, lam_of_t: Callable[[float], float], t0: float, t1: float,
                       n_knots: int, delta_of_t: Optional[Callable[[float], float]] = None) -> "RampSpec":
        """Sample arbitrary schedules on ``n_knots`` equally spaced times."""
        if n_knots < 2:
            raise ValueError("need at least two knots")
        ts = np.linspace(t0, t1, n_knots)
        lam = tuple((float(t), float(lam_of_t(t))) for t in ts)
        delta = None if delta_of_t is None else tuple((float(t), float(delta_of_t(t))) for t in ts)
        return cls(lam, delta)

    @property
    def is_constant(self) -> bool:
        values = [v for _, v in self.lambda_knots]
        if self.delta_knots is not None:
            if len({v for _, v in self.delta_knots}) > 1:
                return False
        return len(set(values)) == 1

    def lambda_at(self, t: float) -> float:
        ts, vs = _knot_arrays(self.lambda_knots)
        return float(np.interp(t, ts, vs))

    def delta_at(self, t: float) -> Optional[float]:
        if self.delta_knots is None:
            return None
        ts, vs = _knot_arrays(self.delta_knots)
        return float(np.interp(t, ts, vs))

    def to_json(self) -> dict:
        out = {"lambda_knots": [list(k) for k in self.lambda_knots]}
        if self.delta_knots is not None:
            out["delta_knots"] = [list(k) for k in self.delta_knots]
        return out


class _Schedule:
    """Precomputed interpolation tables for a ramp (RampSpec.lambda_at re-parses knots)."""

    def __init__(self, model: Model, ramp: Optional[RampSpec]):
        self.model = model
        self.lam_table = None if ramp is None else _knot_arrays(ramp.lambda_knots)
        self.delta_table = None
        if ramp is not None and ramp.delta_knots is not None:
            self.delta_table = _knot_arrays(ramp.delta_knots)

    def lam(self, t: float) -> float:
        if self.lam_table is None:
            return self.model.lam
        return float(np.interp(t, *self.lam_table))

    def delta(self, t: float) -> Optional[float]:
        if self.delta_table is None:
            return None
        return float(np.interp(t, *self.delta_table))


@dataclass
class Trajectory:
    times: np.ndarray
    states: np.ndarray
    lambdas: np.ndarray
    deltas: Optional[np.ndarray]
    labels: list
    steady: bool = False

    @property
    def final(self) -> np.ndarray:
        return self.states[-1]

    @property
    def norms(self) -> np.ndarray:
        return np.sqrt(np.einsum("tij,tij->t", self.states, self.states))

    def __len__(self) -> int:
        return len(self.times)


def _as_deviation(z0, model: Model) -> np.ndarray:
    z = np.array(z0.values if isinstance(z0, DeviationState) else z0, dtype=float)
    if z.shape != (model.na, model.no):
        raise DimensionMismatch(f"initial state {z.shape} does not match model ({model.na}, {model.no})")
    DeviationState(z, tol=1e-9)
    return project_tangent(z)


def integrate(model: Model, z0, cfg: SimConfig = SimConfig(),
              ramp: Optional[RampSpec] = None) -> Trajectory:
    """Classical RK4 on the projected drift, recentering rows after every step.

    Samples are stored every ``cfg.record_every`` time units and at the last step.
    With a constant schedule the run stops early once ``max|drift| < steady_tol``.
    """
    z = _as_deviation(z0, model)
    sched = _Schedule(model, ramp)
    stop_on_steady = ramp is None or ramp.is_constant
    dt = cfg.dt
    n_steps = max(1, math.ceil(cfg.t_max / dt - 1e-9))
    stride = max(1, round(cfg.record_every / dt))

    times, states, lams, deltas = [], [], [], []

    def record(t: float, z: np.ndarray) -> None:
        times.append(t)
        states.append(z.copy())
        lams.append(sched.lam(t))
        deltas.append(sched.delta(t))

    t = 0.0
    record(t, z)
    k1 = drift(z, model, sched.lam(t), sched.delta(t))
    steady = False
    for step in range(1, n_steps + 1):
        th, t1 = t + 0.5 * dt, step * dt
        lh, dh = sched.lam(th), sched.delta(th)
        k2 = drift(z + 0.5 * dt * k1, model, lh, dh)
        k3 = drift(z + 0.5 * dt * k2, model, lh, dh)
        k4 = drift(z + dt * k3, model, sched.lam(t1), sched.delta(t1))
        z = z + dt / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
        z -= z.mean(axis=1, keepdims=True)
        t = t1
        peak = np.abs(z).max()
        if not peak <= cfg.divergence_bound:
            raise Diverged(f"|z| = {peak:.3g} exceeds {cfg.divergence_bound:g} at t = {t:.6g}")
        k1 = drift(z, model, sched.lam(t), sched.delta(t))
        if stop_on_steady and np.abs(k1).max() < cfg.steady_tol:
            steady = True
        if step % stride == 0 or step == n_steps or steady:
            record(t, z)
        if steady:
            break

    labels = [classify_group(s, cfg.theta).label for s in states]
    delta_arr = None if ramp is None or ramp.delta_knots is None else np.array(deltas)
    return Trajectory(np.array(times), np.array(states), np.array(lams), delta_arr, labels, steady)


def random_init(na: int, no: int, scale: float = INIT_SCALE, seed=0) -> np.ndarray:
    """Uniform sample from the ball of radius ``scale`` inside the tangent space."""
    rng = seed if isinstance(seed, np.random.Generator) else np.random.default_rng(seed)
    Q = subspace_basis(na, no, "V")
    d = Q.shape[1]
    x = rng.standard_normal(d)
    x *= scale * rng.uniform() ** (1.0 / d) / np.linalg.norm(x)
    return project_tangent((Q @ x).reshape(na, no))


# --------------------------------------------------------------------------- switchiness


class SwitchVerdict(str, enum.Enum):
    CONTINUOUS = "continuous"
    SWITCH_LIKE = "switch_like"


@dataclass(frozen=True)
class SwitchReport:
    verdict: SwitchVerdict
    metric: float
    threshold: float
    at_time: float

    def to_json(self) -> dict:
        return {"verdict": self.verdict.value, "metric": self.metric,
                "threshold": self.threshold, "at_time": self.at_time}


def detect_switchiness(traj: Trajectory, threshold: float = SWITCH_THRESHOLD,
                       t_start: float = 0.0) -> SwitchReport:
    """Largest per-unit-time change of the Frobenius norm between consecutive
    samples recorded at or after ``t_start``."""
    keep = traj.times >= t_start
    t, r = traj.times[keep], traj.norms[keep]
    if len(t) < 2:
        return SwitchReport(SwitchVerdict.CONTINUOUS, 0.0, threshold, float(t[0]) if len(t) else 0.0)
    rates = np.abs(np.diff(r)) / np.diff(t)
    i = int(np.argmax(rates))
    metric = float(rates[i])
    verdict = SwitchVerdict.SWITCH_LIKE if metric > threshold else SwitchVerdict.CONTINUOUS
    return SwitchReport(verdict, metric, threshold, float(t[i + 1]))


@dataclass(frozen=True)
class Phase:
    label: str
    t_start: float
    t_end: float

    def to_json(self) -> dict:
        return {"label": self.label, "t_start": self.t_start, "t_end": self.t_end}


def phase_sequence(traj: Trajectory) -> list[Phase]:
    """Runs of identical classifier labels."""
    phases = []
    for label, group in itertools.groupby(zip(traj.labels, traj.times), key=lambda p: p[0]):
        ts = [t for _, t in group]
        phases.append(Phase(label, float(ts[0]), float(ts[-1])))
    return phases


# --------------------------------------------------------------------------- axial alignment


def nearest_axial(z, records: Sequence[AxialRecord]) -> tuple[str, float]:
    """Best |<z, g.fix>| over catalog records and all group elements g.

    For each option permutation the best agent permutation is a linear
    assignment problem, solved for both signs.
    """
    z = np.asarray(z.values if isinstance(z, DeviationState) else z, dtype=float)
    norm = np.linalg.norm(z)
    if not np.isfinite(norm) or norm < 1e-14:
        raise ZeroState("cannot align the zero state")
    if not records:
        raise ValueError("empty catalog")
    zh = z / norm
    best_label, best = "", -1.0
    for rec in records:
        fix = rec.fix / np.linalg.norm(rec.fix)
        if fix.shape != z.shape:
            raise DimensionMismatch(f"record {rec.label} has shape {fix.shape}, state {z.shape}")
        for tau in itertools.permutations(range(z.shape[1])):
            C = zh @ fix[:, tau].T
            for sign in (1.0, -1.0):
                rows, cols = linear_sum_assignment(sign * C, maximize=True)
                score = float(sign * C[rows, cols].sum())
                if score > best + 1e-12:
                    best_label, best = rec.label, score
    return best_label, min(1.0, max(0.0, best))


# --------------------------------------------------------------------------- sweeps


@dataclass(frozen=True)
class SweepRow:
    lam: float
    init_id: str
    eq_norm: float
    cls: str
    nearest_axial: str
    alignment: float


def default_inits(na: int, no: int, scale: float, seed: int, n_random: int = 2) -> list[tuple[str, np.ndarray]]:
    """Scaled catalog fix vectors from both modes plus a few random states."""
    inits = []
    for mode in (CONSENSUS, DISSENSUS):
        for rec in catalog(na, no, mode):
            inits.append((rec.label, scale * rec.fix / np.linalg.norm(rec.fix)))
    rng = np.random.default_rng(seed)
    for r in range(n_random):
        inits.append((f"random{r}", random_init(na, no, scale, rng)))
    return inits


def sweep_bifurcation(model: Model, lambdas: Iterable[float], inits=None,
                      cfg: SimConfig = SimConfig(), records: Optional[Sequence[AxialRecord]] = None
                      ) -> list[SweepRow]:
    """Relax each initial condition at every lambda, warm-starting from the
    previous lambda's equilibrium."""
    lambdas = [float(x) for x in lambdas]
    if any(b < a for a, b in zip(lambdas, lambdas[1:])):
        raise ValueError("lambda grid must be ordered")
    if inits is None:
        inits = default_inits(model.na, model.no, cfg.init_scale, cfg.seed)
    if records is None:
        records = catalog(model.na, model.no, CONSENSUS) + catalog(model.na, model.no, DISSENSUS)
    rows = []
    for init_id, z0 in inits:
        start = _as_deviation(z0, model)
        kick = np.linalg.norm(start)
        z = start
        for lam in lambdas:
            # a warm start that has collapsed onto the neutral point already meets
            # the steady tolerance, so it could never leave an unstable equilibrium
            if np.linalg.norm(z) < kick:
                z = start
            traj = integrate(model.with_lambda(lam), z, cfg)
            z = traj.final
            eq_norm = float(np.linalg.norm(z))
            try:
                label, score = nearest_axial(z, records)
            except ZeroState:
                label, score = "", 0.0
            rows.append(SweepRow(lam, str(init_id), eq_norm, traj.labels[-1], label, score))
    rows.sort(key=lambda r: (r.lam, [i for i, _ in inits].index(r.init_id)))
    return rows


# --------------------------------------------------------------------------- CSV export

TRAJECTORY_COLUMNS = ("t", "lambda", "agent", "opt", "x_value", "group_class")
SWEEP_COLUMNS = ("lambda", "init_id", "eq_norm", "class", "nearest_axial", "alignment")


def _fmt(x: float) -> str:
    return f"{x:.10g}"


def write_trajectory_csv(traj: Trajectory, path, stride: int = 1) -> None:
    no = traj.states.shape[2]
    idx = list(range(0, len(traj), stride))
    if idx[-1] != len(traj) - 1:
        idx.append(len(traj) - 1)
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(TRAJECTORY_COLUMNS)
        for s in idx:
            t, lam, label = _fmt(traj.times[s]), _fmt(traj.lambdas[s]), traj.labels[s]
            x = traj.states[s] + 1.0 / no
            for i, row in enumerate(x, start=1):
                for j, v in enumerate(row, start=1):
                    w.writerow((t, lam, i, j, _fmt(v), label))


def write_sweep_csv(rows: Sequence[SweepRow], path) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(SWEEP_COLUMNS)
        for r in rows:
            w.writerow((_fmt(r.lam), r.init_id, _fmt(r.eq_norm), r.cls, r.nearest_axial, _fmt(r.alignment)))
