"""Van der Pol oscillator data for one-step and free-running evaluation.

The continuous system ``x1' = x2``, ``x2' = lam (1 - x1^2) x2 - x1`` is
discretised with forward Euler. For ``lam > 0`` its limit cycle (amplitude
about 2 at ``lam = 1``) attracts every other trajectory. Each of the three phases (learning,
generalisation, simulation) runs its own batch of trajectories from freshly
drawn initial conditions; the one-step pairs ``state_t -> state_{t+1}`` of a
phase form its regression dataset.
"""

from __future__ import annotations

import csv
import json
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np

from .errors import ConfigError, InputError
from .rbf import Distribution, Uniform, dist_from_dict
from .training import Dataset

PHASES = ("learning", "generalisation", "simulation")
CSV_COLUMNS = ("phase", "trajectory", "t", "x1", "x2", "x1_next", "x2_next")


@dataclass(frozen=True)
class VdpConfig:
    lam: float = 1.0
    dt: float = 0.01
    steps: int = 1000
    n_trajectories: int = 10
    init_dist: Distribution = field(default_factory=lambda: Uniform(-2.5, 2.5))
    seed: int = 0
    jitter: float = 0.0  # std of noise added to learning-phase inputs

    def __post_init__(self):
        object.__setattr__(self, "init_dist", dist_from_dict(self.init_dist))
        if not (np.isfinite(self.dt) and self.dt > 0):
            raise ConfigError(f"dt must be positive, got {self.dt}")
        if not np.isfinite(self.lam):
            raise ConfigError("lambda must be finite")
        if int(self.steps) != self.steps or self.steps < 2:
            raise ConfigError(f"steps must be an integer >= 2, got {self.steps}")
        if int(self.n_trajectories) != self.n_trajectories or self.n_trajectories < 1:
            raise ConfigError(f"n_trajectories must be an integer >= 1, got {self.n_trajectories}")
        if not (np.isfinite(self.jitter) and self.jitter >= 0):
            raise ConfigError(f"jitter must be >= 0, got {self.jitter}")

    def with_seed(self, seed: int) -> "VdpConfig":
        return VdpConfig(self.lam, self.dt, self.steps, self.n_trajectories,
                         self.init_dist, int(seed), self.jitter)

    def to_dict(self):
        return {
            "lambda": self.lam,
            "dt": self.dt,
            "steps": self.steps,
            "n_trajectories": self.n_trajectories,
            "init_dist": self.init_dist.to_dict(),
            "seed": self.seed,
            "jitter": self.jitter,
        }

    @classmethod
    def from_dict(cls, d) -> "VdpConfig":
        return cls(
            lam=float(d["lambda"]),
            dt=float(d["dt"]),
            steps=int(d["steps"]),
            n_trajectories=int(d["n_trajectories"]),
            init_dist=dist_from_dict(d["init_dist"]),
            seed=int(d["seed"]),
            jitter=float(d.get("jitter", 0.0)),
        )


def vdp_step(state, lam: float, dt: float) -> np.ndarray:
    """One forward-Euler step; `state` is (..., 2)."""
    s = np.asarray(state, dtype=np.float64)
    x1, x2 = s[..., 0], s[..., 1]
    out = np.empty(s.shape)
    out[..., 0] = x1 + dt * x2
    out[..., 1] = x2 + dt * (lam * (1.0 - x1 * x1) * x2 - x1)
    return out


def simulate(initial, lam: float, dt: float, steps: int) -> np.ndarray:
    """Ground-truth trajectories, shape (k, steps, 2), row 0 = initial."""
    initial = np.atleast_2d(np.asarray(initial, dtype=np.float64))
    traj = np.empty((initial.shape[0], steps, 2))
    traj[:, 0] = initial
    with np.errstate(over="ignore", invalid="ignore"):  # divergence is checked by callers
        for t in range(steps - 1):
            traj[:, t + 1] = vdp_step(traj[:, t], lam, dt)
    return traj


def pairs_from_trajectories(traj: np.ndarray) -> Dataset:
    """One-step pairs within each trajectory, in trajectory-major order."""
    k, steps, n = traj.shape
    return Dataset(traj[:, :-1].reshape(-1, n), traj[:, 1:].reshape(-1, n))


@dataclass(frozen=True, eq=False)
class Phase:
    name: str
    trajectories: np.ndarray  # (k, steps, 2)
    dataset: Dataset

    @property
    def initial(self) -> np.ndarray:
        return self.trajectories[:, 0]


@dataclass(frozen=True, eq=False)
class PhaseData:
    config: Optional[VdpConfig]
    learning: Phase
    generalisation: Phase
    simulation: Phase

    def phases(self):
        return (self.learning, self.generalisation, self.simulation)

    def __getitem__(self, name: str) -> Phase:
        if name not in PHASES:
            raise KeyError(name)
        return getattr(self, name)


def generate_phase_data(cfg: VdpConfig) -> PhaseData:
    """Draw initial conditions per phase and integrate all trajectories.

    Each phase uses its own child stream of ``SeedSequence(cfg.seed)``.
    """
    streams = np.random.SeedSequence(cfg.seed).spawn(len(PHASES))
    phases = []
    for name, ss in zip(PHASES, streams):
        rng = np.random.Generator(np.random.PCG64(ss))
        init = cfg.init_dist.sample(rng, (cfg.n_trajectories, 2))
        traj = simulate(init, cfg.lam, cfg.dt, cfg.steps)
        if not np.all(np.isfinite(traj)):
            raise ConfigError("ground-truth trajectories diverged; reduce dt or the initial range")
        data = pairs_from_trajectories(traj)
        if name == "learning" and cfg.jitter > 0:
            data = Dataset(data.inputs + rng.normal(0.0, cfg.jitter, data.inputs.shape), data.targets)
        phases.append(Phase(name, traj, data))
    return PhaseData(cfg, *phases)


@dataclass(frozen=True, eq=False)
class Rollout:
    """Free-running trajectories.

    `states` is (k, steps, n); rows after a trajectory's `truncated_at`
    index are NaN. `truncated_at[r]` is the first step whose model output
    was non-finite, or None.
    """

    states: np.ndarray
    truncated_at: tuple

    @property
    def any_truncated(self) -> bool:
        return any(t is not None for t in self.truncated_at)


def rollout(evaluator: Callable[[np.ndarray], np.ndarray], initial, steps: int) -> Rollout:
    """Feed the model its own output for ``steps - 1`` transitions.

    `evaluator` maps a batch (k, n) to (k, n). `initial` is one state (n,)
    or a batch (k, n); trajectories are advanced together.
    """
    initial = np.atleast_2d(np.asarray(initial, dtype=np.float64))
    k, n = initial.shape
    states = np.full((k, steps, n), np.nan)
    states[:, 0] = initial
    truncated: list = [None] * k
    alive = np.all(np.isfinite(initial), axis=1)
    for r in np.flatnonzero(~alive):
        truncated[r] = 0
    with np.errstate(all="ignore"):
        for t in range(steps - 1):
            idx = np.flatnonzero(alive)
            if idx.size == 0:
                break
            nxt = np.asarray(evaluator(states[idx, t]), dtype=np.float64).reshape(idx.size, n)
            ok = np.all(np.isfinite(nxt), axis=1)
            states[idx[ok], t + 1] = nxt[ok]
            for r in idx[~ok]:
                truncated[r] = t + 1
                alive[r] = False
    return Rollout(states, tuple(truncated))


def write_phase_csv(data: PhaseData, path, header: Optional[dict] = None) -> dict:
    """Write every phase's one-step pairs; returns the pair count per phase.

    `header` (typically the resolved run config) is embedded as a leading
    ``#`` comment line.
    """
    counts = {}
    with open(path, "w", newline="", encoding="utf-8") as fh:
        if header is not None:
            fh.write("# " + json.dumps(header, sort_keys=True) + "\n")
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(CSV_COLUMNS)
        for ph in data.phases():
            k, steps, _ = ph.trajectories.shape
            x, t = ph.dataset.inputs, ph.dataset.targets
            for j in range(x.shape[0]):
                traj, step = divmod(j, steps - 1)
                w.writerow([ph.name, traj, step, *(repr(float(v)) for v in (*x[j], *t[j]))])
            counts[ph.name] = x.shape[0]
    return counts


def read_phase_csv(path) -> dict:
    """Parse a phase CSV back into ``{phase: Phase}``.

    Trajectories are rebuilt from the first input state and the chain of
    `*_next` targets; rows must be contiguous in `t` per trajectory.
    """
    rows: dict = {}
    with open(path, newline="", encoding="utf-8") as fh:
        lines = (ln for ln in fh if not ln.startswith("#"))
        reader = csv.DictReader(lines)
        if reader.fieldnames is None or tuple(reader.fieldnames) != CSV_COLUMNS:
            raise InputError(f"{path}: expected columns {','.join(CSV_COLUMNS)}")
        for rec in reader:
            try:
                key = (rec["phase"], int(rec["trajectory"]))
                vals = [float(rec[c]) for c in CSV_COLUMNS[3:]]
                rows.setdefault(key, []).append((int(rec["t"]), vals))
            except (TypeError, ValueError) as exc:
                raise InputError(f"{path}: malformed row {rec!r}: {exc}") from None

    by_phase: dict = {}
    for (phase, traj_id), recs in sorted(rows.items()):
        recs.sort()
        if [r[0] for r in recs] != list(range(len(recs))):
            raise InputError(f"{path}: trajectory {phase}/{traj_id} has gaps in t")
        arr = np.array([r[1] for r in recs])
        by_phase.setdefault(phase, []).append(arr)

    out = {}
    for phase, arrs in by_phase.items():
        lengths = {a.shape[0] for a in arrs}
        inputs = np.vstack([a[:, :2] for a in arrs])
        targets = np.vstack([a[:, 2:] for a in arrs])
        if not np.all(np.isfinite(inputs)) or not np.all(np.isfinite(targets)):
            raise InputError(f"{path}: non-finite values in phase {phase}")
        traj = None
        if len(lengths) == 1:
            traj = np.stack([np.vstack([a[:1, :2], a[:, 2:]]) for a in arrs])
        out[phase] = Phase(phase, traj, Dataset(inputs, targets))
    if not out:
        raise InputError(f"{path}: no data rows")
    return out
