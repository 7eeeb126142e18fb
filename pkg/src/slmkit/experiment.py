"""Three-phase SLM/ELM comparison on Van der Pol data, repeated over seeds.

Per repetition: fresh phase data and fresh banks are drawn, each model is
fit on the learning phase, then scored by one-step prediction on the
generalisation phase and by free-running rollout on the simulation phase.
"""

from __future__ import annotations

import csv
import io
import json
import math
import time
from dataclasses import asdict, dataclass, field, fields, replace
from typing import Callable, Optional

import numpy as np

from . import __version__
from .errors import ConfigError, SlmError
from .models import param_count, predict_elm, predict_slm
from .rbf import RNG_NAME, RandomSpec, generate_bank
from .training import Dataset, fit_elm, fit_slm
from .vanderpol import VdpConfig, generate_phase_data, rollout

MODEL_KINDS = ("slm", "elm", "both")
METRICS = ("total_seconds", "pinv_seconds", "k_build_seconds", "mse_train", "mse_gen", "mse_sim")
STREAM_DATA, STREAM_SLM, STREAM_ELM = 0, 1, 2

TABLE_ROWS = (
    ("Total computation time", "total_seconds", "{:.4f} s"),
    ("Computation time for pseudo-inverse", "pinv_seconds", "{:.4f} s"),
    ("MSE during training", "mse_train", "{:.4e}"),
    ("MSE during generalisation", "mse_gen", "{:.4e}"),
    ("MSE during simulation", "mse_sim", "{:.4e}"),
)


@dataclass(frozen=True)
class ExperimentConfig:
    model_kind: str = "both"
    h_slm: int = 100
    h_elm: int = 300
    random_spec: RandomSpec = field(default_factory=RandomSpec)
    vdp: VdpConfig = field(default_factory=VdpConfig)
    repetitions: int = 100
    rank_tol: Optional[float] = None
    base_seed: int = 0
    ridge: float = 0.0

    def __post_init__(self):
        if self.model_kind not in MODEL_KINDS:
            raise ConfigError(f"model_kind must be one of {MODEL_KINDS}, got {self.model_kind!r}")
        for name in ("h_slm", "h_elm", "repetitions"):
            v = getattr(self, name)
            if not isinstance(v, (int, np.integer)) or isinstance(v, bool) or v < 1:
                raise ConfigError(f"{name} must be an integer >= 1, got {v!r}")
        if self.rank_tol is not None and not (math.isfinite(self.rank_tol) and self.rank_tol >= 0):
            raise ConfigError(f"rank_tol must be >= 0 or null, got {self.rank_tol}")
        if not (math.isfinite(self.ridge) and self.ridge >= 0):
            raise ConfigError(f"ridge must be >= 0, got {self.ridge}")

    @property
    def kinds(self) -> tuple:
        return ("slm", "elm") if self.model_kind == "both" else (self.model_kind,)

    def h_for(self, kind: str) -> int:
        return self.h_slm if kind == "slm" else self.h_elm

    def to_dict(self):
        return {
            "model_kind": self.model_kind,
            "h_slm": self.h_slm,
            "h_elm": self.h_elm,
            "repetitions": self.repetitions,
            "rank_tol": self.rank_tol,
            "base_seed": self.base_seed,
            "ridge": self.ridge,
        }


def derive_seed(seed: int, stream: int) -> int:
    """Independent 63-bit seed for sub-stream `stream` of repetition seed `seed`."""
    state = np.random.SeedSequence([int(seed), int(stream)]).generate_state(2, np.uint32)
    return int(state[0]) | (int(state[1] & 0x7FFFFFFF) << 32)


def run_phase_eval(evaluator: Callable[[np.ndarray], np.ndarray], data: Dataset) -> float:
    """Mean over pairs of ``||model(x_j) - t_j||^2``."""
    resid = np.asarray(evaluator(data.inputs), dtype=np.float64) - data.targets
    return float(np.mean(np.sum(resid * resid, axis=1)))


@dataclass(frozen=True)
class SimulationResult:
    mse: float
    points: int
    truncated: int  # trajectories whose rollout hit a non-finite state


def run_simulation_eval(evaluator, trajectories) -> SimulationResult:
    """Free-run from each trajectory's first state and pool squared errors.

    Only the completed prefix of a truncated rollout is scored.
    """
    truth = np.asarray(trajectories, dtype=np.float64)
    ro = rollout(evaluator, truth[:, 0], truth.shape[1])
    sq = np.sum((ro.states[:, 1:] - truth[:, 1:]) ** 2, axis=2)
    total, points = 0.0, 0
    for r, cut in enumerate(ro.truncated_at):
        upto = sq.shape[1] if cut is None else max(cut - 1, 0)
        total += float(np.sum(sq[r, :upto]))
        points += upto
    mse = total / points if points else math.nan
    truncated = sum(c is not None for c in ro.truncated_at)
    return SimulationResult(mse, points, truncated)


@dataclass
class RepetitionRecord:
    model: str
    repetition: int
    seed: int
    ok: bool
    error: str
    h: int
    param_count: int
    regressor_rank: int
    regressor_cols: int
    condition: float
    mse_train: float
    mse_gen: float
    mse_sim: float
    sim_truncated: int
    total_seconds: float
    pinv_seconds: float
    k_build_seconds: float


def _failed(kind, r, seed, h, err, elapsed) -> RepetitionRecord:
    nan = math.nan
    return RepetitionRecord(kind, r, seed, False, f"{type(err).__name__}: {err}", h, 0, 0, 0,
                            nan, nan, nan, nan, 0, elapsed, nan, nan)


def run_model(kind: str, cfg: ExperimentConfig, phases, r: int, seed: int) -> RepetitionRecord:
    """Fit one model on the learning phase and score all three phases."""
    h = cfg.h_for(kind)
    stream = STREAM_SLM if kind == "slm" else STREAM_ELM
    fit, predict = (fit_slm, predict_slm) if kind == "slm" else (fit_elm, predict_elm)
    t0 = time.perf_counter()
    try:
        bank = generate_bank(cfg.random_spec.with_seed(derive_seed(seed, stream)), 2, h)
        params, rep = fit(bank, phases.learning.dataset, cfg.rank_tol, cfg.ridge)
        evaluator = lambda x: predict(params, x)  # noqa: E731
        gen = run_phase_eval(evaluator, phases.generalisation.dataset)
        sim = run_simulation_eval(evaluator, phases.simulation.trajectories)
    except (SlmError, np.linalg.LinAlgError, FloatingPointError) as err:
        return _failed(kind, r, seed, h, err, time.perf_counter() - t0)
    total = time.perf_counter() - t0
    return RepetitionRecord(
        model=kind, repetition=r, seed=seed, ok=True, error="", h=h,
        param_count=param_count(params),
        regressor_rank=rep.rank_of_regressor, regressor_cols=rep.regressor_cols,
        condition=rep.condition, mse_train=rep.train_mse, mse_gen=gen,
        mse_sim=sim.mse, sim_truncated=sim.truncated,
        total_seconds=total, pinv_seconds=rep.solve_seconds, k_build_seconds=rep.k_build_seconds,
    )


def aggregate(records) -> dict:
    """Mean and population variance of each metric over successful records."""
    out = {}
    for kind in sorted({rec.model for rec in records}):
        ok = [rec for rec in records if rec.model == kind and rec.ok]
        agg = {"count": len(ok), "failed": sum(1 for rec in records if rec.model == kind and not rec.ok)}
        for m in METRICS:
            vals = np.array([getattr(rec, m) for rec in ok], dtype=np.float64)
            if vals.size:
                agg[m] = {"mean": float(np.mean(vals)), "variance": float(np.var(vals))}
            else:
                agg[m] = {"mean": math.nan, "variance": math.nan}
        out[kind] = agg
    return out


@dataclass
class ExperimentReport:
    config: dict
    records: list
    aggregates: dict

    def records_for(self, kind: str):
        return [rec for rec in self.records if rec.model == kind]

    def mean(self, kind: str, metric: str) -> float:
        return self.aggregates[kind][metric]["mean"]

    def to_dict(self):
        return {
            "format": "slmkit-report",
            "version": 1,
            "package_version": __version__,
            "rng": RNG_NAME,
            "config": self.config,
            "aggregates": self.aggregates,
            "records": [asdict(rec) for rec in self.records],
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=True) + "\n"

    def records_csv(self) -> str:
        buf = io.StringIO()
        names = [f.name for f in fields(RepetitionRecord)]
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(names)
        for rec in self.records:
            w.writerow([repr(float(v)) if isinstance(v, (float, np.floating)) else v
                        for v in (getattr(rec, n) for n in names)])
        return buf.getvalue()

    def table(self) -> str:
        """Plain-text table: one row per metric, one column per model kind."""
        kinds = [k for k in ("slm", "elm") if k in self.aggregates]
        reps = self.config["experiment"]["repetitions"]
        heads = [f"Average over {reps} {k.upper()} tests" for k in kinds]
        label_w = max(len(r[0]) for r in TABLE_ROWS)
        cells = [[fmt.format(self.mean(k, key)) for k in kinds] for _, key, fmt in TABLE_ROWS]
        col_w = [max(len(heads[c]), *(len(row[c]) for row in cells)) for c in range(len(kinds))]
        sep = "+" + "-" * (label_w + 2) + "+" + "+".join("-" * (w + 2) for w in col_w) + "+"
        lines = [sep, "| " + " " * label_w + " | " + " | ".join(h.ljust(w) for h, w in zip(heads, col_w)) + " |", sep]
        for (label, _, _), row in zip(TABLE_ROWS, cells):
            lines.append("| " + label.ljust(label_w) + " | " + " | ".join(c.ljust(w) for c, w in zip(row, col_w)) + " |")
        lines.append(sep)
        return "\n".join(lines) + "\n"


def config_echo(cfg: ExperimentConfig) -> dict:
    return {
        "experiment": cfg.to_dict(),
        "random_spec": cfg.random_spec.to_dict(),
        "vdp": cfg.vdp.to_dict(),
    }


def run_experiment(cfg: ExperimentConfig, progress: Optional[Callable[[int], None]] = None) -> ExperimentReport:
    """Run every repetition; repetition ``r`` is seeded with ``base_seed + r``.

    A failing fit produces a record with ``ok=False`` instead of aborting.
    """
    records = []
    for r in range(cfg.repetitions):
        seed = cfg.base_seed + r
        phases = generate_phase_data(cfg.vdp.with_seed(derive_seed(seed, STREAM_DATA)))
        for kind in cfg.kinds:
            records.append(run_model(kind, cfg, phases, r, seed))
        if progress is not None:
            progress(r)
    return ExperimentReport(config_echo(cfg), records, aggregate(records))


def quick_config(cfg: ExperimentConfig) -> ExperimentConfig:
    """Shrunk preset for smoke runs and CI."""
    vdp = replace(cfg.vdp, steps=min(cfg.vdp.steps, 500), n_trajectories=min(cfg.vdp.n_trajectories, 5))
    return replace(cfg, repetitions=min(cfg.repetitions, 2), h_slm=min(cfg.h_slm, 50),
                   h_elm=min(cfg.h_elm, 150), vdp=vdp)
