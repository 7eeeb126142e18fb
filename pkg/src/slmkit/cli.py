"""Command-line interface: ``slm <command> [options]``.

Exit codes: 0 success, 2 config error, 3 data error, 4 numerical failure,
5 property-check failure.
"""

from __future__ import annotations

import argparse
import csv
import json
import sys
from pathlib import Path

import numpy as np

from . import checks
from . import config as cfgmod
from .errors import ConfigError, InputError, NumericalError, ShapeError, SlmError
from .experiment import config_echo, quick_config, run_experiment, run_phase_eval, run_simulation_eval
from .rbf import generate_bank
from .serialize import evaluator, load_model, save_model
from .training import fit_elm, fit_slm
from .vanderpol import generate_phase_data, read_phase_csv, rollout, write_phase_csv

EXIT_OK, EXIT_CONFIG, EXIT_DATA, EXIT_NUMERIC, EXIT_CHECK = 0, 2, 3, 4, 5


class CheckFailed(Exception):
    pass


def _common(p: argparse.ArgumentParser):
    g = p.add_argument_group("global options")
    g.add_argument("--seed", type=int, default=argparse.SUPPRESS, help="seed for every random draw of this run")
    g.add_argument("--config", default=argparse.SUPPRESS, help="JSON config file (see `config print-defaults`)")
    g.add_argument("--out", default=argparse.SUPPRESS, help="output path")
    g.add_argument("--quick", action="store_true", default=argparse.SUPPRESS, help="shrunk preset for smoke runs")
    g.add_argument("--set", action="append", default=argparse.SUPPRESS, metavar="KEY=VALUE",
                   help="override a config entry, e.g. vdp.dt=0.02 (repeatable)")


def _resolve(args, **flag_paths) -> dict:
    """Config file + --set overrides + dedicated flags + --seed, in that order."""
    cfg = cfgmod.load(getattr(args, "config", None))
    for item in getattr(args, "set", []) or []:
        key, value = cfgmod.parse_assignment(item)
        cfg = cfgmod.set_path(cfg, key, value)
    for attr, path in flag_paths.items():
        value = getattr(args, attr, None)
        if value is not None:
            cfg = cfgmod.set_path(cfg, path, value)
    seed = getattr(args, "seed", None)
    if seed is not None:
        for path in ("experiment.base_seed", "random_spec.seed", "vdp.seed"):
            cfg = cfgmod.set_path(cfg, path, seed)
    if getattr(args, "quick", False):
        cfg = config_echo(quick_config(cfgmod.build(cfg)))
    cfgmod.build(cfg)
    return cfg


def _write_json(path, doc):
    Path(path).write_text(json.dumps(doc, indent=2, sort_keys=True) + "\n", encoding="utf-8")


def cmd_gen_data(args) -> int:
    cfg = _resolve(args, dt="vdp.dt", steps="vdp.steps", trajectories="vdp.n_trajectories", lam="vdp.lambda")
    vdp = cfgmod.build(cfg).vdp
    out = getattr(args, "out", None) or "phases.csv"
    counts = write_phase_csv(generate_phase_data(vdp), out, header=cfg)
    for name, c in counts.items():
        print(f"{name}: {c} pairs")
    print(f"wrote {out}")
    return EXIT_OK


def _load_phase(path, phase):
    phases = read_phase_csv(path)
    if phase not in phases:
        raise InputError(f"{path}: no rows for phase {phase!r} (have {sorted(phases)})")
    return phases[phase]


def cmd_train(args) -> int:
    cfg = _resolve(args)
    ecfg = cfgmod.build(cfg)
    kind = args.kind
    h = args.h if args.h is not None else ecfg.h_for(kind)
    if h < 1:
        raise ConfigError(f"number of models must be >= 1, got {h}")
    data = _load_phase(args.data, args.phase).dataset
    spec = ecfg.random_spec
    bank = generate_bank(spec, data.dim_in, h)
    fit = fit_slm if kind == "slm" else fit_elm
    params, report = fit(bank, data, ecfg.rank_tol, ecfg.ridge)
    if not np.isfinite(report.train_mse):
        raise NumericalError("training produced a non-finite error")
    out = getattr(args, "out", None) or f"{kind}.model.json"
    cfg["train"] = {"kind": kind, "h": h, "phase": args.phase, "data": str(args.data)}
    save_model(params, out, config=cfg)
    rep_path = args.report or str(Path(out).with_suffix("")) + ".fit.json"
    _write_json(rep_path, {"fit": report.to_dict(), "config": cfg})
    print(f"kind={kind} n={report.n} m={report.m} h={report.h} N={report.N}")
    print(f"train_mse={report.train_mse:.6e} train_sse={report.train_sse:.6e}")
    print(f"rank={report.rank_of_regressor}/{report.regressor_cols} condition={report.condition:.3e}")
    print(f"k_build_seconds={report.k_build_seconds:.4f} solve_seconds={report.solve_seconds:.4f}")
    print(f"wrote {out} and {rep_path}")
    return EXIT_OK


def cmd_eval(args) -> int:
    model = load_model(args.model)
    f = evaluator(model)
    phase_name = args.phase or ("generalisation" if args.mode == "onestep" else "simulation")
    phase = _load_phase(args.data, phase_name)
    result = {"model": str(args.model), "data": str(args.data), "phase": phase_name, "mode": args.mode}
    if args.mode == "onestep":
        result["mse"] = run_phase_eval(f, phase.dataset)
    else:
        if phase.trajectories is None:
            raise InputError("rollout needs equal-length trajectories in the data file")
        sim = run_simulation_eval(f, phase.trajectories)
        result.update(mse=sim.mse, points=sim.points, truncated=sim.truncated)
    if not np.isfinite(result["mse"]):
        print(f"mse={result['mse']}", file=sys.stderr)
        raise NumericalError("evaluation produced a non-finite error")
    print(f"{args.mode} mse on {phase_name}: {result['mse']:.6e}")
    out = getattr(args, "out", None)
    if out:
        _write_json(out, result)
    return EXIT_OK


def cmd_check(args) -> int:
    suites = checks.SUITES if args.suite == "all" else (args.suite,)
    base = getattr(args, "seed", 0) or 0
    results = []
    for name in suites:
        if name == "rank":
            res = checks.rank_suite(args.seeds or 100, base_seed=base)
        elif name == "interpolation":
            sizes = checks.INTERP_SIZES
            if args.N is not None or args.n is not None:
                sizes = [(args.N or 12, args.n or 1)]
                if sizes[0][0] % (sizes[0][1] + 1):
                    raise ConfigError(f"N={sizes[0][0]} must be divisible by n+1={sizes[0][1] + 1}")
            seeds = args.seeds or 50
            res = checks.interpolation_suite(seeds, sizes, min_pass=seeds - args.allow_failures, base_seed=base)
        elif name == "equivalence":
            res = checks.equivalence_suite(args.seeds or 1000, base_seed=base)
        else:
            res = checks.distinct_norms_suite(args.seeds or 1000, base_seed=base)
        for line in res.lines:
            print(f"  [{name}] {line}")
        results.append(res)
    print()
    for res in results:
        print(res.summary())
    out = getattr(args, "out", None)
    if out:
        _write_json(out, {r.name: {"passed": r.passed, "passes": r.passes, "total": r.total,
                                   "max_deviation": r.max_deviation, "lines": r.lines} for r in results})
    if not all(r.passed for r in results):
        raise CheckFailed(", ".join(r.name for r in results if not r.passed))
    return EXIT_OK


def cmd_bench(args) -> int:
    cfg = _resolve(args, kind="experiment.model_kind", repetitions="experiment.repetitions",
                   steps="vdp.steps", h_slm="experiment.h_slm", h_elm="experiment.h_elm")
    ecfg = cfgmod.build(cfg)
    progress = None
    if not args.no_progress:
        progress = lambda r: print(f"repetition {r + 1}/{ecfg.repetitions}", file=sys.stderr)  # noqa: E731
    report = run_experiment(ecfg, progress)
    out = Path(getattr(args, "out", None) or "bench-out")
    out.mkdir(parents=True, exist_ok=True)
    (out / "report.json").write_text(report.to_json(), encoding="utf-8")
    (out / "records.csv").write_text(report.records_csv(), encoding="utf-8")
    table = report.table()
    (out / "table.txt").write_text(table, encoding="utf-8")
    print(table, end="")
    failed = sum(agg["failed"] for agg in report.aggregates.values())
    if failed:
        print(f"{failed} repetition(s) failed; see records.csv", file=sys.stderr)
    print(f"wrote {out}/report.json, records.csv, table.txt")
    return EXIT_OK


def cmd_plot_data(args) -> int:
    cfg = _resolve(args)
    ecfg = cfgmod.build(cfg)
    model = load_model(args.model)
    if getattr(model, "bank", None) is not None and model.bank.dim_in != 2:
        raise InputError("plot data needs a model over the 2-D oscillator state")
    vdp = ecfg.vdp
    sim = generate_phase_data(vdp).simulation
    ro = rollout(evaluator(model), sim.initial, vdp.steps)
    out = getattr(args, "out", None) or "plot-data.csv"
    with open(out, "w", newline="", encoding="utf-8") as fh:
        fh.write("# " + json.dumps(cfg, sort_keys=True) + "\n")
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["section", "id", "t", "x1", "x2", "width"])
        bank = getattr(model, "bank", None)
        if bank is not None:
            for i, (a, b) in enumerate(zip(bank.centers, bank.widths)):
                w.writerow(["center", i, "", repr(float(a[0])), repr(float(a[1])), repr(float(b))])
        for section, traj in (("truth", sim.trajectories), ("model", ro.states)):
            for r in range(traj.shape[0]):
                for t in range(traj.shape[1]):
                    x1, x2 = traj[r, t]
                    if not (np.isfinite(x1) and np.isfinite(x2)):
                        break
                    w.writerow([section, r, t, repr(float(x1)), repr(float(x2)), ""])
    centers = 0 if bank is None else bank.count_models
    print(f"wrote {out}: {centers} centers, {sim.trajectories.shape[0]} trajectories")
    return EXIT_OK


def cmd_config(args) -> int:
    if args.action == "print-defaults":
        print(json.dumps(cfgmod.defaults(), indent=2, sort_keys=True))
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="slm", description="Shuffled linear models and the Van der Pol benchmark.")
    _common(parser)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("gen-data", help="write learning/generalisation/simulation pairs as CSV")
    _common(p)
    p.add_argument("--dt", type=float)
    p.add_argument("--steps", type=int)
    p.add_argument("--trajectories", type=int)
    p.add_argument("--lambda", dest="lam", type=float)
    p.set_defaults(func=cmd_gen_data)

    p = sub.add_parser("train", help="fit an SLM or ELM on one phase of a data CSV")
    _common(p)
    p.add_argument("data")
    p.add_argument("--kind", choices=("slm", "elm"), default="slm")
    p.add_argument("--h", type=int, help="number of local models / hidden nodes")
    p.add_argument("--phase", default="learning")
    p.add_argument("--report", help="where to write the fit report (default: next to the model)")
    p.set_defaults(func=cmd_train)

    p = sub.add_parser("eval", help="score a model by one-step prediction or free-running rollout")
    _common(p)
    p.add_argument("model")
    p.add_argument("data")
    p.add_argument("--mode", choices=("onestep", "rollout"), default="onestep")
    p.add_argument("--phase")
    p.set_defaults(func=cmd_eval)

    p = sub.add_parser("check", help="run a property suite")
    _common(p)
    p.add_argument("suite", choices=checks.SUITES + ("all",))
    p.add_argument("--seeds", type=int)
    p.add_argument("--N", type=int, help="interpolation sample count")
    p.add_argument("--n", type=int, help="interpolation input dimension")
    p.add_argument("--allow-failures", type=int, default=0, help="interpolation instances allowed to fail")
    p.set_defaults(func=cmd_check)

    p = sub.add_parser("bench", help="repeat the three-phase SLM/ELM comparison")
    _common(p)
    p.add_argument("--kind", help="slm, elm or both")
    p.add_argument("--repetitions", type=int)
    p.add_argument("--steps", type=int)
    p.add_argument("--h-slm", type=int)
    p.add_argument("--h-elm", type=int)
    p.add_argument("--no-progress", action="store_true")
    p.set_defaults(func=cmd_bench)

    p = sub.add_parser("plot-data", help="emit centers, widths and rollout trajectories as CSV")
    _common(p)
    p.add_argument("model")
    p.set_defaults(func=cmd_plot_data)

    p = sub.add_parser("config", help="configuration helpers")
    _common(p)
    p.add_argument("action", choices=("print-defaults",))
    p.set_defaults(func=cmd_config)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (InputError, ShapeError, OSError) as exc:
        print(f"data error: {exc}", file=sys.stderr)
        return EXIT_DATA
    except (NumericalError, np.linalg.LinAlgError) as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except CheckFailed as exc:
        print(f"property check failed: {exc}", file=sys.stderr)
        return EXIT_CHECK
    except SlmError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_NUMERIC


if __name__ == "__main__":
    sys.exit(main())
