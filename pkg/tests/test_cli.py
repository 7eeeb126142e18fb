import json

import numpy as np
import pytest

from slmkit.cli import EXIT_CHECK, EXIT_CONFIG, EXIT_DATA, main
from slmkit.serialize import ExactVdp, save_model
from slmkit.vanderpol import read_phase_csv


@pytest.fixture(scope="module")
def workdir(tmp_path_factory):
    d = tmp_path_factory.mktemp("cli")
    assert main(["gen-data", "--steps", "120", "--trajectories", "4", "--out", str(d / "d.csv")]) == 0
    assert main(["train", str(d / "d.csv"), "--h", "20", "--out", str(d / "m.json")]) == 0
    return d


def test_gen_data_defaults(tmp_path, capsys):
    assert main(["gen-data", "--out", str(tmp_path / "d.csv")]) == 0
    out = capsys.readouterr().out
    assert out.count("9990 pairs") == 3


def test_gen_data_two_steps(tmp_path):
    assert main(["gen-data", "--steps", "2", "--out", str(tmp_path / "d.csv")]) == 0
    assert all(len(p.dataset) == 10 for p in read_phase_csv(tmp_path / "d.csv").values())


def test_gen_data_bad_dt(tmp_path, capsys):
    assert main(["gen-data", "--dt", "0", "--out", str(tmp_path / "d.csv")]) == EXIT_CONFIG
    assert "config error" in capsys.readouterr().err


def test_gen_data_embeds_config(workdir):
    first = (workdir / "d.csv").read_text().splitlines()[0]
    assert json.loads(first[2:])["vdp"]["steps"] == 120


def test_train_outputs(workdir):
    doc = json.loads((workdir / "m.json").read_text())
    assert doc["kind"] == "slm" and doc["dims"] == {"n": 2, "m": 2, "h": 20}
    assert doc["config"]["train"]["h"] == 20
    fit = json.loads((workdir / "m.fit.json").read_text())["fit"]
    assert fit["regressor_cols"] == 60


def test_train_is_reproducible(workdir, tmp_path):
    assert main(["train", str(workdir / "d.csv"), "--h", "20", "--out", str(tmp_path / "m.json")]) == 0
    assert (tmp_path / "m.json").read_bytes() == (workdir / "m.json").read_bytes()


def test_train_h_zero(workdir, tmp_path):
    assert main(["train", str(workdir / "d.csv"), "--h", "0", "--out", str(tmp_path / "m.json")]) == EXIT_CONFIG


def test_train_missing_data(tmp_path):
    assert main(["train", str(tmp_path / "nope.csv"), "--out", str(tmp_path / "m.json")]) == EXIT_DATA


def test_eval_on_training_data_matches_fit(workdir, tmp_path):
    out = tmp_path / "e.json"
    assert main(["eval", str(workdir / "m.json"), str(workdir / "d.csv"), "--phase", "learning",
                 "--out", str(out)]) == 0
    fit = json.loads((workdir / "m.fit.json").read_text())["fit"]
    assert json.loads(out.read_text())["mse"] == pytest.approx(fit["train_mse"], rel=1e-9, abs=1e-30)


def test_eval_modes(workdir, tmp_path):
    out = tmp_path / "e.json"
    assert main(["eval", str(workdir / "m.json"), str(workdir / "d.csv"), "--out", str(out)]) == 0
    res = json.loads(out.read_text())
    assert res["phase"] == "generalisation" and np.isfinite(res["mse"]) and res["mse"] >= 0
    assert main(["eval", str(workdir / "m.json"), str(workdir / "d.csv"), "--mode", "rollout",
                 "--out", str(out)]) == 0
    assert json.loads(out.read_text())["points"] == 4 * 119


def test_rollout_with_exact_stub_is_zero(workdir, tmp_path):
    save_model(ExactVdp(1.0, 0.01), tmp_path / "v.json")
    out = tmp_path / "e.json"
    assert main(["eval", str(tmp_path / "v.json"), str(workdir / "d.csv"), "--mode", "rollout",
                 "--out", str(out)]) == 0
    assert json.loads(out.read_text())["mse"] == 0.0


def test_check_suites(capsys):
    assert main(["check", "equivalence", "--seeds", "200"]) == 0
    assert "equivalence: PASS 200/200" in capsys.readouterr().out
    assert main(["check", "interpolation", "--N", "12", "--n", "2", "--seeds", "5"]) == 0
    assert main(["check", "interpolation", "--N", "7", "--n", "1"]) == EXIT_CONFIG


def test_check_failure_exit_code(capsys):
    # N=30, n=1 squares are numerically singular in float64, so this suite reports failures
    assert main(["check", "interpolation", "--N", "30", "--n", "1", "--seeds", "4"]) == EXIT_CHECK
    assert "cond=" in capsys.readouterr().out


def test_bench_quick(tmp_path, capsys):
    assert main(["bench", "--quick", "--no-progress", "--out", str(tmp_path)]) == 0
    table = (tmp_path / "table.txt").read_text()
    assert "Average over 2 SLM tests" in table and "Average over 2 ELM tests" in table
    report = json.loads((tmp_path / "report.json").read_text())
    assert report["config"]["experiment"]["repetitions"] == 2
    assert len(report["records"]) == 4


def test_bench_bad_kind(tmp_path):
    assert main(["bench", "--kind", "bogus", "--out", str(tmp_path)]) == EXIT_CONFIG


def test_plot_data(workdir, tmp_path):
    p1, p2 = tmp_path / "p1.csv", tmp_path / "p2.csv"
    args = ["plot-data", str(workdir / "m.json"), "--set", "vdp.steps=50"]
    assert main(args + ["--out", str(p1)]) == 0
    assert main(args + ["--out", str(p2)]) == 0
    assert p1.read_bytes() == p2.read_bytes()
    rows = p1.read_text().splitlines()
    assert rows[1] == "section,id,t,x1,x2,width"
    sections = [r.split(",")[0] for r in rows[2:]]
    assert sections.count("center") == 20
    assert sections.count("truth") == 10 * 50
    assert {r.split(",")[1] for r in rows[2:] if r.startswith("model")} == {str(i) for i in range(10)}


def test_print_defaults(capsys):
    assert main(["config", "print-defaults"]) == 0
    doc = json.loads(capsys.readouterr().out)
    assert doc["experiment"]["repetitions"] == 100


def test_config_file_unknown_key(tmp_path):
    p = tmp_path / "c.json"
    p.write_text('{"vdp": {"dtt": 1}}')
    assert main(["gen-data", "--config", str(p), "--out", str(tmp_path / "d.csv")]) == EXIT_CONFIG


def test_seed_flag_changes_data(tmp_path):
    for s in (1, 2):
        assert main(["gen-data", "--seed", str(s), "--steps", "5", "--out", str(tmp_path / f"{s}.csv")]) == 0
    assert (tmp_path / "1.csv").read_bytes() != (tmp_path / "2.csv").read_bytes()
