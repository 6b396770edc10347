import json
import math

import pytest

from vekua.cli import main, parse_config, read_report
from vekua.errors import ConfigError

CIRCLE = {"factors": ["circle"], "lambda": [0], "p0": [0], "delta": 0, "alpha": 2, "s": 0, "q": 1}
PRODUCT = {"factors": ["circle", "su2"], "p0": [0.3, 0.7], "delta": 0.5, "alpha": [2, 0.5],
           "s": {"mean": 0.05, "cos": [[1, 0.2]]}, "q": {"mean": 1, "cos": [[1, 0.5]], "sin": [[2, 0.3]]}}
WITNESS = {"factors": ["circle", "su2"], "delta": math.sqrt(2), "alpha": 1, "s": 0, "q": 1}


def write(tmp_path, cfg, name="cfg.json"):
    path = tmp_path / name
    path.write_text(json.dumps(cfg))
    return str(path)


@pytest.fixture(autouse=True)
def _cwd(tmp_path, monkeypatch):
    monkeypatch.chdir(tmp_path)


def test_minimal_solve_config():
    cfg = parse_config({"task": "solve", "operator": CIRCLE, "truncation": {"bounds": [3]},
                        "forcing": {"random": {"seed": 1, "degree": 2}}})
    assert cfg.task == "solve" and cfg.params.alpha == 2 and cfg.bounds == (3,)
    assert cfg.k_bound == 50


@pytest.mark.parametrize("patch, msg", [
    ({"operator": {**CIRCLE, "alpha": 0}}, r"alpha in C \\ \{0\}"),
    ({"forcing": None}, "forcing required"),
    ({"operator": {**CIRCLE, "factors": ["torus"]}}, r"operator.factors\[0\]"),
    ({"operator": {**CIRCLE, "q": {"mean": 0, "cos": [[1, 1]]}}}, "operator"),
    ({"truncation": {"bounds": [1.5]}}, "circle bound"),
    ({"truncation": {"bounds": [3], "n_t": 4}}, "n_t"),
    ({"task": "dance"}, "task"),
])
def test_config_errors(patch, msg):
    raw = {"task": "solve", "operator": CIRCLE, "truncation": {"bounds": [3]},
           "forcing": {"random": {"seed": 1, "degree": 2}}}
    raw.update(patch)
    raw = {k: v for k, v in raw.items() if v is not None}
    with pytest.raises(ConfigError, match=msg):
        parse_config(raw)


def test_classify_case1(tmp_path, capsys):
    path = write(tmp_path, {"operator": CIRCLE, "truncation": {"bounds": [5]}})
    assert main(["classify", "-c", path]) == 0
    out = capsys.readouterr().out
    assert out.startswith("# vekua report ")
    assert read_report(out)["classify"]["summary"] == "case 1: solvable"


def test_resonances_witness(tmp_path, capsys):
    path = write(tmp_path, {"operator": WITNESS, "truncation": {"bounds": [2, 1]}})
    assert main(["resonances", "-c", path]) == 0
    body = read_report(capsys.readouterr().out)
    ks = {h["k"] for h in body["resonances"]["hits"]}
    assert ks == {-1, 1}


def test_solve_resonant_exit_code(tmp_path, capsys):
    path = write(tmp_path, {"operator": WITNESS, "truncation": {"bounds": [1, 0.5]},
                            "forcing": {"random": {"seed": 0, "degree": 2, "manufactured": False}}})
    assert main(["solve", "-c", path]) == 4
    assert "mode" in capsys.readouterr().err


@pytest.mark.parametrize("operator, code", [({**CIRCLE, "alpha": 0}, 2), ({**CIRCLE, "delta": 2, "alpha": 2}, 3)])
def test_error_exit_codes(tmp_path, operator, code):
    path = write(tmp_path, {"operator": operator, "truncation": {"bounds": [3]}})
    assert main(["classify", "-c", path]) == code


def test_missing_config_file():
    assert main(["solve", "-c", "nope.json"]) == 2


def test_solve_artifacts_deterministic(tmp_path):
    cfg = {"operator": PRODUCT, "truncation": {"bounds": [2, 1], "n_t": 128},
           "forcing": {"random": {"seed": 3, "degree": 3}}, "output": "out/run"}
    path = write(tmp_path, cfg)
    assert main(["solve", "-c", path]) == 0
    first = (tmp_path / "out/run.report").read_text()
    assert main(["solve", "-c", path]) == 0
    second = (tmp_path / "out/run.report").read_text()
    assert first.splitlines()[1:] == second.splitlines()[1:]
    body = read_report(first)
    assert body["solve"]["residual_max"] < 1e-7
    csv = (tmp_path / "out/run.decay.csv").read_text().splitlines()
    assert csv[0] == "weight,beta,supnorm" and len(csv) > 1
    sol = json.loads((tmp_path / "out/run.solution.json").read_text())
    assert sol["n_t"] == 128


def test_forcing_path_relative_to_config(tmp_path):
    sub = tmp_path / "cfgdir"
    sub.mkdir()
    (sub / "f.json").write_text(json.dumps({"modes": [{"mode": [[1]], "coef": [[1, 0]]}]}))
    path = write(sub, {"operator": CIRCLE, "truncation": {"bounds": [1], "n_t": 64},
                       "forcing": {"path": "f.json"}, "output": "res"})
    assert main(["solve", "-c", path]) == 0
    assert (tmp_path / "res.report").exists()


def test_overrides_change_hash(tmp_path, capsys):
    path = write(tmp_path, {"operator": CIRCLE, "truncation": {"bounds": [3]}})
    main(["classify", "-c", path])
    h1 = read_report(capsys.readouterr().out)["config_hash"]
    main(["classify", "-c", path, "--delta", "0.1", "--trunc-L", "4"])
    body = read_report(capsys.readouterr().out)
    assert body["config_hash"] != h1
    assert body["config"]["operator"]["delta"] == 0.1


def test_oracle_task(tmp_path, capsys):
    path = write(tmp_path, {"operator": PRODUCT, "truncation": {"bounds": [1, 0.5], "n_t": 64},
                            "forcing": {"random": {"seed": 2, "degree": 2}},
                            "options": {"refine": 4, "max_modes": 3}})
    assert main(["oracle", "-c", path]) == 0
    res = read_report(capsys.readouterr().out)["oracle"]
    assert res["max_deviation"] < 1e-6


def test_diophantine_task(tmp_path, capsys):
    path = write(tmp_path, {"operator": WITNESS, "truncation": {"bounds": [2, 1]}})
    assert main(["diophantine", "-c", path]) == 0
    res = read_report(capsys.readouterr().out)["diophantine"]
    assert res["III"]["verdict"] == "violated"
