import json
from pathlib import Path

import pytest

from quasimorse.cli import config as cfgmod
from quasimorse.cli.main import main
from quasimorse.cli.pipeline import resolve
from quasimorse.cli.report import dumps
from quasimorse.errors import ConfigError

CONFIGS = Path(__file__).resolve().parents[1] / "configs"


def run(args):
    code = main([str(a) for a in args])
    return code


def load_report(out):
    return json.loads((Path(out) / "report.json").read_text())


def write_cfg(tmp_path, cfg, name="cfg.json"):
    path = tmp_path / name
    path.write_text(json.dumps(cfg))
    return path


def test_double_well_end_to_end(tmp_path):
    out = tmp_path / "dw"
    assert run(["run", "--config", CONFIGS / "double_well.json", "--out", out]) == 0
    rep = load_report(out)
    assert rep["stages"]["homology"]["betti"] == [1, 0]
    assert rep["passed"] and all(rep["checks"].values())
    manifest = json.loads((out / "manifest.json").read_text())
    assert "report.json" in manifest["files"] and manifest["seed"] == 1234
    header = (out / "traj_0.csv").read_text().splitlines()[0]
    assert header == "t,u_1,u_2,f,cerami"


def test_p_two_rejected(tmp_path, capsys):
    assert run(["run", "--config", CONFIGS / "bad_p.json", "--out", tmp_path]) == 2
    assert "p > 2" in capsys.readouterr().err


def test_unknown_key_rejected(tmp_path, capsys):
    cfg = write_cfg(tmp_path, {"seed": 1, "psi": {"p": 3, "colour": 1}})
    assert run(["run", "--config", cfg, "--out", tmp_path]) == 2
    assert "psi.colour" in capsys.readouterr().err


def test_missing_seed_rejected(tmp_path, capsys):
    cfg = write_cfg(tmp_path, {"psi": {"p": 3}})
    assert run(["index", "--config", cfg, "--out", tmp_path]) == 2
    assert "seed" in capsys.readouterr().err


def test_bad_json(tmp_path):
    path = tmp_path / "bad.json"
    path.write_text("{")
    assert run(["run", "--config", path, "--out", tmp_path]) == 2


def test_byte_identical_rerun(tmp_path):
    a, b = tmp_path / "a", tmp_path / "b"
    assert run(["run", "--config", CONFIGS / "bistable.json", "--out", a]) == 0
    assert run(["run", "--config", CONFIGS / "bistable.json", "--out", b]) == 0
    assert (a / "report.json").read_bytes() == (b / "report.json").read_bytes()
    for f in a.glob("traj_*.csv"):
        assert f.read_bytes() == (b / f.name).read_bytes()


def test_flow_disabled_still_certifies(tmp_path):
    out = tmp_path / "l50"
    assert run(["run", "--config", CONFIGS / "lambda50.json", "--out", out]) == 0
    rep = load_report(out)
    assert rep["stages"]["index"][0]["morse_index"] == 2
    assert all(c["lyapunov"]["verdict"] == "pass" for c in rep["stages"]["certify"])
    assert "flow" not in rep["stages"] or not rep["stages"]["flow"].get("orbits")


def test_degenerate_fixture_fails_checks(tmp_path):
    assert run(["certify", "--config", CONFIGS / "quartic_saddle.json", "--out", tmp_path]) == 1
    assert load_report(tmp_path)["checks"]["certify.all_pass"] is False


def test_stage_selection_adds_dependencies(tmp_path):
    out = tmp_path / "st"
    assert run(["run", "--config", CONFIGS / "single_well.json", "--out", out, "--stage", "index"]) == 0
    assert set(load_report(out)["stages"]) == {"assemble", "find", "index"}
    assert resolve(["homology"])[-1] == "homology"
    assert run(["run", "--config", CONFIGS / "single_well.json", "--out", out, "--stage", "bogus"]) == 2


def test_seed_override(tmp_path):
    out = tmp_path / "s"
    assert run(["find-critical", "--config", CONFIGS / "double_well.json", "--out", out, "--seed", "99"]) == 0
    assert load_report(out)["seed"] == 99


def test_counterexample_subcommand(tmp_path, capsys):
    assert run(["counterexample", "--orders", "5,10,20", "--out", tmp_path]) == 0
    rows = load_report(tmp_path)["stages"]["counterexample"]
    assert [r["order"] for r in rows] == [5, 10, 20]
    assert all(r["verified"] and r["residual"] <= 1e-12 for r in rows)
    assert rows[0]["origin_signature"] == {"negative": 5, "positive": 0}


def test_cerami_diagnosis(tmp_path):
    assert run(["diagnose-cerami", "--config", CONFIGS / "single_well.json", "--out", tmp_path]) == 0
    cer = load_report(tmp_path)["stages"]["cerami"]
    assert cer["class"] == "sublinear"


def test_config_dotted_and_defaults():
    cfg = cfgmod.normalize({"seed": 3, "psi.p": 3.5, "flow": {"n_shoot": 8}})
    assert cfg["psi"]["p"] == 3.5 and cfg["psi"]["kind"] == "area-kappa"
    assert cfg["flow"]["n_shoot"] == 8 and cfg["flow"]["horizon"] == 1e3
    with pytest.raises(ConfigError):
        cfgmod.normalize({"seed": -1, "psi.p": 3})
    with pytest.raises(ConfigError):
        cfgmod.normalize({"seed": 1, "mesh": {"dim": 2, "domain": [0, 1]}, "psi.p": 3})


def test_json_floats_round_trip():
    x = 0.1 + 0.2
    text = dumps({"x": x, "n": float("nan"), "i": 3, "l": [1.0, 2]})
    back = json.loads(text)
    assert back["x"] == x and back["n"] == "nan" and back["l"] == [1.0, 2]
