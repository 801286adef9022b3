import json
import subprocess
import sys
from pathlib import Path

import pytest

from thetalift import __version__
from thetalift.cli import main, run
from thetalift.config import ConfigError, RunConfig, config_hash, parse_rational, validate

CONFIGS = Path(__file__).resolve().parents[1] / "scripts" / "configs"


def write(tmp_path, obj, name="cfg.json"):
    p = tmp_path / name
    p.write_text(json.dumps(obj))
    return p


def test_schema_pointer_for_bad_value():
    with pytest.raises(ConfigError) as exc:
        validate({"lattice": {"catalog": "d1_signature_12"}, "green": {"m": ["1"], "truncation_radius": -5}})
    assert exc.value.pointer == "/green/truncation_radius"
    with pytest.raises(ConfigError) as exc:
        validate({"word": [{"kind": "S"}, {"kind": "Q"}]})
    assert exc.value.pointer == "/word/1/kind"
    with pytest.raises(ConfigError) as exc:
        validate({"unknown": 1})
    assert exc.value.pointer == "/"


def test_lattice_needs_exactly_one_source():
    with pytest.raises(ConfigError):
        validate({"lattice": {}})
    with pytest.raises(ConfigError):
        validate({"lattice": {"catalog": "a1", "gram": [[["2"]]]}})


def test_rationals_and_elements():
    assert parse_rational(" -3 / 4 ") == pytest.approx(-0.75)
    with pytest.raises(ConfigError):
        parse_rational("1/0", "/x")
    cfg = RunConfig.from_dict({"field": {"poly": [-3, 0, 1]}})
    assert cfg.element(["1/2", "1"], "/e").coords[0] == 0.5
    with pytest.raises(ConfigError) as exc:
        cfg.element(["1"], "/green/m")
    assert exc.value.pointer == "/green/m"


def test_hash_is_order_independent():
    assert config_hash({"a": 1, "b": [1, 2]}) == config_hash({"b": [1, 2], "a": 1})
    assert config_hash({"a": 1}) != config_hash({"a": 2})


def test_field_info_and_provenance(tmp_path, capsys):
    assert main(["field", "info", "--config", str(CONFIGS / "sqrt3_field.json")]) == 0
    out = json.loads(capsys.readouterr().out)
    assert out["result"]["discriminant"] == 12
    prov = out["provenance"]
    assert prov["version"] == __version__ and len(prov["config_hash"]) == 64 and "elapsed_s" in prov


def test_out_directory_and_determinism(tmp_path):
    cfg = str(CONFIGS / "d1_weil.json")
    assert main(["weil", "check", "--config", cfg, "--out", str(tmp_path / "a")]) == 0
    assert main(["weil", "check", "--config", cfg, "--out", str(tmp_path / "b")]) == 0
    a = json.loads((tmp_path / "a" / "result.json").read_text())
    b = json.loads((tmp_path / "b" / "result.json").read_text())
    assert a["result"] == b["result"]
    assert a["result"]["all_pass"]


def test_weil_check_trivial_group(tmp_path, capsys):
    p = write(tmp_path, {"lattice": {"catalog": "hyperbolic_plane"}})
    assert main(["weil", "check", "--config", str(p)]) == 0
    res = json.loads(capsys.readouterr().out)["result"]
    assert res["all_pass"] and all(v["deviation"] < 1e-15 for v in res["relations"].values())


def test_config_error_exit_code(tmp_path, capsys):
    p = write(tmp_path, {"lattice": {"catalog": "d1_signature_12"}, "green": {"m": ["1"], "s": "x"}})
    assert main(["green", "eval", "--config", str(p)]) == 1
    err = json.loads(capsys.readouterr().err)
    assert err["pointer"] == "/green/s"
    assert main(["field", "info", "--config", str(tmp_path / "missing.json")]) == 1


def test_missing_section_is_config_error(tmp_path, capsys):
    p = write(tmp_path, {"lattice": {"catalog": "a1"}})
    assert main(["green", "eval", "--config", str(p)]) == 1
    assert json.loads(capsys.readouterr().err)["pointer"] == "/green"


def test_numeric_failure_exit_code(tmp_path, capsys):
    p = write(tmp_path, {"lattice": {"catalog": "d1_signature_12"}, "point": [[0.3, 1.2]],
                         "green": {"m": ["1"], "s": 0.2, "truncation_radius": 100}})
    assert main(["green", "eval", "--config", str(p)]) == 2
    out = json.loads(capsys.readouterr().out)
    assert out["result"]["error"] == "numeric" and out["result"]["type"] == "GreenError"


def test_green_scan_csv(tmp_path, capsys):
    assert main(["green", "scan", "--config", str(CONFIGS / "d1_green.json"), "--out", str(tmp_path)]) == 0
    lines = (tmp_path / "scan.csv").read_text().strip().splitlines()
    assert lines[0] == "t,s,value,regular_part,tail_estimate,n_singular_terms"
    rows = [list(map(float, ln.split(","))) for ln in lines[1:]]
    assert len(rows) == 6
    regs = [r[3] for r in rows]
    assert max(regs) - min(regs) < 1e-3 and rows[-1][2] - rows[0][2] > 5


@pytest.mark.parametrize("argv", [
    ["specfun", "eval", "--config", str(CONFIGS / "specfun.json")],
    ["lattice", "info", "--config", str(CONFIGS / "d1_weil.json")],
    ["lattice", "dual", "--config", str(CONFIGS / "d1_weil.json")],
    ["lattice", "disc", "--config", str(CONFIGS / "d1_weil.json")],
    ["weil", "gen", "--config", str(CONFIGS / "d1_weil.json")],
    ["theta", "eval", "--config", str(CONFIGS / "d1_weil.json")],
    ["theta", "check", "--config", str(CONFIGS / "d1_weil.json")],
    ["whittaker", "eval", "--config", str(CONFIGS / "d1_whittaker.json")],
    ["whittaker", "pair", "--config", str(CONFIGS / "d1_whittaker.json")],
    ["whittaker", "obstruct", "--config", str(CONFIGS / "d1_whittaker.json")],
    ["whittaker", "bf", "--config", str(CONFIGS / "d1_whittaker.json")],
    ["examples", "shimura-curve"],
    ["examples", "sqrt3"],
])
def test_subcommands_succeed(argv, capsys):
    assert main(argv) == 0
    out = json.loads(capsys.readouterr().out)
    assert "result" in out and "provenance" in out


def test_whittaker_bf_values(capsys):
    main(["whittaker", "bf", "--config", str(CONFIGS / "d1_whittaker.json")])
    res = json.loads(capsys.readouterr().out)["result"]
    # single term c = 1 with B(1, 0) = -1/2
    assert res["B(f)"] == [-0.5, 0.0] and res["weight_of_psi"][0] == 0.5 and res["A(f)"][0] == 1.0
    assert res["A_relation_deviation"] == [0.0, 0.0]


def test_run_returns_status_tuple():
    cfg = RunConfig.load(CONFIGS / "sqrt3_field.json")
    status, art = run(("field", "info"), cfg)
    assert status == 0 and art["result"]["degree"] == 2


def test_module_entry_point():
    proc = subprocess.run([sys.executable, "-m", "thetalift", "--version"], capture_output=True, text=True)
    assert proc.returncode == 0 and __version__ in proc.stdout
