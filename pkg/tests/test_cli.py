import json

import pytest
import yaml

from ionkick import cli
from ionkick.config import ConfigError, build_config, parse_angular, parse_time
from ionkick.io import read_csv
from ionkick.parallel import ENV_THREADS, resolve_threads

SMALL = {
    "schema_version": 1,
    "protocol": {"name": "STIRAP"},
    "robustness": {"protocols": ["STIRAP"], "kinds": ["intensity"], "lo": -0.1, "hi": 0.1,
                   "count": 3},
    "delay_scan": {"lo": "-20 ps", "hi": "20 ps", "count": 3},
    "sdk_map": {"x": {"name": "omega0", "lo": "80 GHz", "hi": "100 GHz", "count": 2},
                "y": {"name": "t_d", "lo": "250 ps", "hi": "270 ps", "count": 2}},
    "gate": {"schemes": ["FRAG"], "n": [2]},
    "gate_scan": {"f_bw": ["100 MHz", "1 GHz"]},
    "trajectory": {"kind": "gate", "scheme": "FRAG", "n": 2},
}


@pytest.fixture
def cfg_file(tmp_path):
    path = tmp_path / "run.yaml"
    path.write_text(yaml.safe_dump(SMALL))
    return path


def _run(cfg_file, out, *args):
    return cli.run([args[0], "-c", str(cfg_file), "--out-dir", str(out), *args[1:]])


def test_validate_writes_nothing(cfg_file, tmp_path, capsys):
    out = tmp_path / "out"
    assert _run(cfg_file, out, "validate") == 0
    assert not out.exists()
    assert "config_hash=" in capsys.readouterr().out


def test_validate_without_file_uses_defaults(capsys):
    assert cli.run(["validate"]) == 0


@pytest.mark.parametrize("bad", [
    {"schema_version": 2},
    {"protocol": {"name": "STIRAP", "colour": "red"}},
    {"trap": {"omega": 1e6}},
    {"protocol": {"name": "STIRAP", "t_d": "2 ns"}},
    {"telescope": {}},
    {"gate": {"schemes": ["MS"]}},
])
def test_config_errors_exit_2(tmp_path, bad, capsys):
    path = tmp_path / "bad.yaml"
    path.write_text(yaml.safe_dump({"schema_version": 1, **bad}))
    assert cli.run(["validate", "-c", str(path)]) == 2
    assert capsys.readouterr().err.startswith("error[config]")


def test_bad_override_exit_2(capsys):
    assert cli.run(["validate", "--set", "protocol.omega0"]) == 2
    assert cli.run(["validate", "--set", "trap.eta=-1"]) == 2


def test_unknown_command_exit_2():
    assert cli.run(["frobnicate"]) == 2


def test_missing_file_exit_4(tmp_path, capsys):
    assert cli.run(["validate", "-c", str(tmp_path / "nope.yaml")]) == 4
    assert capsys.readouterr().err.startswith("error[io]")


def test_unwritable_output_exit_4(cfg_file, tmp_path):
    blocker = tmp_path / "file"
    blocker.write_text("x")
    assert _run(cfg_file, blocker / "sub", "waveform-compile") == 4


def test_numerical_failure_exit_3(cfg_file, tmp_path, capsys):
    code = _run(cfg_file, tmp_path / "o", "gate-solve", "--set", "trap.eta=1e-4",
                "--set", "gate.starts=2")
    assert code == 3
    assert capsys.readouterr().err.startswith("error[numerical]")


def test_robustness_deterministic(cfg_file, tmp_path):
    a, b = tmp_path / "a", tmp_path / "b"
    assert _run(cfg_file, a, "robustness") == 0
    assert _run(cfg_file, b, "robustness", "--threads", "2") == 0
    assert (a / "robustness.csv").read_bytes() == (b / "robustness.csv").read_bytes()
    comment, cols, rows = read_csv(a / "robustness.csv")
    assert cols == ["protocol", "kind", "perturbation", "epsilon", "one_minus_Fs"]
    assert len(rows) == 3
    assert "config_hash=" in comment
    manifest = json.loads((a / "robustness_manifest.json").read_text())
    assert manifest["config_hash"] in comment


def test_hash_ignores_output_location(cfg_file, tmp_path):
    _run(cfg_file, tmp_path / "a", "delay-scan")
    _run(cfg_file, tmp_path / "b", "delay-scan")
    ha = read_csv(tmp_path / "a" / "delay_scan.csv")[0]
    hb = read_csv(tmp_path / "b" / "delay_scan.csv")[0]
    assert ha == hb


def test_override_changes_hash(cfg_file, tmp_path, capsys):
    cli.run(["validate", "-c", str(cfg_file)])
    first = capsys.readouterr().out
    cli.run(["validate", "-c", str(cfg_file), "--set", "trap.eta=0.2"])
    assert capsys.readouterr().out != first


def test_sdk_map_and_trajectories(cfg_file, tmp_path):
    out = tmp_path / "o"
    assert _run(cfg_file, out, "sdk-map") == 0
    _, cols, rows = read_csv(out / "sdk_map_STIRAP.csv")
    assert cols == ["x", "y", "epsilon"] and len(rows) == 4
    assert _run(cfg_file, out, "trajectory") == 0
    assert _run(cfg_file, out, "trajectory", "--set", "trajectory.kind=sdk") == 0
    for f in out.glob("*.csv"):
        assert f.read_text().startswith("# ionkick ")


def test_gate_commands(cfg_file, tmp_path):
    out = tmp_path / "o"
    assert _run(cfg_file, out, "gate-solve") == 0
    report = json.loads((out / "gate_solve.json").read_text())
    assert report
    assert _run(cfg_file, out, "gate-scan") == 0
    _, cols, rows = read_csv(out / "gate_scan.csv")
    assert cols == ["scheme", "n", "f_bw_hz", "gate_time_s", "alpha_c_abs", "alpha_s_abs",
                    "delta_phi", "one_minus_Fo"]
    assert len(rows) == 2


def test_waveform_outputs(cfg_file, tmp_path):
    out = tmp_path / "o"
    assert _run(cfg_file, out, "waveform-compile") == 0
    names = {p.name for p in out.iterdir()}
    assert any(n.endswith(".bin") for n in names)
    meta = [p for p in out.glob("*.json") if "manifest" not in p.name]
    assert json.loads(meta[0].read_text())["path_delay_s"] > 0


def test_thread_resolution(monkeypatch):
    monkeypatch.setenv(ENV_THREADS, "3")
    assert resolve_threads(None) == 3
    assert resolve_threads(2) == 2
    monkeypatch.setenv(ENV_THREADS, "zero")
    with pytest.raises(ValueError):
        resolve_threads(None)


def test_env_thread_error_exit_2(monkeypatch):
    monkeypatch.setenv(ENV_THREADS, "-4")
    assert cli.run(["validate"]) == 2
    assert cli.run(["validate", "--threads", "1"]) == 0


@pytest.mark.parametrize("text,value", [
    ("1 GHz", 2 * 3.141592653589793e9),
    ("6.283185307179586 rad/s", 6.283185307179586),
])
def test_angular_units(text, value):
    assert parse_angular(text) == pytest.approx(value, rel=1e-15)


@pytest.mark.parametrize("text,value", [("260 ps", 260e-12), ("1 ns", 1e-9), ("2 us", 2e-6)])
def test_time_units(text, value):
    assert parse_time(text) == pytest.approx(value, rel=1e-15)


def test_bare_number_rejected():
    with pytest.raises(ConfigError):
        build_config({"schema_version": 1, "trap": {"omega": 6.28e6}})
