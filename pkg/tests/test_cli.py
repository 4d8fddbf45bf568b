import csv
import io
import json
from pathlib import Path

import pytest

from prepost import cli
from prepost.emit import emit_results
from prepost.errors import EmptyRecords, IoError, ParseError, ValidationError
from conftest import tan89

SCENARIOS = Path(__file__).resolve().parent.parent / "scenarios"

MINIMAL = '{"kind": "weak_value", "A": "sigma_z", "pre_angle": 45, "post_angle": -44}'


def run(argv, capsys):
    code = cli.main(argv)
    out, err = capsys.readouterr()
    return code, out, err


class TestParse:
    def test_minimal(self):
        s = cli.parse_scenario(MINIMAL)
        assert s.kind == "weak_value"
        assert s.parameters == {"A": "sigma_z", "pre_angle": 45, "post_angle": -44}
        assert s.seed == 0

    def test_missing_delta(self):
        with pytest.raises(ValidationError) as info:
            cli.parse_scenario('{"kind": "suter_sweep", "pre_angle": 45, "post_angle": -44}')
        assert info.value.key == "delta"

    def test_unknown_key(self):
        with pytest.raises(ValidationError) as info:
            cli.parse_scenario('{"kind": "weak_value", "A": "sigma_z", "pre_angle": 45, "post_angle": -44, "gamma_ray": 1}')
        assert info.value.key == "gamma_ray"

    def test_parse_error_position(self):
        with pytest.raises(ParseError) as info:
            cli.parse_scenario('{\n  "kind": "weak_value",\n  "A": \n}')
        assert info.value.line == 4 and info.value.column == 1

    def test_wrong_type(self):
        with pytest.raises(ValidationError) as info:
            cli.parse_scenario('{"kind": "pointer", "A": "sigma_z", "pre_angle": 45, "post_angle": -44, "g": "big"}')
        assert info.value.key == "g"

    def test_kind_mismatch(self):
        with pytest.raises(ValidationError) as info:
            cli.parse_scenario(MINIMAL, kind="pointer")
        assert info.value.key == "kind"

    def test_explicit_state_vectors(self):
        s = cli.parse_scenario('{"kind": "weak_value", "A": "sigma_x", "pre": [[1, 0], [0, 0]], "post": [[1, 0], [1, 0]]}')
        assert "pre" in s.parameters


def test_weak_value_stdout_and_artifact(tmp_path, capsys):
    out = tmp_path / "wv.json"
    cfg = tmp_path / "wv_cfg.json"
    cfg.write_text(MINIMAL)
    code, stdout, _ = run(["weak-value", "--config", str(cfg), "--out", str(out)], capsys)
    assert code == 0
    assert stdout.strip() == "A_w = 57.2900 + 0.0000i"
    doc = json.loads(out.read_text())
    assert doc["re"] == pytest.approx(tan89(), abs=1e-9)
    manifest = json.loads((tmp_path / "wv.json.manifest.json").read_text())
    assert set(manifest) == {"scenario", "seed", "artifact_version", "wall_time"}
    assert manifest["scenario"]["kind"] == "weak_value"


def test_machine_design_residual(tmp_path, capsys):
    out = tmp_path / "design.json"
    code, _, _ = run(["machine", "design", "--config", str(SCENARIOS / "machine_design.json"), "--out", str(out)], capsys)
    assert code == 0
    doc = json.loads(out.read_text())
    assert doc["n"] == 12 and doc["residual"] <= 1e-3


def test_ensemble_byte_identical(tmp_path, capsys):
    a, b = tmp_path / "a.json", tmp_path / "b.json"
    for path in (a, b):
        assert run(["ensemble", "--config", str(SCENARIOS / "ensemble.json"), "--out", str(path)], capsys)[0] == 0
    assert a.read_bytes() == b.read_bytes()


def test_param_flags(tmp_path, capsys):
    out = tmp_path / "sweep.csv"
    code, _, _ = run(
        ["suter", "sweep", "-p", "pre_angle=45", "-p", "post_angle=-44", "-p", "delta=[1e-4, 0.01]", "--out", str(out)],
        capsys,
    )
    assert code == 0
    rows = list(csv.DictReader(io.StringIO(out.read_text())))
    assert len(rows) == 2 and float(rows[0]["gain"]) == pytest.approx(57.29, rel=1e-3)


def test_seed_override_changes_ensemble(tmp_path, capsys):
    a, b = tmp_path / "a.json", tmp_path / "b.json"
    cfg = str(SCENARIOS / "ensemble.json")
    run(["ensemble", "--config", cfg, "--out", str(a), "-p", "m_total=50000"], capsys)
    run(["ensemble", "--config", cfg, "--out", str(b), "-p", "m_total=50000", "--seed", "5"], capsys)
    assert json.loads(a.read_text())["seed"] == 20260101
    assert json.loads(b.read_text())["seed"] == 5
    assert a.read_bytes() != b.read_bytes()


class TestExitCodes:
    def test_parse(self, tmp_path, capsys):
        cfg = tmp_path / "bad.json"
        cfg.write_text('{"kind": "weak_value",')
        code, _, err = run(["weak-value", "--config", str(cfg)], capsys)
        assert code == 2
        doc = json.loads(err)
        assert doc["error"] == "ParseError" and doc["line"] == 1

    def test_validation(self, tmp_path, capsys):
        code, _, err = run(["weak-value", "-p", "A=sigma_z", "-p", "pre_angle=45"], capsys)
        assert code == 3
        assert json.loads(err)["key"] == "post_angle"

    def test_numeric(self, tmp_path, capsys):
        code, _, err = run(
            ["weak-value", "-p", "A=sigma_z", "-p", "pre_angle=0", "-p", "post_angle=90", "--out", str(tmp_path / "x.json")],
            capsys,
        )
        assert code == 4
        assert json.loads(err)["error"] == "OrthogonalPostSelection"

    def test_io_missing_config(self, tmp_path, capsys):
        code, _, _ = run(["weak-value", "--config", str(tmp_path / "nope.json")], capsys)
        assert code == 5

    def test_io_unwritable(self, tmp_path, capsys):
        blocker = tmp_path / "file"
        blocker.write_text("")
        code, _, _ = run(
            ["weak-value", "-p", "A=sigma_z", "-p", "pre_angle=45", "-p", "post_angle=-44", "--out", str(blocker / "x.json")],
            capsys,
        )
        assert code == 5

    def test_help_documents_codes(self, capsys):
        with pytest.raises(SystemExit):
            cli.main(["--help"])
        assert "5 I/O error" in capsys.readouterr().out


class TestEmit:
    def test_one_row_csv(self, tmp_path):
        path = tmp_path / "r.csv"
        emit_results([{"a": 1, "b": 0.1 + 0.2}], "csv", path)
        assert path.read_text() == "a,b\n1,0.3\n"

    def test_json_round_trip(self, tmp_path):
        path = tmp_path / "r.json"
        recs = [{"x": 1.234567890123456, "y": -2.5e-17}, {"x": 3.0, "y": 7}]
        emit_results(recs, "json", path)
        text = path.read_text()
        assert text.endswith("\n")
        back = json.loads(text)
        assert back[0]["x"] == 1.23456789012
        emit_results(back, "json", tmp_path / "r2.json")
        assert (tmp_path / "r2.json").read_text() == text

    def test_field_order(self, tmp_path):
        path = tmp_path / "r.csv"
        emit_results([{"z": 1, "a": 2}, {"z": 3, "a": 4}], "csv", path)
        assert path.read_text().splitlines()[0] == "z,a"

    def test_empty(self, tmp_path):
        with pytest.raises(EmptyRecords):
            emit_results([], "csv", tmp_path / "e.csv")
        assert issubclass(EmptyRecords, IoError)


@pytest.mark.parametrize("path", sorted(SCENARIOS.glob("*.json")), ids=lambda p: p.stem)
def test_shipped_scenarios_exit_zero(path, tmp_path, capsys, monkeypatch):
    monkeypatch.chdir(tmp_path)
    kind = json.loads(path.read_text())["kind"]
    words = next(w for w, k in cli.COMMANDS.items() if k == kind)
    assert cli.main([*words, "--config", str(path)]) == 0
