import json
from pathlib import Path

import pytest

from ellmax.cli import main

FIXTURES = Path(__file__).parent / "fixtures"


def _write_config(tmp_path, **extra):
    tree = json.loads((FIXTURES / "example_study.json").read_text())
    tree.update(extra)
    path = tmp_path / "cfg.json"
    path.write_text(json.dumps(tree))
    return path


def test_verify(capsys):
    assert main(["verify"]) == 0
    out = capsys.readouterr().out
    assert out.count("PASS") >= 10 and "FAIL" not in out


def test_study_matches_golden(tmp_path):
    out = tmp_path / "r.csv"
    assert main(["study", "--config", str(FIXTURES / "example_study.json"), "--output", str(out)]) == 0
    assert out.read_text() == (FIXTURES / "example_study.csv").read_text()


def test_study_json_to_stdout(capsys):
    assert main(["study", "--config", str(FIXTURES / "example_study.json"), "--format", "json"]) == 0
    doc = json.loads(capsys.readouterr().out)
    assert len(doc["rows"]) == 3 and doc["summary"][0]["passed"]


def test_study_failure_exit_code(tmp_path):
    cfg = _write_config(tmp_path, tolerances={"ratio_band": 1e-9})
    assert main(["study", "--config", str(cfg), "--output", str(tmp_path / "o.csv")]) == 1


def test_config_error_exit_code(tmp_path, capsys):
    assert main(["study"]) == 2
    assert main(["study", "--config", str(tmp_path / "nope.json")]) == 2
    cfg = _write_config(tmp_path, n_schedule=[])
    assert main(["study", "--config", str(cfg)]) == 2
    assert "n_schedule" in capsys.readouterr().err


def test_tail_beta(capsys):
    assert main(["tail", "--beta", "2", "1"]) == 0
    lines = capsys.readouterr().out.strip().splitlines()
    assert lines[0] == "quantity,x,scale,numeric,expansion,normalized_residual"
    assert len(lines) == 1 + 8 + 6
    assert main(["tail", "--beta", "0", "1"]) == 2


def test_tail_from_config(tmp_path):
    out = tmp_path / "t.json"
    assert main(["tail", "--config", str(FIXTURES / "example_study.json"), "--format", "json", "--output", str(out)]) == 0
    assert len(json.loads(out.read_text())["rows"]) == 14


def test_sample_seed_and_workers(tmp_path, capsys):
    cfg = _write_config(tmp_path, n_schedule=[50, 100], mc={"replications": 1000, "seed": 1})
    runs = []
    for extra in (["--workers", "1"], ["--workers", "3"], ["--seed", "99"]):
        assert main(["sample", "--config", str(cfg), *extra]) == 0
        runs.append(capsys.readouterr().out)
    assert runs[0] == runs[1]
    assert runs[0] != runs[2]
    assert runs[0].splitlines()[0] == "n,x,y,mc_estimate,mc_se,count,replications"


def test_sample_needs_mc_section():
    assert main(["sample", "--config", str(FIXTURES / "example_study.json")]) == 2


def test_bad_flags_exit_two():
    with pytest.raises(SystemExit) as info:
        main(["study", "--seed", "-3"])
    assert info.value.code == 2
