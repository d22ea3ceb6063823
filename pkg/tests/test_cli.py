from pathlib import Path

import numpy as np
import orjson
import pytest

from app.formats import load_model, parse_pareto_csv, read_document
from app.main import main
from app.utils.logging import round_numbers

DATA = Path(__file__).parent / "data"
MODEL = str(DATA / "running_model.json")
SYNTH = str(DATA / "running_synth.json")
PARETO = str(DATA / "running_pareto.json")


@pytest.fixture()
def query_file(tmp_path):
    def write(**changes) -> str:
        document = read_document(SYNTH)
        document.update(changes)
        target = tmp_path / "query.json"
        target.write_bytes(orjson.dumps(document))
        return str(target)

    return write


def test_validate_ok(capsys):
    assert main(["validate", "--model", MODEL]) == 0
    assert "model is valid (3 states, 4 state-action rows)" in capsys.readouterr().out


def test_validate_reports_violations(tmp_path, capsys):
    document = read_document(MODEL)
    document["transitions"][0]["interval"] = [0.95, 1]
    target = tmp_path / "model.json"
    target.write_bytes(orjson.dumps(document))
    assert main(["validate", "--model", str(target)]) == 2
    assert "[lower-sum] state=s action=a" in capsys.readouterr().err


def test_malformed_json(tmp_path, capsys):
    target = tmp_path / "model.json"
    target.write_text('{"states": [', encoding="utf-8")
    assert main(["validate", "--model", str(target)]) == 2
    assert "malformed JSON" in capsys.readouterr().err


def test_missing_file(capsys):
    assert main(["synth", "--model", "nowhere.json", "--query", SYNTH]) == 2
    assert "file not found" in capsys.readouterr().err


def test_synth_achievable(capsys):
    assert main(["synth", "--model", MODEL, "--query", SYNTH]) == 0
    report = orjson.loads(capsys.readouterr().out)
    assert report["status"] == "achievable"
    assert report["thresholds"] == pytest.approx([1 / 3, 1 / 4])
    assert "strategy" not in report


def test_synth_unachievable(query_file, capsys):
    objectives = read_document(SYNTH)["objectives"]
    objectives[0]["threshold"] = 0.41
    objectives[1]["threshold"] = 0
    assert main(["synth", "--model", MODEL, "--query", query_file(objectives=objectives)]) == 1
    assert orjson.loads(capsys.readouterr().out)["status"] == "unachievable"


def test_undecided_exit_code(query_file, capsys):
    objectives = read_document(SYNTH)["objectives"]
    objectives[0]["threshold"] = 0.35
    objectives[1]["threshold"] = 2
    path = query_file(objectives=objectives)
    assert main(["synth", "--model", MODEL, "--query", path, "--max-iters", "1"]) == 3
    assert "undecided after 1 iterations" in capsys.readouterr().err


def test_schema_error(query_file, capsys):
    assert main(["synth", "--model", MODEL, "--query", query_file(mode="sometimes")]) == 2
    assert "invalid document at mode" in capsys.readouterr().err


def test_assumption_failure(query_file, capsys):
    objectives = [{"kind": "reward", "structure": "missing", "step_bound": 1}]
    assert main(["synth", "--model", MODEL, "--query", query_file(objectives=objectives)]) == 2
    assert "does not exist" in capsys.readouterr().err


def test_pareto_csv_output(tmp_path, capsys):
    out = tmp_path / "front.csv"
    assert main(["pareto", "--model", MODEL, "--query", PARETO, "--format", "csv", "--out", str(out)]) == 0
    text = out.read_text()
    assert text.splitlines()[0] == "obj1,obj2"
    assert parse_pareto_csv(text) == pytest.approx([[1 / 3, 3.0], [0.4, 1.0]], abs=1e-6)


def test_qnt_mode_override(query_file, capsys):
    path = query_file(qnt_index=1, direction="max")
    assert main(["qnt", "--model", MODEL, "--query", path]) == 0
    assert orjson.loads(capsys.readouterr().out)["value"] == pytest.approx(3.0, abs=1e-4)


@pytest.mark.parametrize("kind", ["mixture", "counting", "randomised"])
def test_strategy_export(tmp_path, kind):
    out = tmp_path / "strategy.json"
    assert main(["strategy", "--model", MODEL, "--query", SYNTH, "--kind", kind, "--out", str(out)]) == 0
    assert read_document(out)["kind"] == kind


def test_simulate_with_exported_strategy(tmp_path, capsys):
    strategy = tmp_path / "strategy.json"
    assert main(["strategy", "--model", MODEL, "--query", SYNTH, "--out", str(strategy)]) == 0
    capsys.readouterr()
    argv = ["simulate", "--model", MODEL, "--query", SYNTH, "--strategy", str(strategy)]
    assert main(argv + ["--runs", "2000", "--seed", "5", "--nature", "midpoint"]) == 0
    report = orjson.loads(capsys.readouterr().out)
    assert report["runs"] == 2000
    assert len(report["means"]) == 2
    assert report["means"][1] >= 1.0


def test_gen_commands(tmp_path):
    antg = tmp_path / "antg.json"
    assert main(["gen", "antg", "--n", "10", "--out", str(antg)]) == 0
    assert len(load_model(antg).states) == 101

    grid = tmp_path / "grid.json"
    argv = ["gen", "grid", "--rows", "2", "--cols", "3", "--target", "2,1", "--obstacles", "1,1"]
    assert main(argv + ["--noise", "0.05", "--out", str(grid)]) == 0
    model = load_model(grid)
    assert model.enabled["g1_1"] == ["halt"]
    assert main(["validate", "--model", str(grid)]) == 0


def test_log_records_round_vectors():
    record = {"event": "step", "weights": np.array([1 / 3, 2 / 3]), "point": (0.1234567891, 2), "sweeps": 3}
    rounded = round_numbers(None, "debug", record)
    assert rounded["weights"] == [0.333333, 0.666667]
    assert rounded["point"] == [0.123457, 2.0]
    assert rounded["sweeps"] == 3
    assert rounded["event"] == "step"
