"""Command-line interface behavior and exit codes."""

import json
from pathlib import Path

import numpy as np
import pytest

from fairsample.cli import main

DATA_DIR = Path(__file__).resolve().parent.parent / "data"

TINY_CSV = """g,x1,x2,label
a,0.1,0.3,yes
a,0.4,0.9,no
b,0.2,0.8,yes
b,0.7,0.1,no
a,0.9,0.5,yes
b,0.3,0.2,no
a,0.6,0.7,no
b,0.8,0.4,yes
a,0.2,0.2,yes
b,0.5,0.6,no
a,0.7,0.9,no
b,0.1,0.5,yes
"""

TINY_SCHEMA = {
    "columns": [["g", "categorical"], ["x1", "numeric"], ["x2", "numeric"]],
    "target": {"column": "label", "positive": "yes"},
    "sensitive": ["g"],
}


@pytest.fixture
def tiny_dataset(tmp_path):
    data = tmp_path / "tiny.csv"
    data.write_text(TINY_CSV)
    schema = tmp_path / "schema.json"
    schema.write_text(json.dumps(TINY_SCHEMA))
    return data, schema


def test_audit_preset_german(tmp_path, capsys):
    out = tmp_path / "german.json"
    code = main([
        "audit", "--preset", "german", "--seed", "7",
        "--data-dir", str(DATA_DIR), "--out", str(out),
    ])
    assert code == 0
    doc = json.loads(out.read_text())
    sizes = [s["size"] for s in doc["subgroups"]]
    assert sizes == [50, 310, 548, 92, 0]
    a95 = doc["subgroups"][4]
    assert not a95["feasible"]
    printed = capsys.readouterr().out
    assert "INFEASIBLE" in printed


def test_audit_missing_dataset_exits_2(tmp_path, capsys):
    schema = tmp_path / "schema.json"
    schema.write_text(json.dumps(TINY_SCHEMA))
    missing = tmp_path / "does-not-exist.csv"
    code = main(["audit", "--dataset", str(missing), "--schema", str(schema)])
    assert code == 2
    assert "does-not-exist.csv" in capsys.readouterr().err


def test_audit_custom_csv(tmp_path, tiny_dataset):
    data, schema = tiny_dataset
    out = tmp_path / "tiny.json"
    code = main([
        "audit", "--dataset", str(data), "--schema", str(schema),
        "--seed", "1", "--draws", "50", "--folds", "2",
        "--lambda-grid", "0.1,1.0", "--out", str(out), "--md", str(tmp_path / "tiny.md"),
    ])
    assert code == 0
    doc = json.loads(out.read_text())
    assert doc["k_feasible"] == 2
    assert (tmp_path / "tiny.md").exists()


def test_audit_byte_identical_reruns(tmp_path):
    a = tmp_path / "a.json"
    b = tmp_path / "b.json"
    for out in (a, b):
        code = main([
            "audit", "--preset", "german", "--seed", "7",
            "--data-dir", str(DATA_DIR), "--out", str(out),
        ])
        assert code == 0
    assert a.read_bytes() == b.read_bytes()


def test_complexity_collaborative_values(capsys):
    code = main(["complexity", "--d", "108", "--k", "4", "--eps", "0.1", "--delta", "0.05"])
    assert code == 0
    out = capsys.readouterr().out
    assert "uniform_lower: 1026" in out


def test_complexity_zero_radius(capsys):
    code = main(["complexity", "--R", "0", "--phi", "2", "--m", "10"])
    assert code == 0
    out = capsys.readouterr().out
    assert "uniform_score: 0" in out
    assert "erm_score: 0" in out


def test_complexity_invalid_delta_exits_2(capsys):
    code = main(["complexity", "--d", "10", "--k", "2", "--delta", "1.5"])
    assert code == 2
    assert "delta" in capsys.readouterr().err


def test_complexity_requires_some_inputs(capsys):
    assert main(["complexity"]) == 2


def test_fairness_constant_model(tmp_path, tiny_dataset, capsys):
    data, schema = tiny_dataset
    model = tmp_path / "model.json"
    model.write_text(json.dumps({"w": [0.0, 0.0, 0.0, 0.0], "b": 0.0}))
    code = main([
        "fairness", "--model", str(model), "--dataset", str(data),
        "--schema", str(schema), "--gamma", "0.0",
    ])
    assert code == 0
    out = capsys.readouterr().out
    assert "alpha_hat: 0.0" in out
    assert "pairs_evaluated: 66" in out


def test_fairness_dimension_mismatch_exits_2(tmp_path, tiny_dataset, capsys):
    data, schema = tiny_dataset
    model = tmp_path / "model.json"
    model.write_text(json.dumps({"w": [0.0], "b": 0.0}))
    code = main([
        "fairness", "--model", str(model), "--dataset", str(data),
        "--schema", str(schema),
    ])
    assert code == 2
    assert "dimension" in capsys.readouterr().err


def test_fairness_matches_library_value(tmp_path, tiny_dataset, capsys):
    import fairsample as fs

    data, schema = tiny_dataset
    rng = np.random.default_rng(0)
    w = rng.normal(size=4).tolist()
    model = tmp_path / "model.json"
    model.write_text(json.dumps({"w": w, "b": 0.25}))
    code = main([
        "fairness", "--model", str(model), "--dataset", str(data),
        "--schema", str(schema), "--gamma", "0.05", "--alpha-target", "0.1",
    ])
    assert code == 0
    out = capsys.readouterr().out

    table = fs.parse_table(data)
    ds = fs.encode(table, fs.load_schema(schema))
    metric = fs.build_metric(ds)
    trained = fs.TrainedModel(w=np.asarray(w), b=0.25, lambda_star=1.0, converged=True)
    scores = fs.predict_scores(trained, ds.X)
    est = fs.empirical_metric_fairness(scores, ds, metric, 0.05)
    assert f"alpha_hat: {est.alpha_hat}" in out
    gamma = fs.min_gamma_for_alpha(scores, ds, metric, 0.1)
    assert f"min_gamma_for_alpha(0.1): {gamma}" in out


def test_help_lists_flags(capsys):
    with pytest.raises(SystemExit) as exc:
        main(["audit", "--help"])
    assert exc.value.code == 0
    out = capsys.readouterr().out
    for flag in ("--preset", "--seed", "--draws", "--delta", "--eps-alpha",
                 "--eps-gamma", "--gamma", "--folds", "--out"):
        assert flag in out


def test_unknown_flag_rejected(capsys):
    with pytest.raises(SystemExit) as exc:
        main(["audit", "--preset", "german", "--frobnicate"])
    assert exc.value.code == 2
