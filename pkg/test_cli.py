"""
Tests de la ligne de commande (main.py) : sous-commandes, fichiers produits, codes de sortie
"""

import json
import os
import sys

import pandas as pd
import pytest

sys.path.insert(0, os.path.abspath(os.path.dirname(__file__)))

import main as point_entree
from main import LOCK_NAME, main
from src import config as configuration
from src.core import read_dataset
from src.neural import load_checkpoint


def write_config(path, **sections):
    path.write_text(json.dumps({"schema_version": 1, **sections}), encoding="utf-8")
    return path


@pytest.fixture
def se_dataset(tmp_path):
    config = write_config(tmp_path / "se.json", simulate={"model": "SE", "n_sequences": 30, "seed": 7})
    assert main(["simulate", "--config", str(config), "--out", str(tmp_path)]) == 0
    return tmp_path / "datasets" / "SE.jsonl"


def test_simulate_writes_dataset(se_dataset):
    data = read_dataset(se_dataset)
    assert len(data) == 30
    assert data.window.horizon_T == 15.0


def test_simulate_is_reproducible(tmp_path, se_dataset):
    config = write_config(tmp_path / "again.json", simulate={"model": "SE", "n_sequences": 30, "seed": 7})
    assert main(["simulate", "--config", str(config), "--out", str(tmp_path), "--output", "again.jsonl"]) == 0
    assert (tmp_path / "again.jsonl").read_bytes() == se_dataset.read_bytes()


def test_simulate_rejects_bad_config(tmp_path):
    config = write_config(tmp_path / "bad.json", simulate={"model": "SE", "n_sequences": -3})
    assert main(["simulate", "--config", str(config), "--out", str(tmp_path)]) == 2


def test_simulate_rejects_unknown_schema(tmp_path):
    config = tmp_path / "v2.json"
    config.write_text(json.dumps({"schema_version": 2, "simulate": {"model": "SE"}}), encoding="utf-8")
    assert main(["simulate", "--config", str(config), "--out", str(tmp_path)]) == 2


def test_train_writes_checkpoint_and_log(tmp_path, se_dataset):
    config = write_config(tmp_path / "train.json", train={"batch_size": 8, "n_critic": 2, "show_progress": False})
    out = tmp_path / "run"
    assert main(["train", str(se_dataset), "--config", str(config), "--iters", "2", "--k", "4",
                 "--out", str(out)]) == 0
    checkpoint = load_checkpoint(out / "wgan_checkpoint.json")
    assert checkpoint.iteration == 2
    assert checkpoint.hidden_dim == 4
    log = pd.read_csv(out / "train_log.csv")
    assert log["phase"].tolist() == ["critic", "critic", "generator"] * 2


def test_train_zero_iterations(tmp_path, se_dataset):
    out = tmp_path / "run0"
    assert main(["train", str(se_dataset), "--iters", "0", "--k", "4", "--out", str(out)]) == 0
    assert load_checkpoint(out / "wgan_checkpoint.json").iteration == 0


def test_fit_requires_family(se_dataset):
    with pytest.raises(SystemExit) as exc:
        main(["fit", str(se_dataset)])
    assert exc.value.code == 2


def test_fit_writes_model(tmp_path, se_dataset):
    assert main(["fit", str(se_dataset), "--family", "SE", "--iters", "10", "--out", str(tmp_path)]) == 0
    record = json.loads((tmp_path / "mle_SE.json").read_text(encoding="utf-8"))
    assert record["family"] == "SE"
    assert record["diagnostics"]["iterations"] == 10


def test_missing_dataset_is_an_io_error(tmp_path):
    assert main(["fit", str(tmp_path / "absent.jsonl"), "--family", "SE", "--out", str(tmp_path)]) == 5


def test_evaluate_truth_against_itself(tmp_path):
    out = tmp_path / "eval"
    assert main(["evaluate", "--truth", "SE", "--model", "truth", "--metric", "intensity", "--n", "200",
                 "--out", str(out)]) == 0
    long = pd.read_csv(out / "deviations_long.csv")
    assert long.loc[0, "metric"] == "intensity"
    assert long.loc[0, "estimator"] == "vérité"
    assert long.loc[0, "mean"] >= 0.0
    assert (out / "table1_intensity.csv").exists()


def test_evaluate_fitted_model_qq(tmp_path, se_dataset):
    assert main(["fit", str(se_dataset), "--family", "SE", "--iters", "10", "--out", str(tmp_path)]) == 0
    out = tmp_path / "eval"
    assert main(["evaluate", "--truth", "SE", "--model", str(tmp_path / "mle_SE.json"), "--metric", "qq",
                 "--n", "100", "--out", str(out)]) == 0
    long = pd.read_csv(out / "deviations_long.csv")
    assert long.loc[0, "estimator"] == "MLE-SE"


def test_evaluate_intensity_against_reference_data_without_truth(tmp_path, se_dataset, capsys):
    assert main(["fit", str(se_dataset), "--family", "SE", "--iters", "10", "--out", str(tmp_path)]) == 0
    out = tmp_path / "reel"
    assert main(["evaluate", "--data", str(se_dataset), "--model", str(tmp_path / "mle_SE.json"),
                 "--metric", "intensity", "--n", "100", "--out", str(out)]) == 0
    long = pd.read_csv(out / "deviations_long.csv")
    assert long.loc[0, "dataset"] == (read_dataset(se_dataset).label or "SE")
    assert long.loc[0, "estimator"] == "MLE-SE"
    assert long.loc[0, "mean"] >= 0.0
    assert "Écart d'intensité" in capsys.readouterr().out


def test_qq_still_requires_truth(tmp_path, se_dataset):
    assert main(["fit", str(se_dataset), "--family", "SE", "--iters", "10", "--out", str(tmp_path)]) == 0
    assert main(["evaluate", "--data", str(se_dataset), "--model", str(tmp_path / "mle_SE.json"),
                 "--metric", "qq", "--out", str(tmp_path / "eval")]) == 2


def test_qq_on_mixture_exits_with_domain_code(tmp_path, capsys):
    code = main(["evaluate", "--truth", "IP+SE+SC", "--model", "truth", "--metric", "qq", "--out", str(tmp_path)])
    assert code == 3
    assert "mélange" in capsys.readouterr().err


def test_locked_output_directory(tmp_path, se_dataset):
    out = tmp_path / "verrou"
    out.mkdir()
    (out / LOCK_NAME).write_text("1234")
    assert main(["fit", str(se_dataset), "--family", "SC", "--out", str(out)]) == 5
    assert (out / LOCK_NAME).exists()


def test_lock_is_released(tmp_path, se_dataset):
    assert main(["fit", str(se_dataset), "--family", "SC", "--iters", "2", "--out", str(tmp_path)]) == 0
    assert not (tmp_path / LOCK_NAME).exists()


def test_distance_table(tmp_path, se_dataset):
    assert main(["distance", str(se_dataset), str(se_dataset), "--paired", "--out", str(tmp_path)]) == 0
    table = pd.read_csv(tmp_path / "distances.csv")
    assert len(table) == 30
    assert (table["distance"] == 0.0).all()


def test_reproduce_smoke_is_deterministic(tmp_path):
    for name in ("a", "b"):
        assert main(["reproduce", "--preset", "smoke", "--quiet", "--out", str(tmp_path / name)]) == 0
    reports_a, reports_b = tmp_path / "a" / "reports", tmp_path / "b" / "reports"
    produced = sorted(p.name for p in reports_a.iterdir() if p.suffix in (".csv", ".svg"))
    assert "deviations_long.csv" in produced
    assert "table1_intensity.csv" in produced
    for name in produced:
        assert (reports_a / name).read_bytes() == (reports_b / name).read_bytes(), name
    table = pd.read_csv(reports_a / "table1_intensity.csv")
    assert len(table) == 8


def test_default_output_prepares_the_data_tree(tmp_path, monkeypatch, se_dataset):
    data_dir = tmp_path / "data"
    monkeypatch.setattr(point_entree, "DATA_DIR", data_dir)
    for name in ("datasets", "checkpoints", "reports"):
        monkeypatch.setattr(configuration, f"{name.upper()}_DIR", data_dir / name)
    monkeypatch.setattr(configuration, "LOGS_DIR", tmp_path / "logs")
    assert main(["distance", str(se_dataset), str(se_dataset), "--paired", "--out", str(data_dir)]) == 0
    assert all((data_dir / name).is_dir() for name in ("datasets", "checkpoints", "reports"))
    assert (data_dir / "distances.csv").exists()


def test_explicit_output_leaves_the_data_tree_alone(tmp_path, se_dataset):
    out = tmp_path / "ailleurs"
    assert main(["distance", str(se_dataset), str(se_dataset), "--paired", "--out", str(out)]) == 0
    assert sorted(p.name for p in out.iterdir()) == ["distances.csv"]
