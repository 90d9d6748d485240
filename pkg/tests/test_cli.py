import json

import numpy as np
import pytest

from varcf.cli import EXIT_DATA, EXIT_NUMERIC, EXIT_OK, EXIT_USAGE, main
from varcf.data import save_ratings_csv, synthetic_ratings
from varcf.experiment import load_report


@pytest.fixture(scope="module")
def corpus(tmp_path_factory):
    path = tmp_path_factory.mktemp("cli-corpus") / "toy.csv"
    save_ratings_csv(synthetic_ratings(20, 25, 260, seed=9), path)
    return path


def run(*argv):
    return main([str(a) for a in argv])


@pytest.fixture(scope="module")
def artifacts(corpus, tmp_path_factory):
    root = tmp_path_factory.mktemp("cli-flow")
    splits = root / "splits"
    assert run("split", "--dataset", corpus, "--out", splits) == EXIT_OK
    ck = root / "model.npz"
    assert run(
        "train", "--dataset", splits / "train.csv", "--mapping", splits / "mapping.json",
        "--arch", "VDeepMF", "--epochs", "3", "--latent-dim", "4",
        "--embedding-dim", "4", "--init-seed", "7", "--sample-seed", "8",
        "--checkpoint", ck,
    ) == EXIT_OK
    return {"splits": splits, "checkpoint": ck}


class TestSplitCommand:
    def test_writes_all_artifacts(self, corpus, tmp_path, capsys):
        out = tmp_path / "splits"
        assert run("split", "--dataset", corpus, "--ratio", "0.8",
                   "--split-seed", "5", "--out", out) == EXIT_OK
        for name in ("train.csv", "test.csv", "mapping.json", "manifest.json"):
            assert (out / name).is_file(), name
        manifest = json.loads((out / "manifest.json").read_text())
        assert manifest["train_ratings"] == 208
        assert manifest["test_ratings"] == 52
        assert manifest["split_seed"] == 5
        assert "260" in capsys.readouterr().out

    def test_missing_dataset_is_a_data_error(self, tmp_path):
        assert run("split", "--dataset", tmp_path / "nope.csv", "--out", tmp_path) == EXIT_DATA


class TestTrainEvaluatePredict:
    def test_evaluate_writes_report(self, artifacts, tmp_path):
        report_path = tmp_path / "report.json"
        code = run(
            "evaluate", "--checkpoint", artifacts["checkpoint"],
            "--test-file", artifacts["splits"] / "test.csv",
            "--mapping", artifacts["splits"] / "mapping.json",
            "--theta", "3", "--top-n-sweep", "1-5",
            "--report", report_path, "--format", "json",
        )
        assert code == EXIT_OK
        report = load_report(report_path)
        block = report["architectures"]["VDeepMF"]
        assert 0.0 <= block["mae"] < 4.0
        assert sorted(block["ranking"], key=int) == ["1", "2", "3", "4", "5"]

    def test_predict_scores_pairs(self, artifacts, tmp_path):
        pairs = tmp_path / "pairs.csv"
        pairs.write_text("0,1\n3,2\n7,4\n")
        out = tmp_path / "scores.txt"
        code = run(
            "predict", "--checkpoint", artifacts["checkpoint"], "--pairs", pairs,
            "--mapping", artifacts["splits"] / "mapping.json", "--out", out,
        )
        assert code == EXIT_OK
        scores = [float(line) for line in out.read_text().splitlines()]
        assert len(scores) == 3
        assert all(np.isfinite(scores))

    def test_predict_is_deterministic_per_seed(self, artifacts, tmp_path):
        pairs = tmp_path / "pairs.csv"
        pairs.write_text("0,1\n")
        a, b = tmp_path / "a.txt", tmp_path / "b.txt"
        run("predict", "--checkpoint", artifacts["checkpoint"], "--pairs", pairs,
            "--mapping", artifacts["splits"] / "mapping.json",
            "--sample-seed", "42", "--out", a)
        run("predict", "--checkpoint", artifacts["checkpoint"], "--pairs", pairs,
            "--mapping", artifacts["splits"] / "mapping.json",
            "--sample-seed", "42", "--out", b)
        assert a.read_text() == b.read_text()

    def test_predict_unknown_id_is_a_data_error(self, artifacts, tmp_path):
        pairs = tmp_path / "pairs.csv"
        pairs.write_text("999,1\n")
        code = run(
            "predict", "--checkpoint", artifacts["checkpoint"], "--pairs", pairs,
            "--mapping", artifacts["splits"] / "mapping.json",
        )
        assert code == EXIT_DATA


class TestRunCommand:
    def test_full_pipeline_with_config_file(self, corpus, tmp_path):
        config = tmp_path / "spec.json"
        report_path = tmp_path / "report.json"
        config.write_text(json.dumps({
            "dataset_path": str(corpus),
            "architectures": ["DeepMF"],
            "epochs": 2,
            "relevance_threshold": 3.0,
            "n_sweep": [1, 2],
        }))
        assert run("run", "--config", config, "--report", report_path) == EXIT_OK
        report = load_report(report_path)
        assert report["architectures"]["DeepMF"]["fit_epochs"] == 2

    def test_cli_flags_override_config_file(self, corpus, tmp_path):
        config = tmp_path / "spec.json"
        report_path = tmp_path / "report.json"
        config.write_text(json.dumps({
            "dataset_path": str(corpus),
            "architectures": ["DeepMF"],
            "epochs": 2,
            "relevance_threshold": 3.0,
        }))
        assert run("run", "--config", config, "--epochs", "1",
                   "--report", report_path) == EXIT_OK
        assert load_report(report_path)["architectures"]["DeepMF"]["fit_epochs"] == 1

    def test_csv_report_format(self, corpus, tmp_path):
        report_path = tmp_path / "report.csv"
        assert run("run", "--dataset", corpus, "--arch", "DeepMF", "--epochs", "1",
                   "--theta", "3", "--report", report_path, "--format", "csv") == EXIT_OK
        header = report_path.read_text().splitlines()[0]
        assert header == "record,architecture,metric,n,value"


class TestExitCodes:
    def test_no_arguments_is_usage(self):
        assert run() == EXIT_USAGE

    def test_unknown_architecture_is_usage(self, corpus, tmp_path):
        assert run("run", "--dataset", corpus, "--arch", "SVD", "--epochs", "1",
                   "--report", tmp_path / "r.json") == EXIT_USAGE

    def test_invalid_format_choice_is_usage(self, corpus, tmp_path):
        assert run("run", "--dataset", corpus, "--arch", "DeepMF", "--epochs", "1",
                   "--report", tmp_path / "r.json", "--format", "xml") == EXIT_USAGE

    def test_missing_epochs_on_unknown_corpus_is_usage(self, corpus, tmp_path):
        assert run("run", "--dataset", corpus, "--arch", "DeepMF", "--theta", "3",
                   "--report", tmp_path / "r.json") == EXIT_USAGE

    def test_nonexistent_dataset_is_data_error(self, tmp_path):
        assert run("run", "--dataset", tmp_path / "missing.csv", "--arch", "DeepMF",
                   "--epochs", "1") == EXIT_DATA

    def test_divergent_training_is_numeric_error(self, corpus, tmp_path):
        with np.errstate(over="ignore", invalid="ignore"):
            code = run(
                "train", "--dataset", corpus, "--arch", "NCF", "--epochs", "4",
                "--lr", "1e200", "--checkpoint", tmp_path / "m.npz",
            )
        assert code == EXIT_NUMERIC
