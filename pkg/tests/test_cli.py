import json

import numpy as np
import pytest
from click.testing import CliRunner

from nero.cli import main, _resolve_seed
from nero.data import save_dataset
from nero.matching import partition, load_partition
from nero.rules import load_candidates, save_rules
from nero.synthetic import generate, write_embeddings


@pytest.fixture(scope="module")
def runner():
    return CliRunner()


@pytest.fixture(scope="module")
def workdir(tmp_path_factory):
    """Synthetic corpus, schema, rules and embeddings written to disk."""
    root = tmp_path_factory.mktemp("cli")
    data = generate(n_train=150, n_dev=40, n_test=40, seed=11)
    save_dataset(data.train, root / "corpus.jsonl")
    save_dataset(data.dev, root / "dev.jsonl")
    save_dataset(data.test, root / "test.jsonl")
    data.schema.save(root / "schema.json")
    save_rules(data.rules, root / "rules.jsonl", data.schema)
    write_embeddings(data.pretrained, root / "emb.txt")
    return root, data


def run_ok(runner, args):
    result = runner.invoke(main, args, catch_exceptions=False)
    assert result.exit_code == 0, result.output
    return result


@pytest.fixture(scope="module")
def mined(runner, workdir):
    root, _ = workdir
    out = root / "candidates.jsonl"
    run_ok(runner, ["mine", "--corpus", str(root / "corpus.jsonl"),
                    "--schema", str(root / "schema.json"), "--out", str(out)])
    return out


@pytest.fixture(scope="module")
def matched(runner, workdir):
    root, _ = workdir
    m, u = root / "matched.jsonl", root / "unmatched.jsonl"
    run_ok(runner, ["match", "--corpus", str(root / "corpus.jsonl"),
                    "--schema", str(root / "schema.json"),
                    "--rules", str(root / "rules.jsonl"),
                    "--matched-out", str(m), "--unmatched-out", str(u)])
    return m, u


@pytest.fixture(scope="module")
def checkpoint(runner, workdir, matched):
    root, _ = workdir
    m, u = matched
    out = root / "ckpt"
    run_ok(runner, ["train", "--corpus", str(root / "corpus.jsonl"),
                    "--schema", str(root / "schema.json"),
                    "--matched", str(m), "--unmatched", str(u),
                    "--rules", str(root / "rules.jsonl"),
                    "--dev", str(root / "dev.jsonl"),
                    "--emb", str(root / "emb.txt"), "--emb-dim", "30",
                    "--out", str(out), "--seed", "0",
                    "--max-epochs", "2", "--patience", "2",
                    "--d-h", "8", "--d-a", "6"])
    return out


class TestMine:
    def test_writes_candidates_and_manifest(self, mined, workdir):
        cands = load_candidates(mined)
        assert cands
        assert all(c.frequency >= 3 for c in cands)
        manifest = json.loads(
            (mined.parent / "candidates.jsonl.manifest.json").read_text())
        assert manifest["subcommand"] == "mine"
        assert manifest["settings"]["min_freq"] == 3

    def test_rerun_is_byte_identical(self, runner, workdir, mined):
        root, _ = workdir
        again = root / "candidates2.jsonl"
        run_ok(runner, ["mine", "--corpus", str(root / "corpus.jsonl"),
                        "--schema", str(root / "schema.json"), "--out", str(again)])
        assert again.read_bytes() == mined.read_bytes()


class TestMatch:
    def test_equals_library_partition(self, workdir, matched):
        root, data = workdir
        part = load_partition(*matched)
        assert part == partition(data.train, data.rules)

    def test_matched_labels_in_schema(self, workdir, matched):
        _, data = workdir
        part = load_partition(*matched)
        assert all(head in data.schema for _, _, head in part.matched)


class TestTrain:
    def test_checkpoint_contents(self, checkpoint):
        for name in ("params.npz", "vocab.npz", "manifest.json",
                     "train_log.jsonl", "run_manifest.json"):
            assert (checkpoint / name).exists()
        manifest = json.loads((checkpoint / "manifest.json").read_text())
        assert 0.0 <= manifest["threshold"] <= 1.0
        assert manifest["seed"] == 0

    def test_epoch_log_is_jsonl(self, checkpoint):
        lines = (checkpoint / "train_log.jsonl").read_text().splitlines()
        recs = [json.loads(l) for l in lines]
        assert [r["epoch"] for r in recs] == list(range(len(recs)))
        assert all(np.isfinite(r["loss"]) for r in recs)
        assert all(r["dev_f1"] is not None for r in recs)


class TestEvalPredict:
    def test_eval_from_checkpoint(self, runner, workdir, checkpoint):
        root, _ = workdir
        report_path = root / "report.json"
        result = run_ok(runner, ["eval", "--gold", str(root / "test.jsonl"),
                                 "--schema", str(root / "schema.json"),
                                 "--checkpoint", str(checkpoint),
                                 "--report-out", str(report_path)])
        assert "F1=" in result.output
        report = json.loads(report_path.read_text())
        assert 0.0 <= report["f1"] <= 1.0

    def test_predict_then_eval_consistency(self, runner, workdir, checkpoint):
        root, data = workdir
        preds_path = root / "preds.jsonl"
        run_ok(runner, ["predict", "--input", str(root / "test.jsonl"),
                        "--schema", str(root / "schema.json"),
                        "--checkpoint", str(checkpoint), "--out", str(preds_path)])
        lines = preds_path.read_text().splitlines()
        assert len(lines) == len(data.test)

        direct = root / "report_direct.json"
        from_file = root / "report_file.json"
        run_ok(runner, ["eval", "--gold", str(root / "test.jsonl"),
                        "--schema", str(root / "schema.json"),
                        "--checkpoint", str(checkpoint),
                        "--report-out", str(direct)])
        run_ok(runner, ["eval", "--gold", str(root / "test.jsonl"),
                        "--schema", str(root / "schema.json"),
                        "--predictions", str(preds_path),
                        "--report-out", str(from_file)])
        assert (json.loads(direct.read_text())["f1"]
                == json.loads(from_file.read_text())["f1"])

    def test_srm_mode_predict(self, runner, workdir, checkpoint):
        root, data = workdir
        out = root / "preds_srm.jsonl"
        run_ok(runner, ["predict", "--input", str(root / "test.jsonl"),
                        "--schema", str(root / "schema.json"),
                        "--checkpoint", str(checkpoint), "--mode", "srm",
                        "--rules", str(root / "rules.jsonl"), "--out", str(out)])
        recs = [json.loads(l) for l in out.read_text().splitlines()]
        assert all(r["mode"] == "srm" for r in recs)
        assert all(r["relation"] in data.schema.relations for r in recs)

    def test_eval_needs_a_source(self, runner, workdir):
        root, _ = workdir
        result = runner.invoke(main, ["eval", "--gold", str(root / "test.jsonl"),
                                      "--schema", str(root / "schema.json"),
                                      "--report-out", str(root / "r.json")])
        assert result.exit_code == 1


class TestExplain:
    def test_writes_explanation(self, runner, workdir, checkpoint):
        root, data = workdir
        out = root / "explain.json"
        inst = data.test[0]
        result = run_ok(runner, [
            "explain", "--input", str(root / "test.jsonl"),
            "--schema", str(root / "schema.json"),
            "--instance-id", inst.id, "--rules", str(root / "rules.jsonl"),
            "--rule-id", data.rules[0].id,
            "--checkpoint", str(checkpoint), "--out", str(out)])
        assert "score" in result.output
        exp = json.loads(out.read_text())
        assert len(exp["sentence_attention"]) == len(exp["sentence_tokens"])
        assert -1.0 - 1e-9 <= exp["score"] <= 1.0 + 1e-9

    def test_unknown_instance_is_validation_error(self, runner, workdir, checkpoint):
        root, data = workdir
        result = runner.invoke(main, [
            "explain", "--input", str(root / "test.jsonl"),
            "--schema", str(root / "schema.json"),
            "--instance-id", "nope", "--rules", str(root / "rules.jsonl"),
            "--rule-id", data.rules[0].id,
            "--checkpoint", str(checkpoint), "--out", str(root / "x.json")])
        assert result.exit_code == 1
        assert "nope" in result.output


class TestErrorsAndSeeds:
    def test_corrupt_corpus_exits_one(self, runner, workdir, tmp_path):
        root, _ = workdir
        bad = tmp_path / "bad.jsonl"
        bad.write_text("{not json\n")
        result = runner.invoke(main, ["mine", "--corpus", str(bad),
                                      "--schema", str(root / "schema.json"),
                                      "--out", str(tmp_path / "o.jsonl")])
        assert result.exit_code == 1
        assert "error:" in result.output

    def test_missing_required_flag_exits_two(self, runner):
        result = runner.invoke(main, ["mine"])
        assert result.exit_code == 2

    def test_seed_precedence(self, monkeypatch):
        monkeypatch.delenv("NERO_SEED", raising=False)
        assert _resolve_seed(None) == 0
        assert _resolve_seed(7) == 7
        monkeypatch.setenv("NERO_SEED", "5")
        assert _resolve_seed(None) == 5
        assert _resolve_seed(7) == 7
