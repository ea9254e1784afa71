"""Command-line entry point wiring the pipeline together.

Precedence for settings: command-line flags override config-file keys,
which override built-in defaults. The seed falls back to the NERO_SEED
environment variable when no flag is given. Every subcommand writes a
run manifest next to its output before doing any work.

Exit codes: 0 success, 1 validation error (bad inputs), 2 runtime error.
"""

from __future__ import annotations

import json
import os
import subprocess
import sys
import time
from pathlib import Path

import click

from .data import (
    DatasetError,
    RelationSchema,
    build_vocabulary,
    load_dataset,
    load_embeddings,
)
from .matching import partition as run_partition, save_partition, load_partition
from .models import checkpoint_load, checkpoint_save, init_params
from .rules import extract_candidates, load_candidates, load_rules, save_candidates
from .training import ConfigError, TrainingConfig, train as run_train
from . import inference


def _git_describe() -> str:
    try:
        return subprocess.run(
            ["git", "describe", "--always", "--dirty"],
            capture_output=True, text=True, timeout=5,
        ).stdout.strip() or "unknown"
    except OSError:
        return "unknown"


def _resolve_seed(seed: int | None, default: int = 0) -> int:
    if seed is not None:
        return seed
    env = os.environ.get("NERO_SEED")
    return int(env) if env else default


def _write_manifest(out_path, subcommand: str, settings: dict) -> None:
    out_path = Path(out_path)
    if out_path.suffix:
        manifest_path = out_path.with_suffix(out_path.suffix + ".manifest.json")
        out_path.parent.mkdir(parents=True, exist_ok=True)
    else:
        out_path.mkdir(parents=True, exist_ok=True)
        manifest_path = out_path / "run_manifest.json"
    manifest = {
        "subcommand": subcommand,
        "settings": settings,
        "timestamp": time.strftime("%Y-%m-%dT%H:%M:%S%z"),
        "git": _git_describe(),
    }
    with open(manifest_path, "w") as f:
        json.dump(manifest, f, indent=2, default=str)


def _fail(message: str, code: int) -> None:
    click.echo(f"error: {message}", err=True)
    sys.exit(code)


def _guard(fn):
    """Map validation errors to exit 1, everything else to exit 2."""

    def wrapper(*args, **kwargs):
        try:
            return fn(*args, **kwargs)
        except (DatasetError, ConfigError, FileNotFoundError, ValueError) as e:
            _fail(str(e), 1)
        except click.exceptions.Exit:
            raise
        except Exception as e:  # noqa: BLE001 - last-resort runtime failure
            _fail(f"{type(e).__name__}: {e}", 2)

    wrapper.__name__ = fn.__name__
    return wrapper


@click.group()
def main():
    """Rule-grounded weakly supervised relation extraction."""


@main.command()
@click.option("--corpus", required=True, type=click.Path(exists=True))
@click.option("--schema", "schema_path", required=True, type=click.Path(exists=True))
@click.option("--min-freq", default=3, show_default=True)
@click.option("--max-len", default=12, show_default=True,
              help="Max context length including the two entity masks.")
@click.option("--examples", default=3, show_default=True)
@click.option("--out", required=True, type=click.Path())
@_guard
def mine(corpus, schema_path, min_freq, max_len, examples, out):
    """Mine frequent candidate rule bodies from a corpus."""
    schema = RelationSchema.load(schema_path)
    instances = load_dataset(corpus, schema)
    _write_manifest(out, "mine", {
        "corpus": corpus, "schema": schema_path, "min_freq": min_freq,
        "max_len": max_len, "examples": examples, "out": out,
    })
    candidates = extract_candidates(instances, min_freq, max_len, examples)
    save_candidates(candidates, out)
    click.echo(f"mined {len(candidates)} candidates -> {out}")


@main.command()
@click.option("--corpus", required=True, type=click.Path(exists=True))
@click.option("--schema", "schema_path", required=True, type=click.Path(exists=True))
@click.option("--rules", "rules_path", required=True, type=click.Path(exists=True))
@click.option("--matched-out", required=True, type=click.Path())
@click.option("--unmatched-out", required=True, type=click.Path())
@_guard
def match(corpus, schema_path, rules_path, matched_out, unmatched_out):
    """Partition a corpus into hard-matched and unmatched sentences."""
    schema = RelationSchema.load(schema_path)
    instances = load_dataset(corpus, schema)
    rules = load_rules(rules_path, schema)
    _write_manifest(matched_out, "match", {
        "corpus": corpus, "schema": schema_path, "rules": rules_path,
        "matched_out": matched_out, "unmatched_out": unmatched_out,
    })
    part = run_partition(instances, rules)
    save_partition(part, matched_out, unmatched_out)
    click.echo(f"matched {len(part.matched)} / unmatched {len(part.unmatched)}")


@main.command()
@click.option("--corpus", required=True, type=click.Path(exists=True))
@click.option("--schema", "schema_path", required=True, type=click.Path(exists=True))
@click.option("--matched", required=True, type=click.Path(exists=True))
@click.option("--unmatched", required=True, type=click.Path(exists=True))
@click.option("--rules", "rules_path", required=True, type=click.Path(exists=True))
@click.option("--dev", type=click.Path(exists=True))
@click.option("--emb", required=True, type=click.Path(exists=True))
@click.option("--emb-dim", default=50, show_default=True)
@click.option("--config", "config_path", type=click.Path(exists=True))
@click.option("--out", required=True, type=click.Path())
@click.option("--seed", type=int, default=None, help="Overrides NERO_SEED and config.")
@click.option("--max-epochs", type=int, default=None)
@click.option("--patience", type=int, default=None)
@click.option("--d-h", type=int, default=None)
@click.option("--d-a", type=int, default=None)
@click.option("--alpha", type=float, default=None)
@click.option("--beta", type=float, default=None)
@click.option("--gamma", type=float, default=None)
@_guard
def train(corpus, schema_path, matched, unmatched, rules_path, dev, emb, emb_dim,
          config_path, out, seed, max_epochs, patience, d_h, d_a, alpha, beta, gamma):
    """Jointly train the classifier and the soft rule matcher."""
    schema = RelationSchema.load(schema_path)
    instances = load_dataset(corpus, schema)
    rules = load_rules(rules_path, schema)
    part = load_partition(matched, unmatched)
    dev_set = load_dataset(dev, schema) if dev else None
    config = TrainingConfig.load(
        config_path,
        seed=_resolve_seed(seed) if (seed is not None or os.environ.get("NERO_SEED")) else None,
        max_epochs=max_epochs, patience=patience, d_h=d_h, d_a=d_a,
        alpha=alpha, beta=beta, gamma=gamma,
    )
    _write_manifest(out, "train", {
        "corpus": corpus, "schema": schema_path, "matched": matched,
        "unmatched": unmatched, "rules": rules_path, "dev": dev,
        "emb": emb, "emb_dim": emb_dim, "config": vars(config), "out": out,
    })
    pretrained = load_embeddings(emb, emb_dim)
    from .data import mask_entities
    from .stemmer import stem_sequence

    streams = [stem_sequence(mask_entities(i)) for i in instances]
    if dev_set:
        streams += [stem_sequence(mask_entities(i)) for i in dev_set]
    streams += [r.context for r in rules]
    vocab = build_vocabulary(streams, pretrained, emb_dim, seed=config.seed)
    params = init_params(vocab, schema, config.d_h, config.d_a, seed=config.seed)

    out_dir = Path(out)
    out_dir.mkdir(parents=True, exist_ok=True)
    with open(out_dir / "train_log.jsonl", "w") as log_file:
        params, history, threshold = run_train(
            params, instances, part, rules, vocab, schema, config,
            dev=dev_set, log_file=log_file,
        )
    checkpoint_save(out_dir, params, vocab, schema,
                    extra={"threshold": threshold, "seed": config.seed})
    last = history[-1]
    click.echo(
        f"trained {len(history)} epochs; final loss {last.loss:.4f}"
        + (f"; dev F1 {last.dev_f1:.3f}" if last.dev_f1 is not None else "")
    )


@main.command("eval")
@click.option("--gold", required=True, type=click.Path(exists=True))
@click.option("--schema", "schema_path", required=True, type=click.Path(exists=True))
@click.option("--checkpoint", type=click.Path(exists=True))
@click.option("--predictions", "predictions_path", type=click.Path(exists=True),
              help="Score an existing predictions file instead of a checkpoint.")
@click.option("--mode", type=click.Choice(["rc", "srm"]), default="rc", show_default=True)
@click.option("--rules", "rules_path", type=click.Path(exists=True))
@click.option("--delta", type=float, default=None,
              help="NONE threshold; defaults to the tuned checkpoint value.")
@click.option("--report-out", required=True, type=click.Path())
@click.option("--predictions-out", type=click.Path())
@_guard
def eval_cmd(gold, schema_path, checkpoint, predictions_path, mode, rules_path,
             delta, report_out, predictions_out):
    """Score predictions (from a checkpoint or a predictions file) against gold."""
    schema = RelationSchema.load(schema_path)
    gold_set = load_dataset(gold, schema)
    _write_manifest(report_out, "eval", {
        "gold": gold, "schema": schema_path, "checkpoint": checkpoint,
        "predictions": predictions_path, "mode": mode, "delta": delta,
    })
    if predictions_path:
        preds = _load_predictions(predictions_path)
    elif checkpoint:
        preds = _predict(checkpoint, gold_set, mode, rules_path, schema, delta)
    else:
        raise DatasetError("eval needs --checkpoint or --predictions")
    report = inference.score(preds, gold_set, schema)
    inference.save_report(report, report_out)
    if predictions_out:
        inference.save_predictions(preds, predictions_out)
    click.echo(f"P={report.precision:.3f} R={report.recall:.3f} F1={report.f1:.3f}")


def _load_predictions(path):
    preds = []
    with open(path) as f:
        for line in f:
            if line.strip():
                rec = json.loads(line)
                preds.append(inference.Prediction(
                    rec["instance_id"], rec["relation"],
                    rec.get("confidence", 0.0), rec.get("mode", "rc"),
                    rec.get("best_rule"),
                ))
    return preds


def _predict(checkpoint, instances, mode, rules_path, schema, delta):
    params, vocab, ck_schema, manifest = checkpoint_load(checkpoint)
    if delta is None:
        delta = manifest.get("threshold", 0.0) if mode == "rc" else 0.5
    if mode == "srm":
        if not rules_path:
            raise DatasetError("srm mode needs --rules")
        rules = load_rules(rules_path, ck_schema)
        return inference.predict_srm_batch(
            params, instances, rules, vocab, ck_schema, delta=delta
        )
    probs = inference.rc_probabilities(params, instances, vocab)
    return inference.predictions_from_probs(
        probs, [i.id for i in instances], ck_schema, delta
    )


@main.command()
@click.option("--input", "input_path", required=True, type=click.Path(exists=True))
@click.option("--schema", "schema_path", required=True, type=click.Path(exists=True))
@click.option("--checkpoint", required=True, type=click.Path(exists=True))
@click.option("--mode", type=click.Choice(["rc", "srm"]), default="rc", show_default=True)
@click.option("--rules", "rules_path", type=click.Path(exists=True))
@click.option("--delta", type=float, default=None)
@click.option("--few-shot", is_flag=True,
              help="Encode only words between the entities (unseen-relation mode).")
@click.option("--out", required=True, type=click.Path())
@_guard
def predict(input_path, schema_path, checkpoint, mode, rules_path, delta, few_shot, out):
    """Predict relations for a dataset and write predictions JSONL."""
    schema = RelationSchema.load(schema_path)
    instances = load_dataset(input_path, schema)
    _write_manifest(out, "predict", {
        "input": input_path, "checkpoint": checkpoint, "mode": mode,
        "delta": delta, "few_shot": few_shot,
    })
    if mode == "srm" and few_shot:
        params, vocab, ck_schema, manifest = checkpoint_load(checkpoint)
        rules = load_rules(rules_path, ck_schema) if rules_path else []
        preds = inference.predict_srm_batch(
            params, instances, rules, vocab, ck_schema,
            delta=0.5 if delta is None else delta, few_shot=True,
        )
    else:
        preds = _predict(checkpoint, instances, mode, rules_path, schema, delta)
    inference.save_predictions(preds, out)
    click.echo(f"wrote {len(preds)} predictions -> {out}")


@main.command()
@click.option("--input", "input_path", required=True, type=click.Path(exists=True))
@click.option("--schema", "schema_path", required=True, type=click.Path(exists=True))
@click.option("--instance-id", required=True)
@click.option("--rules", "rules_path", required=True, type=click.Path(exists=True))
@click.option("--rule-id", required=True)
@click.option("--checkpoint", required=True, type=click.Path(exists=True))
@click.option("--out", required=True, type=click.Path())
@click.option("--plot", type=click.Path(), help="Also write a heatmap PNG.")
@_guard
def explain(input_path, schema_path, instance_id, rules_path, rule_id,
            checkpoint, out, plot):
    """Dump the word-pair similarity view of one sentence-rule match."""
    schema = RelationSchema.load(schema_path)
    instances = load_dataset(input_path, schema)
    params, vocab, ck_schema, _ = checkpoint_load(checkpoint)
    rules = load_rules(rules_path, ck_schema)
    inst = next((i for i in instances if i.id == instance_id), None)
    if inst is None:
        raise DatasetError(f"no instance {instance_id!r} in {input_path}")
    rule = next((r for r in rules if r.id == rule_id), None)
    if rule is None:
        raise DatasetError(f"no rule {rule_id!r} in {rules_path}")
    _write_manifest(out, "explain", {
        "input": input_path, "instance_id": instance_id, "rule_id": rule_id,
        "checkpoint": checkpoint,
    })
    exp = inference.explain(params, inst, rule, vocab)
    with open(out, "w") as f:
        f.write(exp.to_json())
    if plot:
        _plot_explanation(exp, plot)
    click.echo(f"score {exp.score:.3f} -> {out}")


def _plot_explanation(exp, path):
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    fig, ax = plt.subplots(figsize=(6, 4))
    im = ax.imshow(exp.similarity_matrix, vmin=-1, vmax=1, cmap="RdBu_r")
    ax.set_xticks(range(len(exp.rule_tokens)), exp.rule_tokens, rotation=45, ha="right")
    ax.set_yticks(range(len(exp.sentence_tokens)), exp.sentence_tokens)
    fig.colorbar(im, ax=ax, label="cosine")
    ax.set_title(f"soft match score {exp.score:.3f}")
    fig.tight_layout()
    fig.savefig(path, dpi=120)
    plt.close(fig)


@main.command()
@click.option("--candidates", "candidates_path", required=True, type=click.Path(exists=True))
@click.option("--corpus", required=True, type=click.Path(exists=True))
@click.option("--schema", "schema_path", required=True, type=click.Path(exists=True))
@click.option("--log", "log_path", required=True, type=click.Path())
@click.option("--snapshot", "snapshot_path", type=click.Path())
@click.option("--port", default=8700, show_default=True)
@click.option("--host", default="127.0.0.1", show_default=True)
@click.option("--token", default=None, help="Static auth token (X-Annotation-Token).")
@_guard
def serve(candidates_path, corpus, schema_path, log_path, snapshot_path,
          port, host, token):
    """Run the rule-annotation HTTP service."""
    import uvicorn

    from .service import AnnotationStore, create_app

    schema = RelationSchema.load(schema_path)
    instances = load_dataset(corpus, schema)
    candidates = load_candidates(candidates_path)
    store = AnnotationStore(candidates, instances, schema, log_path, snapshot_path)
    app = create_app(store, token=token)
    click.echo(f"serving {len(candidates)} candidates on {host}:{port}")
    uvicorn.run(app, host=host, port=port)


if __name__ == "__main__":
    main()
