"""Prediction, NONE thresholding, scoring, and interpretability dumps.

Two prediction modes: the classifier (argmax with entropy-based
abstention) and the soft matcher (nearest type-compatible rule with a
score threshold, usable for relations unseen in training).
"""

from __future__ import annotations

import json
from dataclasses import dataclass, asdict

import numpy as np

from .data import Instance, RelationSchema, Vocabulary
from .models import (
    rc_forward_batch,
    srm_embed_values,
    srm_score_matrix,
)
from .rules import LabelingRule
from .training import encode_instance, encode_context, encode_rule

EVAL_BATCH = 64


@dataclass(frozen=True)
class Prediction:
    instance_id: str
    relation: str
    confidence: float  # rc: max prob; srm: (score + 1) / 2
    mode: str  # "rc" | "srm"
    best_rule: str | None = None


@dataclass(frozen=True)
class EvalReport:
    precision: float
    recall: float
    f1: float
    n_gold_positive: int
    n_pred_positive: int
    n_correct: int
    per_relation: dict
    confusion: dict  # (gold -> predicted -> count), non-NONE gold only


def rc_probabilities(params, instances: list[Instance], vocab: Vocabulary) -> np.ndarray:
    """Eval-mode class probabilities, batched."""
    seqs = [encode_instance(inst, vocab) for inst in instances]
    chunks = []
    for start in range(0, len(seqs), EVAL_BATCH):
        _, _, probs = rc_forward_batch(params, seqs[start : start + EVAL_BATCH], train=False)
        chunks.append(probs.values)
    return np.concatenate(chunks, axis=0)


def normalized_entropy(probs: np.ndarray) -> np.ndarray:
    """Shannon entropy of each row divided by ln(#classes)."""
    p = np.clip(probs, 1e-300, 1.0)
    h = -(p * np.log(p)).sum(axis=-1)
    return h / np.log(probs.shape[-1])


def predictions_from_probs(
    probs: np.ndarray, ids: list[str], schema: RelationSchema, delta: float
) -> list[Prediction]:
    none = schema.relations[schema.none_index]
    ent = normalized_entropy(probs)
    out = []
    for i, iid in enumerate(ids):
        best = int(probs[i].argmax())
        relation = none if ent[i] > 1.0 - delta else schema.relations[best]
        out.append(Prediction(iid, relation, float(probs[i].max()), "rc"))
    return out


def predict_rc(params, inst: Instance, vocab, schema, delta: float = 0.0) -> Prediction:
    if not 0.0 <= delta <= 1.0:
        raise ValueError("delta must be in [0, 1]")
    probs = rc_probabilities(params, [inst], vocab)
    return predictions_from_probs(probs, [inst.id], schema, delta)[0]


def _strip_masks(tokens) -> tuple:
    return tuple(t for t in tokens if not t.startswith(("SUBJ-", "OBJ-")))


def predict_srm(
    params,
    inst: Instance,
    rules: list[LabelingRule],
    vocab: Vocabulary,
    schema: RelationSchema,
    delta: float = 0.5,
    few_shot: bool = False,
) -> Prediction:
    """Head of the most similar type-compatible rule, or NONE.

    In few-shot mode only the words strictly between the entities are
    encoded, on both the sentence and rule sides (entity-mask embeddings
    are untrained for unseen types).
    """
    return predict_srm_batch(params, [inst], rules, vocab, schema, delta, few_shot)[0]


def predict_srm_batch(
    params, instances, rules, vocab, schema, delta=0.5, few_shot=False
) -> list[Prediction]:
    none = schema.relations[schema.none_index]
    rules = sorted(rules, key=lambda r: r.id)

    rule_seqs = []
    usable = []
    for r in rules:
        ctx = _strip_masks(r.context) if few_shot else r.context
        if ctx:
            usable.append(r)
            rule_seqs.append(vocab.encode(ctx))
    out = []
    z_rules = srm_embed_values(params, rule_seqs) if usable else None
    for inst in instances:
        cand = [
            k for k, r in enumerate(usable)
            if r.subj_type == inst.subj_type and r.obj_type == inst.obj_type
        ]
        ctx = encode_context(inst, vocab)
        if few_shot:
            from .data import context_span
            from .stemmer import stem_sequence

            interior = _strip_masks(stem_sequence(context_span(inst)))
            ctx = vocab.encode(interior) if interior else None
        if not cand or ctx is None or len(ctx) == 0:
            out.append(Prediction(inst.id, none, 0.0, "srm"))
            continue
        z_s = srm_embed_values(params, [ctx])
        scores = srm_score_matrix(params, z_s, z_rules[cand])[0]
        best = int(scores.argmax())
        score = float(scores[best])
        rule = usable[cand[best]]
        if score < delta:
            out.append(Prediction(inst.id, none, (score + 1) / 2, "srm", rule.id))
        else:
            out.append(Prediction(inst.id, rule.head, (score + 1) / 2, "srm", rule.id))
    return out


def f1_from_pr(precision: float, recall: float) -> float:
    if precision + recall <= 0:
        return 0.0
    return 2 * precision * recall / (precision + recall)


def score(predictions: list[Prediction], gold: list[Instance],
          schema: RelationSchema) -> EvalReport:
    """Micro P/R/F1 with NONE excluded from credit."""
    if len(predictions) != len(gold):
        raise ValueError("predictions and gold differ in length")
    none = schema.relations[schema.none_index]
    by_id = {p.instance_id: p for p in predictions}
    if set(by_id) != {g.id for g in gold}:
        raise ValueError("prediction ids do not match gold ids")
    n_correct = n_pred = n_gold = 0
    per_relation: dict[str, dict[str, int]] = {}
    confusion: dict[str, dict[str, int]] = {}
    for g in gold:
        pred = by_id[g.id].relation
        g_rel = g.gold_relation or none
        stats = per_relation.setdefault(g_rel, {"gold": 0, "predicted": 0, "correct": 0})
        if g_rel != none:
            n_gold += 1
            stats["gold"] += 1
            confusion.setdefault(g_rel, {})
            confusion[g_rel][pred] = confusion[g_rel].get(pred, 0) + 1
        if pred != none:
            n_pred += 1
            per_relation.setdefault(pred, {"gold": 0, "predicted": 0, "correct": 0})
            per_relation[pred]["predicted"] += 1
            if pred == g_rel:
                n_correct += 1
                stats["correct"] += 1
    precision = n_correct / n_pred if n_pred else 0.0
    recall = n_correct / n_gold if n_gold else 0.0
    f1 = f1_from_pr(precision, recall)
    return EvalReport(precision, recall, f1, n_gold, n_pred, n_correct,
                      per_relation, confusion)


def tune_threshold(
    params, dev: list[Instance], vocab, schema,
    mode: str = "rc", rules: list[LabelingRule] | None = None,
) -> float:
    """Grid search over 101 thresholds maximizing dev F1 (ties: smaller)."""
    if not dev:
        raise ValueError("empty dev set")
    if mode == "rc":
        delta, _ = evaluate_rc(params, dev, vocab, schema, tune=True)
        return delta
    if mode != "srm":
        raise ValueError(f"unknown mode {mode!r}")
    best = (-1.0, 0.0)
    for delta in np.linspace(0.0, 1.0, 101):
        preds = predict_srm_batch(params, dev, rules or [], vocab, schema, delta=delta)
        rep = score(preds, dev, schema)
        if rep.f1 > best[0] + 1e-12:
            best = (rep.f1, float(delta))
    return best[1]


def evaluate_rc(params, dataset: list[Instance], vocab, schema,
                tune: bool = True, delta: float = 0.0):
    """Evaluate classifier-mode predictions; optionally tune the threshold."""
    probs = rc_probabilities(params, dataset, vocab)
    ids = [inst.id for inst in dataset]
    if not tune:
        preds = predictions_from_probs(probs, ids, schema, delta)
        return delta, score(preds, dataset, schema)
    best = (-1.0, 0.0, None)
    for d in np.linspace(0.0, 1.0, 101):
        preds = predictions_from_probs(probs, ids, schema, float(d))
        rep = score(preds, dataset, schema)
        if rep.f1 > best[0] + 1e-12:
            best = (rep.f1, float(d), rep)
    return best[1], best[2]


@dataclass(frozen=True)
class Explanation:
    sentence_tokens: list
    rule_tokens: list
    sentence_attention: list
    rule_attention: list
    similarity_matrix: list  # cos(D x_i, D x_j) per word pair
    score: float

    def to_json(self) -> str:
        return json.dumps(asdict(self))


def explain(params, inst: Instance, rule: LabelingRule, vocab: Vocabulary) -> Explanation:
    """Word-pair view of one soft match: attentions plus a cosine matrix."""
    from .data import context_span
    from .stemmer import stem_sequence

    sent_tokens = list(stem_sequence(context_span(inst)))
    rule_tokens = list(rule.context)
    s_ids = vocab.encode(sent_tokens)
    p_ids = vocab.encode(rule_tokens)

    emb = params["embeddings"].values
    B = params["srm_B"].values
    u = params["srm_u"].values
    D = params["srm_D"].values[0]

    def attn(x):
        s = np.tanh(x @ B) @ u
        s = s - s.max()
        a = np.exp(s)[:, 0]
        return a / a.sum()

    xs, xp = emb[s_ids], emb[p_ids]
    a_s, a_p = attn(xs), attn(xp)
    ds = xs * D
    dp = xp * D
    ds = ds / np.maximum(np.linalg.norm(ds, axis=1, keepdims=True), 1e-12)
    dp = dp / np.maximum(np.linalg.norm(dp, axis=1, keepdims=True), 1e-12)
    matrix = ds @ dp.T
    z_s = (a_s[:, None] * xs).sum(axis=0, keepdims=True)
    z_p = (a_p[:, None] * xp).sum(axis=0, keepdims=True)
    sc = float(srm_score_matrix(params, z_s, z_p)[0, 0])
    return Explanation(
        sentence_tokens=sent_tokens,
        rule_tokens=rule_tokens,
        sentence_attention=a_s.tolist(),
        rule_attention=a_p.tolist(),
        similarity_matrix=matrix.tolist(),
        score=sc,
    )


def save_predictions(predictions: list[Prediction], path) -> None:
    with open(path, "w") as f:
        for p in predictions:
            f.write(json.dumps(asdict(p)) + "\n")


def save_report(report: EvalReport, path) -> None:
    with open(path, "w") as f:
        json.dump(asdict(report), f, indent=2)
