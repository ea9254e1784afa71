"""Joint training: the four losses, pseudo-labeling, and the loop.

Per step: a batch of hard-matched sentences trains the classifier
directly; a batch of unmatched sentences gets pseudo-labels from the
current soft matcher (argmax rule, batch-softmax weights treated as
constants); the full rule set feeds the rule classification and
contrastive objectives. One backward pass over the weighted sum, one
AdaGrad step.
"""

from __future__ import annotations

import json
import logging
from dataclasses import dataclass, field, asdict

import numpy as np

from . import autodiff as ad
from .autodiff import Tensor
from .data import Instance, RelationSchema, Vocabulary, mask_entities, context_span
from .matching import MatchPartition
from .models import (
    rc_forward_batch,
    srm_embed_batch,
    srm_embed_values,
    srm_score_matrix,
    srm_score_from_embeds,
)
from .rules import LabelingRule
from .stemmer import stem_sequence

log = logging.getLogger(__name__)


class ConfigError(ValueError):
    pass


@dataclass
class TrainingConfig:
    alpha: float = 1.0  # rule classification loss weight
    beta: float = 0.05  # contrastive loss weight
    gamma: float = 0.5  # unmatched (pseudo-label) loss weight
    tau: float = 1.0  # contrastive margin
    sigma: float = 10.0  # instance-weighting temperature
    batch_matched: int = 50
    batch_unmatched: int = 100
    lr0: float = 0.5
    decay: float = 0.95
    dropout: float = 0.5
    d_h: int = 100
    d_a: int = 200
    max_epochs: int = 50
    patience: int = 10
    seed: int = 0
    none_rules_in_clus: bool = True

    def __post_init__(self):
        for name in ("tau", "sigma", "lr0", "decay", "batch_matched",
                     "batch_unmatched", "d_h", "d_a", "max_epochs", "patience"):
            if getattr(self, name) <= 0:
                raise ConfigError(f"config field {name} must be positive")
        for name in ("alpha", "beta", "gamma", "dropout"):
            if getattr(self, name) < 0:
                raise ConfigError(f"config field {name} must be nonnegative")

    @classmethod
    def load(cls, path=None, **overrides) -> "TrainingConfig":
        data = {}
        if path is not None:
            with open(path) as f:
                data = json.load(f)
        data.update({k: v for k, v in overrides.items() if v is not None})
        known = {f for f in cls.__dataclass_fields__}
        unknown = set(data) - known
        if unknown:
            raise ConfigError(f"unknown config fields: {sorted(unknown)}")
        return cls(**data)

    def dump(self, path) -> None:
        with open(path, "w") as f:
            json.dump(asdict(self), f, indent=2)


@dataclass(frozen=True)
class PseudoLabel:
    instance_id: str
    rule_id: str
    relation: str
    score: float
    weight: float


def encode_instance(inst: Instance, vocab: Vocabulary) -> np.ndarray:
    """Masked, stemmed, id-encoded full sentence (classifier input)."""
    return vocab.encode(stem_sequence(mask_entities(inst)))


def encode_context(inst: Instance, vocab: Vocabulary) -> np.ndarray:
    """Masked, stemmed, id-encoded inter-entity span (matcher input)."""
    return vocab.encode(stem_sequence(context_span(inst)))


def encode_rule(rule: LabelingRule, vocab: Vocabulary) -> np.ndarray:
    return vocab.encode(rule.context)


def loss_matched(params, batch_ids, labels, train=True, dropout=0.5, rng=None):
    """Mean cross-entropy of the classifier on labeled sentences."""
    _, _, probs = rc_forward_batch(params, batch_ids, train, dropout, rng)
    return ad.cross_entropy_from_probs(probs, labels)


def loss_rules(params, rule_ids_seqs, head_indices, train=True, dropout=0.5, rng=None):
    """Rules fed to the classifier as labeled sentences."""
    return loss_matched(params, rule_ids_seqs, head_indices, train, dropout, rng)


def loss_clus(params, rule_ids_seqs, rule_heads, tau: float = 1.0):
    """Contrastive rule-clustering loss for the soft matcher.

    For each rule: penalty for its most dissimilar same-head rule,
    max(tau - score, 0)^2, minus the reward term 1 - max(score, 0)^2 at
    its most similar different-head rule. Halves with an empty candidate
    set are skipped.
    """
    n = len(rule_ids_seqs)
    _, z = srm_embed_batch(params, rule_ids_seqs)  # (n, d_w)
    scores = srm_score_matrix(params, z.values, z.values)
    heads = np.asarray(rule_heads)

    def pair_score(i, j):
        return srm_score_from_embeds(params, z[i], z[j])

    terms = []
    for i in range(n):
        same = np.flatnonzero((heads == heads[i]) & (np.arange(n) != i))
        diff = np.flatnonzero(heads != heads[i])
        if same.size:
            worst = same[np.argmin(scores[i, same])]
            terms.append(ad.square(ad.relu(tau - pair_score(i, worst))))
        if diff.size:
            closest = diff[np.argmax(scores[i, diff])]
            terms.append(-(1.0 - ad.square(ad.relu(pair_score(i, closest)))))
    if not terms:
        return Tensor(0.0)
    total = terms[0]
    for t in terms[1:]:
        total = total + t
    return total * (1.0 / n)


def pseudo_label_batch(
    params,
    instance_ids: list[str],
    context_ids_seqs: list[np.ndarray],
    rules: list[LabelingRule],
    rule_ids_seqs: list[np.ndarray],
    sigma: float = 10.0,
) -> list[PseudoLabel]:
    """Best rule per sentence plus batch-softmax instance weights.

    Scores come from the current matcher parameters but carry no
    gradient; ties go to the lowest rule id (rules must be id-sorted).
    """
    if not instance_ids or not rules:
        raise ValueError("pseudo_label_batch needs a nonempty batch and rule set")
    z_s = srm_embed_values(params, context_ids_seqs)
    z_p = srm_embed_values(params, rule_ids_seqs)
    scores = srm_score_matrix(params, z_s, z_p)  # (B, P)
    best = scores.argmax(axis=1)  # first max wins = lowest rule id
    best_scores = scores[np.arange(len(instance_ids)), best]
    logits = sigma * best_scores
    logits = logits - logits.max()
    w = np.exp(logits)
    w /= w.sum()
    return [
        PseudoLabel(
            instance_id=iid,
            rule_id=rules[b].id,
            relation=rules[b].head,
            score=float(best_scores[k]),
            weight=float(w[k]),
        )
        for k, (iid, b) in enumerate(zip(instance_ids, best))
    ]


def loss_unmatched(params, batch_ids, pseudo: list[PseudoLabel],
                   schema: RelationSchema, train=True, dropout=0.5, rng=None):
    """Weighted cross-entropy against pseudo-labels, averaged over the batch."""
    labels = np.array([schema.index(pl.relation) for pl in pseudo])
    weights = np.array([pl.weight for pl in pseudo])
    _, _, probs = rc_forward_batch(params, batch_ids, train, dropout, rng)
    return ad.cross_entropy_from_probs(probs, labels, weights)


@dataclass
class EpochStats:
    epoch: int
    lr: float
    loss: float
    loss_matched: float
    loss_rules: float
    loss_clus: float
    loss_unmatched: float
    dev_f1: float | None = None
    dev_precision: float | None = None
    dev_recall: float | None = None
    threshold: float | None = None


class Trainer:
    """Owns the parameters, the optimizer, and the batching RNG."""

    def __init__(
        self,
        params: dict[str, Tensor],
        corpus: list[Instance],
        part: MatchPartition,
        rules: list[LabelingRule],
        vocab: Vocabulary,
        schema: RelationSchema,
        config: TrainingConfig,
    ):
        if not part.matched:
            raise ConfigError("empty hard-matched set; nothing to train on")
        self.params = params
        self.vocab = vocab
        self.schema = schema
        self.config = config
        self.rules = sorted(rules, key=lambda r: r.id)
        self.rng = np.random.default_rng(config.seed)
        self.optimizer = ad.AdaGrad(params, lr0=config.lr0, decay=config.decay)

        by_id = {inst.id: inst for inst in corpus}
        self.matched_sent = [encode_instance(by_id[iid], vocab) for iid, _, _ in part.matched]
        self.matched_label = np.array(
            [schema.index(head) for _, _, head in part.matched]
        )
        self.unmatched_ids = list(part.unmatched)
        self.unmatched_sent = [encode_instance(by_id[iid], vocab) for iid in part.unmatched]
        self.unmatched_ctx = [encode_context(by_id[iid], vocab) for iid in part.unmatched]
        self.rule_seqs = [encode_rule(r, vocab) for r in self.rules]
        self.rule_heads = [r.head for r in self.rules]
        self.rule_head_idx = np.array([schema.index(h) for h in self.rule_heads])
        if config.none_rules_in_clus:
            self.clus_idx = list(range(len(self.rules)))
        else:
            none = schema.relations[schema.none_index]
            self.clus_idx = [i for i, h in enumerate(self.rule_heads) if h != none]
        self._unmatched_order: list[int] = []

    def _next_unmatched(self, k: int) -> list[int]:
        out = []
        while len(out) < k and self.unmatched_sent:
            if not self._unmatched_order:
                self._unmatched_order = list(
                    self.rng.permutation(len(self.unmatched_sent))
                )
            out.append(self._unmatched_order.pop())
        return out

    def step(self, matched_idx: list[int]) -> dict[str, float]:
        cfg = self.config
        parts = {}
        l_m = loss_matched(
            self.params,
            [self.matched_sent[i] for i in matched_idx],
            self.matched_label[matched_idx],
            dropout=cfg.dropout,
            rng=self.rng,
        )
        total = l_m
        parts["matched"] = l_m.item()

        parts["rules"] = 0.0
        if cfg.alpha > 0:
            l_r = loss_rules(
                self.params, self.rule_seqs, self.rule_head_idx,
                dropout=cfg.dropout, rng=self.rng,
            )
            total = total + cfg.alpha * l_r
            parts["rules"] = l_r.item()

        parts["clus"] = 0.0
        if cfg.beta > 0 and len(self.clus_idx) >= 2:
            l_c = loss_clus(
                self.params,
                [self.rule_seqs[i] for i in self.clus_idx],
                [self.rule_heads[i] for i in self.clus_idx],
                tau=cfg.tau,
            )
            total = total + cfg.beta * l_c
            parts["clus"] = l_c.item()

        parts["unmatched"] = 0.0
        if cfg.gamma > 0 and self.unmatched_sent and self.rules:
            idx = self._next_unmatched(cfg.batch_unmatched)
            pseudo = pseudo_label_batch(
                self.params,
                [self.unmatched_ids[i] for i in idx],
                [self.unmatched_ctx[i] for i in idx],
                self.rules,
                self.rule_seqs,
                sigma=cfg.sigma,
            )
            l_u = loss_unmatched(
                self.params,
                [self.unmatched_sent[i] for i in idx],
                pseudo,
                self.schema,
                dropout=cfg.dropout,
                rng=self.rng,
            )
            total = total + cfg.gamma * l_u
            parts["unmatched"] = l_u.item()

        self.optimizer.zero_grad()
        total.backward()
        self.optimizer.step()
        parts["total"] = total.item()
        return parts

    def run_epoch(self, epoch: int) -> EpochStats:
        self.optimizer.epoch = epoch
        order = self.rng.permutation(len(self.matched_sent))
        sums = {"matched": 0.0, "rules": 0.0, "clus": 0.0, "unmatched": 0.0, "total": 0.0}
        n_steps = 0
        for start in range(0, len(order), self.config.batch_matched):
            batch = list(order[start : start + self.config.batch_matched])
            parts = self.step(batch)
            for k, v in parts.items():
                sums[k] += v
            n_steps += 1
        return EpochStats(
            epoch=epoch,
            lr=self.optimizer.lr,
            loss=sums["total"] / n_steps,
            loss_matched=sums["matched"] / n_steps,
            loss_rules=sums["rules"] / n_steps,
            loss_clus=sums["clus"] / n_steps,
            loss_unmatched=sums["unmatched"] / n_steps,
        )


def train(
    params: dict[str, Tensor],
    corpus: list[Instance],
    part: MatchPartition,
    rules: list[LabelingRule],
    vocab: Vocabulary,
    schema: RelationSchema,
    config: TrainingConfig,
    dev: list[Instance] | None = None,
    log_file=None,
) -> tuple[dict[str, Tensor], list[EpochStats], float]:
    """Run the joint loop; returns (best params, history, tuned threshold).

    With a dev set, stopping is dev-F1 patience and the NONE threshold is
    tuned each epoch; without one, stopping is joint-loss patience and
    the threshold stays 0.
    """
    from .inference import evaluate_rc  # local import: inference is downstream

    trainer = Trainer(params, corpus, part, rules, vocab, schema, config)
    history: list[EpochStats] = []
    best_metric = -np.inf
    best_values = {k: p.values.copy() for k, p in params.items()}
    best_threshold = 0.0
    stale = 0
    if dev is None:
        log.warning("no dev set: using fixed threshold 0 and loss-patience stopping")

    for epoch in range(config.max_epochs):
        stats = trainer.run_epoch(epoch)
        if dev is not None:
            delta, report = evaluate_rc(params, dev, vocab, schema, tune=True)
            stats.dev_f1 = report.f1
            stats.dev_precision = report.precision
            stats.dev_recall = report.recall
            stats.threshold = delta
            metric = report.f1
        else:
            metric = -stats.loss
        history.append(stats)
        if log_file is not None:
            log_file.write(json.dumps(asdict(stats)) + "\n")
            log_file.flush()
        if metric > best_metric + 1e-9:
            best_metric = metric
            best_values = {k: p.values.copy() for k, p in params.items()}
            best_threshold = stats.threshold or 0.0
            stale = 0
        else:
            stale += 1
            if stale >= config.patience:
                break

    for k, p in params.items():
        p.values = best_values[k]
    return params, history, best_threshold
