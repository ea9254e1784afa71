"""Exact rule application: split a corpus into hard-matched and unmatched.

Matching compares the stemmed inter-entity context and both entity types.
When several rules match one sentence, the label comes from the rule with
the most corpus matches (ties broken by lowest rule id); disagreeing
heads are logged.
"""

from __future__ import annotations

import json
import logging
from collections import defaultdict
from dataclasses import dataclass

from .data import Instance
from .rules import LabelingRule
from .stemmer import stem_sequence
from .data import context_span

log = logging.getLogger(__name__)


@dataclass(frozen=True)
class MatchPartition:
    matched: tuple[tuple[str, str, str], ...]  # (instance id, rule id, head)
    unmatched: tuple[str, ...]  # instance ids


def stemmed_context(inst: Instance) -> tuple[str, ...]:
    return stem_sequence(context_span(inst))


def hard_match(inst: Instance, rule: LabelingRule) -> bool:
    return (
        inst.subj_type == rule.subj_type
        and inst.obj_type == rule.obj_type
        and stemmed_context(inst) == rule.context
    )


def partition(corpus: list[Instance], rules: list[LabelingRule]) -> MatchPartition:
    """Index-based partition; equivalent to the brute-force double loop."""
    index: dict[tuple, list[LabelingRule]] = defaultdict(list)
    for r in rules:
        index[(r.subj_type, r.obj_type, len(r.context))].append(r)

    hits: dict[str, list[LabelingRule]] = {}
    counts: dict[str, int] = defaultdict(int)
    ordered_ids = []
    for inst in corpus:
        ctx = stemmed_context(inst)
        matching = [
            r
            for r in index.get((inst.subj_type, inst.obj_type, len(ctx)), [])
            if r.context == ctx
        ]
        ordered_ids.append(inst.id)
        if matching:
            hits[inst.id] = matching
            for r in matching:
                counts[r.id] += 1

    matched = []
    unmatched = []
    for iid in ordered_ids:
        rs = hits.get(iid)
        if not rs:
            unmatched.append(iid)
            continue
        best = min(rs, key=lambda r: (-counts[r.id], r.id))
        heads = {r.head for r in rs}
        if len(heads) > 1:
            log.warning(
                "instance %s matched by rules with conflicting heads %s; keeping %s",
                iid, sorted(heads), best.head,
            )
        matched.append((iid, best.id, best.head))
    return MatchPartition(tuple(matched), tuple(unmatched))


def partition_bruteforce(corpus, rules) -> MatchPartition:
    """Reference double loop over all instance-rule pairs."""
    counts = defaultdict(int)
    per_inst = {}
    for inst in corpus:
        ms = [r for r in rules if hard_match(inst, r)]
        per_inst[inst.id] = ms
        for r in ms:
            counts[r.id] += 1
    matched, unmatched = [], []
    for inst in corpus:
        ms = per_inst[inst.id]
        if ms:
            best = min(ms, key=lambda r: (-counts[r.id], r.id))
            matched.append((inst.id, best.id, best.head))
        else:
            unmatched.append(inst.id)
    return MatchPartition(tuple(matched), tuple(unmatched))


def save_partition(part: MatchPartition, matched_path, unmatched_path) -> None:
    with open(matched_path, "w") as f:
        for iid, rid, head in part.matched:
            f.write(json.dumps({"id": iid, "rule_id": rid, "label": head}) + "\n")
    with open(unmatched_path, "w") as f:
        for iid in part.unmatched:
            f.write(json.dumps({"id": iid}) + "\n")


def load_partition(matched_path, unmatched_path) -> MatchPartition:
    matched, unmatched = [], []
    with open(matched_path) as f:
        for line in f:
            if line.strip():
                rec = json.loads(line)
                matched.append((rec["id"], rec["rule_id"], rec["label"]))
    with open(unmatched_path) as f:
        for line in f:
            if line.strip():
                unmatched.append(json.loads(line)["id"])
    return MatchPartition(tuple(matched), tuple(unmatched))
