"""Frequent-pattern rule mining and the annotated rule set.

Candidate rule bodies are the stemmed inter-entity contexts (entity masks
included) that occur at least ``min_freq`` times in the masked corpus.
The stemmed sequence is the canonical form throughout: hard matching
compares stemmed contexts, and annotated rules store stemmed bodies.
"""

from __future__ import annotations

import json
from collections import Counter, defaultdict
from dataclasses import dataclass, asdict

from .data import Instance, RelationSchema, context_span, DatasetError
from .stemmer import stem_sequence


@dataclass(frozen=True)
class CandidateRule:
    id: str
    subj_type: str
    obj_type: str
    stemmed_context: tuple[str, ...]
    surface_context: tuple[str, ...]  # most frequent raw form, for display
    frequency: int
    example_ids: tuple[str, ...]


@dataclass(frozen=True)
class LabelingRule:
    id: str
    subj_type: str
    obj_type: str
    context: tuple[str, ...]  # stemmed, starts/ends with entity masks
    head: str  # relation id, NONE included

    def __post_init__(self):
        if not self.context:
            raise DatasetError(f"rule {self.id}: empty context")


def extract_candidates(
    corpus: list[Instance],
    min_freq: int = 3,
    max_len: int = 12,
    examples_per_candidate: int = 3,
) -> list[CandidateRule]:
    """Mine distinct (subj_type, stemmed context, obj_type) patterns.

    ``max_len`` bounds the full context length including the two masks.
    Output is sorted by frequency descending, ties by context, and is
    deterministic for a given corpus.
    """
    groups: dict[tuple, dict] = {}
    for inst in corpus:
        ctx = context_span(inst)
        if len(ctx) > max_len:
            continue
        stemmed = stem_sequence(ctx)
        key = (inst.subj_type, stemmed, inst.obj_type)
        g = groups.setdefault(key, {"freq": 0, "surfaces": Counter(), "ids": []})
        g["freq"] += 1
        g["surfaces"][ctx] += 1
        g["ids"].append(inst.id)

    kept = sorted(
        (k for k, g in groups.items() if g["freq"] >= min_freq),
        key=lambda k: (-groups[k]["freq"], k[1], k[0], k[2]),
    )
    out = []
    for i, key in enumerate(kept):
        subj_type, stemmed, obj_type = key
        g = groups[key]
        surface = min(g["surfaces"].items(), key=lambda kv: (-kv[1], kv[0]))[0]
        out.append(
            CandidateRule(
                id=f"c{i:05d}",
                subj_type=subj_type,
                obj_type=obj_type,
                stemmed_context=stemmed,
                surface_context=surface,
                frequency=g["freq"],
                example_ids=tuple(g["ids"][:examples_per_candidate]),
            )
        )
    return out


def save_candidates(candidates: list[CandidateRule], path) -> None:
    with open(path, "w") as f:
        for c in candidates:
            rec = asdict(c)
            rec["stemmed_context"] = list(c.stemmed_context)
            rec["surface_context"] = list(c.surface_context)
            rec["example_ids"] = list(c.example_ids)
            f.write(json.dumps(rec) + "\n")


def load_candidates(path) -> list[CandidateRule]:
    out = []
    with open(path) as f:
        for line in f:
            if not line.strip():
                continue
            rec = json.loads(line)
            out.append(
                CandidateRule(
                    id=rec["id"],
                    subj_type=rec["subj_type"],
                    obj_type=rec["obj_type"],
                    stemmed_context=tuple(rec["stemmed_context"]),
                    surface_context=tuple(rec["surface_context"]),
                    frequency=int(rec["frequency"]),
                    example_ids=tuple(rec["example_ids"]),
                )
            )
    return out


def rule_body(rule: LabelingRule) -> tuple[str, tuple[str, ...], str]:
    return (rule.subj_type, rule.context, rule.obj_type)


def save_rules(rules: list[LabelingRule], path, schema: RelationSchema) -> None:
    """Persist rules as JSONL; heads must be in the schema and bodies unique."""
    heads_by_body: dict[tuple, str] = {}
    for r in rules:
        if r.head not in schema:
            raise DatasetError(f"rule {r.id}: unknown relation {r.head!r}")
        body = rule_body(r)
        prev = heads_by_body.get(body)
        if prev is not None and prev != r.head:
            raise DatasetError(
                f"rule {r.id}: conflicting heads {prev!r} vs {r.head!r} for the same body"
            )
        heads_by_body[body] = r.head
    with open(path, "w") as f:
        for r in rules:
            rec = {
                "id": r.id,
                "subj_type": r.subj_type,
                "obj_type": r.obj_type,
                "context": list(r.context),
                "head": r.head,
            }
            f.write(json.dumps(rec) + "\n")


def load_rules(path, schema: RelationSchema) -> list[LabelingRule]:
    out = []
    with open(path) as f:
        for lineno, line in enumerate(f, start=1):
            if not line.strip():
                continue
            rec = json.loads(line)
            if rec["head"] not in schema:
                raise DatasetError(f"{path}:{lineno}: unknown relation {rec['head']!r}")
            out.append(
                LabelingRule(
                    id=rec["id"],
                    subj_type=rec["subj_type"],
                    obj_type=rec["obj_type"],
                    context=tuple(rec["context"]),
                    head=rec["head"],
                )
            )
    return out
