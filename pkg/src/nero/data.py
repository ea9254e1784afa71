"""Corpus ingestion, entity masking and embedding-table construction.

Datasets arrive as TACRED-style JSONL: one record per line with fields
``id, token, subj_start, subj_end, obj_start, obj_end, subj_type,
obj_type, relation``. Spans are inclusive token indices. The relation
string "no_relation" maps to the NONE class.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field

import numpy as np

NONE_RELATION = "no_relation"
PAD = "<PAD>"
UNK = "<UNK>"


class DatasetError(ValueError):
    """Malformed or invalid dataset content."""


@dataclass(frozen=True)
class RelationSchema:
    relations: tuple[str, ...]

    def __post_init__(self):
        if len(set(self.relations)) != len(self.relations):
            raise DatasetError("duplicate relation ids in schema")
        if self.relations.count(NONE_RELATION) != 1:
            raise DatasetError(f"schema must contain {NONE_RELATION!r} exactly once")

    @property
    def none_index(self) -> int:
        return self.relations.index(NONE_RELATION)

    def index(self, relation: str) -> int:
        try:
            return self.relations.index(relation)
        except ValueError:
            raise DatasetError(f"unknown relation {relation!r}") from None

    def __contains__(self, relation: str) -> bool:
        return relation in self.relations

    def __len__(self) -> int:
        return len(self.relations)

    @classmethod
    def load(cls, path) -> "RelationSchema":
        with open(path) as f:
            rels = json.load(f)
        if not isinstance(rels, list) or not all(isinstance(r, str) for r in rels):
            raise DatasetError(f"{path}: schema must be a JSON array of strings")
        return cls(tuple(rels))

    def save(self, path) -> None:
        with open(path, "w") as f:
            json.dump(list(self.relations), f, indent=0)


@dataclass(frozen=True)
class Instance:
    id: str
    tokens: tuple[str, ...]
    subj_span: tuple[int, int]
    obj_span: tuple[int, int]
    subj_type: str
    obj_type: str
    gold_relation: str | None = None  # None means unlabeled

    def __post_init__(self):
        n = len(self.tokens)
        for name, (a, b) in (("subj", self.subj_span), ("obj", self.obj_span)):
            if not (0 <= a <= b < n):
                raise DatasetError(
                    f"instance {self.id}: {name} span ({a},{b}) out of bounds for {n} tokens"
                )
        sa, sb = self.subj_span
        oa, ob = self.obj_span
        if max(sa, oa) <= min(sb, ob):
            raise DatasetError(f"instance {self.id}: subject and object spans overlap")
        for name, t in (("subj_type", self.subj_type), ("obj_type", self.obj_type)):
            if not t or t != t.upper():
                raise DatasetError(f"instance {self.id}: {name} must be non-empty uppercase")


def load_dataset(path, schema: RelationSchema) -> list[Instance]:
    """Parse a TACRED-style JSONL file into validated instances."""
    out = []
    with open(path) as f:
        for lineno, line in enumerate(f, start=1):
            if not line.strip():
                continue
            try:
                rec = json.loads(line)
            except json.JSONDecodeError as e:
                raise DatasetError(f"{path}:{lineno}: invalid JSON ({e})") from None
            try:
                tokens = tuple(rec["token"])
                relation = rec.get("relation")
                if relation is not None and relation not in schema:
                    raise DatasetError(f"unknown relation {relation!r}")
                inst = Instance(
                    id=str(rec.get("id", lineno)),
                    tokens=tokens,
                    subj_span=(int(rec["subj_start"]), int(rec["subj_end"])),
                    obj_span=(int(rec["obj_start"]), int(rec["obj_end"])),
                    subj_type=rec["subj_type"],
                    obj_type=rec["obj_type"],
                    gold_relation=relation,
                )
            except KeyError as e:
                raise DatasetError(f"{path}:{lineno}: missing field {e}") from None
            except DatasetError as e:
                raise DatasetError(f"{path}:{lineno}: {e}") from None
            out.append(inst)
    return out


def save_dataset(instances, path) -> None:
    with open(path, "w") as f:
        for inst in instances:
            rec = {
                "id": inst.id,
                "token": list(inst.tokens),
                "subj_start": inst.subj_span[0],
                "subj_end": inst.subj_span[1],
                "obj_start": inst.obj_span[0],
                "obj_end": inst.obj_span[1],
                "subj_type": inst.subj_type,
                "obj_type": inst.obj_type,
                "relation": inst.gold_relation,
            }
            f.write(json.dumps(rec) + "\n")


def subj_mask(inst: Instance) -> str:
    return f"SUBJ-{inst.subj_type}"


def obj_mask(inst: Instance) -> str:
    return f"OBJ-{inst.obj_type}"


def mask_entities(inst: Instance) -> tuple[str, ...]:
    """Replace each entity span with a single role+type placeholder token."""
    spans = sorted(
        [(inst.subj_span, subj_mask(inst)), (inst.obj_span, obj_mask(inst))]
    )
    out = []
    pos = 0
    for (a, b), mask in spans:
        out.extend(inst.tokens[pos:a])
        out.append(mask)
        pos = b + 1
    out.extend(inst.tokens[pos:])
    return tuple(out)


def context_span(inst: Instance) -> tuple[str, ...]:
    """Masked tokens between and including the two entity placeholders."""
    masked = mask_entities(inst)
    (fa, fb), (sa, _) = sorted([inst.subj_span, inst.obj_span])
    i = fa
    j = sa - (fb - fa)  # later span shifts left by the first span's collapse
    return masked[i : j + 1]


@dataclass
class Vocabulary:
    """Token-to-index map plus the embedding table (PAD row 0, all-zero)."""

    tokens: list[str]
    vectors: np.ndarray  # (len(tokens), dim) float64
    index: dict[str, int] = field(init=False)

    def __post_init__(self):
        self.index = {t: i for i, t in enumerate(self.tokens)}
        if self.tokens[0] != PAD:
            raise DatasetError("vocabulary must have PAD at index 0")
        if not np.isfinite(self.vectors).all():
            raise DatasetError("embedding table contains non-finite values")

    @property
    def dim(self) -> int:
        return self.vectors.shape[1]

    def lookup(self, token: str) -> int:
        # Entity masks keep their case; everything else is matched lowercase.
        idx = self.index.get(token)
        if idx is None:
            idx = self.index.get(token.lower(), self.index[UNK])
        return idx

    def encode(self, tokens) -> np.ndarray:
        return np.array([self.lookup(t) for t in tokens], dtype=np.int64)


def load_embeddings(path, dim: int) -> dict[str, np.ndarray]:
    """Parse a GloVe-style text file: token then `dim` decimals per line."""
    table = {}
    with open(path) as f:
        for lineno, line in enumerate(f, start=1):
            parts = line.rstrip("\n").split()
            if not parts:
                continue
            if len(parts) != dim + 1:
                raise DatasetError(
                    f"{path}:{lineno}: expected {dim + 1} fields, got {len(parts)}"
                )
            table[parts[0]] = np.array([float(x) for x in parts[1:]], dtype=np.float64)
    return table


def build_vocabulary(
    token_iterables, pretrained: dict[str, np.ndarray], dim: int, seed: int
) -> Vocabulary:
    """Assemble the vocabulary over all tokens seen in the corpus and rules.

    Tokens missing from the pretrained table (entity masks included) get a
    seeded uniform row in [-0.5/dim, 0.5/dim], so two builds with the same
    inputs and seed are byte-identical.
    """
    seen = []
    seen_set = set()
    for tokens in token_iterables:
        for tok in tokens:
            key = tok if _is_mask(tok) else tok.lower()
            if key not in seen_set:
                seen_set.add(key)
                seen.append(key)
    ordered = [PAD, UNK] + sorted(seen)
    rng = np.random.default_rng(seed)
    vectors = np.zeros((len(ordered), dim), dtype=np.float64)
    for i, tok in enumerate(ordered):
        if tok == PAD:
            continue
        vec = pretrained.get(tok)
        if vec is not None:
            vectors[i] = vec
        else:
            vectors[i] = rng.uniform(-0.5 / dim, 0.5 / dim, size=dim)
    return Vocabulary(ordered, vectors)


def _is_mask(token: str) -> bool:
    return token.startswith(("SUBJ-", "OBJ-"))
