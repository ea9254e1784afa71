"""Synthetic relation-extraction corpora with controllable hard-match recall.

Each relation has one canonical surface pattern (frequent enough to be
mined into a rule) and several paraphrase patterns that never hard-match.
The accompanying embedding table places a relation's canonical and
paraphrase words in one cluster, the way distributional pretraining
would, so soft matching has signal to exploit while exact matching does
not. All draws are seeded.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .data import Instance, RelationSchema, NONE_RELATION, build_vocabulary, Vocabulary
from .rules import LabelingRule
from .stemmer import porter_stem, stem_sequence

_REL_SPECS = [
    # name, (subj_type, obj_type), canonical ctx, paraphrase ctxs
    ("org:founded_by", ("PERSON", "ORGANIZATION"), ["founded"],
     [["established"], ["created"], ["launched"]]),
    ("org:ceo_of", ("PERSON", "ORGANIZATION"), ["leads"],
     [["runs"], ["manages"], ["directs"]]),
    ("per:born_in", ("PERSON", "CITY"), ["was", "born", "in"],
     [["grew", "up", "in"], ["originates", "from"], ["hails", "from"]]),
    ("per:spouse_of", ("PERSON", "PERSON"), ["married"],
     [["wed"], ["partnered", "with"], ["weds"]]),
    ("org:acquired", ("ORGANIZATION", "ORGANIZATION"), ["acquired"],
     [["bought"], ["purchased"], ["absorbed"]]),
]

_NONE_CTXS = [["met"], ["visited"], ["mentioned"], ["saw"], ["near"], ["discussed"]]
_FUNCTION_WORDS = {"was", "in", "up", "from", "with", "the"}
_FILLERS = ["yesterday", "reportedly", "recently", "famously", "quietly", "today"]

_NAMES = {
    "PERSON": [["anna"], ["john"], ["maria", "lopez"], ["wei"], ["omar"], ["kim"],
               ["lucas"], ["sara", "cohen"], ["ivan"], ["noor"]],
    "ORGANIZATION": [["acme"], ["globex"], ["initech"], ["umbrella", "corp"],
                     ["stark", "industries"], ["hooli"], ["wonka"], ["tyrell"]],
    "CITY": [["springfield"], ["gotham"], ["metropolis"], ["riverdale"],
             ["sunnydale"], ["bedrock"]],
}

_TYPE_PAIRS = [("PERSON", "ORGANIZATION"), ("PERSON", "CITY"),
               ("PERSON", "PERSON"), ("ORGANIZATION", "ORGANIZATION")]


@dataclass
class SynthData:
    schema: RelationSchema
    train: list[Instance]
    dev: list[Instance]
    test: list[Instance]
    rules: list[LabelingRule]
    pretrained: dict[str, np.ndarray]  # stem -> vector
    dim: int

    def vocabulary(self, seed: int = 0) -> Vocabulary:
        from .data import mask_entities

        streams = [stem_sequence(mask_entities(i))
                   for i in self.train + self.dev + self.test]
        streams += [r.context for r in self.rules]
        return build_vocabulary(streams, self.pretrained, self.dim, seed=seed)


def _embedding_table(
    rng: np.random.Generator, dim: int, cluster_spread: float = 0.22
) -> dict[str, np.ndarray]:
    """Cluster each relation's content words; spread NONE and filler words."""
    table: dict[str, np.ndarray] = {}

    def anchor():
        v = rng.normal(size=dim)
        return v / np.linalg.norm(v)

    def place(words, center, spread):
        for w in words:
            stem = porter_stem(w)
            if stem not in table:
                noise = rng.normal(size=dim) * spread
                table[stem] = center + noise

    for _, _, canonical, paraphrases in _REL_SPECS:
        center = anchor()
        content = [w for w in canonical if w not in _FUNCTION_WORDS]
        for ctx in paraphrases:
            content += [w for w in ctx if w not in _FUNCTION_WORDS]
        place(content, center, spread=cluster_spread)
    for ctx in _NONE_CTXS:
        place(ctx, anchor(), spread=0.3)
    shared = anchor() * 0.3
    place(sorted(_FUNCTION_WORDS), shared, spread=0.15)
    place(_FILLERS, anchor() * 0.4, spread=0.3)
    for names in _NAMES.values():
        for name in names:
            place(name, anchor() * 0.5, spread=0.4)
    place(["."], np.zeros(dim), spread=0.05)
    return table


def _make_instance(rng, idx, subj_type, obj_type, ctx, relation) -> Instance:
    subj_tokens = _NAMES[subj_type][int(rng.integers(len(_NAMES[subj_type])))]
    obj_tokens = _NAMES[obj_type][int(rng.integers(len(_NAMES[obj_type])))]
    prefix = [str(rng.choice(_FILLERS))] if rng.random() < 0.4 else []
    suffix = [str(rng.choice(_FILLERS))] if rng.random() < 0.3 else []
    tokens = prefix + subj_tokens + ctx + obj_tokens + suffix + ["."]
    s0 = len(prefix)
    s1 = s0 + len(subj_tokens) - 1
    o0 = s1 + 1 + len(ctx)
    o1 = o0 + len(obj_tokens) - 1
    return Instance(
        id=f"s{idx:06d}",
        tokens=tuple(tokens),
        subj_span=(s0, s1),
        obj_span=(o0, o1),
        subj_type=subj_type,
        obj_type=obj_type,
        gold_relation=relation,
    )


def _sample_split(rng, n, none_frac, canonical_frac, relations, start_idx=0):
    out = []
    for i in range(n):
        if rng.random() < none_frac:
            subj_type, obj_type = _TYPE_PAIRS[int(rng.integers(len(_TYPE_PAIRS)))]
            ctx = list(_NONE_CTXS[int(rng.integers(len(_NONE_CTXS)))])
            out.append(_make_instance(rng, start_idx + i, subj_type, obj_type,
                                      ctx, NONE_RELATION))
        else:
            name, (st, ot), canonical, paraphrases = relations[
                int(rng.integers(len(relations)))
            ]
            if rng.random() < canonical_frac:
                ctx = list(canonical)
            else:
                ctx = list(paraphrases[int(rng.integers(len(paraphrases)))])
            out.append(_make_instance(rng, start_idx + i, st, ot, ctx, name))
    return out


def generate(
    n_train: int = 2000,
    n_dev: int = 300,
    n_test: int = 500,
    seed: int = 0,
    none_frac: float = 0.6,
    canonical_frac: float = 0.25,
    dim: int = 30,
    cluster_spread: float = 0.22,
    relations=None,
) -> SynthData:
    rng = np.random.default_rng(seed)
    relations = relations if relations is not None else _REL_SPECS
    schema = RelationSchema(tuple(r[0] for r in _REL_SPECS) + (NONE_RELATION,))
    pretrained = _embedding_table(rng, dim, cluster_spread)
    train = _sample_split(rng, n_train, none_frac, canonical_frac, relations)
    dev = _sample_split(rng, n_dev, none_frac, canonical_frac, relations, start_idx=n_train)
    test = _sample_split(rng, n_test, none_frac, canonical_frac, relations,
                         start_idx=n_train + n_dev)
    rules = []
    for k, (name, (st, ot), canonical, _) in enumerate(relations):
        ctx = (f"SUBJ-{st}",) + stem_sequence(canonical) + (f"OBJ-{ot}",)
        rules.append(LabelingRule(f"r{k:03d}", st, ot, ctx, name))
    return SynthData(schema, train, dev, test, rules, pretrained, dim)


def few_shot_split(data: SynthData, held_out: str) -> tuple[SynthData, list[Instance]]:
    """Remove one relation's sentences and rule from training; test keeps only
    that relation plus NONE-rate filler, mirroring an unseen-relation setup."""
    train = [i for i in data.train if i.gold_relation != held_out]
    dev = [i for i in data.dev if i.gold_relation != held_out]
    rules = [r for r in data.rules if r.head != held_out]
    test = [
        i for i in data.test
        if i.gold_relation in (held_out, NONE_RELATION)
    ]
    reduced = SynthData(data.schema, train, dev, data.test, rules,
                        data.pretrained, data.dim)
    return reduced, test


def write_embeddings(pretrained: dict[str, np.ndarray], path) -> None:
    with open(path, "w") as f:
        for tok, vec in sorted(pretrained.items()):
            f.write(tok + " " + " ".join(f"{x:.6f}" for x in vec) + "\n")


def rule_cluster_fixture(
    n_relations: int = 3,
    words_per_relation: int = 3,
    seed: int = 0,
    dim: int = 30,
    spread: float = 0.8,
):
    """Rules-only fixture for contrastive training.

    Each relation owns a small paraphrase lexicon (a noisy word cluster
    around a unit anchor). Training rules use one lexicon word each; the
    held-out rules combine two lexicon words in contexts never trained
    on, so they probe generalization rather than memorization.
    Returns (schema, train_rules, held_rules, vocab).
    """
    rng = np.random.default_rng(seed)
    schema = RelationSchema(
        tuple(f"rel:{chr(ord('a') + k)}" for k in range(n_relations)) + (NONE_RELATION,)
    )
    pretrained = {}
    train_rules = []
    held_rules = []
    for k in range(n_relations):
        center = rng.normal(size=dim)
        center /= np.linalg.norm(center)
        head = schema.relations[k]
        words = []
        for j in range(words_per_relation):
            word = f"w{k}x{j}"
            words.append(word)
            pretrained[word] = center + rng.normal(size=dim) * spread
            train_rules.append(
                LabelingRule(
                    f"t{k:02d}{j:02d}", "PERSON", "ORGANIZATION",
                    ("SUBJ-PERSON", word, "OBJ-ORGANIZATION"), head,
                )
            )
        for j in range(len(words) - 1):
            held_rules.append(
                LabelingRule(
                    f"h{k:02d}{j:02d}", "PERSON", "ORGANIZATION",
                    ("SUBJ-PERSON", words[j], words[j + 1], "OBJ-ORGANIZATION"),
                    head,
                )
            )
    vocab = build_vocabulary(
        [r.context for r in train_rules + held_rules], pretrained, dim, seed=seed
    )
    return schema, train_rules, held_rules, vocab
