import numpy as np

from nero.matching import partition
from nero.synthetic import few_shot_split, generate, rule_cluster_fixture


class TestGenerator:
    def test_deterministic(self):
        a = generate(n_train=50, n_dev=10, n_test=10, seed=3)
        b = generate(n_train=50, n_dev=10, n_test=10, seed=3)
        assert a.train == b.train
        assert a.rules == b.rules

    def test_split_sizes(self, synth):
        assert len(synth.train) == 200
        assert len(synth.dev) == 60
        assert len(synth.test) == 60

    def test_none_fraction(self, synth):
        frac = sum(
            1 for i in synth.train if i.gold_relation == "no_relation"
        ) / len(synth.train)
        assert 0.5 <= frac <= 0.7

    def test_rules_hard_match_only_their_relation(self, synth):
        by_id = {i.id: i for i in synth.train}
        part = partition(synth.train, synth.rules)
        for iid, _, head in part.matched:
            assert by_id[iid].gold_relation == head

    def test_hard_match_recall_is_low(self, synth):
        part = partition(synth.train, synth.rules)
        n_rel = sum(1 for i in synth.train if i.gold_relation != "no_relation")
        assert 0 < len(part.matched) / n_rel <= 0.30

    def test_vocabulary_covers_corpus(self, synth, synth_vocab):
        from nero.training import encode_instance

        unk = synth_vocab.index["<UNK>"]
        for inst in synth.train[:50]:
            assert unk not in encode_instance(inst, synth_vocab)


class TestFewShotSplit:
    def test_held_out_relation_removed_from_train(self, synth):
        reduced, held = few_shot_split(synth, "org:acquired")
        assert all(i.gold_relation != "org:acquired" for i in reduced.train)
        assert all(r.head != "org:acquired" for r in reduced.rules)
        assert any(i.gold_relation == "org:acquired" for i in held)
        # the held-out evaluation set is the unseen relation plus NONE filler
        assert all(i.gold_relation in ("org:acquired", "no_relation")
                   for i in held)


class TestRuleClusterFixture:
    def test_structure(self):
        schema, train_rules, held_rules, vocab = rule_cluster_fixture(
            n_relations=3, words_per_relation=3, seed=0)
        assert len(train_rules) == 9
        assert len(held_rules) == 6
        heads = [r.head for r in train_rules]
        assert all(heads.count(h) == 3 for h in set(heads))
        assert all(r.head in schema for r in train_rules + held_rules)
        unk = vocab.index["<UNK>"]
        assert all(unk not in vocab.encode(r.context)
                   for r in train_rules + held_rules)

    def test_held_out_contexts_reuse_trained_words(self):
        _, train_rules, held_rules, _ = rule_cluster_fixture(seed=1)
        trained_words = {w for r in train_rules for w in r.context[1:-1]}
        train_bodies = {r.context for r in train_rules}
        for r in held_rules:
            assert set(r.context[1:-1]) <= trained_words
            assert r.context not in train_bodies

    def test_deterministic(self):
        _, tr_a, hd_a, vocab_a = rule_cluster_fixture(seed=4)
        _, tr_b, hd_b, vocab_b = rule_cluster_fixture(seed=4)
        assert tr_a == tr_b
        assert hd_a == hd_b
        assert np.array_equal(vocab_a.vectors, vocab_b.vectors)
