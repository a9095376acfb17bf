import collections
import json

import numpy as np
import pytest

from affectkit.clustering import cluster_lexicon
from affectkit.corpus import (
    CodeHistogram,
    MabmoEvent,
    MabmoSampler,
    SplitSpec,
    abo_code,
    allocate_counts,
    enumerate_codes,
    generate_corpus,
    read_corpus_jsonl,
    record_from_event,
    render_sentence,
    stratified_split,
    write_corpus_jsonl,
)
from affectkit.epa import EpaVector, LexiconEntry, SentimentLexicon
from affectkit.equations import BASIS_SIZE, CoefficientSet, EventProfile, impression
from affectkit.errors import ConfigurationError

from conftest import random_coefficients, small_lexicon


def entry(term, category, epa=(0.0, 0.0, 0.0)):
    return LexiconEntry(term, category, EpaVector(*epa))


def constant_offset_coefficients(offset):
    matrix = np.zeros((BASIS_SIZE, 9))
    matrix[0] = offset
    matrix[1:10] = np.eye(9)
    return CoefficientSet(matrix, name="offset")


class TestSplitSpec:
    def test_default_fractions(self):
        spec = SplitSpec()
        assert spec.fractions == (0.80, 0.08, 0.12)

    def test_degenerate_fractions_rejected(self):
        with pytest.raises(ConfigurationError):
            SplitSpec(train=1.0, test=0.0, validation=0.0)
        with pytest.raises(ConfigurationError):
            SplitSpec(train=0.7, test=0.2, validation=0.2)

    def test_allocation_is_exact_when_fractions_divide(self):
        assert allocate_counts(100, (0.8, 0.08, 0.12)) == [80, 8, 12]
        assert allocate_counts(10, (0.8, 0.1, 0.1)) == [8, 1, 1]

    def test_allocation_within_one_of_targets(self):
        fractions = (0.85, 0.08, 0.07)
        for n in (7, 13, 101, 997):
            counts = allocate_counts(n, fractions)
            assert sum(counts) == n
            for count, f in zip(counts, fractions):
                assert abs(count - n * f) < 1.0


class TestStratifiedSplit:
    def test_partition_and_counts(self):
        lex = small_lexicon(n_per_category=20)
        clusters = cluster_lexicon(lex, k=2, seed=0)
        splits = stratified_split(lex, clusters, SplitSpec(seed=42))
        keys = [set(e.key for e in splits[name]) for name in ("train", "test", "validation")]
        assert keys[0] | keys[1] | keys[2] == {e.key for e in lex}
        assert not (keys[0] & keys[1] or keys[0] & keys[2] or keys[1] & keys[2])

    def test_per_stratum_counts_within_one(self):
        lex = small_lexicon(n_per_category=30)
        clusters = cluster_lexicon(lex, k=3, seed=1)
        spec = SplitSpec(train=0.8, test=0.1, validation=0.1, seed=5)
        splits = stratified_split(lex, clusters, spec)
        for category, model in clusters.items():
            for cluster_id in range(model.k):
                members = {
                    key for key, cid in model.assignment.items() if cid == cluster_id
                }
                if not members:
                    continue
                for name, fraction in zip(("train", "test", "validation"), spec.fractions):
                    realized = sum(1 for e in splits[name] if e.key in members)
                    assert abs(realized - fraction * len(members)) < 1.0

    def test_deterministic_under_seed(self):
        lex = small_lexicon(n_per_category=25)
        clusters = cluster_lexicon(lex, k=2, seed=3)
        a = stratified_split(lex, clusters, SplitSpec(seed=9))
        b = stratified_split(lex, clusters, SplitSpec(seed=9))
        for name in ("train", "test", "validation"):
            assert [e.key for e in a[name]] == [e.key for e in b[name]]

    def test_missing_assignment_rejected(self):
        lex = small_lexicon(n_per_category=4)
        clusters = cluster_lexicon(lex, k=2, seed=0)
        del clusters["identity"].assignment[("id00", "identity")]
        with pytest.raises(ConfigurationError):
            stratified_split(lex, clusters, SplitSpec())


class TestAboCode:
    def profile(self):
        return EventProfile(
            EpaVector(0.5, -0.5, 1.0), EpaVector(1.0, 0.2, -0.3), EpaVector(-1.0, 0.4, 0.0)
        )

    def test_identity_coefficients_all_ties(self):
        assert abo_code(self.profile(), CoefficientSet.identity()) == 0

    def test_constant_positive_offset_sets_all_bits(self):
        coeffs = constant_offset_coefficients(np.ones(9))
        assert abo_code(self.profile(), coeffs) == 511

    def test_actor_object_up_behavior_down(self):
        offset = np.array([1.0, 1.0, 1.0, -1.0, -1.0, -1.0, 1.0, 1.0, 1.0])
        coeffs = constant_offset_coefficients(offset)
        assert abo_code(self.profile(), coeffs) == 0b111000111 == 455

    def test_scaling_invariance_of_signs(self, rng):
        # The code depends only on difference signs, not on magnitude.
        coeffs = constant_offset_coefficients(np.array([2, -3, 1, 5, -1, 2, -2, 4, -4.0]))
        scaled = constant_offset_coefficients(np.array([2, -3, 1, 5, -1, 2, -2, 4, -4.0]) * 0.01)
        profile = self.profile()
        assert abo_code(profile, coeffs) == abo_code(profile, scaled)


class TestEnumerateCodes:
    def test_single_combo_identity(self):
        lex = SentimentLexicon.from_entries(
            [entry("a", "identity", (1, 0, 0)), entry("hit", "behavior", (0, 1, 0))]
        )
        hist = enumerate_codes(lex, CoefficientSet.identity())
        assert hist.counts == {0: 1}
        assert hist.total == 1
        assert hist.exhaustive

    def test_matches_nested_loop_oracle(self, rng):
        lex = SentimentLexicon.from_entries(
            [
                entry("a", "identity", (1.2, 0.4, -0.8)),
                entry("b", "identity", (-0.6, 2.0, 0.3)),
                entry("c", "identity", (0.1, -1.4, 1.1)),
                entry("hit", "behavior", (-2.0, 1.5, 1.8)),
                entry("hug", "behavior", (2.4, 0.9, 0.2)),
            ]
        )
        coeffs = random_coefficients(rng)
        hist = enumerate_codes(lex, coeffs)

        # Independent nested-loop oracle over all 3*2*3 = 18 combinations.
        expected = collections.Counter()
        identities = lex.entries("identity")
        behaviors = lex.entries("behavior")
        for actor in identities:
            for behavior in behaviors:
                for obj in identities:
                    profile = EventProfile(actor.epa, behavior.epa, obj.epa)
                    fundamentals = profile.flatten()
                    transients = impression(profile, coeffs).flatten()
                    code = 0
                    for i in range(9):
                        code = (code << 1) | int(transients[i] > fundamentals[i])
                    expected[code] += 1
        assert hist.counts == dict(expected)
        assert hist.total == 18

    def test_sampling_fallback_above_budget(self, rng):
        lex = small_lexicon(n_per_category=8)
        coeffs = random_coefficients(rng)
        hist = enumerate_codes(lex, coeffs, budget=50, seed=1)
        assert not hist.exhaustive
        assert hist.total == 50
        assert hist.codes is None

    def test_empty_lexicon_gives_empty_histogram(self):
        lex = SentimentLexicon.from_entries([entry("solo", "identity")])
        hist = enumerate_codes(lex, CoefficientSet.identity())
        assert hist.counts == {}
        assert hist.total == 0


class TestRenderSentence:
    def build(self, m1, a, b, m2, o):
        return MabmoEvent(
            modifier1=entry(m1, "modifier"),
            actor=entry(a, "identity"),
            behavior=entry(b, "behavior"),
            modifier2=entry(m2, "modifier"),
            object=entry(o, "identity"),
            abo_code=0,
        )

    def test_basic_sentence(self):
        event = self.build("happy", "employee", "greets", "bossy", "employer")
        assert render_sentence(event) == "Happy employee greets bossy employer"

    def test_multiword_terms_verbatim(self):
        event = self.build("peaceful", "decorator", "fight", "amused", "cement worker")
        assert render_sentence(event) == "Peaceful decorator fight amused cement worker"
        event = self.build(
            "old fashioned", "casual laborer", "fight", "petty", "undergraduate"
        )
        assert (
            render_sentence(event)
            == "Old fashioned casual laborer fight petty undergraduate"
        )

    def test_slot_categories_enforced(self):
        with pytest.raises(ConfigurationError):
            MabmoEvent(
                modifier1=entry("happy", "modifier"),
                actor=entry("greets", "behavior"),
                behavior=entry("employee", "identity"),
                modifier2=entry("bossy", "modifier"),
                object=entry("employer", "identity"),
                abo_code=0,
            )


class TestSampler:
    def test_singleton_lexicons_give_unique_event(self):
        lex = SentimentLexicon.from_entries(
            [
                entry("a", "identity", (1, 0, 0)),
                entry("hug", "behavior", (2, 1, 0)),
                entry("calm", "modifier", (0.5, 0, -0.5)),
            ]
        )
        sampler = MabmoSampler(lex, clusters={}, coeffs=CoefficientSet.identity())
        events = sampler.sample(1, seed=0)
        assert len(events) == 1
        assert events[0].sentence == "Calm a hug calm a"
        np.testing.assert_array_equal(
            events[0].targets(),
            np.array([0.5, 0, -0.5, 1, 0, 0, 2, 1, 0, 0.5, 0, -0.5, 1, 0, 0]),
        )

    def test_modifier_cluster_stratification(self, rng):
        lex = small_lexicon(n_per_category=25)
        clusters = cluster_lexicon(lex, k=5, seed=0)
        sampler = MabmoSampler(lex, clusters, random_coefficients(rng))
        events = sampler.sample(10_000, seed=3)
        counts = collections.Counter()
        model = clusters["modifier"]
        for event in events:
            counts[model.assignment[event.modifier1.key]] += 1
            counts[model.assignment[event.modifier2.key]] += 1
        expected = 20_000 / model.k
        for cluster_id in range(model.k):
            assert abs(counts[cluster_id] - expected) <= 0.02 * expected

    def test_code_stratification_covers_observed_codes(self, rng):
        lex = small_lexicon(n_per_category=10)
        coeffs = random_coefficients(rng)
        sampler = MabmoSampler(lex, cluster_lexicon(lex, k=2, seed=0), coeffs)
        observed = set(sampler.histogram.counts)
        events = sampler.sample(len(observed) * 4, seed=8)
        assert {e.abo_code for e in events} == observed

    def test_targets_reconstruct_from_lexicon(self, rng):
        lex = small_lexicon(n_per_category=8)
        sampler = MabmoSampler(lex, cluster_lexicon(lex, k=2, seed=1), random_coefficients(rng))
        for event in sampler.sample(50, seed=2):
            expected = np.concatenate(
                [lex.get(e.term, e.category).epa.as_array() for e in event.slots]
            )
            np.testing.assert_array_equal(event.targets(), expected)

    def test_deterministic_and_seed_sensitive(self, rng):
        lex = small_lexicon(n_per_category=8)
        sampler = MabmoSampler(lex, cluster_lexicon(lex, k=2, seed=1), random_coefficients(rng))
        a = sampler.sample(40, seed=7)
        b = sampler.sample(40, seed=7)
        c = sampler.sample(40, seed=8)
        assert [e.sentence for e in a] == [e.sentence for e in b]
        assert [e.sentence for e in a] != [e.sentence for e in c]

    def test_empty_category_rejected(self):
        lex = SentimentLexicon.from_entries(
            [entry("a", "identity"), entry("hug", "behavior")]
        )
        with pytest.raises(ConfigurationError):
            MabmoSampler(lex, clusters={}, coeffs=CoefficientSet.identity())

    def test_pinned_identity_occupies_actor_slot(self, rng):
        lex = small_lexicon(n_per_category=8)
        sampler = MabmoSampler(lex, cluster_lexicon(lex, k=2, seed=1), random_coefficients(rng))
        events = sampler.sample_pinned("moderator", "identity", 25, seed=4)
        assert all(e.actor.term == "moderator" for e in events)
        assert all(e.actor.epa == EpaVector(0, 0, 0) for e in events)
        events = sampler.sample_pinned("id00", "behavior", 5, seed=4)
        assert all(e.behavior.term == "id00" for e in events)
        events = sampler.sample_pinned("breezy", "modifier", 5, seed=4)
        assert all(e.modifier1.term == "breezy" for e in events)


class TestCorpusJsonl:
    def test_round_trip(self, rng, tmp_path):
        lex = small_lexicon(n_per_category=8)
        sampler = MabmoSampler(lex, cluster_lexicon(lex, k=2, seed=1), random_coefficients(rng))
        records = [
            record_from_event(e, i, "train") for i, e in enumerate(sampler.sample(20, seed=5))
        ]
        path = tmp_path / "corpus.jsonl"
        write_corpus_jsonl(records, path)
        loaded = read_corpus_jsonl(path)
        assert loaded == records

    def test_line_shape(self, tmp_path):
        event = MabmoEvent(
            modifier1=entry("happy", "modifier", (2.0, 1.1, 0.9)),
            actor=entry("employee", "identity", (1.5, 0.5, 0.8)),
            behavior=entry("greets", "behavior", (1.9, 1.0, 1.1)),
            modifier2=entry("bossy", "modifier", (-1.5, 1.2, 0.7)),
            object=entry("employer", "identity", (0.5, 1.8, 0.5)),
            abo_code=455,
        )
        path = tmp_path / "one.jsonl"
        write_corpus_jsonl([record_from_event(event, 3, "test")], path)
        raw = json.loads(path.read_text().strip())
        assert raw["id"] == 3
        assert raw["sentence"] == "Happy employee greets bossy employer"
        assert raw["abo_code"] == 455
        assert raw["split"] == "test"
        assert len(raw["targets"]) == 15
        assert [s["category"] for s in raw["slots"]] == [
            "modifier",
            "identity",
            "behavior",
            "modifier",
            "identity",
        ]

    def test_bad_line_rejected(self, tmp_path):
        path = tmp_path / "bad.jsonl"
        path.write_text('{"id": 1, "sentence": "x"}\n')
        with pytest.raises(ConfigurationError):
            read_corpus_jsonl(path)


class TestGenerateCorpus:
    def test_full_pipeline_deterministic(self, rng, tmp_path):
        lex = small_lexicon(n_per_category=60)
        coeffs = random_coefficients(rng)
        first = generate_corpus(lex, coeffs, n_events=500, seed=11)
        second = generate_corpus(lex, coeffs, n_events=500, seed=11)
        a, b = tmp_path / "a.jsonl", tmp_path / "b.jsonl"
        write_corpus_jsonl(first.records, a)
        write_corpus_jsonl(second.records, b)
        assert a.read_bytes() == b.read_bytes()

    def test_split_tags_follow_fractions(self, rng):
        lex = small_lexicon(n_per_category=60)
        build = generate_corpus(lex, random_coefficients(rng), n_events=250, seed=2)
        tags = collections.Counter(r.split for r in build.records)
        assert tags["train"] == 200
        assert tags["test"] == 20
        assert tags["validation"] == 30
        assert [r.id for r in build.records] == list(range(250))

    def test_starved_split_raises_actionable_error(self, rng):
        # A lexicon this small cannot feed a 0.08 test fraction across five
        # clusters at every seed; the pipeline must say so rather than emit
        # a corpus silently missing a split.
        lex = small_lexicon(n_per_category=30)
        with pytest.raises(ConfigurationError, match="split"):
            generate_corpus(lex, random_coefficients(rng), n_events=500, seed=11)
