"""Scorer semantics against the brute-force oracle and by hand."""

import numpy as np
import pytest

from eventgcn.corpus import Argument, EntityMention, EventMention, Sentence, Token
from eventgcn.pipeline import MetricsReport, compute_prf, score_events

import oracles


def make_sentence(n, entities=(), events=()):
    tokens = [Token(text=f"w{i}", pos="X", head=i - 1, deprel="dep") for i in range(1, n + 1)]
    return Sentence(
        doc_id="d", index=0, tokens=tokens, entities=list(entities), events=list(events)
    )


def random_config(rng, n_sentences=4):
    """Random gold sentences plus random predicted events over them."""
    roles = ["difference", "initial_value", "final_value", "NONE"]
    types = ["movement-up-gain", "movement-down-loss"]
    sentences, predictions = [], []
    for _ in range(n_sentences):
        n = int(rng.integers(6, 14))
        entities = [
            EntityMention(f"e{k}", int(p), int(p), "Quantity")
            for k, p in enumerate(rng.choice(np.arange(1, n + 1), size=3, replace=False), 1)
        ]
        events = []
        for _ in range(int(rng.integers(0, 3))):
            t = int(rng.integers(1, n + 1))
            args = [
                Argument(e.id, roles[int(rng.integers(3))])
                for e in entities
                if rng.random() < 0.5
            ]
            events.append(EventMention(t, t, types[int(rng.integers(2))], args))
        sentences.append(make_sentence(n, entities, events))
        predicted = []
        for _ in range(int(rng.integers(0, 4))):
            t = int(rng.integers(1, n + 1))
            args = [
                Argument(e.id, roles[int(rng.integers(3))])
                for e in entities
                if rng.random() < 0.5
            ]
            predicted.append(EventMention(t, t, types[int(rng.integers(2))], args))
        predictions.append(predicted)
    return sentences, predictions


class TestComputePrf:
    def test_safe_division(self):
        prf = compute_prf(0, 0, 0)
        assert (prf.precision, prf.recall, prf.f1) == (0.0, 0.0, 0.0)

    def test_half(self):
        prf = compute_prf(1, 2, 2)
        assert (prf.precision, prf.recall, prf.f1) == (0.5, 0.5, 0.5)

    def test_harmonic_mean(self):
        prf = compute_prf(2, 2, 4)
        assert prf.precision == 1.0
        assert prf.recall == 0.5
        assert abs(prf.f1 - 2 / 3) < 1e-15


class TestScoreEvents:
    def gold_sentence(self):
        return make_sentence(
            8,
            entities=[EntityMention("e1", 5, 6, "Quantity"), EntityMention("e2", 8, 8, "Date")],
            events=[
                EventMention(2, 2, "movement-up-gain",
                             [Argument("e1", "difference"), Argument("e2", "reference_point")])
            ],
        )

    def test_perfect_predictions(self):
        sent = self.gold_sentence()
        report = score_events([sent], [list(sent.events)])
        for prf in (
            report.trigger_identification,
            report.trigger_classification,
            report.argument_identification,
            report.argument_role,
        ):
            assert prf.f1 == 1.0
        assert report.per_role["difference"].f1 == 1.0
        assert "NONE" not in report.per_role

    def test_half_trigger_id(self):
        gold = [
            make_sentence(6, events=[EventMention(2, 2, "movement-up-gain", [])]),
            make_sentence(6, events=[EventMention(3, 3, "movement-up-gain", [])]),
        ]
        pred = [
            [EventMention(2, 2, "movement-up-gain", [])],
            [EventMention(4, 4, "movement-up-gain", [])],
        ]
        report = score_events(gold, pred)
        tid = report.trigger_identification
        assert (tid.precision, tid.recall, tid.f1) == (0.5, 0.5, 0.5)

    def test_wrong_type_blocks_argument_credit(self):
        sent = self.gold_sentence()
        wrong = [EventMention(2, 2, "movement-down-loss",
                              [Argument("e1", "difference")])]
        report = score_events([sent], [wrong])
        assert report.trigger_identification.f1 == 1.0
        assert report.trigger_classification.f1 == 0.0
        assert report.argument_role.correct == 0
        assert report.per_role == {}

    def test_duplicate_predictions_count_once(self):
        sent = self.gold_sentence()
        ev = EventMention(2, 2, "movement-up-gain", [Argument("e1", "difference")])
        report = score_events([sent], [[ev, ev]])
        assert report.trigger_identification.predicted == 1
        assert report.argument_role.predicted == 1

    def test_matches_bruteforce_oracle(self):
        rng = np.random.default_rng(17)
        for _ in range(100):
            sentences, predictions = random_config(rng)
            ours = score_events(sentences, predictions)
            theirs = oracles.score_events_bruteforce(sentences, predictions)
            for key in (
                "trigger_identification",
                "trigger_classification",
                "argument_identification",
                "argument_role",
            ):
                got = getattr(ours, key)
                p, r, f = theirs[key]
                assert (got.precision, got.recall, got.f1) == (p, r, f), key
            assert set(ours.per_role) == set(theirs["per_role"])
            for role, (p, r, f) in theirs["per_role"].items():
                got = ours.per_role[role]
                assert (got.precision, got.recall, got.f1) == (p, r, f), role

    def test_f1_recomputable_from_p_and_r(self):
        rng = np.random.default_rng(23)
        for _ in range(30):
            sentences, predictions = random_config(rng)
            report = score_events(sentences, predictions)
            for prf in [
                report.trigger_identification,
                report.trigger_classification,
                report.argument_identification,
                report.argument_role,
                *report.per_role.values(),
            ]:
                expect = (
                    2 * prf.precision * prf.recall / (prf.precision + prf.recall)
                    if prf.precision + prf.recall
                    else 0.0
                )
                assert abs(prf.f1 - expect) < 1e-12

    def test_strictness_hierarchy(self):
        rng = np.random.default_rng(31)
        for _ in range(50):
            sentences, predictions = random_config(rng)
            report = score_events(sentences, predictions)
            assert (
                report.trigger_classification.correct
                <= report.trigger_identification.correct
            )
            assert report.argument_role.correct <= report.argument_identification.correct
            total_gold = sum(len(ev.args) for s in sentences for ev in s.events)
            assert report.argument_identification.correct <= total_gold

    def test_length_mismatch_rejected(self):
        with pytest.raises(ValueError, match="prediction lists"):
            score_events([self.gold_sentence()], [])


class TestReportSerialization:
    def test_round_trip(self):
        rng = np.random.default_rng(41)
        sentences, predictions = random_config(rng)
        report = score_events(sentences, predictions)
        again = MetricsReport.from_dict(report.to_dict())
        assert again == report
