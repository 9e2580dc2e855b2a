"""Event-extraction scoring.

Four headline metrics, each micro-averaged over the test set with
set semantics (duplicate predictions count once):

- trigger identification: predicted span matches a gold trigger span;
- trigger classification: span and event type both match;
- argument identification: the predicted trigger matched span+type and
  the (trigger, entity) pair is linked in gold with any role;
- argument role: pair plus role all match.

The per-role breakdown treats every (matched trigger, entity) pair as
a role classification, NONE included, so it reflects exactly the
decisions the argument head makes.
"""

from __future__ import annotations

from dataclasses import dataclass

from ..corpus import EventMention, Sentence
from ..model import ExtractorModel

NONE_ROLE = "NONE"


@dataclass(frozen=True)
class PRF:
    precision: float
    recall: float
    f1: float
    correct: int
    predicted: int
    gold: int

    def to_dict(self) -> dict:
        return {
            "precision": self.precision,
            "recall": self.recall,
            "f1": self.f1,
            "correct": self.correct,
            "predicted": self.predicted,
            "gold": self.gold,
        }

    @classmethod
    def from_dict(cls, data: dict) -> "PRF":
        return cls(
            precision=float(data["precision"]),
            recall=float(data["recall"]),
            f1=float(data["f1"]),
            correct=int(data["correct"]),
            predicted=int(data["predicted"]),
            gold=int(data["gold"]),
        )


def compute_prf(correct: int, predicted: int, gold: int) -> PRF:
    p = correct / predicted if predicted else 0.0
    r = correct / gold if gold else 0.0
    f1 = 2 * p * r / (p + r) if p + r else 0.0
    return PRF(p, r, f1, correct, predicted, gold)


@dataclass
class MetricsReport:
    trigger_identification: PRF
    trigger_classification: PRF
    argument_identification: PRF
    argument_role: PRF
    per_role: dict[str, PRF]

    def to_dict(self) -> dict:
        return {
            "trigger_identification": self.trigger_identification.to_dict(),
            "trigger_classification": self.trigger_classification.to_dict(),
            "argument_identification": self.argument_identification.to_dict(),
            "argument_role": self.argument_role.to_dict(),
            "per_role": {role: prf.to_dict() for role, prf in self.per_role.items()},
        }

    @classmethod
    def from_dict(cls, data: dict) -> "MetricsReport":
        return cls(
            trigger_identification=PRF.from_dict(data["trigger_identification"]),
            trigger_classification=PRF.from_dict(data["trigger_classification"]),
            argument_identification=PRF.from_dict(data["argument_identification"]),
            argument_role=PRF.from_dict(data["argument_role"]),
            per_role={r: PRF.from_dict(d) for r, d in data["per_role"].items()},
        )


def _tuple_sets(sentences, events_per_sentence):
    """Trigger-id, trigger-class and argument tuple sets for one side."""
    tid, tcls, arg = set(), set(), set()
    for sid, (sent, events) in enumerate(zip(sentences, events_per_sentence)):
        spans = {e.id: e.span for e in sent.entities}
        for ev in events:
            key = (sid, ev.trigger_start, ev.trigger_end)
            tid.add(key)
            typed = key + (ev.type,)
            tcls.add(typed)
            for a in ev.args:
                arg.add(typed + (spans[a.entity_id], a.role))
    return tid, tcls, arg


def score_events(
    sentences: list[Sentence], predicted: list[list[EventMention]]
) -> MetricsReport:
    """Score predicted events against the sentences' gold annotations."""
    if len(sentences) != len(predicted):
        raise ValueError(
            f"{len(sentences)} sentences but {len(predicted)} prediction lists"
        )
    gold_tid, gold_tcls, gold_arg = _tuple_sets(sentences, [s.events for s in sentences])
    pred_tid, pred_tcls, pred_arg = _tuple_sets(sentences, predicted)

    arg_id_gold = {t[:5] for t in gold_arg}
    arg_id_pred = {t[:5] for t in pred_arg}

    per_pred: dict[str, int] = {}
    per_gold: dict[str, int] = {}
    per_correct: dict[str, int] = {}
    for sid, (sent, events) in enumerate(zip(sentences, predicted)):
        gold_by_key = {
            (sid, ev.trigger_start, ev.trigger_end, ev.type): ev for ev in sent.events
        }
        for ev in events:
            key = (sid, ev.trigger_start, ev.trigger_end, ev.type)
            gold_ev = gold_by_key.get(key)
            if gold_ev is None:
                continue
            gold_roles = {a.entity_id: a.role for a in gold_ev.args}
            pred_roles = {a.entity_id: a.role for a in ev.args}
            for ent in sent.entities:
                g = gold_roles.get(ent.id, NONE_ROLE)
                p = pred_roles.get(ent.id, NONE_ROLE)
                per_gold[g] = per_gold.get(g, 0) + 1
                per_pred[p] = per_pred.get(p, 0) + 1
                if g == p:
                    per_correct[g] = per_correct.get(g, 0) + 1
    per_role = {
        role: compute_prf(
            per_correct.get(role, 0), per_pred.get(role, 0), per_gold.get(role, 0)
        )
        for role in sorted(set(per_gold) | set(per_pred))
    }

    # argument-id recall counts gold role links, not deduplicated pairs
    return MetricsReport(
        trigger_identification=compute_prf(
            len(pred_tid & gold_tid), len(pred_tid), len(gold_tid)
        ),
        trigger_classification=compute_prf(
            len(pred_tcls & gold_tcls), len(pred_tcls), len(gold_tcls)
        ),
        argument_identification=compute_prf(
            len(arg_id_pred & arg_id_gold), len(arg_id_pred), len(gold_arg)
        ),
        argument_role=compute_prf(
            len(pred_arg & gold_arg), len(pred_arg), len(gold_arg)
        ),
        per_role=per_role,
    )


def evaluate(model: ExtractorModel, sentences: list[Sentence], provider) -> MetricsReport:
    """Run extraction over the sentences and score against gold."""
    predicted = [model.extract_events(s, provider.vectors(s)) for s in sentences]
    return score_events(sentences, predicted)
