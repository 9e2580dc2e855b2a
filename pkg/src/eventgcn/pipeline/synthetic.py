"""Synthetic commodity-news corpus generator.

Sentences follow a template grammar built to stress argument-role
disambiguation: 2-4 quantity or date entities of identical type per
clause whose role is signalled only by the governing preposition (by
= difference, from = initial value, to = final value, in = reference
point, since = earlier reference point), prepositional phrases in
shuffled order, an optional forecast phrase whose quantity belongs to
no event, and optional second clauses whose entities are negatives
for the other clause's trigger. Dependency heads follow fixed rules
(finite verb is the clause head, subject nouns chain into nsubj,
numbers chain into their unit noun, prepositions attach as case
markers), so the corpus is parser-free and fully deterministic for a
given seed.
"""

from __future__ import annotations

import numpy as np

from ..corpus import (
    Argument,
    Document,
    EntityMention,
    EventMention,
    Sentence,
    Token,
    validate_document,
)

SUBJECTS = [
    ("U.S.", "crude", "stockpiles"),
    ("Saudi", "oil", "output"),
    ("China", "gasoline", "imports"),
    ("Russia", "diesel", "exports"),
    ("India", "fuel", "demand"),
    ("Nigeria", "gas", "production"),
]

UP_VERBS = ["soared", "climbed", "jumped", "surged", "rose"]
DOWN_VERBS = ["fell", "dropped", "slid", "plunged", "declined"]

MULTIPLIERS = ["million", "billion", "thousand"]
UNITS = ["barrels", "tonnes", "bushels", "ounces"]
MONTHS = [
    "January", "February", "March", "April", "May", "June",
    "July", "August", "September", "October", "November", "December",
]

QUANTITY_PREPS = [("by", "difference"), ("from", "initial_value"), ("to", "final_value")]
DATE_PREPS = [("in", "reference_point"), ("since", "initial_reference_point")]


def _pick(rng, seq):
    return seq[int(rng.integers(len(seq)))]


def _number(rng) -> str:
    return f"{int(rng.integers(1, 999))}.{int(rng.integers(0, 1000)):03d}"


class _ClauseDraft:
    """Tokens with absolute 1-based heads plus clause-local annotations."""

    def __init__(self, offset: int):
        self.offset = offset
        self.tokens: list[Token] = []
        self.entities: list[tuple[int, int, str, str | None]] = []
        self.trigger: int = 0
        self.event_type: str = ""

    @property
    def next_index(self) -> int:
        return self.offset + len(self.tokens) + 1

    def add(self, text: str, pos: str, head: int, deprel: str) -> int:
        self.tokens.append(Token(text=text, pos=pos, head=head, deprel=deprel))
        return self.offset + len(self.tokens)


def _add_quantity(draft: _ClauseDraft, rng, head: int, deprel: str) -> tuple[int, int]:
    """num -> mult -> unit chain; returns the entity span."""
    start = draft.next_index
    mult_idx = start + 1
    unit_idx = start + 2
    draft.add(_number(rng), "NUM", mult_idx, "compound")
    draft.add(_pick(rng, MULTIPLIERS), "NUM", unit_idx, "nummod")
    draft.add(_pick(rng, UNITS), "NOUN", head, deprel)
    return (start, unit_idx)


def _build_clause(
    rng, offset: int, forecast_prob: float,
    marker: str | None = None, head_verb: int = 0,
) -> _ClauseDraft:
    draft = _ClauseDraft(offset)
    n_marker = 1 if marker else 0
    attr_idx = offset + n_marker + 3
    verb_idx = attr_idx + 1

    if marker == "while":
        draft.add("while", "SCONJ", verb_idx, "mark")
    elif marker == "and":
        draft.add("and", "CCONJ", verb_idx, "cc")

    country, commodity, attribute = _pick(rng, SUBJECTS)
    c_idx = draft.add(country, "PROPN", attr_idx, "compound")
    m_idx = draft.add(commodity, "NOUN", attr_idx, "compound")
    draft.add(attribute, "NOUN", verb_idx, "nsubj")
    draft.entities.append((c_idx, c_idx, "Country", "supplier_consumer"))
    draft.entities.append((m_idx, m_idx, "Commodity", "item"))
    draft.entities.append((attr_idx, attr_idx, "Financial_attribute", "attribute"))

    going_up = bool(rng.integers(2))
    verb = _pick(rng, UP_VERBS if going_up else DOWN_VERBS)
    draft.event_type = "movement-up-gain" if going_up else "movement-down-loss"
    if marker == "while":
        verb_rel = "advcl"
    elif marker == "and":
        verb_rel = "conj"
    else:
        verb_rel = "root"
    draft.trigger = draft.add(verb, "VERB", head_verb, verb_rel)
    assert draft.trigger == verb_idx

    phrases: list[tuple[str, str, str]] = []
    n_quantity = int(rng.integers(1, 4))
    order = rng.permutation(len(QUANTITY_PREPS))[:n_quantity]
    for i in sorted(order.tolist()):
        prep, role = QUANTITY_PREPS[i]
        phrases.append(("quantity", prep, role))
    n_date = int(rng.integers(0, 3))
    order = rng.permutation(len(DATE_PREPS))[:n_date]
    for i in sorted(order.tolist()):
        prep, role = DATE_PREPS[i]
        phrases.append(("date", prep, role))
    rng.shuffle(phrases)

    for kind, prep, role in phrases:
        if kind == "quantity":
            prep_idx = draft.next_index
            draft.add(prep, "ADP", prep_idx + 3, "case")
            span = _add_quantity(draft, rng, verb_idx, "obl")
            draft.entities.append((span[0], span[1], "Quantity", role))
        else:
            prep_idx = draft.next_index
            draft.add(prep, "ADP", prep_idx + 1, "case")
            d_idx = draft.add(_pick(rng, MONTHS), "PROPN", verb_idx, "obl")
            draft.entities.append((d_idx, d_idx, "Date", role))

    if rng.random() < forecast_prob:
        against_idx = draft.next_index
        fc_idx = against_idx + 1
        draft.add("against", "ADP", fc_idx, "case")
        draft.add("forecasts", "NOUN", verb_idx, "obl")
        draft.add("of", "ADP", fc_idx + 4, "case")
        span = _add_quantity(draft, rng, fc_idx, "nmod")
        draft.entities.append((span[0], span[1], "Quantity", None))

    return draft


def make_sentence(
    rng, doc_id: str, index: int,
    two_clause_prob: float = 0.3, forecast_prob: float = 0.35,
) -> Sentence:
    clauses = [_build_clause(rng, 0, forecast_prob)]
    if rng.random() < two_clause_prob:
        marker = "while" if rng.integers(2) else "and"
        clauses.append(
            _build_clause(
                rng, len(clauses[0].tokens), forecast_prob,
                marker=marker, head_verb=clauses[0].trigger,
            )
        )

    tokens: list[Token] = []
    entities: list[EntityMention] = []
    events: list[EventMention] = []
    for clause in clauses:
        tokens.extend(clause.tokens)
        args = []
        for start, end, etype, role in clause.entities:
            ent_id = f"e{len(entities) + 1}"
            entities.append(EntityMention(ent_id, start, end, etype))
            if role is not None:
                args.append(Argument(ent_id, role))
        events.append(EventMention(clause.trigger, clause.trigger, clause.event_type, args))
    return Sentence(
        doc_id=doc_id, index=index, tokens=tokens, entities=entities, events=events
    )


def generate_corpus(
    n_sentences: int, seed: int,
    two_clause_prob: float = 0.3, forecast_prob: float = 0.35,
) -> list[Document]:
    """Deterministic corpus of documents holding 1-3 sentences each."""
    if n_sentences < 1:
        raise ValueError(f"n_sentences must be positive, got {n_sentences}")
    rng = np.random.default_rng(seed)
    docs: list[Document] = []
    produced = 0
    while produced < n_sentences:
        size = min(int(rng.integers(1, 4)), n_sentences - produced)
        doc_id = f"syn-{seed}-{len(docs):04d}"
        sentences = [
            make_sentence(rng, doc_id, i, two_clause_prob, forecast_prob)
            for i in range(size)
        ]
        doc = Document(doc_id=doc_id, sentences=sentences)
        validate_document(doc)
        docs.append(doc)
        produced += size
    return docs
