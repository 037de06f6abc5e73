"""Dependency-rule extraction of a sub-question's main entity and modifiable details.

The main entity is what the question asks about; details are modifiers or
named entities elsewhere in the question that can be swapped out without
making the question nonsensical.  Rules fire in a fixed order with
first-match-wins and leftmost bindings, so identical trees always produce
identical extractions.
"""

from __future__ import annotations

from dataclasses import dataclass

from .deptree import DepTree, NamedSpan, find_wh

NOUN_TAGS = {"NOUN", "PROPN"}
VERB_TAGS = {"VERB", "AUX"}

SUBJECT_RELATIONS = {"nsubj", "nsubj:pass"}
WH_ATTACH_RELATIONS = {"det", "nsubj", "nsubj:pass"}
DETAIL_HEAD_RELATIONS = {"obl", "obj", "nsubj", "nsubj:pass"}
MODIFIER_RELATIONS = {"nummod", "amod", "nmod", "compound", "flat"}

KIND_NAMED_ENTITY = "named-entity"
KIND_OTHER = "other"


class RuleError(ValueError):
    pass


class NoWhWord(RuleError):
    """The tree contains no wh-word, so no rule can anchor."""


class NoMainEntity(RuleError):
    """No main-entity rule fired; the instance is skipped downstream."""


@dataclass(frozen=True)
class MainEntity:
    token_span: tuple[int, int]  # inclusive
    surface: str
    rule_fired: str  # I.i | I.ii.a | I.ii.b | I.iii

    def covers(self, index: int) -> bool:
        return self.token_span[0] <= index <= self.token_span[1]

    def to_dict(self) -> dict:
        return {"token_span": list(self.token_span), "surface": self.surface,
                "rule_fired": self.rule_fired}


@dataclass(frozen=True)
class ModifiableDetail:
    token_span: tuple[int, int]
    surface: str
    kind: str  # named-entity | other
    entity_type: str | None  # set iff kind == named-entity
    rule_fired: str  # II.ii | II.iii

    def __post_init__(self):
        if self.kind == KIND_NAMED_ENTITY and not self.entity_type:
            raise ValueError("named-entity detail requires an entity_type")
        if self.kind == KIND_OTHER and self.entity_type is not None:
            raise ValueError("'other' detail must not carry an entity_type")

    def to_dict(self) -> dict:
        return {"token_span": list(self.token_span), "surface": self.surface,
                "kind": self.kind, "entity_type": self.entity_type,
                "rule_fired": self.rule_fired}

    @classmethod
    def from_dict(cls, d: dict) -> "ModifiableDetail":
        return cls(token_span=tuple(d["token_span"]), surface=d["surface"], kind=d["kind"],
                   entity_type=d.get("entity_type"), rule_fired=d["rule_fired"])


@dataclass
class RuleBinding:
    """Token indices bound to the rule variables when a rule fired."""
    A: int | None = None
    B: int | None = None
    C: int | None = None
    D: int | None = None
    WH: int | None = None

    def to_dict(self) -> dict:
        return {k: v for k, v in vars(self).items() if v is not None}


def _edges_touching(tree: DepTree, index: int, relations) -> list[int]:
    """Partner indices of edges labelled in `relations` incident to `index`, surface order."""
    partners = []
    tok = tree.token(index)
    if tok.head != 0 and tok.deprel in relations:
        partners.append(tok.head)
    for t in tree.tokens:
        if t.head == index and t.deprel in relations:
            partners.append(t.index)
    return sorted(set(partners))


def extract_main_entity(tree: DepTree) -> tuple[MainEntity, RuleBinding]:
    """Locate the question's main entity, trying the rules strictly in order.

    (i)   the wh-word is the root and has a nominal-subject dependent A;
    (ii)  a word A is linked to the wh-word by det/nsubj/nsubj:pass --
          a nominal A wins directly, a verbal A defers to the head B of
          its relative clause;
    (iii) a word A heads a nominal subject B that directly touches the
          wh-word.

    Ties inside a rule resolve to the leftmost binding.
    """
    wh = find_wh(tree)
    if wh is None:
        raise NoWhWord(f"no wh-word in {tree.text()!r}")

    # rule i: WH is the root; A is a nominal subject headed by it
    if tree.token(wh).head == 0:
        subjects = [t.index for t in tree.tokens
                    if t.head == wh and t.deprel in SUBJECT_RELATIONS]
        if subjects:
            a = min(subjects)
            return _single_token_main(tree, a, "I.i"), RuleBinding(A=a, WH=wh)

    # rule ii: A linked to WH by det/nsubj/nsubj:pass; noun A wins, verbal A
    # defers to the head of its relative clause
    for a in _edges_touching(tree, wh, WH_ATTACH_RELATIONS):
        tok = tree.token(a)
        if tok.upos in NOUN_TAGS:
            return _single_token_main(tree, a, "I.ii.a"), RuleBinding(A=a, WH=wh)
        if tok.upos in VERB_TAGS and tok.deprel == "acl:relcl" and tok.head != 0:
            b = tok.head
            return _single_token_main(tree, b, "I.ii.b"), RuleBinding(A=a, B=b, WH=wh)

    # rule iii: A heads a nominal subject B, and B directly touches the wh-word
    candidates = []
    for b_tok in tree.tokens:
        if b_tok.deprel in SUBJECT_RELATIONS and b_tok.head != 0:
            b = b_tok.index
            touches_wh = tree.token(b).head == wh or tree.token(wh).head == b
            if touches_wh:
                candidates.append((b_tok.head, b))
    if candidates:
        a, b = min(candidates)
        return _single_token_main(tree, a, "I.iii"), RuleBinding(A=a, B=b, WH=wh)

    raise NoMainEntity(f"no main-entity rule fired for {tree.text()!r}")


def _single_token_main(tree: DepTree, index: int, rule: str) -> MainEntity:
    return MainEntity(token_span=(index, index), surface=tree.token(index).form,
                      rule_fired=rule)


def extract_modifiable(tree: DepTree, main: MainEntity,
                       ner: list[NamedSpan]) -> list[ModifiableDetail]:
    """Collect the details of the question that may be swapped for fakes.

    Walks every (C, D) dependency with an obl/obj/nsubj/nsubj:pass label
    where D is not the main entity.  An appositional named entity of C or D
    is emitted first; otherwise D's own named-entity span (if it has one)
    and its nummod/amod/nmod/compound/flat modifiers are emitted.  Tokens
    inside a named-entity span always widen to the whole span.
    """
    details: dict[tuple[int, int], ModifiableDetail] = {}

    def overlap_main(start, end):
        return start <= main.token_span[1] and main.token_span[0] <= end

    def span_for(index: int) -> NamedSpan | None:
        for span in ner:
            if span.covers(index):
                return span
        return None

    def emit_named(span: NamedSpan):
        if overlap_main(span.start, span.end):
            return
        key = (span.start, span.end)
        if key not in details:
            details[key] = ModifiableDetail(
                token_span=key, surface=tree.surface(span.start, span.end),
                kind=KIND_NAMED_ENTITY, entity_type=span.entity_type, rule_fired="II.ii")

    def emit_other(index: int):
        if overlap_main(index, index):
            return
        key = (index, index)
        if key not in details:
            details[key] = ModifiableDetail(
                token_span=key, surface=tree.token(index).form,
                kind=KIND_OTHER, entity_type=None, rule_fired="II.iii")

    for d_tok in tree.tokens:
        if d_tok.head == 0 or d_tok.deprel not in DETAIL_HEAD_RELATIONS:
            continue
        c, d = d_tok.head, d_tok.index
        if overlap_main(d, d):
            continue

        appos_spans = []
        for word in (c, d):
            for partner in _edges_touching(tree, word, {"appos"}):
                span = span_for(partner)
                if span is not None:
                    appos_spans.append(span)
        if appos_spans:
            for span in appos_spans:
                emit_named(span)
            continue

        d_span = span_for(d)
        if d_span is not None:
            emit_named(d_span)
        for m in tree.tokens:
            if m.head != d or m.deprel not in MODIFIER_RELATIONS:
                continue
            m_span = span_for(m.index)
            if m_span is not None:
                emit_named(m_span)
            else:
                emit_other(m.index)

    return [details[k] for k in sorted(details)]
