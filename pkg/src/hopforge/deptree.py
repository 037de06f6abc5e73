"""CoNLL-U dependency trees with the queries the rule engine needs.

Parses are consumed from files (or recorded service responses), never
computed in process, so nothing here depends on a parsing model.  Named
entity spans ride along either inline (MISC column, ``NE=B-TYPE`` /
``NE=I-TYPE``) or as a sidecar JSONL file keyed by sentence id.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path

N_COLUMNS = 10

WH_LEMMAS = {"who", "whom", "whose", "what", "which", "when", "where", "why", "how"}

ENTITY_TYPES = {
    "PERSON", "NORP", "FACILITY", "ORGANIZATION", "GPE", "LOCATION", "PRODUCT",
    "EVENT", "WORK OF ART", "LAW", "LANGUAGE", "DATE", "TIME", "PERCENT",
    "MONEY", "QUANTITY", "ORDINAL", "CARDINAL",
}


class ConlluParseError(ValueError):
    pass


def canonical_entity_type(label: str) -> str:
    """Map NER label spellings (WORK_OF_ART, ORG, FAC...) onto the 18-type inventory."""
    t = label.strip().upper().replace("_", " ")
    aliases = {"ORG": "ORGANIZATION", "FAC": "FACILITY", "LOC": "LOCATION"}
    t = aliases.get(t, t)
    if t not in ENTITY_TYPES:
        raise ValueError(f"unknown entity type label {label!r}")
    return t


@dataclass(frozen=True)
class DepToken:
    index: int  # 1-based
    form: str
    lemma: str
    upos: str
    head: int  # 0 = root
    deprel: str
    misc: str = "_"


@dataclass(frozen=True)
class NamedSpan:
    start: int  # token indices, inclusive
    end: int
    entity_type: str

    def __post_init__(self):
        if self.start > self.end:
            raise ValueError(f"span start {self.start} > end {self.end}")
        if self.entity_type not in ENTITY_TYPES:
            raise ValueError(f"unknown entity type {self.entity_type!r}")

    def covers(self, index: int) -> bool:
        return self.start <= index <= self.end


@dataclass
class DepTree:
    tokens: list[DepToken]
    sent_id: str | None = None
    ner_spans: list[NamedSpan] = field(default_factory=list)

    def __post_init__(self):
        self._validate()

    def _validate(self):
        n = len(self.tokens)
        roots = [t for t in self.tokens if t.head == 0]
        where = f"sentence {self.sent_id or '<anonymous>'}"
        if len(roots) != 1:
            raise ConlluParseError(f"{where}: expected exactly one root token, found {len(roots)}")
        for t in self.tokens:
            if not (0 <= t.head <= n):
                raise ConlluParseError(f"{where}: token {t.index} head {t.head} out of range")
        # every token must reach the root without revisiting a node
        for t in self.tokens:
            seen = set()
            cur = t
            while cur.head != 0:
                if cur.index in seen:
                    raise ConlluParseError(f"{where}: cyclic head chain at token {t.index}")
                seen.add(cur.index)
                cur = self.tokens[cur.head - 1]

    @property
    def root(self) -> int:
        return next(t.index for t in self.tokens if t.head == 0)

    def token(self, index: int) -> DepToken:
        if not (1 <= index <= len(self.tokens)):
            raise IndexError(f"token index {index} out of range 1..{len(self.tokens)}")
        return self.tokens[index - 1]

    def text(self) -> str:
        return " ".join(t.form for t in self.tokens)

    def surface(self, start: int, end: int) -> str:
        return " ".join(t.form for t in self.tokens[start - 1:end])

    def span_of(self, index: int) -> NamedSpan | None:
        """The named-entity span containing a token, if any."""
        for span in self.ner_spans:
            if span.covers(index):
                return span
        return None


def parse_conllu(text: str) -> list[DepTree]:
    """Parse CoNLL-U text into one validated DepTree per sentence.

    Comment lines are ignored apart from ``# sent_id``; multiword-token
    ranges (``1-2``) and empty nodes (``1.1``) are skipped.
    """
    trees: list[DepTree] = []
    tokens: list[DepToken] = []
    spans: list[tuple[int, int, str]] = []
    sent_id: str | None = None
    open_span: list | None = None  # [start, end, type] while inside a B-/I- run

    def close_span():
        nonlocal open_span
        if open_span is not None:
            spans.append((open_span[0], open_span[1], open_span[2]))
            open_span = None

    def flush():
        nonlocal tokens, spans, sent_id
        close_span()
        if tokens:
            ner = [NamedSpan(s, e, canonical_entity_type(t)) for s, e, t in spans]
            trees.append(DepTree(tokens=tokens, sent_id=sent_id, ner_spans=normalize_spans(ner)))
        tokens, spans, sent_id = [], [], None

    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.rstrip("\r\n")
        if not line.strip():
            flush()
            continue
        if line.startswith("#"):
            body = line.lstrip("#").strip()
            if body.startswith("sent_id"):
                _, _, value = body.partition("=")
                sent_id = value.strip()
            continue
        cols = line.split("\t")
        if len(cols) != N_COLUMNS:
            raise ConlluParseError(f"line {lineno}: expected {N_COLUMNS} columns, got {len(cols)}")
        if "-" in cols[0] or "." in cols[0]:
            continue  # multiword-token range or empty node
        try:
            index = int(cols[0])
            head = int(cols[6])
        except ValueError as e:
            raise ConlluParseError(f"line {lineno}: non-integer id or head: {e}") from e
        misc = cols[9]
        tokens.append(DepToken(index=index, form=cols[1], lemma=cols[2], upos=cols[3],
                               head=head, deprel=cols[7], misc=misc))
        tag = _misc_ne_tag(misc)
        if tag is None or tag == "O":
            close_span()
        else:
            bio, _, etype = tag.partition("-")
            if bio == "B" or open_span is None or open_span[2] != etype:
                close_span()
                open_span = [index, index, etype]
            else:
                open_span[1] = index
    flush()
    return trees


def _misc_ne_tag(misc: str) -> str | None:
    for part in misc.split("|"):
        if part.startswith("NE="):
            return part[3:]
    return None


def to_conllu(tree: DepTree) -> str:
    """Serialize back to CoNLL-U (inverse of parse_conllu up to comments)."""
    lines = []
    if tree.sent_id:
        lines.append(f"# sent_id = {tree.sent_id}")
    for t in tree.tokens:
        lines.append("\t".join([str(t.index), t.form, t.lemma, t.upos, "_", "_",
                                str(t.head), t.deprel, "_", t.misc]))
    return "\n".join(lines) + "\n"


def dependents(tree: DepTree, head_index: int, relation_set) -> list[int]:
    """Indices of tokens headed by head_index whose deprel is in relation_set, surface order."""
    tree.token(head_index)  # raises on invalid index
    rels = set(relation_set)
    return [t.index for t in tree.tokens if t.head == head_index and t.deprel in rels]


def find_wh(tree: DepTree, wh_lemmas=frozenset(WH_LEMMAS)) -> int | None:
    """First token (surface order) whose lowercased lemma is a wh-word, if any."""
    for t in tree.tokens:
        if t.lemma.lower() in wh_lemmas:
            return t.index
    return None


def normalize_spans(spans: list[NamedSpan]) -> list[NamedSpan]:
    """Drop overlaps, keeping the longer span (earlier span on ties)."""
    kept: list[NamedSpan] = []
    for span in sorted(spans, key=lambda s: (-(s.end - s.start), s.start)):
        if not any(k.start <= span.end and span.start <= k.end for k in kept):
            kept.append(span)
    return sorted(kept, key=lambda s: s.start)


def tree_to_dict(tree: DepTree) -> dict:
    return {"sent_id": tree.sent_id,
            "tokens": [[t.index, t.form, t.lemma, t.upos, t.head, t.deprel]
                       for t in tree.tokens],
            "ner": [[s.start, s.end, s.entity_type] for s in tree.ner_spans]}


def tree_from_dict(d: dict) -> DepTree:
    tokens = [DepToken(index=i, form=f, lemma=l, upos=u, head=h, deprel=r)
              for i, f, l, u, h, r in d["tokens"]]
    spans = [NamedSpan(s, e, t) for s, e, t in d.get("ner", [])]
    return DepTree(tokens=tokens, sent_id=d.get("sent_id"), ner_spans=spans)


def load_ner_sidecar(path: str | Path) -> dict[str, list[NamedSpan]]:
    """Sidecar JSONL: {"sent_id": ..., "spans": [{"start_token", "end_token", "type"}]}."""
    result: dict[str, list[NamedSpan]] = {}
    with open(path, encoding="utf-8") as f:
        for lineno, line in enumerate(f, start=1):
            line = line.strip()
            if not line:
                continue
            rec = json.loads(line)
            if "sent_id" not in rec or "spans" not in rec:
                raise ConlluParseError(f"{path}:{lineno}: sidecar line needs sent_id and spans")
            spans = [NamedSpan(int(s["start_token"]), int(s["end_token"]),
                               canonical_entity_type(s["type"])) for s in rec["spans"]]
            result[str(rec["sent_id"])] = normalize_spans(spans)
    return result


def attach_ner(trees: list[DepTree], sidecar: dict[str, list[NamedSpan]]) -> None:
    """Attach sidecar spans to trees in place, matching on sent_id."""
    for tree in trees:
        if tree.sent_id is not None and tree.sent_id in sidecar:
            tree.ner_spans = normalize_spans(list(tree.ner_spans) + sidecar[tree.sent_id])
