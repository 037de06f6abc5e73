"""Load, validate and persist the benchmark data model.

Three file formats live here: the HotpotQA distractor-setting JSON array,
line-delimited sub-question annotations, and the line-delimited adversarial
dataset (manifest line first).  Instances that break the 10-paragraph /
2-gold shape are kept but flagged so that downstream attack assembly can
skip them without losing provenance.
"""

from __future__ import annotations

import json
import logging
from dataclasses import dataclass, field
from pathlib import Path

from .util import atomic_write_text, canonical_digest

log = logging.getLogger(__name__)

EXPECTED_PARAGRAPHS = 10
EXPECTED_GOLD = 2

SUBQA_FIELDS = ("instance_id", "sub_q1", "sub_q1_answer", "sub_q2", "final_answer")


class CorpusParseError(ValueError):
    """A record could not be parsed; message names the record and field."""


class SubQAValidationError(ValueError):
    """A sub-question annotation contradicts the instance it points at."""


@dataclass
class Paragraph:
    title: str
    sentences: list[str]
    gold: bool = False

    def text(self) -> str:
        return " ".join(self.sentences)

    def word_count(self) -> int:
        return len(self.text().split())

    def to_dict(self) -> dict:
        return {"title": self.title, "sentences": list(self.sentences), "gold": self.gold}

    @classmethod
    def from_dict(cls, d: dict) -> "Paragraph":
        return cls(title=d["title"], sentences=list(d["sentences"]), gold=bool(d["gold"]))


@dataclass
class QAInstance:
    id: str
    question: str
    answer: str
    paragraphs: list[Paragraph]
    supporting_fact_refs: list[tuple[str, int]]
    question_type: str | None = None
    valid_shape: bool = True

    def gold_paragraphs(self) -> list[Paragraph]:
        return [p for p in self.paragraphs if p.gold]

    def to_dict(self) -> dict:
        return {
            "id": self.id,
            "question": self.question,
            "answer": self.answer,
            "paragraphs": [p.to_dict() for p in self.paragraphs],
            "supporting_fact_refs": [[t, i] for t, i in self.supporting_fact_refs],
            "question_type": self.question_type,
            "valid_shape": self.valid_shape,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "QAInstance":
        return cls(
            id=d["id"],
            question=d["question"],
            answer=d["answer"],
            paragraphs=[Paragraph.from_dict(p) for p in d["paragraphs"]],
            supporting_fact_refs=[(t, i) for t, i in d["supporting_fact_refs"]],
            question_type=d.get("question_type"),
            valid_shape=bool(d.get("valid_shape", True)),
        )


@dataclass
class SubQuestionPair:
    instance_id: str
    sub_q1: str
    sub_q1_answer: str
    sub_q2: str
    final_answer: str

    def to_dict(self) -> dict:
        return {k: getattr(self, k) for k in SUBQA_FIELDS}


def _shape_ok(paragraphs: list[Paragraph]) -> bool:
    return (
        len(paragraphs) == EXPECTED_PARAGRAPHS
        and sum(1 for p in paragraphs if p.gold) == EXPECTED_GOLD
    )


def load_hotpot(path: str | Path) -> list[QAInstance]:
    """Read a HotpotQA distractor-setting JSON array into QAInstances.

    Gold flags come from the supporting-fact titles.  Records that violate
    the 10-paragraph / 2-gold shape are kept but flagged (valid_shape=False)
    with a warning; structurally broken records raise CorpusParseError.
    """
    with open(path, encoding="utf-8") as f:
        try:
            records = json.load(f)
        except json.JSONDecodeError as e:
            raise CorpusParseError(f"{path}: not valid JSON: {e}") from e
    if not isinstance(records, list):
        raise CorpusParseError(f"{path}: expected a JSON array of records")

    instances = []
    for idx, rec in enumerate(records):
        instances.append(_parse_hotpot_record(rec, idx))
    return instances


def _parse_hotpot_record(rec: dict, idx: int) -> QAInstance:
    def require(name):
        if not isinstance(rec, dict) or name not in rec:
            raise CorpusParseError(f"record {idx}: missing field '{name}'")
        return rec[name]

    rid = require("_id")
    question = require("question")
    answer = require("answer")
    context = require("context")
    supporting = require("supporting_facts")

    sf_refs: list[tuple[str, int]] = []
    for j, sf in enumerate(supporting):
        if not isinstance(sf, (list, tuple)) or len(sf) != 2:
            raise CorpusParseError(f"record {idx}: supporting_facts[{j}] is not a [title, index] pair")
        sf_refs.append((str(sf[0]), int(sf[1])))
    gold_titles = {t for t, _ in sf_refs}

    paragraphs = []
    for j, item in enumerate(context):
        if not isinstance(item, (list, tuple)) or len(item) != 2:
            raise CorpusParseError(f"record {idx}: context[{j}] is not a [title, sentences] pair")
        title, sentences = item[0], item[1]
        if not title:
            raise CorpusParseError(f"record {idx}: context[{j}] has an empty title")
        if not isinstance(sentences, list) or not sentences:
            raise CorpusParseError(f"record {idx}: context[{j}] has no sentences")
        paragraphs.append(Paragraph(title=str(title), sentences=[str(s) for s in sentences],
                                    gold=str(title) in gold_titles))

    if not answer:
        raise CorpusParseError(f"record {idx}: field 'answer' is empty")
    for title in gold_titles:
        if title not in {p.title for p in paragraphs}:
            raise CorpusParseError(
                f"record {idx}: supporting_facts title {title!r} matches no context paragraph")

    valid = _shape_ok(paragraphs)
    if not valid:
        n_gold = sum(1 for p in paragraphs if p.gold)
        log.warning("record %s (%s): %d paragraphs / %d gold, expected %d/%d; flagged",
                    idx, rid, len(paragraphs), n_gold, EXPECTED_PARAGRAPHS, EXPECTED_GOLD)

    return QAInstance(
        id=str(rid),
        question=str(question),
        answer=str(answer),
        paragraphs=paragraphs,
        supporting_fact_refs=sf_refs,
        question_type=rec.get("type"),
        valid_shape=valid,
    )


def load_subqa(path: str | Path, instances: list[QAInstance] | None = None) -> list[SubQuestionPair]:
    """Read line-delimited sub-question annotations, in file order.

    When `instances` is supplied, unresolved instance ids are reported via a
    warning and a pair whose final_answer disagrees with its instance's
    answer raises SubQAValidationError.
    """
    by_id = {inst.id: inst for inst in instances} if instances is not None else None
    pairs: list[SubQuestionPair] = []
    seen: set[str] = set()
    with open(path, encoding="utf-8") as f:
        for lineno, line in enumerate(f, start=1):
            line = line.strip()
            if not line:
                continue
            try:
                rec = json.loads(line)
            except json.JSONDecodeError as e:
                raise CorpusParseError(f"{path}:{lineno}: not valid JSON: {e}") from e
            for name in SUBQA_FIELDS:
                if name not in rec:
                    raise CorpusParseError(f"{path}:{lineno}: missing field '{name}'")
                if not rec[name] and name in ("sub_q1", "sub_q2", "instance_id"):
                    raise CorpusParseError(f"{path}:{lineno}: field '{name}' is empty")
            pair = SubQuestionPair(**{k: str(rec[k]) for k in SUBQA_FIELDS})
            if pair.instance_id in seen:
                raise CorpusParseError(f"{path}:{lineno}: duplicate instance_id {pair.instance_id!r}")
            seen.add(pair.instance_id)

            if by_id is not None:
                inst = by_id.get(pair.instance_id)
                if inst is None:
                    log.warning("%s:%d: instance_id %r matches no loaded instance",
                                path, lineno, pair.instance_id)
                elif pair.final_answer != inst.answer:
                    raise SubQAValidationError(
                        f"{path}:{lineno}: final_answer {pair.final_answer!r} does not match "
                        f"instance answer {inst.answer!r}")
            pairs.append(pair)
    return pairs


def word_count_stats(paragraphs_a, paragraphs_b) -> tuple[float, float]:
    """Mean whitespace-token count per paragraph for two paragraph sets (titles excluded)."""
    a = list(paragraphs_a)
    b = list(paragraphs_b)
    if not a or not b:
        raise ValueError("word_count_stats requires two nonempty paragraph sets")
    mean_a = sum(p.word_count() for p in a) / len(a)
    mean_b = sum(p.word_count() for p in b) / len(b)
    return (mean_a, mean_b)


@dataclass
class DatasetManifest:
    config_digest: str
    seed: int
    tool_version: str

    def to_dict(self) -> dict:
        return {"kind": "manifest", "config_digest": self.config_digest,
                "seed": self.seed, "tool_version": self.tool_version}


@dataclass
class AdversarialDataset:
    """Generated attack entries plus the manifest describing how they were made."""
    entries: list  # of forge.AdversarialInstance
    manifest: DatasetManifest

    @classmethod
    def build(cls, entries, config: dict, seed: int, tool_version: str) -> "AdversarialDataset":
        ids = [e.id for e in entries]
        if len(ids) != len(set(ids)):
            raise ValueError("adversarial dataset entry ids must be unique")
        return cls(entries=list(entries),
                   manifest=DatasetManifest(canonical_digest(config), seed, tool_version))


def save_dataset(dataset: AdversarialDataset, path: str | Path) -> None:
    """Write manifest line plus one JSON entry per line, atomically."""
    lines = [json.dumps(dataset.manifest.to_dict(), ensure_ascii=False)]
    lines += [json.dumps(e.to_dict(), ensure_ascii=False) for e in dataset.entries]
    atomic_write_text(path, "".join(l + "\n" for l in lines))


def load_dataset(path: str | Path) -> AdversarialDataset:
    """Inverse of save_dataset; round-trips field-by-field."""
    from .forge import AdversarialInstance  # entries are forge values; runtime import avoids a cycle

    with open(path, encoding="utf-8") as f:
        lines = [l for l in (line.strip() for line in f) if l]
    if not lines:
        raise CorpusParseError(f"{path}: empty dataset file")
    head = json.loads(lines[0])
    if head.get("kind") != "manifest":
        raise CorpusParseError(f"{path}: first line is not a manifest")
    manifest = DatasetManifest(config_digest=head["config_digest"], seed=int(head["seed"]),
                               tool_version=head["tool_version"])
    entries = [AdversarialInstance.from_dict(json.loads(l)) for l in lines[1:]]
    ids = [e.id for e in entries]
    if len(ids) != len(set(ids)):
        raise CorpusParseError(f"{path}: duplicate entry ids")
    return AdversarialDataset(entries=entries, manifest=manifest)
