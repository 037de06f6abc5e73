"""Fake-tuple construction, distractor-paragraph generation and attack assembly.

A fake tuple is a perturbed first sub-question plus the second sub-question
with the bridging answer masked as "[answer]".  Each tuple yields one pair
of generated distractor paragraphs; attacks then swap k of an instance's
non-gold paragraphs for selected distractor paragraphs under the four
attack parameters (count, relatedness, detail kind, second-hop-only).
"""

from __future__ import annotations

import logging
import random
import re
from dataclasses import dataclass

from . import prompts
from .corpus import Paragraph, QAInstance
from .gateway import ChatRequest, Gateway

log = logging.getLogger(__name__)

ANSWER_PLACEHOLDER = "[answer]"
WORD_COUNT_GUIDELINE = (75, 100)


class ForgeError(RuntimeError):
    pass


class MaskingFailed(ForgeError):
    """The first sub-answer does not occur in the second sub-question."""


class GenerationFailed(ForgeError):
    def __init__(self, message: str, raw: str = ""):
        super().__init__(message + (f"\n--- raw completion ---\n{raw}" if raw else ""))
        self.raw = raw


class AssemblyError(ForgeError):
    pass


class InvalidShape(AssemblyError):
    """Instance does not have the 10-paragraph / 2-gold shape; skipped."""


class InsufficientPool(AssemblyError):
    pass


@dataclass
class FakeTuple:
    tuple_id: str
    source_instance: str
    fake_sub_q1: str
    fake_sub_q2_template: str
    avoid_words: tuple[str, str]  # (gold sub-answer 1, gold final answer)
    detail_kind: str  # named-entity | other

    def __post_init__(self):
        if ANSWER_PLACEHOLDER not in self.fake_sub_q2_template:
            raise ValueError(f"template must contain {ANSWER_PLACEHOLDER!r}")
        if not all(self.avoid_words):
            raise ValueError("both avoid words must be nonempty")

    def to_dict(self) -> dict:
        return {"tuple_id": self.tuple_id, "source_instance": self.source_instance,
                "fake_sub_q1": self.fake_sub_q1,
                "fake_sub_q2_template": self.fake_sub_q2_template,
                "avoid_words": list(self.avoid_words), "detail_kind": self.detail_kind}

    @classmethod
    def from_dict(cls, d: dict) -> "FakeTuple":
        return cls(tuple_id=d["tuple_id"], source_instance=d["source_instance"],
                   fake_sub_q1=d["fake_sub_q1"],
                   fake_sub_q2_template=d["fake_sub_q2_template"],
                   avoid_words=tuple(d["avoid_words"]), detail_kind=d["detail_kind"])


@dataclass
class DistractorPair:
    fake_answer_1: str
    paragraph_1: Paragraph
    fake_answer_2: str
    paragraph_2: Paragraph
    tuple_ref: str
    source_instance: str
    detail_kind: str

    def fake_answers_present(self) -> bool:
        return (self.fake_answer_1.lower() in self.paragraph_1.text().lower()
                and self.fake_answer_2.lower() in self.paragraph_2.text().lower())

    def avoid_words_absent(self, avoid_words) -> bool:
        for paragraph in (self.paragraph_1, self.paragraph_2):
            text = paragraph.text().lower()
            if any(w.lower() in text for w in avoid_words if w):
                return False
        return True

    def to_dict(self) -> dict:
        return {"fake_answer_1": self.fake_answer_1,
                "paragraph_1": self.paragraph_1.to_dict(),
                "fake_answer_2": self.fake_answer_2,
                "paragraph_2": self.paragraph_2.to_dict(),
                "tuple_ref": self.tuple_ref, "source_instance": self.source_instance,
                "detail_kind": self.detail_kind}

    @classmethod
    def from_dict(cls, d: dict) -> "DistractorPair":
        return cls(fake_answer_1=d["fake_answer_1"],
                   paragraph_1=Paragraph.from_dict(d["paragraph_1"]),
                   fake_answer_2=d["fake_answer_2"],
                   paragraph_2=Paragraph.from_dict(d["paragraph_2"]),
                   tuple_ref=d["tuple_ref"], source_instance=d["source_instance"],
                   detail_kind=d["detail_kind"])


@dataclass
class AttackConfig:
    k: int = 2
    related: bool = True
    detail_kind_filter: str | None = None
    second_subq_only: bool = False
    seed: int = 0

    def __post_init__(self):
        if self.k not in (2, 4):
            raise ValueError("k must be 2 or 4")
        if self.second_subq_only and self.related:
            raise ValueError("second_subq_only attacks must be unrelated")

    def to_dict(self) -> dict:
        return {"k": self.k, "related": self.related,
                "detail_kind_filter": self.detail_kind_filter,
                "second_subq_only": self.second_subq_only, "seed": self.seed}

    @classmethod
    def from_dict(cls, d: dict) -> "AttackConfig":
        known = {k: v for k, v in d.items() if k in cls.__dataclass_fields__}
        return cls(**known)


@dataclass
class AdversarialInstance:
    base: QAInstance
    replaced_positions: list[int]
    injected: list[tuple[int, Paragraph, dict]]  # (position, paragraph, provenance)
    config: AttackConfig

    @property
    def id(self) -> str:
        return self.base.id

    def attacked_paragraphs(self) -> list[Paragraph]:
        out = list(self.base.paragraphs)
        for position, paragraph, _ in self.injected:
            out[position] = paragraph
        return out

    def attacked_instance(self) -> QAInstance:
        """The attacked view as a plain QAInstance (for prompting/scoring)."""
        return QAInstance(id=self.base.id, question=self.base.question,
                          answer=self.base.answer, paragraphs=self.attacked_paragraphs(),
                          supporting_fact_refs=list(self.base.supporting_fact_refs),
                          question_type=self.base.question_type, valid_shape=True)

    def to_dict(self) -> dict:
        return {"base": self.base.to_dict(),
                "replaced_positions": list(self.replaced_positions),
                "injected": [[pos, para.to_dict(), prov] for pos, para, prov in self.injected],
                "config": self.config.to_dict()}

    @classmethod
    def from_dict(cls, d: dict) -> "AdversarialInstance":
        return cls(base=QAInstance.from_dict(d["base"]),
                   replaced_positions=list(d["replaced_positions"]),
                   injected=[(int(pos), Paragraph.from_dict(para), prov)
                             for pos, para, prov in d["injected"]],
                   config=AttackConfig.from_dict(d["config"]))


def build_fake_tuple(pair, modified_sub_q1: str, detail_kind: str,
                     tuple_id: str | None = None) -> FakeTuple:
    """Mask every occurrence of the first sub-answer in sub-question 2."""
    pattern = re.compile(re.escape(pair.sub_q1_answer), re.IGNORECASE)
    template, n = pattern.subn(ANSWER_PLACEHOLDER, pair.sub_q2)
    if n == 0:
        raise MaskingFailed(
            f"answer {pair.sub_q1_answer!r} not found in {pair.sub_q2!r}")
    return FakeTuple(
        tuple_id=tuple_id or f"{pair.instance_id}#0",
        source_instance=pair.instance_id,
        fake_sub_q1=modified_sub_q1,
        fake_sub_q2_template=template,
        avoid_words=(pair.sub_q1_answer, pair.final_answer),
        detail_kind=detail_kind)


_PAIR_COMPLETION = re.compile(
    r"Fake\s*Answer\s*1\s*:\s*(?P<fa1>.+?)\s*"
    r"Paragraph\s*1\s*:\s*(?P<p1>.+?)\s*"
    r"Fake\s*Answer\s*2\s*:\s*(?P<fa2>.+?)\s*"
    r"Paragraph\s*2\s*:\s*(?P<p2>.+?)\s*$",
    re.IGNORECASE | re.DOTALL)

_SENTENCE_SPLIT = re.compile(r"(?<=[.!?])\s+")


def split_sentences(text: str) -> list[str]:
    return [s for s in _SENTENCE_SPLIT.split(text.strip()) if s]


def generate_distractor_pair(fake: FakeTuple, gold_paragraphs, gateway: Gateway,
                             max_retries: int = 3) -> DistractorPair:
    """One chat call per attempt; parsed, validated, regenerated on failure."""
    last_raw = ""
    for attempt in range(max_retries + 1):
        req = ChatRequest(
            system_prompt=prompts.DISTRACTOR_PARAGRAPH_SYSTEM_PROMPT,
            messages=[("user", prompts.distractor_user_message(
                fake.fake_sub_q1, fake.fake_sub_q2_template, gold_paragraphs,
                fake.avoid_words))],
            temperature=0.0, max_tokens=800, seed=attempt)
        last_raw = gateway.chat(req)[0]
        m = _PAIR_COMPLETION.search(last_raw)
        if not m:
            log.warning("tuple %s: unparseable completion (attempt %d)",
                        fake.tuple_id, attempt + 1)
            continue
        pair = DistractorPair(
            fake_answer_1=m.group("fa1").strip(),
            paragraph_1=Paragraph(title=m.group("fa1").strip(),
                                  sentences=split_sentences(m.group("p1"))),
            fake_answer_2=m.group("fa2").strip(),
            paragraph_2=Paragraph(title=m.group("fa2").strip(),
                                  sentences=split_sentences(m.group("p2"))),
            tuple_ref=fake.tuple_id, source_instance=fake.source_instance,
            detail_kind=fake.detail_kind)
        if not pair.fake_answers_present():
            log.warning("tuple %s: fake answer missing from its paragraph (attempt %d)",
                        fake.tuple_id, attempt + 1)
            continue
        if not pair.avoid_words_absent(fake.avoid_words):
            log.warning("tuple %s: avoid word leaked into a paragraph (attempt %d)",
                        fake.tuple_id, attempt + 1)
            continue
        for paragraph in (pair.paragraph_1, pair.paragraph_2):
            lo, hi = WORD_COUNT_GUIDELINE
            if not (lo <= paragraph.word_count() <= hi):
                log.info("tuple %s: paragraph word count %d outside %d-%d (kept)",
                         fake.tuple_id, paragraph.word_count(), lo, hi)
        return pair
    raise GenerationFailed(
        f"tuple {fake.tuple_id}: no valid distractor pair after {max_retries + 1} attempts",
        raw=last_raw)


def _pick_sorted(rng: random.Random, items: list, n: int) -> list:
    """Seeded sample that is stable under pool reordering."""
    ordered = sorted(items, key=lambda p: p.tuple_ref)
    return rng.sample(ordered, n)


def assemble_attack(instance: QAInstance, pool: list[DistractorPair],
                    cfg: AttackConfig) -> AdversarialInstance:
    """Swap k non-gold paragraphs for distractor paragraphs per the config.

    related: both paragraphs of k/2 of this instance's own pairs.
    unrelated: k/2 first-hop plus k/2 second-hop paragraphs, all from
    distinct tuples (never both sides of the same tuple).
    second_subq_only: k second-hop paragraphs from k distinct tuples.
    """
    if not instance.valid_shape:
        raise InvalidShape(f"instance {instance.id} lacks the 10/2 shape; skipping")

    candidates = list(pool)
    if cfg.detail_kind_filter:
        candidates = [p for p in candidates if p.detail_kind == cfg.detail_kind_filter]
    by_tuple = {}
    for p in candidates:
        by_tuple.setdefault(p.tuple_ref, p)
    candidates = list(by_tuple.values())

    rng = random.Random(f"{cfg.seed}:{instance.id}")
    selections: list[tuple[Paragraph, dict]] = []

    def provenance(pair: DistractorPair, hop: int) -> dict:
        return {"tuple_ref": pair.tuple_ref, "source_instance": pair.source_instance,
                "hop": hop, "fake_answer": (pair.fake_answer_1 if hop == 1
                                            else pair.fake_answer_2),
                "fake_answer_1": pair.fake_answer_1, "fake_answer_2": pair.fake_answer_2,
                "detail_kind": pair.detail_kind}

    if cfg.related:
        own = [p for p in candidates if p.source_instance == instance.id]
        need = cfg.k // 2
        if len(own) < need:
            raise InsufficientPool(
                f"instance {instance.id}: related attack needs {need} own pairs, have {len(own)}")
        for pair in _pick_sorted(rng, own, need):
            selections.append((pair.paragraph_1, provenance(pair, 1)))
            selections.append((pair.paragraph_2, provenance(pair, 2)))
    elif cfg.second_subq_only:
        if len(candidates) < cfg.k:
            raise InsufficientPool(
                f"instance {instance.id}: second-sub-q attack needs {cfg.k} distinct "
                f"tuples, have {len(candidates)}")
        for pair in _pick_sorted(rng, candidates, cfg.k):
            selections.append((pair.paragraph_2, provenance(pair, 2)))
    else:
        if len(candidates) < cfg.k:
            raise InsufficientPool(
                f"instance {instance.id}: unrelated attack needs {cfg.k} distinct "
                f"tuples, have {len(candidates)}")
        chosen = _pick_sorted(rng, candidates, cfg.k)
        half = cfg.k // 2
        for pair in chosen[:half]:
            selections.append((pair.paragraph_1, provenance(pair, 1)))
        for pair in chosen[half:]:
            selections.append((pair.paragraph_2, provenance(pair, 2)))

    non_gold = [i for i, p in enumerate(instance.paragraphs) if not p.gold]
    positions = sorted(rng.sample(non_gold, cfg.k))
    injected = [(pos, para, prov) for pos, (para, prov) in zip(positions, selections)]
    return AdversarialInstance(base=instance, replaced_positions=positions,
                               injected=injected, config=cfg)


def export_review_batch(dataset, sample_size: int, seed: int) -> list[dict]:
    """Seeded uniform sample of entries rendered as human-review items."""
    entries = list(dataset.entries)
    if not entries:
        raise ValueError("dataset is empty")
    if sample_size > len(entries):
        log.warning("sample_size %d > dataset size %d; clamping", sample_size, len(entries))
        sample_size = len(entries)
    rng = random.Random(seed)
    sample = rng.sample(entries, sample_size)

    items = []
    for entry in sample:
        base = entry.base
        gold_lines = []
        for title, sent_idx in base.supporting_fact_refs:
            for p in base.paragraphs:
                if p.title == title and 0 <= sent_idx < len(p.sentences):
                    gold_lines.append(p.sentences[sent_idx])

        fake_answers = []
        distractor_lines = []
        incomplete = False
        for _, paragraph, prov in entry.injected:
            if not prov or "fake_answer" not in prov:
                incomplete = True
                continue
            pair_answers = [a for a in (prov.get("fake_answer_1"), prov.get("fake_answer_2")) if a]
            for name in pair_answers:
                if name not in fake_answers:
                    fake_answers.append(name)
            for sentence in paragraph.sentences:
                low = sentence.lower()
                if any(a.lower() in low for a in pair_answers) and sentence not in distractor_lines:
                    distractor_lines.append(sentence)

        items.append({"instance_id": entry.id, "question": base.question,
                      "answer": base.answer, "gold_lines": gold_lines,
                      "distractor_lines": distractor_lines,
                      "fake_answers": fake_answers, "incomplete": incomplete})
    return items
