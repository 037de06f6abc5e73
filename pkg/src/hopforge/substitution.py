"""Candidate generation for modifiable details.

Named-entity details get a typed fake entity from the chat model; "other"
details get masked-LM proposals filtered by three empirical constraints
(sentence similarity, word similarity, token probability).  All scoring is
recorded on the candidate so rejected proposals stay auditable.
"""

from __future__ import annotations

import logging
import re
from dataclasses import dataclass

from . import prompts
from .gateway import ChatRequest, Gateway, MASK_MARKER, cosine
from .rules import KIND_NAMED_ENTITY, KIND_OTHER, ModifiableDetail

log = logging.getLogger(__name__)

SOURCE_MLM = "mlm"
SOURCE_FAKE_ENTITY = "fake-entity"

FAKE_ENTITY_BATCH_LIMIT = 20


class SubstitutionError(ValueError):
    pass


class GenerationParseError(RuntimeError):
    """The chat response did not follow the indexed format; raw text attached."""

    def __init__(self, message: str, raw: str):
        super().__init__(f"{message}\n--- raw completion ---\n{raw}")
        self.raw = raw


@dataclass
class ConstraintConfig:
    max_sentence_sim: float = 0.991
    max_word_sim: float = 0.4
    min_token_prob: float = 0.001
    top_k: int = 10

    def __post_init__(self):
        if not (0 <= self.max_sentence_sim <= 1 and 0 <= self.max_word_sim <= 1):
            raise ValueError("similarity bounds must lie in [0, 1]")
        if not (0 < self.min_token_prob < 1):
            raise ValueError("min_token_prob must lie in (0, 1)")
        if self.top_k < 1:
            raise ValueError("top_k must be >= 1")

    @classmethod
    def from_dict(cls, d: dict) -> "ConstraintConfig":
        known = {k: v for k, v in d.items() if k in cls.__dataclass_fields__}
        return cls(**known)


@dataclass
class Candidate:
    replacement: str
    source: str  # mlm | fake-entity
    sentence_sim: float | None = None
    word_sim: float | None = None
    token_prob: float | None = None
    accepted: bool = False
    rejection_reason: str | None = None  # sentence_sim | word_sim | token_prob

    def __post_init__(self):
        if self.source == SOURCE_MLM:
            if None in (self.sentence_sim, self.word_sim, self.token_prob):
                raise ValueError("mlm candidate requires all three scores")

    def to_dict(self) -> dict:
        return {"replacement": self.replacement, "source": self.source,
                "sentence_sim": self.sentence_sim, "word_sim": self.word_sim,
                "token_prob": self.token_prob, "accepted": self.accepted,
                "rejection_reason": self.rejection_reason}


def check_constraints(sentence_sim: float, word_sim: float, token_prob: float,
                      cfg: ConstraintConfig) -> tuple[bool, str | None]:
    """The acceptance predicate; returns (accepted, first violated constraint)."""
    if not sentence_sim < cfg.max_sentence_sim:
        return False, "sentence_sim"
    if not word_sim < cfg.max_word_sim:
        return False, "word_sim"
    if not token_prob > cfg.min_token_prob:
        return False, "token_prob"
    return True, None


def _span_pattern(surface: str) -> re.Pattern:
    return re.compile(r"(?<!\w)" + re.escape(surface) + r"(?!\w)")


def _locate(text: str, surface: str, occurrence: int = 0) -> tuple[int, int]:
    matches = list(_span_pattern(surface).finditer(text))
    if not matches:
        raise SubstitutionError(f"detail {surface!r} not found in {text!r}")
    if occurrence >= len(matches):
        raise SubstitutionError(
            f"occurrence {occurrence} of {surface!r} not found (only {len(matches)})")
    m = matches[occurrence]
    return m.start(), m.end()


def mask_detail(question: str, detail: ModifiableDetail, occurrence: int = 0) -> str:
    """The question with the detail span replaced by the mask marker."""
    start, end = _locate(question, detail.surface, occurrence)
    return question[:start] + MASK_MARKER + question[end:]


def propose_mlm_candidates(question: str, detail: ModifiableDetail, gateway: Gateway,
                           cfg: ConstraintConfig | None = None,
                           occurrence: int = 0) -> list[Candidate]:
    """Constraint-filtered masked-LM proposals for an "other" detail.

    Every proposal is scored (sentence similarity of original vs modified
    question, word similarity of original vs replacement word, fill
    probability of the replacement token) and returned with its accept flag,
    accepted candidates first, descending token probability.
    """
    cfg = cfg or ConstraintConfig()
    if detail.kind != KIND_OTHER:
        raise SubstitutionError(f"masked-LM proposals need an 'other' detail, got {detail.kind}")
    masked = mask_detail(question, detail, occurrence)
    fills = gateway.fill_mask(masked, top_k=cfg.top_k)

    original_word = detail.surface
    candidates = []
    for token, prob in fills:
        new_question = masked.replace(MASK_MARKER, token)
        if new_question.lower() == question.lower():
            sentence_sim = 1.0  # identical sentence, no embedding call needed
        else:
            vecs = gateway.embed([question, new_question])
            sentence_sim = cosine(vecs[0], vecs[1])
        wvecs = gateway.word_vec([original_word, token])
        word_sim = cosine(wvecs[0], wvecs[1])
        accepted, reason = check_constraints(sentence_sim, word_sim, prob, cfg)
        candidates.append(Candidate(replacement=token, source=SOURCE_MLM,
                                    sentence_sim=sentence_sim, word_sim=word_sim,
                                    token_prob=prob, accepted=accepted,
                                    rejection_reason=reason))
    candidates.sort(key=lambda c: (not c.accepted, -c.token_prob))
    return candidates


_INDEXED_LINE = re.compile(r"^\s*(\d+)[.):]\s*(.+?)\s*$")


def parse_indexed_response(text: str, expected: int) -> list[str]:
    """Parse "i. entity" lines; every index 1..expected must be present."""
    found: dict[int, str] = {}
    for line in text.splitlines():
        m = _INDEXED_LINE.match(line)
        if m:
            found.setdefault(int(m.group(1)), m.group(2))
    missing = [i for i in range(1, expected + 1) if i not in found]
    if missing:
        raise GenerationParseError(f"response missing indices {missing}", raw=text)
    return [found[i] for i in range(1, expected + 1)]


def propose_fake_entities(details: list[ModifiableDetail], gateway: Gateway,
                          max_retries: int = 3) -> list[Candidate]:
    """Typed fake entities for named-entity details, batched up to 20 per request.

    A replacement equal to its original (case-insensitive) is regenerated
    with a fresh request seed; the retry budget exhausting raises.
    """
    for d in details:
        if d.kind != KIND_NAMED_ENTITY:
            raise SubstitutionError(f"fake entities need named-entity details, got {d.kind}")

    results: dict[int, Candidate] = {}
    pending = list(range(len(details)))
    for attempt in range(max_retries + 1):
        if not pending:
            break
        for chunk_start in range(0, len(pending), FAKE_ENTITY_BATCH_LIMIT):
            chunk = pending[chunk_start:chunk_start + FAKE_ENTITY_BATCH_LIMIT]
            batch = [(details[i].entity_type, details[i].surface) for i in chunk]
            req = ChatRequest(
                system_prompt=prompts.FAKE_ENTITY_SYSTEM_PROMPT,
                messages=[("user", prompts.fake_entity_user_message(batch))],
                temperature=0.0, max_tokens=40 * len(batch), seed=attempt)
            reply = gateway.chat(req)[0]
            names = parse_indexed_response(reply, expected=len(batch))
            for i, name in zip(chunk, names):
                if name.strip().lower() == details[i].surface.strip().lower():
                    log.warning("fake entity for %r equals the original, retrying",
                                details[i].surface)
                    continue
                results[i] = Candidate(replacement=name.strip(), source=SOURCE_FAKE_ENTITY,
                                       accepted=True)
        pending = [i for i in range(len(details)) if i not in results]
    if pending:
        raise SubstitutionError(
            f"could not generate distinct fake entities for {[details[i].surface for i in pending]} "
            f"after {max_retries + 1} attempts")
    return [results[i] for i in range(len(details))]


def propose_fake_entity(detail: ModifiableDetail, gateway: Gateway,
                        max_retries: int = 3) -> Candidate:
    return propose_fake_entities([detail], gateway, max_retries=max_retries)[0]


def apply_replacement(question: str, detail: ModifiableDetail, candidate: Candidate,
                      occurrence: int = 0) -> str:
    """Replace exactly the detail span's occurrence; everything else byte-identical."""
    if not candidate.accepted:
        raise SubstitutionError(f"candidate {candidate.replacement!r} was not accepted")
    if candidate.replacement == detail.surface:
        return question
    start, end = _locate(question, detail.surface, occurrence)
    return question[:start] + candidate.replacement + question[end:]
