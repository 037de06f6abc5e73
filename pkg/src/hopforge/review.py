"""Human contradiction-screening workflow: review items, metrics, HTTP API.

Reviewers see the question, the supporting-fact lines, the distractor lines
that mention a fake answer, and 4-5 shuffled options; they pick one and may
flag contradictory sources.  Responses append to a line-delimited log that
is replayed on startup, so the service carries no database dependency and
metrics are always recomputable from the export.
"""

from __future__ import annotations

import json
import logging
import random
import threading
import time
from dataclasses import dataclass, field
from pathlib import Path

from fastapi import FastAPI, HTTPException
from fastapi.middleware.cors import CORSMiddleware
from pydantic import BaseModel

log = logging.getLogger(__name__)

# scoring thresholds for the combined accuracy: a full point needs at least
# FULL_POINT_MIN_CORRECT correct votes; a half point needs exactly
# HALF_POINT_CORRECT correct votes with no wrong option collecting more than
# HALF_POINT_MAX_WRONG votes
FULL_POINT_MIN_CORRECT = 4
HALF_POINT_CORRECT = 2
HALF_POINT_MAX_WRONG = 2

CONTRADICTION_THRESHOLDS = {"40%": 0.4, "60%": 0.6}

MIN_OPTIONS = 4
MAX_OPTIONS = 5


@dataclass
class ReviewItem:
    item_id: str
    question: str
    options: list[str]
    gold_option_index: int
    gold_lines: list[str]
    distractor_lines: list[str]

    def __post_init__(self):
        if not (MIN_OPTIONS <= len(self.options) <= MAX_OPTIONS):
            raise ValueError(f"item {self.item_id}: needs {MIN_OPTIONS}-{MAX_OPTIONS} options")
        if len(set(self.options)) != len(self.options):
            raise ValueError(f"item {self.item_id}: options must be unique")
        if not (0 <= self.gold_option_index < len(self.options)):
            raise ValueError(f"item {self.item_id}: gold option index out of range")

    def public_view(self) -> dict:
        """The client payload; never includes the gold option index."""
        return {"item_id": self.item_id, "question": self.question,
                "options": list(self.options), "gold_lines": list(self.gold_lines),
                "distractor_lines": list(self.distractor_lines)}

    def to_dict(self) -> dict:
        d = self.public_view()
        d["gold_option_index"] = self.gold_option_index
        return d


@dataclass
class ReviewResponse:
    item_id: str
    participant_id: str
    chosen_option: int
    contradiction_flag: bool
    timestamp: float

    def to_dict(self) -> dict:
        return {"item_id": self.item_id, "participant_id": self.participant_id,
                "chosen_option": self.chosen_option,
                "contradiction_flag": self.contradiction_flag,
                "timestamp": self.timestamp}

    @classmethod
    def from_dict(cls, d: dict) -> "ReviewResponse":
        return cls(item_id=d["item_id"], participant_id=d["participant_id"],
                   chosen_option=int(d["chosen_option"]),
                   contradiction_flag=bool(d["contradiction_flag"]),
                   timestamp=float(d["timestamp"]))


@dataclass
class StudyMetrics:
    average_accuracy: float
    accuracy_combined: float
    accuracy_ub: float
    contradiction_rate_by_confidence: dict[str, int]
    items_counted: int
    responses_counted: int

    def to_dict(self) -> dict:
        return {"average_accuracy": self.average_accuracy,
                "accuracy_combined": self.accuracy_combined,
                "accuracy_ub": self.accuracy_ub,
                "contradiction_rate_by_confidence": dict(self.contradiction_rate_by_confidence),
                "items_counted": self.items_counted,
                "responses_counted": self.responses_counted}


def build_review_items(dataset, seed: int = 0) -> list[ReviewItem]:
    """Render dataset entries into review items with per-item shuffled options.

    Options are the gold answer, the two fake sub-answers, and remaining
    supporting-fact titles, deduplicated.  Entries without generation
    provenance (or too few distinct options) are skipped with a warning.
    """
    items = []
    for entry in dataset.entries:
        base = entry.base
        fake_answers = []
        for _, _, prov in entry.injected:
            for name in (prov.get("fake_answer_1"), prov.get("fake_answer_2")):
                if name and name not in fake_answers:
                    fake_answers.append(name)
        if len(fake_answers) < 2:
            log.warning("entry %s: missing fake-answer provenance; skipped", entry.id)
            continue

        options = [base.answer]
        for fake in fake_answers[:2]:
            if fake not in options:
                options.append(fake)
        for title, _ in base.supporting_fact_refs:
            if len(options) >= MAX_OPTIONS:
                break
            if title not in options:
                options.append(title)
        if len(options) < MIN_OPTIONS:
            log.warning("entry %s: only %d distinct options; skipped", entry.id, len(options))
            continue

        rng = random.Random(f"{seed}:{entry.id}")
        rng.shuffle(options)

        gold_lines = []
        for title, sent_idx in base.supporting_fact_refs:
            for p in base.paragraphs:
                if p.title == title and 0 <= sent_idx < len(p.sentences):
                    gold_lines.append(p.sentences[sent_idx])
        distractor_lines = []
        for _, paragraph, prov in entry.injected:
            pair_answers = [a for a in (prov.get("fake_answer_1"),
                                        prov.get("fake_answer_2")) if a]
            for sentence in paragraph.sentences:
                low = sentence.lower()
                if any(a.lower() in low for a in pair_answers) \
                        and sentence not in distractor_lines:
                    distractor_lines.append(sentence)

        items.append(ReviewItem(item_id=entry.id, question=base.question,
                                options=options,
                                gold_option_index=options.index(base.answer),
                                gold_lines=gold_lines,
                                distractor_lines=distractor_lines))
    return items


def compute_metrics(items: list[ReviewItem], responses: list[ReviewResponse],
                    participants: int = 5) -> StudyMetrics:
    """The three study accuracies plus contradiction counts by confidence.

    A contradiction-flagged response is always scored incorrect.  Items with
    no responses are excluded (with a warning) from the item-level metrics.
    """
    by_id = {item.item_id: item for item in items}
    for r in responses:
        if r.item_id not in by_id:
            raise ValueError(f"response references unknown item {r.item_id!r}")
        if not (0 <= r.chosen_option < len(by_id[r.item_id].options)):
            raise ValueError(f"response for item {r.item_id!r} chooses an invalid option")

    grouped: dict[str, list[ReviewResponse]] = {}
    for r in responses:
        grouped.setdefault(r.item_id, []).append(r)

    def is_correct(item, r):
        return r.chosen_option == item.gold_option_index and not r.contradiction_flag

    counted_items = []
    for item in items:
        if item.item_id in grouped:
            counted_items.append(item)
        else:
            log.warning("item %s has no responses; excluded from item-level metrics",
                        item.item_id)

    total_responses = sum(len(grouped[i.item_id]) for i in counted_items)
    correct_responses = sum(1 for i in counted_items for r in grouped[i.item_id]
                            if is_correct(i, r))
    average = correct_responses / total_responses if total_responses else 0.0

    points = 0.0
    ub_hits = 0
    contradiction_counts = {label: 0 for label in CONTRADICTION_THRESHOLDS}
    for item in counted_items:
        votes = grouped[item.item_id]
        n_correct = sum(1 for r in votes if is_correct(item, r))
        wrong_votes: dict[int, int] = {}
        for r in votes:
            if not is_correct(item, r):
                wrong_votes[r.chosen_option] = wrong_votes.get(r.chosen_option, 0) + 1
        if n_correct >= FULL_POINT_MIN_CORRECT:
            points += 1.0
        elif n_correct == HALF_POINT_CORRECT and \
                max(wrong_votes.values(), default=0) <= HALF_POINT_MAX_WRONG:
            points += 0.5
        if n_correct >= 1:
            ub_hits += 1
        flagged = sum(1 for r in votes if r.contradiction_flag)
        share = flagged / len(votes)
        for label, threshold in CONTRADICTION_THRESHOLDS.items():
            if share >= threshold:
                contradiction_counts[label] += 1

    n_items = len(counted_items)
    return StudyMetrics(
        average_accuracy=average,
        accuracy_combined=points / n_items if n_items else 0.0,
        accuracy_ub=ub_hits / n_items if n_items else 0.0,
        contradiction_rate_by_confidence=contradiction_counts,
        items_counted=n_items,
        responses_counted=total_responses)


class _ResponseBody(BaseModel):
    item_id: str
    participant_id: str
    chosen_option: int
    contradiction_flag: bool = False


class ResponseLog:
    """Append-only JSONL response store, replayed at construction."""

    def __init__(self, path: str | Path):
        self.path = Path(path)
        self._lock = threading.Lock()
        self.responses: list[ReviewResponse] = []
        if self.path.exists():
            for line in self.path.read_text(encoding="utf-8").splitlines():
                if line.strip():
                    self.responses.append(ReviewResponse.from_dict(json.loads(line)))

    def append(self, response: ReviewResponse) -> None:
        with self._lock:
            self.path.parent.mkdir(parents=True, exist_ok=True)
            with open(self.path, "a", encoding="utf-8") as f:
                f.write(json.dumps(response.to_dict(), ensure_ascii=False) + "\n")
                f.flush()
            self.responses.append(response)

    def snapshot(self) -> list[ReviewResponse]:
        with self._lock:
            return list(self.responses)


def create_review_app(items: list[ReviewItem], data_path: str | Path,
                      participants: int = 5, clock=time.time) -> FastAPI:
    """The review HTTP API over a fixed item set and an append-only log."""
    app = FastAPI(title="hopforge review service", docs_url=None, redoc_url=None)
    app.add_middleware(CORSMiddleware, allow_origins=["*"], allow_methods=["*"],
                       allow_headers=["*"])
    by_id = {item.item_id: item for item in items}
    store = ResponseLog(data_path)

    @app.get("/items")
    def list_items(page: int = 1, page_size: int = 20):
        if page < 1 or page_size < 1:
            raise HTTPException(status_code=400, detail="page and page_size must be >= 1")
        start = (page - 1) * page_size
        chunk = items[start:start + page_size]
        return {"page": page, "page_size": page_size, "total": len(items),
                "items": [item.public_view() for item in chunk]}

    @app.get("/items/{item_id}")
    def get_item(item_id: str):
        item = by_id.get(item_id)
        if item is None:
            raise HTTPException(status_code=404, detail=f"unknown item {item_id!r}")
        return item.public_view()

    @app.post("/responses", status_code=201)
    def post_response(body: _ResponseBody):
        item = by_id.get(body.item_id)
        if item is None:
            raise HTTPException(status_code=404, detail=f"unknown item {body.item_id!r}")
        if not body.participant_id.strip():
            raise HTTPException(status_code=400, detail="participant_id must be nonempty")
        if not (0 <= body.chosen_option < len(item.options)):
            raise HTTPException(
                status_code=400,
                detail=f"chosen_option must be in [0, {len(item.options) - 1}]")
        response = ReviewResponse(item_id=body.item_id, participant_id=body.participant_id,
                                  chosen_option=body.chosen_option,
                                  contradiction_flag=body.contradiction_flag,
                                  timestamp=clock())
        store.append(response)
        return {"status": "ok", "recorded": response.to_dict()}

    @app.get("/metrics")
    def metrics():
        return compute_metrics(items, store.snapshot(), participants).to_dict()

    @app.get("/export")
    def export():
        from fastapi.responses import PlainTextResponse

        text = "".join(json.dumps(r.to_dict(), ensure_ascii=False) + "\n"
                       for r in store.snapshot())
        return PlainTextResponse(text, media_type="application/x-ndjson")

    return app
