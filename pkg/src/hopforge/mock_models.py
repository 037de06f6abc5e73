"""Deterministic stand-ins for every learned endpoint the gateway calls.

All responses are pure functions of the request (plus a server seed), so a
pipeline recorded against this server replays byte-identically.  The chat
endpoint recognizes the three system prompts by their task phrases and
produces parseable completions for each; embeddings are hash-seeded unit
vectors, fill-mask draws from a fixed vocabulary, and NER tags capitalized
token runs.
"""

from __future__ import annotations

import hashlib
import math
import random
import re

from fastapi import FastAPI
from pydantic import BaseModel

EMBED_DIM = 48
WORD_VEC_DIM = 24

FILL_VOCAB = [
    "playoff", "championship", "final", "regular", "season", "exhibition",
    "practice", "evening", "weekend", "historic", "annual", "famous",
    "biggest", "official", "local", "indoor", "outdoor", "national",
    "friendly", "classic", "major", "junior", "senior", "varsity",
    "derby", "qualifying", "preseason", "street", "winter", "summer",
    "charity", "festival", "opening", "closing", "midweek",
    "televised", "sold-out", "away", "road",
]

_FIRST = ["Jonas", "Mira", "Talia", "Edwin", "Sable", "Orin", "Petra", "Callum",
          "Ivette", "Rowan", "Nadia", "Felix", "Greta", "Hollis", "Imre", "Juno"]
_LAST = ["Fairweather", "Kestrel", "Morrow", "Ashgrove", "Belmont", "Crane",
         "Dunmore", "Ellery", "Foxhall", "Garland", "Hathaway", "Ireton"]
_PLACE = ["Maple Leaf", "Crescent Bay", "Silver Birch", "Harborlight", "Stonebridge",
          "Northgate", "Willowmere", "Copperfield", "Eastvale", "Larkspur"]
_FACILITY_SUFFIX = ["Arena", "Pavilion", "Coliseum", "Stadium", "Hall", "Center"]
_ORG_SUFFIX = ["Society", "Institute", "Collective", "Works", "Consortium", "League"]
_EVENT_SUFFIX = ["Festival", "Cup", "Summit", "Regatta", "Classic", "Jubilee"]
_GPE_SUFFIX = ["ville", "burg", "ton", "field", "haven", "mouth"]

_STOPWORDS = {
    "the", "a", "an", "of", "in", "on", "at", "for", "to", "and", "or", "by",
    "which", "what", "who", "whom", "whose", "when", "where", "why", "how",
    "did", "do", "does", "is", "are", "was", "were", "can", "could", "their",
    "his", "her", "its", "my", "your", "many", "much", "as", "with", "that",
}


def _h(seed: int, *parts: str) -> int:
    payload = "\x1f".join(parts).encode("utf-8")
    digest = hashlib.sha256(str(seed).encode() + b"|" + payload).digest()
    return int.from_bytes(digest[:8], "big")


def _pick(items, h: int) -> str:
    return items[h % len(items)]


def fake_entity_name(entity_type: str, example: str, seed: int, salt: int = 0) -> str:
    """A fresh entity of the same type, never equal to the example."""
    etype = entity_type.strip().upper().replace("_", " ")
    for bump in range(8):
        h = _h(seed, "entity", etype, example, str(salt), str(bump))
        if etype == "PERSON":
            name = f"{_pick(_FIRST, h)} {_pick(_LAST, h >> 8)}"
        elif etype == "FACILITY":
            name = f"{_pick(_PLACE, h)} {_pick(_FACILITY_SUFFIX, h >> 8)}"
        elif etype in ("ORGANIZATION", "NORP"):
            name = f"{_pick(_PLACE, h)} {_pick(_ORG_SUFFIX, h >> 8)}"
        elif etype == "GPE":
            name = f"{_pick(_LAST, h)}{_pick(_GPE_SUFFIX, h >> 8)}"
        elif etype == "LOCATION":
            name = f"{_pick(_PLACE, h)} {_pick(['Ridge', 'Lake', 'Falls', 'Valley'], h >> 8)}"
        elif etype == "EVENT":
            name = f"{_pick(_PLACE, h)} {_pick(_EVENT_SUFFIX, h >> 8)}"
        elif etype == "WORK OF ART":
            name = f"The {_pick(_PLACE, h)} {_pick(['Ballad', 'Chronicle', 'Suite', 'Reverie'], h >> 8)}"
        elif etype == "DATE":
            name = str(1890 + h % 130)
        elif etype == "TIME":
            name = f"{1 + h % 12}:{h % 6}0 {'AM' if h % 2 else 'PM'}"
        elif etype == "PERCENT":
            name = f"{1 + h % 99}%"
        elif etype == "MONEY":
            name = f"${1 + h % 900} million"
        elif etype in ("QUANTITY", "CARDINAL"):
            name = f"{h % 9 + 1},{100 + h % 900}"
        elif etype == "ORDINAL":
            name = _pick(["third", "fourth", "fifth", "sixth", "seventh", "ninth"], h)
        elif etype == "LAW":
            name = f"{_pick(_LAST, h)} Act of {1900 + h % 120}"
        elif etype == "LANGUAGE":
            name = _pick(["Veltrian", "Ostrish", "Kendal", "Murrenic", "Tavrian"], h)
        else:
            name = f"{_pick(_PLACE, h)} {_pick(_LAST, h >> 8)}"
        if name.lower() != example.strip().lower():
            return name
    return name + " II"


_ENTITY_LINE = re.compile(r"^\s*(\d+)[.):]\s*([A-Z ]+?)\s*:\s*(.+?)\s*$")


def _chat_fake_entities(user_text: str, seed: int, req_seed: int) -> str:
    lines = []
    for line in user_text.splitlines():
        m = _ENTITY_LINE.match(line)
        if m:
            idx, etype, example = int(m.group(1)), m.group(2), m.group(3)
            lines.append(f"{idx}. {fake_entity_name(etype, example, seed, salt=req_seed)}")
    return "\n".join(lines)


def _keywords(question: str, avoid: list[str]) -> list[str]:
    avoid_tokens = {t.lower() for w in avoid for t in w.split()}
    words = []
    for token in re.findall(r"[A-Za-z][\w'-]*", question):
        low = token.lower()
        if low in _STOPWORDS or low in avoid_tokens or low == "answer":
            continue
        if token not in words:
            words.append(token)
    return words or ["subject"]


_FILLER = [
    "Contemporary accounts describe the surroundings in warm detail.",
    "Local records from the period mention it with evident pride.",
    "Observers at the time regarded it as a notable landmark of the region.",
    "Several chronicles of the era discuss its steady rise to prominence.",
    "Its reputation grew gradually through word of mouth and printed notices.",
    "Writers of the day catalogued its features at considerable length.",
    "The institution retained its character through several renovations.",
    "Historians continue to cite it as a representative example of its kind.",
]


def _paragraph(topic_words: list[str], answer: str, h: int) -> str:
    subject = " ".join(topic_words[:4])
    sentences = [
        f"{answer} is closely associated with {subject} in regional accounts.",
        f"Commentators often note how {answer} shaped the story of {subject}.",
    ]
    rng = random.Random(h)
    fillers = _FILLER[:]
    rng.shuffle(fillers)
    for filler in fillers:
        if sum(len(s.split()) for s in sentences) >= 80:
            break
        sentences.append(filler)
    return " ".join(sentences)


def _chat_distractors(user_text: str, seed: int, req_seed: int) -> str:
    q1 = q2 = ""
    avoid: list[str] = []
    for line in user_text.splitlines():
        if line.startswith("Question 1:"):
            q1 = line.split(":", 1)[1].strip()
        elif line.startswith("Question 2:"):
            q2 = line.split(":", 1)[1].strip()
        elif line.startswith("Words to avoid:"):
            avoid = [w.strip() for w in line.split(":", 1)[1].split(";") if w.strip()]

    h1 = _h(seed, "distractor1", q1, q2, str(req_seed))
    h2 = _h(seed, "distractor2", q1, q2, str(req_seed))
    answer1 = fake_entity_name("FACILITY" if "arena" in q1.lower() else "PERSON",
                               avoid[0] if avoid else "", seed, salt=h1 % 1000)
    if q2.lower().startswith("how many"):
        answer2 = f"{2 + h2 % 8},{100 + h2 % 900} spectators"
    else:
        answer2 = fake_entity_name("WORK OF ART", avoid[-1] if avoid else "", seed,
                                   salt=h2 % 1000)
    # never leak an avoid word from the generated side
    for w in avoid:
        if w and w.lower() in answer1.lower():
            answer1 = answer1 + " North"
        if w and w.lower() in answer2.lower():
            answer2 = answer2 + " Prime"

    q2_final = q2.replace("[answer]", answer1)
    para1 = _paragraph(_keywords(q1, avoid), answer1, h1)
    para2 = _paragraph(_keywords(q2_final, avoid) or ["venue"], answer2, h2)
    return (f"Fake Answer 1: {answer1}\n"
            f"Paragraph 1: {para1}\n"
            f"Fake Answer 2: {answer2}\n"
            f"Paragraph 2: {para2}")


def _chat_qa(system: str, user_text: str, seed: int, sample: int) -> str:
    question = ""
    titles = []
    for line in user_text.splitlines():
        if line.startswith("Question:"):
            question = line.split(":", 1)[1].strip()
        elif ":" in line and not line.startswith(("Context", "Question")):
            titles.append(line.split(":", 1)[0].strip())
    h = _h(seed, "qa", question)
    pool = titles or ["Unknown"]
    answer = pool[(h + (sample % 2)) % len(pool)]
    if "sub-questions" in system:
        return (f"Sub-question 1: {question}\n"
                f"Answer: {answer}\n"
                f"Sub-question 2: {question}\n"
                f"Answer: {answer}\n"
                f"Final Answer: {answer}")
    return f"Final Answer: {answer}"


def mock_chat(body: dict, seed: int = 0) -> dict:
    messages = body.get("messages", [])
    system = next((m["content"] for m in messages if m["role"] == "system"), "")
    user = next((m["content"] for m in reversed(messages) if m["role"] == "user"), "")
    n = int(body.get("n", 1))
    req_seed = int(body.get("seed") or 0)

    choices = []
    for sample in range(n):
        if "fake named entity generator" in system:
            content = _chat_fake_entities(user, seed, req_seed + sample)
        elif "fake paragraph generating assistant" in system:
            content = _chat_distractors(user, seed, req_seed + sample)
        else:
            content = _chat_qa(system, user, seed, sample + req_seed)
        choices.append({"message": {"role": "assistant", "content": content}})
    return {"choices": choices, "model": body.get("model", "mock")}


def mock_fill_mask(text: str, top_k: int, seed: int = 0) -> dict:
    h = _h(seed, "fill", text)
    start = h % len(FILL_VOCAB)
    candidates = []
    for i in range(min(top_k, len(FILL_VOCAB))):
        token = FILL_VOCAB[(start + i) % len(FILL_VOCAB)]
        candidates.append({"token": token, "prob": round(0.30 * (0.75 ** i), 6)})
    return {"candidates": candidates}


def _hash_vector(key: str, dim: int, seed: int, salt: str) -> list[float]:
    rng = random.Random(_h(seed, salt, key))
    v = [rng.gauss(0, 1) for _ in range(dim)]
    norm = math.sqrt(sum(x * x for x in v)) or 1.0
    return [round(x / norm, 8) for x in v]


def mock_embed(texts: list[str], seed: int = 0) -> dict:
    return {"vectors": [_hash_vector(t, EMBED_DIM, seed, "embed") for t in texts]}


def mock_word_vec(words: list[str], seed: int = 0) -> dict:
    return {"vectors": [_hash_vector(w.lower(), WORD_VEC_DIM, seed, "word") for w in words]}


def mock_ner(text: str, seed: int = 0) -> dict:
    tokens = text.split()
    spans = []
    run_start = None
    for i, tok in enumerate(tokens, start=1):
        stripped = tok.strip(".,!?;:'\"()")
        is_cap = bool(stripped) and stripped[0].isupper() and stripped.lower() not in _STOPWORDS
        if is_cap and run_start is None:
            run_start = i
        elif not is_cap and run_start is not None:
            spans.append((run_start, i - 1))
            run_start = None
    if run_start is not None:
        spans.append((run_start, len(tokens)))

    out = []
    for start, end in spans:
        surface = " ".join(tokens[start - 1:end])
        etype = _pick(["PERSON", "ORGANIZATION", "GPE", "FACILITY"], _h(seed, "ner", surface))
        out.append({"start_token": start, "end_token": end, "type": etype})
    return {"spans": out}


class _ChatBody(BaseModel):
    model: str = "mock"
    messages: list[dict]
    temperature: float = 0.0
    n: int = 1
    max_tokens: int = 512
    seed: int | None = None


class _FillBody(BaseModel):
    text: str
    top_k: int = 10


class _EmbedBody(BaseModel):
    texts: list[str]


class _WordsBody(BaseModel):
    words: list[str]


class _NerBody(BaseModel):
    text: str


def create_app(seed: int = 0) -> FastAPI:
    app = FastAPI(title="hopforge mock models", docs_url=None, redoc_url=None)

    @app.post("/v1/chat/completions")
    def chat(body: _ChatBody):
        return mock_chat(body.model_dump(), seed=seed)

    @app.post("/fill-mask")
    def fill_mask(body: _FillBody):
        return mock_fill_mask(body.text, body.top_k, seed=seed)

    @app.post("/embed")
    def embed(body: _EmbedBody):
        return mock_embed(body.texts, seed=seed)

    @app.post("/word-vec")
    def word_vec(body: _WordsBody):
        return mock_word_vec(body.words, seed=seed)

    @app.post("/ner")
    def ner(body: _NerBody):
        return mock_ner(body.text, seed=seed)

    return app
