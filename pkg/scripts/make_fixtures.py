"""Generate the deterministic test fixture corpus.

Writes a 26-instance HotpotQA-shaped file (24 valid, 2 shape-violating),
the matching sub-question annotations, CoNLL-U parses for both sub-questions
of every instance, and the NER sidecar.  Output is a pure function of the
pools below; rerunning never changes committed fixtures.
"""

from __future__ import annotations

import json
from pathlib import Path

FIXTURES = Path(__file__).resolve().parent.parent / "tests" / "fixtures"

CITIES = ["Lakeside", "Brookfield", "Norcross", "Telford", "Marwick", "Aldergrove",
          "Renfrew", "Halbrook"]
MASCOTS = ["Hawks", "Otters", "Pioneers", "Falcons", "Mariners", "Wolves",
           "Comets", "Rangers"]
VENUE_NAMES = ["Harborview", "Eastport", "Milldale", "Redcliff", "Oakmont", "Fairbank",
               "Westbrook", "Kingsmere", "Dunvale", "Brightwater", "Ashford", "Pinehurst"]
VENUE_SUFFIXES = ["Arena", "Forum", "Dome", "Gardens"]

FILLER_TOPICS = [
    ("Quarry Lane Bridge", "a stone bridge completed in the nineteenth century"),
    ("Mossfield Orchard", "an orchard known for late-season apples"),
    ("The Gray Lantern", "a lighthouse converted into a small museum"),
    ("Tallow Creek", "a shallow creek that floods most springs"),
    ("Bellamy Printing House", "a printing house that produced regional almanacs"),
    ("Hollow Pine Trail", "a walking trail through second-growth forest"),
    ("The Salt Merchants Guild", "a trade guild active in coastal markets"),
    ("Wren Street Conservatory", "a music school with a small recital hall"),
    ("Fennick Observatory", "an observatory built on a limestone ridge"),
    ("The Copper Kettle Society", "a supper club documented in local newspapers"),
    ("Garnet Hollow Mine", "a disused mine visited by geology students"),
    ("The Drowned Meadow", "a wetland restored after decades of drainage"),
]


def instance_parts(i: int):
    city = CITIES[i % len(CITIES)]
    mascot = MASCOTS[(i * 3 + 1) % len(MASCOTS)]
    team = f"{city} {mascot}"
    vname = VENUE_NAMES[i % len(VENUE_NAMES)]
    vsuffix = VENUE_SUFFIXES[(i * 5 + 2) % len(VENUE_SUFFIXES)]
    venue = f"{vname} {vsuffix}"
    capacity = f"{3 + i % 5},{137 + (i * 61) % 800:03d}"
    year = 1921 + (i * 7) % 90
    return team, venue, capacity, year


def build_instance(i: int, n_paragraphs: int = 10, n_gold: int = 2) -> tuple[dict, dict]:
    team, venue, capacity, year = instance_parts(i)
    iid = f"fx{i:04d}"
    question = (f"The arena where the {team} played their home games can seat "
                f"how many people?")
    gold1 = [venue, [
        f"{venue} is a multi-purpose arena in the town of {CITIES[(i + 3) % len(CITIES)]}.",
        f"It has a seating capacity of {capacity} people.",
        f"The building opened in {year}.",
    ]]
    gold2 = [team, [
        f"The {team} are a junior ice hockey team founded in {year + 9}.",
        f"The team played its home games at the {venue}.",
    ]]
    fillers = []
    for j in range(n_paragraphs - 2):
        title, blurb = FILLER_TOPICS[(i + j * 2) % len(FILLER_TOPICS)]
        fillers.append([f"{title} ({iid}-{j})", [
            f"{title} is {blurb}.",
            f"It appears in several registries compiled between {1860 + j} and {1902 + j}.",
        ]])
    context = [gold1, gold2] + fillers
    # spread the gold paragraphs through the context deterministically
    order = [2, 0, 3, 4, 1, 5, 6, 7, 8, 9]
    context = [context[k] for k in order[:len(context)]]

    supporting = [[venue, 1], [team, 1]]
    if n_gold == 3 and len(fillers) >= 1:
        supporting.append([fillers[0][0], 0])

    record = {"_id": iid, "question": question, "answer": capacity,
              "type": "bridge", "context": context, "supporting_facts": supporting}
    subqa = {"instance_id": iid,
             "sub_q1": f"Which arena the {team} played their home games?",
             "sub_q1_answer": venue,
             "sub_q2": f"How many people can the {venue} seat?",
             "final_answer": capacity}
    return record, subqa


def conllu_sub_q1(iid: str, team: str) -> str:
    city, mascot = team.split()
    rows = [
        (1, "Which", "which", "DET", 2, "det"),
        (2, "arena", "arena", "NOUN", 6, "obj"),
        (3, "the", "the", "DET", 5, "det"),
        (4, city, city, "PROPN", 5, "compound"),
        (5, mascot, mascot, "PROPN", 6, "nsubj"),
        (6, "played", "play", "VERB", 0, "root"),
        (7, "their", "they", "PRON", 9, "nmod:poss"),
        (8, "home", "home", "NOUN", 9, "compound"),
        (9, "games", "game", "NOUN", 6, "obj"),
        (10, "?", "?", "PUNCT", 6, "punct"),
    ]
    return _render(f"{iid}.1", rows)


def conllu_sub_q2(iid: str, venue: str) -> str:
    vname, vsuffix = venue.split()
    rows = [
        (1, "How", "how", "ADV", 2, "advmod"),
        (2, "many", "many", "ADJ", 3, "amod"),
        (3, "people", "people", "NOUN", 8, "obj"),
        (4, "can", "can", "AUX", 8, "aux"),
        (5, "the", "the", "DET", 7, "det"),
        (6, vname, vname, "PROPN", 7, "compound"),
        (7, vsuffix, vsuffix, "PROPN", 8, "nsubj"),
        (8, "seat", "seat", "VERB", 0, "root"),
        (9, "?", "?", "PUNCT", 8, "punct"),
    ]
    return _render(f"{iid}.2", rows)


def _render(sent_id: str, rows) -> str:
    lines = [f"# sent_id = {sent_id}"]
    for index, form, lemma, upos, head, deprel in rows:
        lines.append("\t".join([str(index), form, lemma, upos, "_", "_",
                                str(head), deprel, "_", "_"]))
    return "\n".join(lines) + "\n"


def main() -> None:
    FIXTURES.mkdir(parents=True, exist_ok=True)
    records, subqas, conllu_chunks, sidecar_lines = [], [], [], []
    for i in range(24):
        record, subqa = build_instance(i)
        records.append(record)
        subqas.append(subqa)
    # two deliberately malformed shapes: 9 paragraphs, and 3 gold titles
    record, subqa = build_instance(24, n_paragraphs=9)
    records.append(record)
    subqas.append(subqa)
    record, subqa = build_instance(25, n_gold=3)
    records.append(record)
    subqas.append(subqa)

    for record, subqa in zip(records, subqas):
        iid = record["_id"]
        team = subqa["sub_q1"].removeprefix("Which arena the ").removesuffix(
            " played their home games?")
        venue = subqa["sub_q1_answer"]
        conllu_chunks.append(conllu_sub_q1(iid, team))
        conllu_chunks.append(conllu_sub_q2(iid, venue))
        sidecar_lines.append(json.dumps({"sent_id": f"{iid}.1", "spans": [
            {"start_token": 4, "end_token": 5, "type": "ORGANIZATION"}]}))
        sidecar_lines.append(json.dumps({"sent_id": f"{iid}.2", "spans": [
            {"start_token": 6, "end_token": 7, "type": "FACILITY"}]}))

    (FIXTURES / "hotpot_fixture.json").write_text(
        json.dumps(records, indent=1, ensure_ascii=False) + "\n", encoding="utf-8")
    (FIXTURES / "subqa_fixture.jsonl").write_text(
        "".join(json.dumps(s, ensure_ascii=False) + "\n" for s in subqas), encoding="utf-8")
    (FIXTURES / "subq.conllu").write_text("\n".join(conllu_chunks), encoding="utf-8")
    (FIXTURES / "ner_sidecar.jsonl").write_text(
        "".join(l + "\n" for l in sidecar_lines), encoding="utf-8")
    print(f"wrote fixtures for {len(records)} instances to {FIXTURES}")


if __name__ == "__main__":
    main()
