import random

import pytest

from hopforge.corpus import Paragraph, QAInstance, SubQuestionPair
from hopforge.forge import (
    AttackConfig, DistractorPair, FakeTuple, GenerationFailed, InsufficientPool,
    InvalidShape, MaskingFailed, assemble_attack, build_fake_tuple, export_review_batch,
    generate_distractor_pair,
)

ARENA_PAIR = SubQuestionPair(
    instance_id="arena",
    sub_q1="Which arena the Lewiston Maineiacs played their home games?",
    sub_q1_answer="Androscoggin Bank Colisée",
    sub_q2="How many people can the Androscoggin Bank Colisée seat?",
    final_answer="4,000-capacity (3,677 seated)")

GOLD = [
    Paragraph(title="Androscoggin Bank Colisée",
              sentences=["The Androscoggin Bank Colisée is a 4,000-capacity "
                         "(3,677 seated) multi-purpose arena, in Lewiston, Maine.",
                         "It opened in 1958."], gold=True),
    Paragraph(title="Lewiston Maineiacs",
              sentences=["The Lewiston Maineiacs were a junior ice hockey team.",
                         "The team played its home games at the Androscoggin Bank "
                         "Colisée."], gold=True),
]


def make_instance(iid="synth", n_paragraphs=10, n_gold=2):
    paragraphs = []
    for g in range(n_gold):
        paragraphs.append(Paragraph(title=f"{iid}-gold{g}",
                                    sentences=[f"gold fact {g}."], gold=True))
    for d in range(n_paragraphs - n_gold):
        paragraphs.append(Paragraph(title=f"{iid}-filler{d}",
                                    sentences=[f"filler {d}."]))
    return QAInstance(id=iid, question="q?", answer="a",
                      paragraphs=paragraphs,
                      supporting_fact_refs=[(f"{iid}-gold{g}", 0) for g in range(n_gold)],
                      valid_shape=(n_paragraphs == 10 and n_gold == 2))


def make_pair(tuple_id, source, kind="named-entity"):
    fa1, fa2 = f"Fake One {tuple_id}", f"Fake Two {tuple_id}"
    return DistractorPair(
        fake_answer_1=fa1,
        paragraph_1=Paragraph(title=fa1, sentences=[f"{fa1} appears here."]),
        fake_answer_2=fa2,
        paragraph_2=Paragraph(title=fa2, sentences=[f"{fa2} appears here."]),
        tuple_ref=tuple_id, source_instance=source, detail_kind=kind)


# -- fake tuples ---------------------------------------------------------------

def test_build_fake_tuple_masks_bridge_answer():
    fake = build_fake_tuple(ARENA_PAIR, "Which arena the Lewiston Maineiacs played "
                                       "their playoff games?", "other")
    assert fake.fake_sub_q2_template == "How many people can the [answer] seat?"
    assert fake.avoid_words == ("Androscoggin Bank Colisée",
                                "4,000-capacity (3,677 seated)")
    assert fake.detail_kind == "other"


def test_build_fake_tuple_masks_all_occurrences():
    pair = SubQuestionPair(instance_id="x", sub_q1="q1?", sub_q1_answer="Acme",
                           sub_q2="Did Acme buy Acme Labs?", final_answer="yes")
    fake = build_fake_tuple(pair, "modified q1?", "other")
    assert fake.fake_sub_q2_template == "Did [answer] buy [answer] Labs?"


def test_build_fake_tuple_is_case_insensitive():
    pair = SubQuestionPair(instance_id="x", sub_q1="q1?", sub_q1_answer="acme",
                           sub_q2="Did ACME deliver?", final_answer="yes")
    fake = build_fake_tuple(pair, "modified q1?", "other")
    assert fake.fake_sub_q2_template == "Did [answer] deliver?"


def test_build_fake_tuple_masking_failed():
    pair = SubQuestionPair(instance_id="x", sub_q1="q1?", sub_q1_answer="Missing",
                           sub_q2="No answer here?", final_answer="y")
    with pytest.raises(MaskingFailed):
        build_fake_tuple(pair, "modified q1?", "other")


def test_fake_tuple_requires_placeholder():
    with pytest.raises(ValueError, match=r"\[answer\]"):
        FakeTuple(tuple_id="t", source_instance="x", fake_sub_q1="q",
                  fake_sub_q2_template="no placeholder", avoid_words=("a", "b"),
                  detail_kind="other")


# -- distractor generation -----------------------------------------------------

def arena_tuple():
    return build_fake_tuple(ARENA_PAIR, "Which arena the Lewiston Maineiacs played "
                                       "their playoff games?", "other")


def test_generate_distractor_pair_mock(live_gateway):
    pair = generate_distractor_pair(arena_tuple(), GOLD, live_gateway)
    assert pair.fake_answers_present()
    assert pair.avoid_words_absent(("Androscoggin Bank Colisée",
                                    "4,000-capacity (3,677 seated)"))
    assert pair.tuple_ref == "arena#0"


def test_generate_distractor_pair_deterministic(live_gateway):
    a = generate_distractor_pair(arena_tuple(), GOLD, live_gateway)
    b = generate_distractor_pair(arena_tuple(), GOLD, live_gateway)
    assert a == b


class ScriptedGateway:
    """Returns canned completions keyed by the request seed (attempt number)."""

    def __init__(self, by_seed):
        self.by_seed = by_seed
        self.calls = 0

    def chat(self, req):
        self.calls += 1
        return [self.by_seed[req.seed or 0]]


GOOD_COMPLETION = ("Fake Answer 1: Maple Leaf Arena\n"
                   "Paragraph 1: The team moved to the Maple Leaf Arena for its "
                   "playoff games.\n"
                   "Fake Answer 2: 4,500 spectators\n"
                   "Paragraph 2: Maple Leaf Arena can accommodate an impressive "
                   "number of 4,500 spectators.")

LEAKY_COMPLETION = GOOD_COMPLETION.replace(
    "The team moved to", "The Androscoggin Bank Colisée gave way to")


def test_generation_retries_on_avoid_word_leak():
    gw = ScriptedGateway({0: LEAKY_COMPLETION, 1: GOOD_COMPLETION})
    pair = generate_distractor_pair(arena_tuple(), GOLD, gw, max_retries=3)
    assert gw.calls == 2
    assert pair.fake_answer_1 == "Maple Leaf Arena"
    assert pair.fake_answer_2 == "4,500 spectators"


def test_generation_fails_after_budget_with_raw():
    gw = ScriptedGateway({i: "unparseable text" for i in range(10)})
    with pytest.raises(GenerationFailed) as exc:
        generate_distractor_pair(arena_tuple(), GOLD, gw, max_retries=2)
    assert gw.calls == 3
    assert exc.value.raw == "unparseable text"


def test_generation_rejects_missing_fake_answer():
    bad = GOOD_COMPLETION.replace("Maple Leaf Arena can accommodate an impressive "
                                  "number of 4,500 spectators.", "Nothing to see.")
    gw = ScriptedGateway({0: bad, 1: GOOD_COMPLETION})
    pair = generate_distractor_pair(arena_tuple(), GOLD, gw)
    assert gw.calls == 2
    assert pair.fake_answers_present()


# -- attack assembly -----------------------------------------------------------

def own_pool(iid, n):
    return [make_pair(f"{iid}#{j}", iid) for j in range(n)]


def check_invariants(instance, entry, cfg):
    paragraphs = entry.attacked_paragraphs()
    assert len(paragraphs) == 10
    gold = [p for p in paragraphs if p.gold]
    assert len(gold) == 2
    original_gold_titles = {p.title for p in instance.paragraphs if p.gold}
    assert {p.title for p in gold} == original_gold_titles
    assert len(entry.injected) == cfg.k
    gold_positions = {i for i, p in enumerate(instance.paragraphs) if p.gold}
    assert not (set(entry.replaced_positions) & gold_positions)
    hops = [prov["hop"] for _, _, prov in entry.injected]
    tuples = [prov["tuple_ref"] for _, _, prov in entry.injected]
    if cfg.second_subq_only:
        assert all(h == 2 for h in hops)
        assert len(set(tuples)) == cfg.k
    elif cfg.related:
        assert sorted(hops) == [1] * (cfg.k // 2) + [2] * (cfg.k // 2)
        assert len(set(tuples)) == cfg.k // 2
    else:
        assert sorted(hops) == [1] * (cfg.k // 2) + [2] * (cfg.k // 2)
        assert len(set(tuples)) == cfg.k
        # never both sides of one tuple
        sides = {}
        for _, _, prov in entry.injected:
            sides.setdefault(prov["tuple_ref"], set()).add(prov["hop"])
        assert all(len(s) == 1 for s in sides.values())


@pytest.mark.parametrize("cfg", [
    AttackConfig(k=2, related=True, seed=1),
    AttackConfig(k=4, related=True, seed=1),
    AttackConfig(k=2, related=False, seed=1),
    AttackConfig(k=4, related=False, seed=1),
    AttackConfig(k=2, related=False, second_subq_only=True, seed=1),
    AttackConfig(k=4, related=False, second_subq_only=True, seed=1),
])
def test_assemble_regimes(cfg):
    instance = make_instance("synth")
    pool = own_pool("synth", 4) + own_pool("other", 4)
    entry = assemble_attack(instance, pool, cfg)
    check_invariants(instance, entry, cfg)


def test_assemble_deterministic():
    instance = make_instance("synth")
    pool = own_pool("synth", 4)
    cfg = AttackConfig(k=4, related=True, seed=9)
    assert assemble_attack(instance, pool, cfg) == assemble_attack(instance, pool, cfg)


def test_assemble_stable_under_pool_reordering():
    instance = make_instance("synth")
    pool = own_pool("synth", 4)
    cfg = AttackConfig(k=2, related=True, seed=9)
    shuffled = list(pool)
    random.Random(0).shuffle(shuffled)
    assert assemble_attack(instance, pool, cfg) == assemble_attack(instance, shuffled, cfg)


def test_assemble_insufficient_pool():
    instance = make_instance("synth")
    with pytest.raises(InsufficientPool, match="needs 2"):
        assemble_attack(instance, own_pool("synth", 1),
                        AttackConfig(k=4, related=True, seed=0))


def test_assemble_skips_invalid_shape():
    bad = make_instance("bad", n_paragraphs=9)
    with pytest.raises(InvalidShape):
        assemble_attack(bad, own_pool("bad", 4), AttackConfig(k=2, seed=0))


def test_assemble_detail_kind_filter():
    instance = make_instance("synth")
    pool = [make_pair("synth#0", "synth", kind="other"),
            make_pair("synth#1", "synth", kind="named-entity"),
            make_pair("synth#2", "synth", kind="other")]
    cfg = AttackConfig(k=2, related=True, detail_kind_filter="other", seed=3)
    entry = assemble_attack(instance, pool, cfg)
    assert all(prov["detail_kind"] == "other" for _, _, prov in entry.injected)


def test_attack_config_validation():
    with pytest.raises(ValueError):
        AttackConfig(k=3)
    with pytest.raises(ValueError):
        AttackConfig(k=2, related=True, second_subq_only=True)


def test_adversarial_instance_round_trip():
    instance = make_instance("synth")
    entry = assemble_attack(instance, own_pool("synth", 2), AttackConfig(k=2, seed=5))
    from hopforge.forge import AdversarialInstance

    assert AdversarialInstance.from_dict(entry.to_dict()) == entry


# -- review batch export ---------------------------------------------------------

def small_dataset():
    from hopforge.corpus import AdversarialDataset

    entries = []
    for i in range(6):
        instance = make_instance(f"inst{i}")
        entries.append(assemble_attack(instance, own_pool(f"inst{i}", 2),
                                       AttackConfig(k=2, seed=2)))
    return AdversarialDataset.build(entries, config={"k": 2}, seed=2, tool_version="t")


def test_export_review_batch_seeded_stable():
    dataset = small_dataset()
    a = export_review_batch(dataset, 3, seed=1)
    b = export_review_batch(dataset, 3, seed=1)
    assert a == b
    assert len(a) == 3
    assert a != export_review_batch(dataset, 3, seed=2)


def test_export_review_batch_clamps(caplog):
    dataset = small_dataset()
    with caplog.at_level("WARNING"):
        items = export_review_batch(dataset, 99, seed=1)
    assert len(items) == len(dataset.entries)
    assert any("clamping" in r.message for r in caplog.records)


def test_export_review_batch_collects_lines():
    dataset = small_dataset()
    items = export_review_batch(dataset, len(dataset.entries), seed=0)
    for item in items:
        assert item["gold_lines"], "supporting-fact sentences must be present"
        assert item["distractor_lines"], "fake-answer sentences must be present"
        for line in item["distractor_lines"]:
            assert any(a.lower() in line.lower() for a in item["fake_answers"])


def test_export_review_batch_flags_missing_provenance():
    dataset = small_dataset()
    entry = dataset.entries[0]
    entry.injected = [(pos, para, {}) for pos, para, _ in entry.injected]
    items = export_review_batch(dataset, len(dataset.entries), seed=0)
    flagged = [i for i in items if i["instance_id"] == entry.id]
    assert flagged and flagged[0]["incomplete"]
