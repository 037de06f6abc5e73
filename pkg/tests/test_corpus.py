import json

import pytest

from hopforge import corpus
from hopforge.corpus import (
    AdversarialDataset, CorpusParseError, Paragraph, SubQAValidationError,
    load_hotpot, load_subqa, word_count_stats,
)


@pytest.fixture(scope="module")
def instances(fixtures_dir):
    return load_hotpot(fixtures_dir / "hotpot_fixture.json")


def test_load_hotpot_preserves_order_and_fields(instances):
    assert [i.id for i in instances[:3]] == ["fx0000", "fx0001", "fx0002"]
    first = instances[0]
    assert first.question.startswith("The arena where the Lakeside Otters")
    assert first.answer == "3,137"
    assert first.question_type == "bridge"
    assert len(first.paragraphs) == 10


def test_gold_flags_follow_supporting_facts(instances):
    first = instances[0]
    gold_titles = {p.title for p in first.paragraphs if p.gold}
    assert gold_titles == {t for t, _ in first.supporting_fact_refs}
    assert sum(p.gold for p in first.paragraphs) == 2


def test_shape_violations_flagged_not_dropped(instances):
    by_id = {i.id: i for i in instances}
    assert not by_id["fx0024"].valid_shape  # 9 paragraphs
    assert not by_id["fx0025"].valid_shape  # 3 gold
    assert all(by_id[f"fx{i:04d}"].valid_shape for i in range(24))
    assert len(instances) == 26


def test_load_hotpot_empty_array(tmp_path):
    path = tmp_path / "empty.json"
    path.write_text("[]", encoding="utf-8")
    assert load_hotpot(path) == []


def test_load_hotpot_missing_field_names_record_and_field(tmp_path):
    record = {"_id": "x", "question": "q",
              "context": [["T", ["s."]]], "supporting_facts": [["T", 0]]}
    path = tmp_path / "bad.json"
    path.write_text(json.dumps([record]), encoding="utf-8")
    with pytest.raises(CorpusParseError, match=r"record 0.*'answer'"):
        load_hotpot(path)


def test_load_hotpot_rejects_unmatched_supporting_title(tmp_path):
    record = {"_id": "x", "question": "q", "answer": "a",
              "context": [["T", ["s."]]], "supporting_facts": [["Other", 0]]}
    path = tmp_path / "bad.json"
    path.write_text(json.dumps([record]), encoding="utf-8")
    with pytest.raises(CorpusParseError, match="matches no context paragraph"):
        load_hotpot(path)


def test_load_subqa_file_order(fixtures_dir, instances):
    pairs = load_subqa(fixtures_dir / "subqa_fixture.jsonl", instances=instances)
    assert [p.instance_id for p in pairs[:2]] == ["fx0000", "fx0001"]
    assert pairs[0].sub_q1 == "Which arena the Lakeside Otters played their home games?"
    assert pairs[0].final_answer == instances[0].answer


def test_load_subqa_empty_file(tmp_path):
    path = tmp_path / "empty.jsonl"
    path.write_text("", encoding="utf-8")
    assert load_subqa(path) == []


def test_load_subqa_missing_field_has_line_number(tmp_path):
    path = tmp_path / "subqa.jsonl"
    good = {"instance_id": "a", "sub_q1": "q1?", "sub_q1_answer": "x",
            "sub_q2": "q2 x?", "final_answer": "y"}
    bad = {k: v for k, v in good.items() if k != "sub_q2"}
    bad["instance_id"] = "b"
    path.write_text(json.dumps(good) + "\n" + json.dumps(bad) + "\n", encoding="utf-8")
    with pytest.raises(CorpusParseError, match=r":2: missing field 'sub_q2'"):
        load_subqa(path)


def test_load_subqa_duplicate_id(tmp_path):
    row = {"instance_id": "a", "sub_q1": "q1?", "sub_q1_answer": "x",
           "sub_q2": "q2 x?", "final_answer": "y"}
    path = tmp_path / "subqa.jsonl"
    path.write_text(json.dumps(row) + "\n" + json.dumps(row) + "\n", encoding="utf-8")
    with pytest.raises(CorpusParseError, match="duplicate instance_id"):
        load_subqa(path)


def test_load_subqa_final_answer_mismatch(tmp_path, instances):
    row = {"instance_id": "fx0000", "sub_q1": "q1?", "sub_q1_answer": "x",
           "sub_q2": "q2 x?", "final_answer": "not the answer"}
    path = tmp_path / "subqa.jsonl"
    path.write_text(json.dumps(row) + "\n", encoding="utf-8")
    with pytest.raises(SubQAValidationError, match="does not match"):
        load_subqa(path, instances=instances)


def test_load_subqa_unresolved_id_reported(tmp_path, instances, caplog):
    row = {"instance_id": "nope", "sub_q1": "q1?", "sub_q1_answer": "x",
           "sub_q2": "q2 x?", "final_answer": "y"}
    path = tmp_path / "subqa.jsonl"
    path.write_text(json.dumps(row) + "\n", encoding="utf-8")
    with caplog.at_level("WARNING"):
        pairs = load_subqa(path, instances=instances)
    assert len(pairs) == 1
    assert any("matches no loaded instance" in r.message for r in caplog.records)


def para(text, title="T"):
    return Paragraph(title=title, sentences=[text])


def test_word_count_stats_hand_example():
    assert word_count_stats([para("a b"), para("a b c d")], [para("x")]) == (3.0, 1.0)


def test_word_count_stats_identity():
    one = [para("word"), para("word")]
    assert word_count_stats(one, one) == (1.0, 1.0)


def test_word_count_stats_title_excluded():
    p = Paragraph(title="Many Words In This Title", sentences=["two words"])
    assert word_count_stats([p], [p]) == (2.0, 2.0)


def test_word_count_stats_empty_set_errors():
    with pytest.raises(ValueError):
        word_count_stats([], [para("x")])


def test_dataset_round_trip(tmp_path, pipeline_run):
    loaded = corpus.load_dataset(pipeline_run["out_dir"] / "adversarial.jsonl")
    assert len(loaded.entries) >= 20
    target = tmp_path / "copy.jsonl"
    corpus.save_dataset(loaded, target)
    again = corpus.load_dataset(target)
    assert again.manifest == loaded.manifest
    assert again.entries == loaded.entries


def test_dataset_rejects_duplicate_ids(pipeline_run, tmp_path):
    loaded = corpus.load_dataset(pipeline_run["out_dir"] / "adversarial.jsonl")
    with pytest.raises(ValueError, match="unique"):
        AdversarialDataset.build(loaded.entries + loaded.entries[:1], config={},
                                 seed=0, tool_version="t")


def test_valid_instances_have_10_2_shape(instances):
    for inst in instances:
        if inst.valid_shape:
            assert len(inst.paragraphs) == 10
            assert sum(p.gold for p in inst.paragraphs) == 2
