from hopforge.mock_models import (
    fake_entity_name, mock_chat, mock_embed, mock_fill_mask, mock_ner, mock_word_vec,
)
from hopforge.prompts import (
    DISTRACTOR_PARAGRAPH_SYSTEM_PROMPT, FAKE_ENTITY_SYSTEM_PROMPT,
    fake_entity_user_message,
)


def chat_body(system, user, n=1, seed=None):
    return {"messages": [{"role": "system", "content": system},
                         {"role": "user", "content": user}], "n": n, "seed": seed}


def test_endpoints_deterministic():
    assert mock_embed(["x"], seed=0) == mock_embed(["x"], seed=0)
    assert mock_word_vec(["x"], seed=0) == mock_word_vec(["x"], seed=0)
    assert mock_fill_mask("a [MASK] b", 5, seed=0) == mock_fill_mask("a [MASK] b", 5, seed=0)
    assert mock_ner("John Smith went home", seed=0) == mock_ner("John Smith went home", seed=0)
    body = chat_body("qa", "Question: hi")
    assert mock_chat(body, seed=0) == mock_chat(body, seed=0)


def test_different_seeds_differ():
    assert mock_embed(["x"], seed=0) != mock_embed(["x"], seed=1)


def test_fill_mask_descending_unique_tokens():
    candidates = mock_fill_mask("the [MASK] game", 10, seed=0)["candidates"]
    probs = [c["prob"] for c in candidates]
    tokens = [c["token"] for c in candidates]
    assert probs == sorted(probs, reverse=True)
    assert len(set(tokens)) == len(tokens)


def test_fake_entity_never_equals_example():
    for etype in ("PERSON", "FACILITY", "GPE", "DATE", "CARDINAL", "WORK OF ART"):
        example = fake_entity_name(etype, "", seed=0)
        regenerated = fake_entity_name(etype, example, seed=0)
        assert regenerated.lower() != example.lower()


def test_entity_chat_is_index_aligned():
    batch = [("FACILITY", f"Venue {i}") for i in range(20)]
    body = chat_body(FAKE_ENTITY_SYSTEM_PROMPT, fake_entity_user_message(batch))
    reply = mock_chat(body, seed=0)["choices"][0]["message"]["content"]
    lines = reply.splitlines()
    assert len(lines) == 20
    assert [int(l.split(".")[0]) for l in lines] == list(range(1, 21))


def test_distractor_chat_parseable_and_clean():
    user = ("Question 1: Which arena the Lewiston Maineiacs played their playoff games?\n"
            "Question 2: How many people can the [answer] seat?\n"
            "Words to avoid: Androscoggin Bank Colisée; 4,000-capacity (3,677 seated)\n"
            "Supporting paragraphs:\nT: text\n")
    reply = mock_chat(chat_body(DISTRACTOR_PARAGRAPH_SYSTEM_PROMPT, user),
                      seed=0)["choices"][0]["message"]["content"]
    assert "Fake Answer 1:" in reply and "Paragraph 2:" in reply
    assert "Androscoggin" not in reply
    assert "3,677" not in reply


def test_qa_chat_has_final_answer_marker():
    reply = mock_chat(chat_body("You are a question-answering assistant. "
                                "You will break the questions into sub-questions.",
                                "Context:\nParis: capital.\nQuestion: where?"),
                      seed=0)["choices"][0]["message"]["content"]
    assert "Final Answer:" in reply


def test_chat_n_choices():
    body = chat_body("qa", "Question: hi", n=5)
    assert len(mock_chat(body, seed=0)["choices"]) == 5


def test_ner_tags_capitalized_runs():
    spans = mock_ner("Arnold Schwarzenegger visited New York", seed=0)["spans"]
    surfaces = [(s["start_token"], s["end_token"]) for s in spans]
    assert (1, 2) in surfaces
    assert (4, 5) in surfaces
