import pytest
from hypothesis import given, strategies as st

from hopforge.rules import KIND_NAMED_ENTITY, KIND_OTHER, ModifiableDetail
from hopforge.substitution import (
    Candidate, ConstraintConfig, GenerationParseError, SOURCE_FAKE_ENTITY, SOURCE_MLM,
    SubstitutionError, apply_replacement, check_constraints, mask_detail,
    parse_indexed_response, propose_fake_entities, propose_fake_entity,
    propose_mlm_candidates,
)

ARENA_SUB_Q1 = "Which arena the Lewiston Maineiacs played their home games?"

HOME = ModifiableDetail(token_span=(8, 8), surface="home", kind=KIND_OTHER,
                        entity_type=None, rule_fired="II.iii")
VENUE = ModifiableDetail(token_span=(6, 8), surface="Androscoggin Bank Colisée",
                         kind=KIND_NAMED_ENTITY, entity_type="FACILITY",
                         rule_fired="II.ii")


def accepted_candidate(word="playoff"):
    return Candidate(replacement=word, source=SOURCE_MLM, sentence_sim=0.93,
                     word_sim=0.2, token_prob=0.05, accepted=True)


# -- constraint predicate ----------------------------------------------------

BOUNDARY_TABLE = [
    # (sentence_sim, word_sim, token_prob) -> (accepted, reason)
    ((0.990, 0.39, 0.002), (True, None)),
    ((0.991, 0.39, 0.002), (False, "sentence_sim")),
    ((0.990, 0.41, 0.002), (False, "word_sim")),
    ((0.990, 0.40, 0.002), (False, "word_sim")),
    ((0.990, 0.39, 0.0009), (False, "token_prob")),
    ((0.990, 0.39, 0.001), (False, "token_prob")),
]


@pytest.mark.parametrize("scores,expected", BOUNDARY_TABLE)
def test_constraint_boundaries(scores, expected):
    assert check_constraints(*scores, ConstraintConfig()) == expected


@given(s=st.floats(0, 1), w=st.floats(0, 1), p=st.floats(0.0001, 0.9999))
def test_constraint_predicate_is_pure_conjunction(s, w, p):
    cfg = ConstraintConfig()
    accepted, reason = check_constraints(s, w, p, cfg)
    assert accepted == (s < cfg.max_sentence_sim and w < cfg.max_word_sim
                        and p > cfg.min_token_prob)
    assert (reason is None) == accepted


def test_constraint_config_validation():
    with pytest.raises(ValueError):
        ConstraintConfig(max_sentence_sim=1.2)
    with pytest.raises(ValueError):
        ConstraintConfig(min_token_prob=0.0)
    with pytest.raises(ValueError):
        ConstraintConfig(top_k=0)


def test_candidate_requires_scores_for_mlm():
    with pytest.raises(ValueError):
        Candidate(replacement="x", source=SOURCE_MLM, sentence_sim=0.9)


# -- masked-LM proposals -----------------------------------------------------

def test_propose_mlm_candidates_from_mock(live_gateway):
    candidates = propose_mlm_candidates(ARENA_SUB_Q1, HOME, live_gateway)
    assert len(candidates) == 10
    for c in candidates:
        assert c.source == SOURCE_MLM
        assert None not in (c.sentence_sim, c.word_sim, c.token_prob)
        assert c.accepted == (c.rejection_reason is None)
    # accepted candidates first, descending token probability
    flags = [c.accepted for c in candidates]
    assert flags == sorted(flags, reverse=True)
    accepted = [c for c in candidates if c.accepted]
    probs = [c.token_prob for c in accepted]
    assert probs == sorted(probs, reverse=True)
    assert accepted, "the mock should pass at least one candidate"


def test_propose_mlm_is_deterministic(live_gateway):
    a = propose_mlm_candidates(ARENA_SUB_Q1, HOME, live_gateway)
    b = propose_mlm_candidates(ARENA_SUB_Q1, HOME, live_gateway)
    assert a == b


class IdentityGateway:
    """Stub that always proposes the original word back."""

    def fill_mask(self, text, top_k=10):
        return [("home", 0.5)]

    def embed(self, texts):
        raise AssertionError("identity candidates must not reach the embedder")

    def word_vec(self, words):
        return [[1.0, 0.0], [0.0, 1.0]]


def test_identity_candidate_rejected_on_sentence_sim():
    candidates = propose_mlm_candidates(ARENA_SUB_Q1, HOME, IdentityGateway())
    assert len(candidates) == 1
    c = candidates[0]
    assert c.sentence_sim == 1.0
    assert not c.accepted
    assert c.rejection_reason == "sentence_sim"


def test_propose_mlm_rejects_named_entity_detail(live_gateway):
    with pytest.raises(SubstitutionError):
        propose_mlm_candidates("How many people can the Androscoggin Bank Colisée seat?",
                               VENUE, live_gateway)


def test_mask_detail_replaces_exact_span():
    masked = mask_detail(ARENA_SUB_Q1, HOME)
    assert masked == "Which arena the Lewiston Maineiacs played their [MASK] games?"


def test_mask_detail_missing_span_errors():
    with pytest.raises(SubstitutionError, match="not found"):
        mask_detail("a question without the word", HOME)


# -- fake entities -----------------------------------------------------------

def test_propose_fake_entity(live_gateway):
    candidate = propose_fake_entity(VENUE, live_gateway)
    assert candidate.source == SOURCE_FAKE_ENTITY
    assert candidate.accepted
    assert candidate.replacement.lower() != VENUE.surface.lower()


def test_propose_fake_entities_batch_of_20(live_gateway):
    details = [ModifiableDetail(token_span=(1, 1), surface=f"Entity {i} Park",
                                kind=KIND_NAMED_ENTITY, entity_type="FACILITY",
                                rule_fired="II.ii") for i in range(20)]
    candidates = propose_fake_entities(details, live_gateway)
    assert len(candidates) == 20
    for detail, candidate in zip(details, candidates):
        assert candidate.replacement.lower() != detail.surface.lower()


def test_parse_indexed_response_missing_index():
    with pytest.raises(GenerationParseError) as exc:
        parse_indexed_response("1. Alpha\n3. Gamma", expected=3)
    assert "missing indices [2]" in str(exc.value)
    assert exc.value.raw == "1. Alpha\n3. Gamma"


class EchoGateway:
    """Stub chat that returns each requested entity unchanged."""

    def chat(self, req):
        lines = []
        for i, line in enumerate(req.messages[0][1].splitlines(), start=1):
            lines.append(f"{i}. {line.split(': ', 1)[1]}")
        return ["\n".join(lines)]


def test_fake_entity_identical_exhausts_retries():
    with pytest.raises(SubstitutionError, match="after 3 attempts"):
        propose_fake_entities([VENUE], EchoGateway(), max_retries=2)


# -- applying replacements ---------------------------------------------------

def test_apply_replacement_arena_question():
    out = apply_replacement(ARENA_SUB_Q1, HOME, accepted_candidate("playoff"))
    assert out == "Which arena the Lewiston Maineiacs played their playoff games?"


def test_apply_replacement_identical_returns_input():
    out = apply_replacement(ARENA_SUB_Q1, HOME, accepted_candidate("home"))
    assert out == ARENA_SUB_Q1


def test_apply_replacement_requires_accepted():
    rejected = Candidate(replacement="playoff", source=SOURCE_MLM, sentence_sim=1.0,
                         word_sim=0.2, token_prob=0.05, accepted=False,
                         rejection_reason="sentence_sim")
    with pytest.raises(SubstitutionError, match="not accepted"):
        apply_replacement(ARENA_SUB_Q1, HOME, rejected)


def test_apply_replacement_multi_token_preserves_punctuation():
    question = "How many people can the Androscoggin Bank Colisée seat?"
    candidate = Candidate(replacement="Maple Leaf Arena", source=SOURCE_FAKE_ENTITY,
                          accepted=True)
    out = apply_replacement(question, VENUE, candidate)
    assert out == "How many people can the Maple Leaf Arena seat?"


def test_apply_replacement_changes_one_contiguous_span():
    original = ARENA_SUB_Q1
    out = apply_replacement(original, HOME, accepted_candidate("championship"))
    prefix = 0
    while prefix < min(len(original), len(out)) and original[prefix] == out[prefix]:
        prefix += 1
    suffix = 0
    while (suffix < min(len(original), len(out)) - prefix
           and original[-1 - suffix] == out[-1 - suffix]):
        suffix += 1
    assert original[:prefix] + original[len(original) - suffix:] \
        == out[:prefix] + out[len(out) - suffix:]
    assert original[prefix:len(original) - suffix] == "home"
    assert out[prefix:len(out) - suffix] == "championship"


def test_apply_replacement_word_boundary():
    # "game" must not match inside "games"
    detail = ModifiableDetail(token_span=(9, 9), surface="game", kind=KIND_OTHER,
                              entity_type=None, rule_fired="II.iii")
    with pytest.raises(SubstitutionError, match="not found"):
        apply_replacement(ARENA_SUB_Q1, detail, accepted_candidate("match"))
