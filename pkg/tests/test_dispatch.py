import pytest

from slotqa.backends import (
    NO_ANSWER,
    Answer,
    BackendConfig,
    ExtractionResult,
    OracleBackend,
    QaBackend,
)
from slotqa.dispatch import (
    align_to_tokens,
    fill_from_questions,
    fill_slots,
    whitespace_tokens,
)
from slotqa.errors import BackendUnavailable, DuplicateSlotError, SpanOutOfRange
from slotqa.harness import oracle_for_screen
from slotqa.questions import AblationMode, Question
from slotqa.conversion import utterance_from_bio


class TestTokenization:
    def test_offsets_are_character_accurate(self):
        tokens = whitespace_tokens("  san  jose ")
        assert tokens == [(2, 5, "san"), (7, 11, "jose")]

    def test_empty_text(self):
        assert whitespace_tokens("   ") == []


class TestAlignment:
    TEXT = "fly from san jose tomorrow"

    def test_exact_token_span_maps_to_token_indices(self):
        # "san jose" is tokens 2..3, reported as a half-open window
        assert align_to_tokens(self.TEXT, (9, 17)) == (2, 4)

    def test_partial_overlap_expands_to_whole_tokens(self):
        # "an jo" still covers tokens 2..3
        assert align_to_tokens(self.TEXT, (10, 15)) == (2, 4)

    def test_span_in_whitespace_only(self):
        with pytest.raises(SpanOutOfRange):
            align_to_tokens("a   b", (2, 3))

    def test_span_outside_text(self):
        with pytest.raises(SpanOutOfRange):
            align_to_tokens("short", (10, 20))

    def test_inverted_span(self):
        with pytest.raises(SpanOutOfRange):
            align_to_tokens(self.TEXT, (5, 2))


class ScriptedBackend(QaBackend):
    """Returns a fixed result per question text; everything else rejects."""

    def __init__(self, script):
        self.script = script
        self.batches = []

    def batch_extract(self, pairs):
        self.batches.append(list(pairs))
        return [self.script.get(q, NO_ANSWER) for q, _ in pairs]


def q(text, slot):
    return Question(text=text, slot_id=slot)


UTTERANCE = "fly from san jose to boston"


class TestFillFromQuestions:
    def test_fills_and_rejections_split_by_threshold(self):
        backend = ScriptedBackend({
            "src?": ExtractionResult(Answer("san jose", 9, 17), 0.9, 0.1),
            "dst?": ExtractionResult(Answer("boston", 21, 27), 0.4, 0.6),
        })
        result = fill_from_questions([q("src?", "src"), q("dst?", "dst"), q("day?", "day")],
                                     UTTERANCE, backend)
        assert set(result.fills) == {"src"}
        assert result.fills["src"].surface == "san jose"
        assert result.fills["src"].token_start == 2
        assert result.fills["src"].token_end == 4
        assert result.rejections == {"dst": 0.6, "day": 1.0}
        assert result.asked_slots() == {"src", "dst", "day"}
        assert result.conflicts == []

    def test_one_batch_round_trip_for_all_questions(self):
        backend = ScriptedBackend({})
        fill_from_questions([q("a?", "a"), q("b?", "b")], UTTERANCE, backend)
        assert len(backend.batches) == 1
        assert [pair[0] for pair in backend.batches[0]] == ["a?", "b?"]
        assert all(pair[1] == UTTERANCE for pair in backend.batches[0])

    def test_contract_violation_becomes_full_confidence_rejection(self, caplog):
        backend = ScriptedBackend({
            "src?": ExtractionResult(Answer("nowhere", 0, 7), 0.9, 0.1),
        })
        with caplog.at_level("WARNING"):
            result = fill_from_questions([q("src?", "src")], UTTERANCE, backend)
        assert result.fills == {}
        assert result.rejections == {"src": 1.0}
        assert "substring" in caplog.text

    def test_overlapping_fills_are_reported_as_conflicts(self):
        backend = ScriptedBackend({
            "a?": ExtractionResult(Answer("san jose", 9, 17), 0.9, 0.1),
            "b?": ExtractionResult(Answer("jose to", 13, 20), 0.9, 0.1),
            "c?": ExtractionResult(Answer("fly", 0, 3), 0.9, 0.1),
        })
        result = fill_from_questions([q("a?", "a"), q("b?", "b"), q("c?", "c")],
                                     UTTERANCE, backend)
        assert result.conflicts == [("a", "b")]

    def test_duplicate_slots_rejected_up_front(self):
        with pytest.raises(DuplicateSlotError, match="dup"):
            fill_from_questions([q("one?", "dup"), q("two?", "dup")],
                                UTTERANCE, ScriptedBackend({}))

    def test_backend_outage_carries_the_utterance_locus(self):
        class DownBackend(QaBackend):
            def batch_extract(self, pairs):
                raise BackendUnavailable("connection refused")

        with pytest.raises(BackendUnavailable, match="utt-7"):
            fill_from_questions([q("a?", "a")], UTTERANCE, DownBackend(),
                                utterance_id="utt-7")

    def test_custom_threshold_applies(self):
        backend = ScriptedBackend({
            "a?": ExtractionResult(Answer("fly", 0, 3), 0.8, 0.3),
        })
        strict = fill_from_questions([q("a?", "a")], UTTERANCE, backend,
                                     BackendConfig(no_answer_threshold=0.3))
        assert strict.rejections == {"a": 0.3}
        lenient = fill_from_questions([q("a?", "a")], UTTERANCE, backend,
                                      BackendConfig(no_answer_threshold=0.5))
        assert "a" in lenient.fills

    def test_result_to_dict_is_json_shaped(self):
        backend = ScriptedBackend({
            "src?": ExtractionResult(Answer("san jose", 9, 17), 0.9, 0.1),
        })
        result = fill_from_questions([q("src?", "src"), q("day?", "day")],
                                     UTTERANCE, backend, utterance_id="u1",
                                     mode=AblationMode.FULL)
        obj = result.to_dict()
        assert obj["utterance_id"] == "u1"
        assert obj["mode"] == "full"
        assert obj["fills"]["src"]["text"] == "san jose"
        assert obj["rejections"] == {"day": 1.0}
        assert obj["conflicts"] == []


class TestFillSlots:
    def test_screen_pipeline_with_a_gold_teacher(self, vl_screen, vl_domain, overrides):
        utt = vl_domain.utterances[0]
        oracle = oracle_for_screen(vl_screen, [utt], rules=overrides)
        result = fill_slots([vl_screen], utt.text, oracle, rules=overrides,
                            utterance_id=utt.utterance_id)
        assert result.distractor_count == 0
        assert {s: f.surface for s, f in result.fills.items()} == {
            f.slot_id: f.surface for f in utt.slots
        }
        # every absent slot was asked and rejected
        assert set(result.rejections) == set(vl_screen.slot_ids()) - utt.slot_ids()

    def test_distractor_screens_add_their_element_count(self, vl_screen, united_screen):
        utt = utterance_from_bio("u", ["hello"], ["O"])
        result = fill_slots([vl_screen, united_screen], utt.text, OracleBackend({}))
        assert result.distractor_count == 6
        assert len(result.rejections) == 16

    def test_no_screens_is_an_error(self):
        with pytest.raises(ValueError):
            fill_slots([], "text", OracleBackend({}))
