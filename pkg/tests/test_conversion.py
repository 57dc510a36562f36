import json

import pytest

from slotqa.conversion import (
    AnnotatedUtterance,
    NegativePolicy,
    QaExample,
    SlotFill,
    SlotSchema,
    export_squad,
    import_squad,
    load_bio_corpus,
    load_schema,
    parse_bio_corpus,
    question_for_tag,
    render_conll,
    sample_few_shot,
    save_schema,
    simulated_screen,
    slot_coverage,
    squad_dict,
    tag_to_description,
    to_qa_examples,
    utterance_from_bio,
    utterance_tags,
)
from slotqa.errors import ParseError, TagSequenceError, ValidationError
from slotqa.questions import AblationMode
from slotqa.screens import CategoryKind, validate_screen


def utt(tokens_tags, utterance_id="u1"):
    tokens = [t for t, _ in tokens_tags]
    tags = [tag for _, tag in tokens_tags]
    return utterance_from_bio(utterance_id, tokens, tags)


FLIGHT = utt([
    ("flight", "O"), ("from", "O"), ("san", "B-src"), ("jose", "I-src"),
    ("to", "O"), ("boston", "B-dst"),
])


class TestBioAssembly:
    def test_text_is_the_single_space_join(self):
        assert FLIGHT.text == "flight from san jose to boston"

    def test_spans_are_character_exact(self):
        spans = {f.slot_id: (f.surface, f.start_char, f.end_char) for f in FLIGHT.slots}
        assert spans == {"src": ("san jose", 12, 20), "dst": ("boston", 24, 30)}
        for f in FLIGHT.slots:
            assert FLIGHT.text[f.start_char:f.end_char] == f.surface

    def test_adjacent_b_tags_close_the_previous_span(self):
        u = utt([("a", "B-x"), ("b", "B-x"), ("c", "O")])
        assert [(f.surface, f.slot_id) for f in u.slots] == [("a", "x"), ("b", "x")]

    def test_dangling_i_tag_starts_a_span_by_default(self):
        u = utt([("a", "O"), ("b", "I-x")])
        assert [(f.surface, f.slot_id) for f in u.slots] == [("b", "x")]

    def test_dangling_i_tag_rejected_in_strict_mode(self):
        with pytest.raises(TagSequenceError):
            utterance_from_bio("u", ["a", "b"], ["O", "I-x"], strict=True)

    def test_i_tag_of_a_different_slot_starts_fresh(self):
        u = utt([("a", "B-x"), ("b", "I-y")])
        assert [(f.surface, f.slot_id) for f in u.slots] == [("a", "x"), ("b", "y")]

    def test_length_mismatch(self):
        with pytest.raises(ParseError):
            utterance_from_bio("u", ["a"], ["O", "O"])

    def test_token_with_whitespace(self):
        with pytest.raises(ParseError):
            utterance_from_bio("u", ["a b"], ["O"])

    def test_malformed_tag(self):
        with pytest.raises(ParseError):
            utterance_from_bio("u", ["a"], ["X-no"])

    def test_validate_passes_for_assembled_utterances(self):
        assert FLIGHT.validate() == []

    def test_validate_catches_surface_mismatch(self):
        broken = AnnotatedUtterance(
            "u", "hello world", (("hello", 0), ("world", 6)),
            (SlotFill("s", 0, 5, "jello"),),
        )
        assert any("surface" in v for v in broken.validate())

    def test_validate_catches_overlap_and_bad_boundaries(self):
        broken = AnnotatedUtterance(
            "u", "hello world", (("hello", 0), ("world", 6)),
            (SlotFill("a", 0, 7, "hello w"), SlotFill("b", 6, 11, "world")),
        )
        violations = broken.validate()
        assert any("overlap" in v for v in violations)
        assert any("boundaries" in v for v in violations)

    def test_utterance_tags_inverts_assembly(self):
        assert utterance_tags(FLIGHT) == ["O", "O", "B-src", "I-src", "O", "B-dst"]


class TestCorpusIO:
    TEXT = (
        "# id: first\n"
        "book\tO\n"
        "paris\tB-city\n"
        "\n"
        "hi\tO\n"
    )

    def test_id_comments_name_utterances(self):
        utts = parse_bio_corpus(self.TEXT.splitlines())
        assert [u.utterance_id for u in utts] == ["first", "utt-0001"]

    def test_round_trip_is_identity(self, sample_50):
        assert parse_bio_corpus(render_conll(sample_50).splitlines()) == sample_50

    def test_bundled_corpora_load_and_validate(self, all_domains):
        for domain in all_domains.values():
            assert len(domain.utterances) >= 100
            for u in domain.utterances:
                assert u.validate() == []

    def test_line_without_tab(self):
        with pytest.raises(ParseError, match="2"):
            parse_bio_corpus(["ok\tO", "no-tab-here"])

    def test_bad_tag_reports_line_number(self):
        with pytest.raises(ParseError):
            parse_bio_corpus(["word\tQ-bad"])

    def test_load_bio_corpus_from_file(self, tmp_path):
        path = tmp_path / "c.conll"
        path.write_text(self.TEXT, encoding="utf-8")
        assert len(load_bio_corpus(path)) == 2

    def test_strict_propagates(self, tmp_path):
        path = tmp_path / "c.conll"
        path.write_text("a\tO\nb\tI-x\n", encoding="utf-8")
        assert len(load_bio_corpus(path)) == 1
        with pytest.raises(TagSequenceError):
            load_bio_corpus(path, strict=True)


class TestSchema:
    def test_order_and_ordinals(self):
        schema = SlotSchema((("b_tag", "second thing"), ("a_tag", "first thing")))
        assert schema.tags == ("b_tag", "a_tag")
        assert schema.ordinal("b_tag") == 1
        assert schema.ordinal("a_tag") == 2
        assert "b_tag" in schema and len(schema) == 2

    def test_duplicate_description_rejected(self):
        with pytest.raises(ValidationError):
            SlotSchema((("a", "same"), ("b", "same")))

    def test_duplicate_tag_rejected(self):
        with pytest.raises(ValidationError):
            SlotSchema((("a", "one"), ("a", "two")))

    def test_empty_description_rejected(self):
        with pytest.raises(ValidationError):
            SlotSchema((("a", "  "),))

    def test_description_falls_back_to_tag_splitting(self):
        schema = SlotSchema((("known", "a known slot"),))
        assert schema.description("known") == "a known slot"
        assert schema.lookup("fromloc.city_name") is None
        assert tag_to_description("fromloc.city_name") == "fromloc city name"
        assert tag_to_description("trip_type") == "trip type"

    def test_file_round_trip(self, tmp_path, atis_schema):
        path = tmp_path / "s.tsv"
        save_schema(atis_schema, path)
        assert load_schema(path) == atis_schema

    def test_atis_schema_has_83_slots(self, atis_schema):
        assert len(atis_schema) == 83

    def test_load_schema_bad_row(self, tmp_path):
        path = tmp_path / "bad.tsv"
        path.write_text("just_one_field\n", encoding="utf-8")
        with pytest.raises(ParseError):
            load_schema(path)


class TestQuestionForTag:
    def test_uses_schema_description(self):
        schema = SlotSchema((("aircraft_code", "aircraft code"),))
        assert question_for_tag("aircraft_code", schema) == "What is the aircraft code?"

    def test_strips_command_verbs_from_descriptions(self):
        schema = SlotSchema((("vehicle", "Select vehicle"),))
        assert question_for_tag("vehicle", schema) == "What is the vehicle?"

    def test_no_visuals_uses_schema_ordinal(self):
        schema = SlotSchema((("a", "first"), ("b", "second")))
        assert question_for_tag("b", schema, AblationMode.NO_VISUALS) == "XYZ2"

    def test_no_visuals_unknown_tag_needs_extra_ordinals(self):
        schema = SlotSchema((("a", "first"),))
        with pytest.raises(ValidationError):
            question_for_tag("mystery", schema, AblationMode.NO_VISUALS)
        assert question_for_tag("mystery", schema, AblationMode.NO_VISUALS,
                                extra_ordinals={"mystery": 9}) == "XYZ9"


class TestNegativePolicy:
    def test_parse_variants(self):
        assert NegativePolicy.parse("all").kind == "all"
        assert NegativePolicy.parse("none").kind == "none"
        sampled = NegativePolicy.parse("sample:3", seed=5)
        assert (sampled.kind, sampled.k, sampled.seed) == ("sample", 3, 5)

    @pytest.mark.parametrize("bad", ["sample:-1", "sample:x", "most", ""])
    def test_parse_rejects_garbage(self, bad):
        with pytest.raises((ParseError, ValidationError, ValueError)):
            NegativePolicy.parse(bad)


SCHEMA = SlotSchema((("src", "departure city"), ("dst", "arrival city"), ("day", "travel day")))


class TestQaExamples:
    def test_one_answerable_per_fill_plus_all_negatives(self):
        examples = to_qa_examples([FLIGHT], SCHEMA, negatives=NegativePolicy.all_slots())
        assert len(examples) == 3  # 2 answerable + 1 negative
        answerable = [e for e in examples if not e.is_impossible]
        assert {e.qa_id for e in answerable} == {"u1:src", "u1:dst"}
        negative = [e for e in examples if e.is_impossible]
        assert [e.qa_id for e in negative] == ["u1:day"]
        assert negative[0].answers == ()

    def test_total_is_schema_size_per_utterance(self, sample_50, atis_schema):
        examples = to_qa_examples(sample_50, atis_schema, negatives=NegativePolicy.all_slots())
        assert len(examples) == len(sample_50) * len(atis_schema)

    def test_answer_starts_are_character_exact(self):
        examples = to_qa_examples([FLIGHT], SCHEMA)
        for e in examples:
            for text, start in e.answers:
                assert e.context[start:start + len(text)] == text

    def test_answerables_sorted_by_span_start(self):
        examples = to_qa_examples([FLIGHT], SCHEMA)
        starts = [e.answers[0][1] for e in examples]
        assert starts == sorted(starts)

    def test_negatives_follow_schema_order(self):
        empty = utt([("hello", "O")])
        examples = to_qa_examples([empty], SCHEMA, negatives=NegativePolicy.all_slots())
        assert [e.qa_id.split(":")[1] for e in examples] == ["src", "dst", "day"]

    def test_repeated_slot_gets_suffixed_ids(self):
        twice = utt([("a", "B-src"), ("b", "O"), ("c", "B-src")])
        examples = to_qa_examples([twice], SCHEMA)
        assert [e.qa_id for e in examples] == ["u1:src", "u1:src#2"]

    def test_sampled_negatives_are_seeded(self):
        empty = utt([("hello", "O")])
        first = to_qa_examples([empty], SCHEMA, negatives=NegativePolicy.sample(1, seed=3))
        second = to_qa_examples([empty], SCHEMA, negatives=NegativePolicy.sample(1, seed=3))
        assert first == second
        assert sum(e.is_impossible for e in first) == 1

    def test_no_visuals_mode_emits_tag_symbols(self):
        examples = to_qa_examples([FLIGHT], SCHEMA, mode=AblationMode.NO_VISUALS)
        assert {e.question for e in examples} == {"XYZ1", "XYZ2"}

    def test_off_schema_slot_still_converts(self):
        stray = utt([("x", "B-unknown_slot")])
        examples = to_qa_examples([stray], SCHEMA)
        assert examples[0].question == "What is the unknown slot?"

    def test_example_validate_catches_broken_offsets(self):
        bad = QaExample("q", "What?", "short", (("missing", 40),), False)
        assert bad.validate() != []
        good = QaExample("q", "What?", "short", (("short", 0),), False)
        assert good.validate() == []


class TestSquadIO:
    def test_export_import_round_trip(self, tmp_path):
        examples = to_qa_examples([FLIGHT], SCHEMA, negatives=NegativePolicy.all_slots())
        path = tmp_path / "out.json"
        export_squad(examples, path)
        assert import_squad(path) == examples

    def test_shape_matches_the_v2_reader_contract(self):
        examples = to_qa_examples([FLIGHT], SCHEMA, negatives=NegativePolicy.all_slots())
        obj = squad_dict(examples, title="demo")
        assert obj["version"] == "v2.0"
        assert [entry["title"] for entry in obj["data"]] == ["demo"]
        paragraphs = obj["data"][0]["paragraphs"]
        # one utterance -> its examples share a single paragraph
        assert len(paragraphs) == 1
        assert len(paragraphs[0]["qas"]) == 3
        qa = paragraphs[0]["qas"][0]
        assert set(qa) == {"id", "question", "answers", "is_impossible"}

    def test_consecutive_contexts_group(self):
        a = utt([("x", "B-src")], "a")
        b = utt([("y", "B-dst")], "b")
        obj = squad_dict(to_qa_examples([a, b], SCHEMA))
        assert len(obj["data"][0]["paragraphs"]) == 2

    def test_export_refuses_invalid_examples(self, tmp_path):
        bad = QaExample("q", "What?", "short", (("missing", 40),), False)
        with pytest.raises(ValidationError):
            export_squad([bad], tmp_path / "x.json")

    def test_import_rejects_other_json(self, tmp_path):
        path = tmp_path / "x.json"
        path.write_text(json.dumps({"data": "nope"}), encoding="utf-8")
        with pytest.raises(ParseError):
            import_squad(path)


class TestFewShot:
    def corpus(self, n=20):
        return [utt([("w", "B-s")], f"u{i:03d}") for i in range(n)]

    def test_zero_is_empty(self):
        assert sample_few_shot(self.corpus(), 0, seed=1) == []

    def test_k_at_least_n_returns_everything(self):
        utts = self.corpus(5)
        assert sample_few_shot(utts, 5, seed=1) == utts
        assert sample_few_shot(utts, 99, seed=1) == utts

    def test_equal_seeds_equal_samples(self, sample_50):
        assert sample_few_shot(sample_50, 10, seed=4) == sample_few_shot(sample_50, 10, seed=4)

    def test_different_seeds_differ(self, sample_50):
        assert sample_few_shot(sample_50, 10, seed=4) != sample_few_shot(sample_50, 10, seed=5)

    def test_sample_keeps_corpus_order(self, sample_50):
        picked = sample_few_shot(sample_50, 10, seed=4)
        ids = [u.utterance_id for u in picked]
        assert ids == sorted(ids)
        assert all(u in sample_50 for u in picked)

    def test_negative_k_rejected(self):
        with pytest.raises(ValueError):
            sample_few_shot(self.corpus(), -1, seed=0)

    def test_stratified_covers_rare_slots(self):
        # 19 utterances with slot a, 1 with slot b: a uniform k=4 pick often
        # misses b; the stratified pick must include it.
        utts = [utt([("w", "B-a")], f"u{i:03d}") for i in range(19)]
        utts.append(utt([("w", "B-b")], "u019"))
        picked = sample_few_shot(utts, 4, seed=0, stratified=True)
        covered = {slot for u in picked for slot in u.slot_ids()}
        assert covered == {"a", "b"}

    def test_slot_coverage_counts_utterances(self):
        double = utt([("x", "B-a"), ("y", "B-a"), ("z", "B-b")])
        assert slot_coverage([double, FLIGHT]) == {"a": 1, "b": 1, "dst": 1, "src": 1}


class TestSimulatedScreen:
    def test_renders_every_slot_as_a_text_field(self, atis_schema):
        screen = simulated_screen(atis_schema, "form", "app")
        assert validate_screen(screen) == []
        assert len(screen.elements) == 83
        assert all(e.category.kind is CategoryKind.TEXT_FIELD for e in screen.elements)
        assert screen.slot_ids() == atis_schema.tags
        assert screen.elements[0].element_id == "field_01"
