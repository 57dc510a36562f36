import random
import string

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from slotqa.conversion import utterance_from_bio
from slotqa.dispatch import Fill, SlotFillResult, align_to_tokens
from slotqa.errors import AlignmentError
from slotqa.metrics import (
    MetricsReport,
    f1_from_token_pairs,
    normalize_token,
    span_tokens,
    token_f1,
)
from slotqa.questions import AblationMode


# ---------------------------------------------------------------------------
# Independent re-implementation used as the scoring oracle. It shares no
# code path with the module under test: multiset overlap via list removal,
# plain loops, the same arithmetic written out longhand.


def brute_force_overlap(predicted, gold):
    remaining = list(gold)
    hits = 0
    for token in predicted:
        if token in remaining:
            remaining.remove(token)
            hits += 1
    return hits


def brute_force_report(table):
    per_slot = {}
    weighted_top = 0.0
    weighted_bottom = 0
    sum_o = sum_p = sum_g = 0
    # The pooled average is defined over slots in sorted name order; float
    # addition is order-sensitive, so the oracle follows the same contract.
    for slot in sorted(table):
        o = p = g = 0
        for predicted, gold in table[slot]:
            o += brute_force_overlap(predicted, gold)
            p += len(predicted)
            g += len(gold)
        precision = o / p if p else 0.0
        recall = o / g if g else 0.0
        f1 = (2 * precision * recall / (precision + recall)) if precision + recall else 0.0
        per_slot[slot] = (precision, recall, f1, g)
        if g > 0:
            weighted_top += g * f1
            weighted_bottom += g
        sum_o += o
        sum_p += p
        sum_g += g
    micro_p = sum_o / sum_p if sum_p else 0.0
    micro_r = sum_o / sum_g if sum_g else 0.0
    micro_f1 = (2 * micro_p * micro_r / (micro_p + micro_r)) if micro_p + micro_r else 0.0
    weighted = weighted_top / weighted_bottom if weighted_bottom else 0.0
    return per_slot, weighted, micro_p, micro_r, micro_f1


def assert_matches_brute_force(table):
    report = f1_from_token_pairs(table)
    per_slot, weighted, micro_p, micro_r, micro_f1 = brute_force_report(table)
    assert report.weighted_f1 == weighted
    assert report.micro_precision == micro_p
    assert report.micro_recall == micro_r
    assert report.micro_f1 == micro_f1
    assert set(report.per_slot) == set(per_slot)
    for slot, (precision, recall, f1, support) in per_slot.items():
        m = report.per_slot[slot]
        assert (m.precision, m.recall, m.f1, m.support) == (precision, recall, f1, support)


class TestNormalization:
    @pytest.mark.parametrize(
        ("token", "expected"),
        [("Boston", "boston"), ("boston,", "boston"), ("'90s'", "90s"),
         ("...", ""), ("U.S.A.", "u.s.a"), ("one-way", "one-way")],
    )
    def test_casefold_and_edge_punctuation(self, token, expected):
        assert normalize_token(token) == expected

    def test_span_tokens_drops_tokens_that_normalize_away(self):
        text = "go to -- Boston, now"
        start, end = text.index("--"), len(text)
        assert span_tokens(text, start, end) == ["boston", "now"]
        assert span_tokens(text, start, end, raw=True) == ["--", "Boston,", "now"]

    def test_span_tokens_on_exact_boundaries(self):
        text = "san jose airport"
        assert span_tokens(text, 0, 8) == ["san", "jose"]


class TestKnownValues:
    def test_single_partial_credit_case(self):
        # gold "san jose", predicted "san": P=1, R=1/2, F1=2/3
        report = f1_from_token_pairs({"src": [ (["san"], ["san", "jose"]) ]})
        m = report.per_slot["src"]
        assert m.precision == 1.0
        assert m.recall == 0.5
        assert m.f1 == 2 / 3
        assert m.support == 2
        assert report.weighted_f1 == 2 / 3

    def test_perfect_prediction_scores_one(self):
        report = f1_from_token_pairs({
            "a": [(["x", "y"], ["x", "y"])],
            "b": [(["z"], ["z"])],
        })
        assert report.weighted_f1 == 1.0
        assert report.micro_f1 == 1.0

    def test_everything_missed_scores_zero(self):
        report = f1_from_token_pairs({"a": [([], ["x", "y"])]})
        assert report.weighted_f1 == 0.0
        assert report.micro_recall == 0.0

    def test_weighting_follows_gold_token_counts(self):
        # slot a: f1=1 with support 1; slot b: f1=0 with support 3
        report = f1_from_token_pairs({
            "a": [(["x"], ["x"])],
            "b": [([], ["p", "q", "r"])],
        })
        assert report.weighted_f1 == (1 * 1.0 + 3 * 0.0) / 4

    def test_zero_support_slots_do_not_dilute_the_average(self):
        # slot b has predictions but no gold anywhere: per-slot f1 is 0,
        # but the weighted average only runs over slots with gold tokens.
        report = f1_from_token_pairs({
            "a": [(["x"], ["x"])],
            "b": [(["stray"], [])],
        })
        assert report.per_slot["b"].support == 0
        assert report.weighted_f1 == 1.0
        assert report.micro_precision == 0.5

    def test_empty_table(self):
        report = f1_from_token_pairs({})
        assert report.weighted_f1 == 0.0
        assert report.per_slot == {}

    def test_duplicate_tokens_are_counted_as_a_multiset(self):
        report = f1_from_token_pairs({"a": [(["x", "x", "x"], ["x", "x"])]})
        m = report.per_slot["a"]
        assert m.precision == 2 / 3
        assert m.recall == 1.0


token_lists = st.lists(st.sampled_from(["a", "b", "c", "aa", "bb"]), max_size=6)
tables = st.dictionaries(
    st.sampled_from(["s1", "s2", "s3", "s4", "s5"]),
    st.lists(st.tuples(token_lists, token_lists), min_size=1, max_size=4),
    max_size=5,
)


class TestProperties:
    @settings(max_examples=200, deadline=None)
    @given(tables)
    def test_equals_brute_force(self, table):
        assert_matches_brute_force(table)

    @settings(max_examples=200, deadline=None)
    @given(tables)
    def test_all_scores_are_bounded(self, table):
        report = f1_from_token_pairs(table)
        values = [report.weighted_f1, report.micro_precision,
                  report.micro_recall, report.micro_f1]
        for m in report.per_slot.values():
            values += [m.precision, m.recall, m.f1]
        assert all(0.0 <= v <= 1.0 for v in values)

    @settings(max_examples=200, deadline=None)
    @given(tables)
    def test_swapping_prediction_and_gold_transposes_precision_and_recall(self, table):
        report = f1_from_token_pairs(table)
        swapped = f1_from_token_pairs({
            slot: [(gold, predicted) for predicted, gold in pairs]
            for slot, pairs in table.items()
        })
        for slot in report.per_slot:
            assert report.per_slot[slot].precision == swapped.per_slot[slot].recall
            assert report.per_slot[slot].recall == swapped.per_slot[slot].precision
            assert report.per_slot[slot].f1 == swapped.per_slot[slot].f1

    @settings(max_examples=200, deadline=None)
    @given(tables)
    def test_f1_is_the_harmonic_mean(self, table):
        report = f1_from_token_pairs(table)
        for m in report.per_slot.values():
            if m.precision + m.recall:
                assert m.f1 == 2 * m.precision * m.recall / (m.precision + m.recall)
            else:
                assert m.f1 == 0.0

    @settings(max_examples=100, deadline=None)
    @given(token_lists)
    def test_identity_prediction_scores_one(self, tokens):
        report = f1_from_token_pairs({"s": [(tokens, tokens)]})
        if tokens:
            assert report.per_slot["s"].f1 == 1.0
        else:
            assert report.per_slot["s"].support == 0


# ---------------------------------------------------------------------------
# Corpus-level scoring


def predicted_for(utt, spans, mode=AblationMode.FULL, rejections=None):
    """Build a SlotFillResult claiming the given slot -> (start, end) spans."""
    fills = {}
    for slot, (start, end) in spans.items():
        token_start, token_end = align_to_tokens(utt.text, (start, end))
        fills[slot] = Fill(
            surface=utt.text[start:end], start_char=start, end_char=end,
            span_score=1.0, token_start=token_start, token_end=token_end,
        )
    return SlotFillResult(
        utterance=utt.text, fills=fills, rejections=dict(rejections or {}),
        conflicts=[], mode=mode, distractor_count=0, utterance_id=utt.utterance_id,
    )


def gold_utterance(utterance_id="u1"):
    return utterance_from_bio(
        utterance_id,
        ["fly", "from", "San", "Jose", "to", "Boston"],
        ["O", "O", "B-src", "I-src", "O", "B-dst"],
    )


class TestTokenF1:
    def test_exact_recovery_scores_one(self):
        utt = gold_utterance()
        spans = {f.slot_id: (f.start_char, f.end_char) for f in utt.slots}
        report = token_f1([utt], [predicted_for(utt, spans)])
        assert report.weighted_f1 == 1.0
        assert report.n_utterances == 1

    def test_case_differences_are_forgiven_by_default(self):
        utt = gold_utterance()
        spans = {f.slot_id: (f.start_char, f.end_char) for f in utt.slots}
        result = predicted_for(utt, spans)
        assert token_f1([utt], [result]).weighted_f1 == 1.0
        assert token_f1([utt], [result], raw=True).weighted_f1 == 1.0

    def test_length_mismatch(self):
        utt = gold_utterance()
        with pytest.raises(AlignmentError):
            token_f1([utt], [])

    def test_id_mismatch(self):
        utt = gold_utterance("a")
        other = gold_utterance("b")
        spans = {f.slot_id: (f.start_char, f.end_char) for f in utt.slots}
        with pytest.raises(AlignmentError, match="'a'.*'b'"):
            token_f1([utt], [predicted_for(other, spans)])

    def test_text_mismatch(self):
        utt = gold_utterance()
        stranger = utterance_from_bio("u1", ["hello"], ["O"])
        with pytest.raises(AlignmentError, match="text"):
            token_f1([utt], [predicted_for(stranger, {})])

    def test_rejection_accuracy_counts_asked_but_absent_slots(self):
        utt = gold_utterance()
        spans = {f.slot_id: (f.start_char, f.end_char) for f in utt.slots}
        # "day" and "seat" were asked and absent; only "day" was rejected,
        # "seat" got a spurious fill.
        result = predicted_for(utt, dict(spans, seat=(0, 3)),
                               rejections={"day": 0.9})
        report = token_f1([utt], [result])
        assert report.rejection_accuracy == 0.5
        assert report.n_questions == 4
        assert report.n_rejections == 1

    def test_rejection_accuracy_is_none_without_negatives(self):
        utt = gold_utterance()
        spans = {f.slot_id: (f.start_char, f.end_char) for f in utt.slots}
        report = token_f1([utt], [predicted_for(utt, spans)])
        assert report.rejection_accuracy is None

    def test_unasked_gold_slot_still_hurts_recall(self):
        utt = gold_utterance()
        report = token_f1([utt], [predicted_for(utt, {})])
        assert report.weighted_f1 == 0.0
        assert report.per_slot["src"].support == 2

    def test_report_to_dict_round_trips_the_numbers(self):
        utt = gold_utterance()
        spans = {f.slot_id: (f.start_char, f.end_char) for f in utt.slots}
        report = token_f1([utt], [predicted_for(utt, spans)])
        obj = report.to_dict()
        assert obj["weighted_f1"] == report.weighted_f1
        assert obj["per_slot"]["src"]["f1"] == 1.0
        assert obj["counts"]["utterances"] == 1
        assert report.counts == (1, 2, 0)
        assert isinstance(report, MetricsReport)


RANDOM_ALPHABET = [w + p for w in ("aa", "Bb", "cc", "dd,", "Ee.")
                   for p in ("", "x")] + list(string.ascii_lowercase[:4])


def random_instance(rng, index, max_tokens=10, max_slots=5):
    """One gold utterance plus a randomly behaved prediction for it."""
    n_tokens = rng.randint(1, max_tokens)
    tokens = [rng.choice(RANDOM_ALPHABET) for _ in range(n_tokens)]
    slots = [f"s{j}" for j in range(rng.randint(1, max_slots))]
    tags = ["O"] * n_tokens
    for slot in slots:
        if rng.random() < 0.8:
            start = rng.randrange(n_tokens)
            width = min(rng.randint(1, 3), n_tokens - start)
            if all(t == "O" for t in tags[start:start + width]):
                tags[start] = f"B-{slot}"
                for k in range(start + 1, start + width):
                    tags[k] = f"I-{slot}"
    utt = utterance_from_bio(f"u{index}", tokens, tags)
    offsets = [start for _, start in utt.tokens]
    spans = {}
    rejections = {}
    for slot in slots:
        roll = rng.random()
        if roll < 0.2:
            rejections[slot] = 1.0
        elif roll < 0.9:
            a = rng.randrange(n_tokens)
            b = rng.randint(a, n_tokens - 1)
            spans[slot] = (offsets[a], offsets[b] + len(tokens[b]))
    return utt, predicted_for(utt, spans, rejections=rejections)


def expected_table(pairs_by_corpus):
    """Token table built with str.split and str.strip only."""
    table = {}
    for utt, result in pairs_by_corpus:
        gold_tokens = {}
        for fill in utt.slots:
            words = utt.text[fill.start_char:fill.end_char].split()
            cleaned = [w.strip(string.punctuation).casefold() for w in words]
            gold_tokens.setdefault(fill.slot_id, []).extend(c for c in cleaned if c)
        predicted_tokens = {}
        for slot, fill in result.fills.items():
            words = utt.text[fill.start_char:fill.end_char].split()
            cleaned = [w.strip(string.punctuation).casefold() for w in words]
            predicted_tokens[slot] = [c for c in cleaned if c]
        for slot in set(gold_tokens) | set(predicted_tokens):
            table.setdefault(slot, []).append(
                (predicted_tokens.get(slot, []), gold_tokens.get(slot, []))
            )
    return table


class TestRandomizedEquivalence:
    """token_f1 against the longhand counter over generated corpora."""

    def test_one_thousand_random_instances(self):
        rng = random.Random(20240817)
        for i in range(1000):
            corpus = [random_instance(rng, f"{i}.{j}")
                      for j in range(rng.randint(1, 3))]
            gold = [utt for utt, _ in corpus]
            predicted = [result for _, result in corpus]
            report = token_f1(gold, predicted)
            per_slot, weighted, micro_p, micro_r, micro_f1 = brute_force_report(
                expected_table(corpus)
            )
            assert report.weighted_f1 == weighted, f"instance {i}"
            assert report.micro_precision == micro_p
            assert report.micro_recall == micro_r
            assert report.micro_f1 == micro_f1
            for slot, (precision, recall, f1, support) in per_slot.items():
                m = report.per_slot[slot]
                assert (m.precision, m.recall, m.f1, m.support) == \
                    (precision, recall, f1, support), f"instance {i} slot {slot}"
