"""End-to-end acceptance gate.

Each test is one release criterion with its tolerance pinned inline:
score comparisons are exact float equality (no tolerance), string
comparisons are byte-exact, and the end-to-end timing budget is explicit.
"""

import json
import random
import re
import tempfile
import time

from slotqa.bundled import (
    DOMAINS,
    bundled_corpus,
    bundled_domain,
    bundled_overrides,
    bundled_schema,
    bundled_screen,
    bundled_screen_pool,
)
from slotqa.conversion import (
    NegativePolicy,
    export_squad,
    import_squad,
    render_conll,
    sample_few_shot,
    to_qa_examples,
)
from slotqa.dispatch import fill_slots
from slotqa.harness import (
    ExperimentConfig,
    distractor_sweep,
    oracle_for_domain,
    oracle_for_screen,
    run_sweep,
)
from slotqa.metrics import token_f1
from slotqa.questions import AblationMode, generate_questions

from test_metrics import brute_force_report, expected_table, random_instance

E2E_TIME_BUDGET_SECONDS = 5.0
RANDOM_INSTANCE_COUNT = 1000


def test_gold_oracle_end_to_end_recovers_every_corpus_exactly():
    """Screens -> questions -> span extraction -> scoring must be lossless:
    with a gold-answer backend, every bundled domain (>=100 utterances each)
    scores a weighted token F1 of exactly 1.0, within the time budget."""
    rules = bundled_overrides()
    started = time.perf_counter()
    scores = {}
    for name in DOMAINS:
        domain = bundled_domain(name)
        assert len(domain.utterances) >= 100, f"{name}: corpus too small"
        screen = bundled_screen(name)
        backend = oracle_for_screen(screen, domain.utterances, rules=rules)
        predicted = [
            fill_slots([screen], utt.text, backend, rules=rules,
                       utterance_id=utt.utterance_id)
            for utt in domain.utterances
        ]
        scores[name] = token_f1(domain.utterances, predicted).weighted_f1
    elapsed = time.perf_counter() - started
    assert scores == {name: 1.0 for name in DOMAINS}
    assert elapsed < E2E_TIME_BUDGET_SECONDS, f"took {elapsed:.2f}s"


def test_conversion_emits_one_exact_answer_per_gold_span():
    """Converting the 50-utterance flight corpus must yield exactly one
    answerable example per gold BIO span with character-exact offsets, a
    full schema block per utterance under the everything-negative policy,
    and a field-identical export/import round trip."""
    utts = bundled_corpus("atis_sample_50")
    schema = bundled_schema("atis_visual")
    assert len(utts) == 50
    examples = to_qa_examples(utts, schema, negatives=NegativePolicy.all_slots())

    by_context = {}
    for example in examples:
        by_context.setdefault(example.context, []).append(example)
    for utt in utts:
        block = by_context[utt.text]
        assert len(block) == len(schema), utt.utterance_id
        answerable = {e.qa_id: e for e in block if not e.is_impossible}
        assert len(answerable) == len(utt.slots), utt.utterance_id
        for fill in utt.slots:
            example = answerable[f"{utt.utterance_id}:{fill.slot_id}"]
            assert len(example.answers) == 1
            text, start = example.answers[0]
            assert (text, start) == (fill.surface, fill.start_char)
            assert example.context[start:start + len(text)] == text

    with tempfile.NamedTemporaryFile(suffix=".json") as handle:
        export_squad(examples, handle.name)
        assert import_squad(handle.name) == examples


def test_scoring_matches_a_longhand_counter_with_zero_tolerance():
    """Over 1,000 random small scoring problems (<=5 slots, <=10 tokens per
    utterance), token_f1 must equal an independent remove-one-at-a-time
    multiset counter exactly, and obey the bound, transposition-symmetry,
    and harmonic-mean identities."""
    rng = random.Random(408123)
    for i in range(RANDOM_INSTANCE_COUNT):
        corpus = [random_instance(rng, f"{i}.{j}") for j in range(rng.randint(1, 3))]
        gold = [utt for utt, _ in corpus]
        predicted = [result for _, result in corpus]
        report = token_f1(gold, predicted)
        per_slot, weighted, micro_p, micro_r, micro_f1 = brute_force_report(
            expected_table(corpus)
        )
        assert report.weighted_f1 == weighted, f"instance {i}"
        assert (report.micro_precision, report.micro_recall, report.micro_f1) == \
            (micro_p, micro_r, micro_f1), f"instance {i}"
        assert 0.0 <= report.weighted_f1 <= 1.0
        for slot, m in report.per_slot.items():
            expected = per_slot[slot]
            assert (m.precision, m.recall, m.f1, m.support) == expected, \
                f"instance {i} slot {slot}"
            assert 0.0 <= m.precision <= 1.0 and 0.0 <= m.recall <= 1.0
            if m.precision + m.recall:
                assert m.f1 == 2 * m.precision * m.recall / (m.precision + m.recall)
            else:
                assert m.f1 == 0.0
        # transposition symmetry: swapping prediction and gold swaps P and R
        swapped = brute_force_report({
            slot: [(g, p) for p, g in pairs]
            for slot, pairs in expected_table(corpus).items()
        })[0]
        for slot, m in report.per_slot.items():
            assert m.precision == swapped[slot][1] and m.recall == swapped[slot][0]


def test_question_rules_reproduce_the_reference_samples_byte_for_byte():
    """The three reference questions must come out byte-exact: the text
    field and button samples verbatim, the radio sample with its choices
    inserted verbatim (so capitalization follows the on-screen choice
    text). Symbol-mode questions must leak no alphabetic label tokens."""
    rules = bundled_overrides()

    united = {q.slot_id: q.text for q in generate_questions(bundled_screen("united"), rules=rules)}
    assert united["departure_airport"] == "What is the departure airport?"

    vehicle = {q.slot_id: q.text
               for q in generate_questions(bundled_screen("vehicle_logger"), rules=rules)}
    assert vehicle["trip_type"] == "Is this Business, Personal or Other?"
    assert vehicle["gps_tracking"] == "What is done to GPS?"

    for screen in bundled_screen_pool():
        label_words = set()
        for element in screen.elements:
            label_words.update(w.lower() for w in re.findall(r"[a-zA-Z]+", element.label))
            for choice in element.choices:
                label_words.update(w.lower() for w in re.findall(r"[a-zA-Z]+", choice))
        for q in generate_questions(screen, AblationMode.NO_VISUALS):
            q_words = {w.lower() for w in re.findall(r"[a-zA-Z]+", q.text)}
            assert not (q_words & label_words), (screen.screen_id, q.text)


def test_distractor_screens_never_change_a_gold_oracle_score():
    """With a gold-answer backend, showing 1 through 5 element groups at
    once must leave the weighted token F1 exactly identical row to row:
    all added questions target foreign slots and must all be rejected."""
    rules = bundled_overrides()
    pool = bundled_screen_pool()
    for name in ("vehicle_logger", "atis_visual"):
        domain = bundled_domain(name)
        utts = list(domain.utterances[:50])
        target = bundled_screen(name)
        backend = oracle_for_screen(target, utts, rules=rules)
        table = distractor_sweep(utts, target, pool, range(1, 6), backend, rules=rules)
        scores = [row.weighted_f1 for row in table.rows]
        assert len(scores) == 5
        assert all(score == scores[0] for score in scores), (name, scores)
        spreads = [row.distractor_elements for row in table.rows]
        assert spreads[0] == 0 and spreads == sorted(spreads), name


def test_experiment_grid_is_bytewise_deterministic_and_lazy_about_training():
    """Equal seeds must give byte-identical few-shot samples and sweep
    reports across independent runs, and zero-shot grid cells must never
    call the training hook."""
    corpus = bundled_corpus("atis_sample_50")
    for k in (0, 1, 7, 25):
        first = render_conll(sample_few_shot(corpus, k, seed=17))
        second = render_conll(sample_few_shot(list(corpus), k, seed=17))
        assert first == second, f"k={k}"

    def sweep(trainer=None):
        cfg = ExperimentConfig(domains=("united", "vehicle_logger"),
                               train_sizes=(0, 5), seeds=(0, 1))
        data = [bundled_domain(name) for name in cfg.domains]
        oracles = {d.name: oracle_for_domain(d) for d in data}
        return run_sweep(cfg, data, lambda cell: oracles[cell.domain], trainer=trainer)

    trained_cells = []

    def trainer(plan, train, cell):
        trained_cells.append(cell)

    first = sweep(trainer)
    second = sweep(lambda plan, train, cell: None)
    assert first.render_tsv() == second.render_tsv()
    assert json.dumps(first.to_dict(), sort_keys=True) == \
        json.dumps(second.to_dict(), sort_keys=True)
    assert trained_cells, "positive-k cells must train"
    assert all(cell.k > 0 for cell in trained_cells)
    assert {cell.k for cell in trained_cells} == {5}
