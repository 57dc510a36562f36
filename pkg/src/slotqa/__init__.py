"""Visual slot filling as extractive question answering.

GUI screen elements become natural-language questions; a span-extraction
backend answers them against the user's utterance, filling slots and
rejecting questions with no supported answer. The package covers screen
annotation, rule-based question generation, BIO-corpus conversion to the
SQuAD v2 file format, slot-fill dispatch with distractor handling, a
weighted token F1 metric, and a seeded experiment harness.
"""

from importlib.metadata import PackageNotFoundError, version

try:
    __version__ = version("slotqa")
except PackageNotFoundError:  # running from a source tree
    __version__ = "0+unknown"

from .backends import (
    ENDPOINT_ENV_VAR,
    NO_ANSWER,
    Answer,
    BackendConfig,
    ExtractionResult,
    GazetteerEntry,
    LexicalBackend,
    OracleBackend,
    QaBackend,
    RemoteBackend,
    is_rejected,
    lexical_extract,
    load_gazetteer,
    load_oracle,
)
from .bundled import (
    DOMAINS,
    bundled_corpus,
    bundled_demo_gold,
    bundled_domain,
    bundled_overrides,
    bundled_schema,
    bundled_screen,
    bundled_screen_pool,
)
from .conversion import (
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
    strip_bio_prefix,
    tag_to_description,
    to_qa_examples,
    utterance_from_bio,
    utterance_tags,
)
from .dispatch import (
    Fill,
    SlotFillResult,
    align_to_tokens,
    fill_from_questions,
    fill_slots,
    whitespace_tokens,
)
from .errors import (
    AlignmentError,
    BackendUnavailable,
    ContractViolation,
    DuplicateSlotError,
    EmptyLabelError,
    EmptyPlan,
    InsufficientScreens,
    ParseError,
    SlotQaError,
    SpanOutOfRange,
    TagSequenceError,
    ValidationError,
)
from .harness import (
    PUBLISHED_ABLATION_F1,
    PUBLISHED_CROSS_DOMAIN_F1,
    PUBLISHED_DISTRACTOR_F1,
    PUBLISHED_REFERENCE_F1,
    DistractorTable,
    DomainData,
    ExperimentConfig,
    GridCell,
    Stage,
    StageSpec,
    SweepResult,
    TrainingPlan,
    build_curriculum,
    curriculum_from_datasets,
    distractor_sweep,
    evaluate_corpus,
    load_plan,
    oracle_for_domain,
    oracle_for_screen,
    run_sweep,
    save_plan,
    schema_questions,
    split_corpus,
)
from .metrics import MetricsReport, SlotMetrics, f1_from_token_pairs, span_tokens, token_f1
from .questions import (
    DEFAULT_COMMAND_VERBS,
    DEFAULT_RULES,
    AblationMode,
    Question,
    QuestionRules,
    generate_question,
    generate_questions,
    load_overrides,
    slot_ordinals,
    strip_command_prefix,
    text_field_question,
)
from .screens import (
    CategoryKind,
    GuiCategory,
    GuiElement,
    Screen,
    button_concepts,
    icon_classes,
    load_screen,
    parse_screen,
    save_screen,
    screen_to_dict,
    validate_screen,
    visible_elements,
)
from .synth import DOMAIN_GENERATORS, generate_corpus

__all__ = [name for name in dir() if not name.startswith("_")]
