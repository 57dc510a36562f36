"""Exception hierarchy shared across the toolkit.

All errors raised on purpose derive from SlotQaError so callers (and the
CLI) can distinguish data problems from genuine bugs.
"""

from __future__ import annotations


class SlotQaError(Exception):
    """Base class for every toolkit error."""


class ParseError(SlotQaError):
    """Malformed input file; message carries a line/field locus."""


class ValidationError(SlotQaError):
    """One or more invariant violations on an otherwise parseable value.

    Collects every violation found, not just the first one.
    """

    def __init__(self, violations: list[str] | str):
        if isinstance(violations, str):
            violations = [violations]
        self.violations = list(violations)
        super().__init__("; ".join(self.violations))


class TagSequenceError(ParseError):
    """Dangling I- tag in strict BIO mode."""


class EmptyLabelError(SlotQaError):
    """A question template needs a label and the element has none."""


class DuplicateSlotError(SlotQaError):
    """Two generated questions would share one slot identifier."""


class SpanOutOfRange(SlotQaError):
    """Character span does not lie inside the utterance."""


class AlignmentError(SlotQaError):
    """Gold and predicted sequences do not line up by utterance id."""


class BackendUnavailable(SlotQaError):
    """Remote extraction endpoint could not be reached."""


class ContractViolation(SlotQaError):
    """A backend answer failed the context-substring check."""


class InsufficientScreens(SlotQaError):
    """Not enough distinct screens to realize the requested distractor count."""


class EmptyPlan(SlotQaError):
    """A training curriculum needs at least one stage."""
