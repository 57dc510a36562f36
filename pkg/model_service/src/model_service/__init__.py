"""Trainable extractive-QA span service.

Trains a small span-extraction transformer over SQuAD v2.0-format
datasets according to a staged fine-tuning manifest, stores one immutable
checkpoint per completed stage under ``stages/<index>/``, and serves the
latest (or any chosen) checkpoint over the HTTP extraction protocol
(``POST /extract`` + ``GET /health``).
"""

__version__ = "0.1.0"
