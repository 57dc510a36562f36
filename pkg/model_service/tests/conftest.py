"""Shared fixtures: throwaway micro models for contract tests and one
full-size base model for the end-to-end acceptance checks."""

from __future__ import annotations

import shutil
import time
from types import SimpleNamespace

import pytest

from model_service.checkpoints import CheckpointStore
from model_service.training import TrainDefaults, init_base

# Smallest shape that still exercises every code path; trains in seconds.
TINY_SHAPE = dict(d_model=32, n_heads=2, n_layers=1, ff_dim=64, dropout=0.0)
TINY_DEFAULTS = TrainDefaults(batch_size=32, general_qa_size=240)
MICRO_DEFAULTS = TrainDefaults(batch_size=32, general_qa_size=80)


@pytest.fixture(scope="session")
def tiny_store(tmp_path_factory) -> CheckpointStore:
    """Session-wide single-stage store. Treat as read-only; tests that
    train further must work on a clone."""
    store = CheckpointStore(tmp_path_factory.mktemp("tiny-model"))
    init_base(
        store,
        epochs=3,
        learning_rate=1e-3,
        defaults=TINY_DEFAULTS,
        model_shape=TINY_SHAPE,
    )
    return store


@pytest.fixture()
def clone_store(tmp_path):
    """Copy a store into this test's tmp dir so it can be mutated."""

    def clone(store: CheckpointStore, name: str = "clone") -> CheckpointStore:
        dest = tmp_path / name
        shutil.copytree(store.root, dest)
        return CheckpointStore(dest)

    return clone


@pytest.fixture()
def micro_store(tmp_path) -> CheckpointStore:
    """Fresh single-stage store private to one test; ~2 s to build."""
    store = CheckpointStore(tmp_path / "micro-model")
    init_base(
        store,
        epochs=1,
        learning_rate=1e-3,
        defaults=MICRO_DEFAULTS,
        model_shape=TINY_SHAPE,
    )
    return store


@pytest.fixture(scope="session")
def base_model(tmp_path_factory) -> SimpleNamespace:
    """The real default base model (several minutes of CPU training);
    only the acceptance tests should request this."""
    store = CheckpointStore(tmp_path_factory.mktemp("base-model"))
    started = time.monotonic()
    outcome = init_base(store)
    return SimpleNamespace(
        store=store,
        train_seconds=time.monotonic() - started,
        outcome=outcome,
    )
