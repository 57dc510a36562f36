"""HTTP serving of a checkpointed span model.

``POST /extract`` speaks the extraction protocol: a batch of
``{id, question, context}`` items in, one answer per item out, where
``text`` is either an exact context substring starting at
``answer_start`` or null for a no-answer prediction, and both scores are
floats in [0, 1]. ``GET /health`` reports ``ok``, ``training``, or
``error`` plus the loaded model's identity and stage history.

Serving is read-only over checkpoints and handles concurrent requests;
training is exclusive. While a training run is in flight the service
answers 503 on ``/extract`` and on further ``/train`` requests. A failed
run leaves health at ``error`` (naming the failed stage) but keeps
serving the unchanged weights; the next successful run clears it.
"""

from __future__ import annotations

import threading
from pathlib import Path

from fastapi import FastAPI, HTTPException
from fastapi.exceptions import RequestValidationError
from fastapi.responses import JSONResponse
from pydantic import BaseModel

from . import __version__
from .checkpoints import CheckpointStore
from .errors import CheckpointError, ModelServiceError, StageError
from .model import Prediction, predict
from .plans import load_plan
from .training import PlanExecutor, TrainDefaults


class ExtractItem(BaseModel):
    id: str
    question: str
    context: str


class ExtractRequest(BaseModel):
    items: list[ExtractItem]


class ExtractAnswer(BaseModel):
    id: str
    text: str | None
    answer_start: int | None
    span_score: float
    no_answer_score: float


class ExtractResponse(BaseModel):
    items: list[ExtractAnswer]


class TrainRequest(BaseModel):
    plan: str


def _checked(prediction: Prediction, context: str) -> Prediction:
    """Enforce the wire contract server-side; degrade to no-answer."""
    span = min(max(prediction.span_score, 0.0), 1.0)
    null = min(max(prediction.no_answer_score, 0.0), 1.0)
    if prediction.text is None or prediction.answer_start is None:
        return Prediction(None, None, span, null)
    start = prediction.answer_start
    if context[start : start + len(prediction.text)] != prediction.text:
        return Prediction(None, None, 0.0, 1.0)
    return Prediction(prediction.text, start, span, null)


class ServiceState:
    """Loaded weights plus training status, shared across request threads."""

    def __init__(
        self,
        model_dir: str | Path,
        stage: int | None = None,
        batch_size: int = 64,
    ):
        self.store = CheckpointStore(model_dir)
        self.pinned_stage = stage
        self.batch_size = batch_size
        self._state_lock = threading.Lock()
        self.status = "ok"
        self.last_error: dict | None = None
        self.training_thread: threading.Thread | None = None
        self._load(stage)

    def _load(self, stage: int | None) -> None:
        index = stage if stage is not None else self.store.latest()
        if index is None:
            raise CheckpointError(
                f"no checkpoints under {self.store.stages_dir}; train a base model first"
            )
        model, vocab, meta = self.store.load_stage(index)
        self.model = model
        self.vocab = vocab
        self.meta = meta
        self.serving_stage = index
        self.model_id = f"stage-{index}-{self.store.checksum(index)}"

    # -- health -------------------------------------------------------------

    def health(self) -> dict:
        payload = {
            "status": self.status,
            "model": self.model_id,
            "stage": self.serving_stage,
            "stages": [[index, ref] for index, ref in self.store.stage_history()],
        }
        if self.last_error is not None:
            payload["error"] = self.last_error
        return payload

    # -- extraction ---------------------------------------------------------

    def extract(self, pairs: list[tuple[str, str]]) -> list[Prediction]:
        predictions = predict(self.model, self.vocab, pairs, self.batch_size)
        return [_checked(p, context) for p, (_, context) in zip(predictions, pairs)]

    # -- training -----------------------------------------------------------

    def start_training(self, plan_path: str) -> bool:
        """Kick off a background run; False when one is already in flight."""
        with self._state_lock:
            if self.status == "training":
                return False
            self.status = "training"
        thread = threading.Thread(
            target=self._run_plan, args=(plan_path,), daemon=True
        )
        self.training_thread = thread
        thread.start()
        return True

    def _run_plan(self, plan_path: str) -> None:
        try:
            plan = load_plan(plan_path)
            executor = PlanExecutor(
                self.store,
                base_dir=Path(plan_path).resolve().parent,
                defaults=TrainDefaults(batch_size=self.batch_size),
            )
            executor.run(plan)
        except StageError as exc:
            with self._state_lock:
                self.status = "error"
                self.last_error = {"stage": exc.stage_index, "message": exc.message}
            return
        except ModelServiceError as exc:
            with self._state_lock:
                self.status = "error"
                self.last_error = {"stage": None, "message": str(exc)}
            return
        with self._state_lock:
            self._load(self.pinned_stage)
            self.status = "ok"
            self.last_error = None


def create_app(state: ServiceState) -> FastAPI:
    app = FastAPI(title="model-service", version=__version__)

    @app.exception_handler(RequestValidationError)
    async def malformed_request(request, exc):  # noqa: ARG001 - FastAPI signature
        return JSONResponse(status_code=400, content={"detail": str(exc)})

    @app.get("/health")
    def health() -> dict:
        return state.health()

    @app.post("/extract", response_model=ExtractResponse)
    def extract(request: ExtractRequest) -> dict:
        if state.status == "training":
            raise HTTPException(status_code=503, detail="training in progress")
        pairs = [(item.question, item.context) for item in request.items]
        predictions = state.extract(pairs)
        return {
            "items": [
                {
                    "id": item.id,
                    "text": pred.text,
                    "answer_start": pred.answer_start,
                    "span_score": pred.span_score,
                    "no_answer_score": pred.no_answer_score,
                }
                for item, pred in zip(request.items, predictions)
            ]
        }

    @app.post("/train")
    def train(request: TrainRequest) -> dict:
        if not state.start_training(request.plan):
            raise HTTPException(status_code=503, detail="training in progress")
        return {"status": "training", "plan": request.plan}

    return app
