"""HTTP decision service: scoring, handoff predictions, and a durable log of
the human decisions made on them.

The only mutable state is an append-only newline-delimited JSON log. Every
prediction is logged before its id is handed out and every decision is logged
(and fsynced) before the 201 response, so a restarted service accepts
previously issued prediction ids and replaying the log reconstructs the
decision listing exactly.
"""

from __future__ import annotations

import json
import os
import threading
from datetime import datetime, timezone
from pathlib import Path
from typing import Any, Literal

from fastapi import FastAPI, Header, HTTPException, Request
from fastapi.exceptions import RequestValidationError
from fastapi.middleware.cors import CORSMiddleware
from fastapi.responses import JSONResponse
from pydantic import BaseModel

from .errors import ConfigError, ValidationError
from .model_io import Model, model_version
from .psa.config import PsaConfig, default_config
from .psa.engine import assess
from .psa.factors import FactorVector
from .psa.report import render_court_report
from .tree import HANDOFF

LOG_SCHEMA = "decision-log/v1"
API_SCHEMA = "pretrial-api/v1"

DECISION_CHOICES = ("release", "release-with-conditions", "detain")


class DecisionLog:
    """Append-only JSONL store; one schema-versioned record per line."""

    def __init__(self, path: str | Path):
        self.path = Path(path)
        self._lock = threading.Lock()
        self.predictions: dict[str, dict[str, Any]] = {}
        self.decisions: list[dict[str, Any]] = []
        self._load()

    def _load(self) -> None:
        if not self.path.exists():
            return
        with open(self.path, encoding="utf-8") as handle:
            for line_number, line in enumerate(handle, start=1):
                line = line.strip()
                if not line:
                    continue
                try:
                    record = json.loads(line)
                except json.JSONDecodeError as exc:
                    raise ConfigError(
                        f"corrupt decision log at line {line_number}: {exc}"
                    ) from exc
                if record.get("schema") != LOG_SCHEMA:
                    raise ConfigError(
                        f"decision log line {line_number} has schema "
                        f"{record.get('schema')!r}, expected {LOG_SCHEMA!r}"
                    )
                if record["kind"] == "prediction":
                    self.predictions[record["prediction_id"]] = record
                elif record["kind"] == "decision":
                    self.decisions.append(record)

    def _append(self, record: dict[str, Any]) -> None:
        self.path.parent.mkdir(parents=True, exist_ok=True)
        with open(self.path, "a", encoding="utf-8") as handle:
            handle.write(json.dumps(record, sort_keys=True) + "\n")
            handle.flush()
            os.fsync(handle.fileno())

    def record_prediction(
        self, case_id: str | None, snapshot: dict[str, Any], version: str
    ) -> dict[str, Any]:
        with self._lock:
            prediction_id = f"p-{len(self.predictions) + 1:08d}"
            record = {
                "schema": LOG_SCHEMA,
                "kind": "prediction",
                "prediction_id": prediction_id,
                "case_id": case_id,
                "model_version": version,
                "prediction": snapshot,
            }
            self._append(record)
            self.predictions[prediction_id] = record
            return record

    def record_decision(
        self, prediction_id: str, decision: str, rationale: str, decider: str
    ) -> dict[str, Any]:
        with self._lock:
            if prediction_id not in self.predictions:
                raise KeyError(prediction_id)
            issued = self.predictions[prediction_id]
            record = {
                "schema": LOG_SCHEMA,
                "kind": "decision",
                "decision_id": f"d-{len(self.decisions) + 1:08d}",
                "prediction_id": prediction_id,
                "case_id": issued.get("case_id"),
                "model_version": issued.get("model_version"),
                "prediction": issued.get("prediction"),
                "decision": decision,
                "rationale": rationale,
                "decider": decider,
                "decided_at": datetime.now(timezone.utc).isoformat(),
            }
            self._append(record)
            self.decisions.append(record)
            return record

    def list_decisions(self) -> list[dict[str, Any]]:
        with self._lock:
            return list(self.decisions)


def replay_log(path: str | Path) -> list[dict[str, Any]]:
    """Reconstructs the /decisions listing from the log alone."""
    return DecisionLog(path).list_decisions()


class DecisionRequest(BaseModel):
    prediction_id: str
    decision: Literal["release", "release-with-conditions", "detain"]
    rationale: str = ""
    decider: str = "anonymous"


def create_app(
    model: Model | None = None,
    psa_config: PsaConfig | None = None,
    log_path: str | Path = "decisions.log",
    token: str | None = None,
    static_dir: str | Path | None = None,
) -> FastAPI:
    app = FastAPI(title="pretrial decision service")
    app.add_middleware(
        CORSMiddleware, allow_origins=["*"], allow_methods=["*"], allow_headers=["*"]
    )
    config = psa_config if psa_config is not None else default_config()
    log = DecisionLog(log_path)
    version = model_version(model) if model is not None else None
    app.state.log = log
    app.state.model = model

    def check_token(authorization: str | None) -> None:
        if token is None:
            return
        if authorization != f"Bearer {token}":
            raise HTTPException(status_code=401, detail="missing or invalid token")

    @app.exception_handler(RequestValidationError)
    async def validation_handler(request: Request, exc: RequestValidationError):
        # /assess and /predict parse loose bodies and report 400; /decisions
        # keeps the strict 422 contract for missing/invalid fields.
        if request.url.path in ("/assess", "/predict"):
            return JSONResponse(
                status_code=400,
                content={"schema": API_SCHEMA, "error": "malformed request body"},
            )
        return JSONResponse(
            status_code=422,
            content={"schema": API_SCHEMA, "error": "invalid request", "detail": exc.errors()},
        )

    @app.post("/assess")
    async def assess_endpoint(
        body: dict[str, Any], authorization: str | None = Header(default=None)
    ):
        check_token(authorization)
        try:
            factors = FactorVector.from_mapping(body.get("factors") or {})
            offenses = [str(code) for code in body.get("offenses") or ()]
            smoothing = bool(body.get("smoothing", False))
            result = assess(factors, offenses, config, smoothing=smoothing)
        except ValidationError as exc:
            return JSONResponse(
                status_code=400,
                content={
                    "schema": API_SCHEMA,
                    "error": str(exc),
                    "invariant": exc.invariant,
                },
            )
        except (TypeError, AttributeError):
            return JSONResponse(
                status_code=400,
                content={"schema": API_SCHEMA, "error": "malformed request body"},
            )
        metadata = {str(k): str(v) for k, v in (body.get("metadata") or {}).items()}
        report = render_court_report(result, factors, metadata, offenses)
        return {"schema": API_SCHEMA, "assessment": result.as_dict(), "report": report}

    @app.post("/predict")
    async def predict_endpoint(
        body: dict[str, Any], authorization: str | None = Header(default=None)
    ):
        check_token(authorization)
        if model is None:
            raise HTTPException(status_code=409, detail="no model loaded")
        features = body.get("features")
        if not isinstance(features, dict):
            return JSONResponse(
                status_code=400,
                content={"schema": API_SCHEMA, "error": "body must carry a features mapping"},
            )
        try:
            prediction = model.predict(features)
        except ValidationError as exc:
            return JSONResponse(
                status_code=400,
                content={"schema": API_SCHEMA, "error": str(exc), "invariant": exc.invariant},
            )
        snapshot = prediction.as_dict()
        case_id = body.get("case_id")
        record = log.record_prediction(
            str(case_id) if case_id is not None else None, snapshot, version or ""
        )
        response = {
            "schema": API_SCHEMA,
            "prediction_id": record["prediction_id"],
            "model_version": version,
            **snapshot,
        }
        return response

    @app.post("/decisions", status_code=201)
    async def decisions_endpoint(
        request: DecisionRequest, authorization: str | None = Header(default=None)
    ):
        check_token(authorization)
        try:
            record = log.record_decision(
                request.prediction_id, request.decision, request.rationale, request.decider
            )
        except KeyError:
            raise HTTPException(
                status_code=404, detail=f"unknown prediction_id {request.prediction_id!r}"
            ) from None
        return {"schema": API_SCHEMA, **record}

    @app.get("/decisions")
    async def list_decisions(
        page: int = 1, page_size: int = 50, authorization: str | None = Header(default=None)
    ):
        check_token(authorization)
        if page < 1 or page_size < 1:
            raise HTTPException(status_code=400, detail="page and page_size must be >= 1")
        decisions = log.list_decisions()
        start = (page - 1) * page_size
        return {
            "schema": API_SCHEMA,
            "page": page,
            "page_size": page_size,
            "total": len(decisions),
            "decisions": decisions[start : start + page_size],
        }

    @app.get("/model")
    async def model_endpoint(authorization: str | None = Header(default=None)):
        check_token(authorization)
        if model is None:
            return {"schema": API_SCHEMA, "loaded": False}
        return {
            "schema": API_SCHEMA,
            "loaded": True,
            "model_version": version,
            "config": {
                key: (list(value) if isinstance(value, tuple) else value)
                for key, value in model.get_params().items()
            },
            "n_samples": model.n_samples_,
        }

    @app.get("/leaves")
    async def leaves_endpoint(authorization: str | None = Header(default=None)):
        check_token(authorization)
        if model is None:
            raise HTTPException(status_code=409, detail="no model loaded")
        trees = model.trees_ if hasattr(model, "trees_") else (model,)
        tables = []
        for index, tree in enumerate(trees):
            rows = []
            for region in tree.leaf_table():
                row: dict[str, Any] = {
                    "leaf_id": region.leaf_id,
                    "label": region.label,
                    "n": region.n,
                    "k": region.k,
                    "positive_rate": region.positive_rate,
                    "region": region.description,
                }
                if region.label != HANDOFF:
                    row["error_rate"] = region.error_rate
                rows.append(row)
            tables.append({"tree": index, "leaves": rows})
        return {"schema": API_SCHEMA, "trees": tables}

    if static_dir is not None:
        from fastapi.staticfiles import StaticFiles

        app.mount("/", StaticFiles(directory=str(static_dir), html=True), name="console")

    return app
