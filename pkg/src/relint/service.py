"""HTTP session API for interactive exploration.

Upload a labeled CSV to create a session (the full analysis runs
synchronously), read the unconstrained intervals and classes, then
iterate: apply a constraint set, inspect the recomputed bounds, adjust.
Sessions live in memory and expire after a TTL; the random seed is fixed
when the session is created so the noise threshold stays put across
constraint iterations.
"""

import os
import tempfile
import threading
import time
import uuid
from concurrent.futures import ThreadPoolExecutor
from concurrent.futures import TimeoutError as FutureTimeout
from contextlib import asynccontextmanager
from dataclasses import dataclass, field

from fastapi import FastAPI, HTTPException, Request
from fastapi.middleware.cors import CORSMiddleware

from .bounds import ConstraintSet
from .data import load_csv
from .errors import (
    DegenerateDistribution,
    FoldError,
    InfeasibleConstraints,
    LabelError,
    MalformedProblem,
    NumericalFailure,
    OptimizationFailure,
    ParseError,
)
from .results import SCHEMA_VERSION, AnalysisParams, analyze, constrained_intervals

MAX_PAYLOAD_BYTES = 2 * 1024 * 1024
DEFAULT_TTL_SECONDS = 3600.0
DEFAULT_RECOMPUTE_BUDGET_SECONDS = 60.0

_INPUT_ERRORS = (ParseError, LabelError, MalformedProblem, FoldError)
_SOLVER_ERRORS = (OptimizationFailure, NumericalFailure, DegenerateDistribution)


@dataclass
class Session:
    """One uploaded dataset with its analysis and current what-if state."""

    id: str
    result: object
    created: float
    updated: float
    constraints: ConstraintSet = None
    constrained: object = None
    lock: threading.Lock = field(default_factory=threading.Lock)


class SessionStore:
    """In-memory session map with lazy TTL eviction on an injected clock."""

    def __init__(self, clock=time.monotonic, ttl_seconds=DEFAULT_TTL_SECONDS):
        self._clock = clock
        self._ttl = float(ttl_seconds)
        self._sessions = {}
        self._lock = threading.Lock()

    def _expired(self, session, now):
        return now - session.updated > self._ttl

    def _sweep(self, now):
        for sid in [s for s, v in self._sessions.items() if self._expired(v, now)]:
            del self._sessions[sid]

    def create(self, result):
        now = self._clock()
        session = Session(id=uuid.uuid4().hex, result=result, created=now, updated=now)
        with self._lock:
            self._sweep(now)
            self._sessions[session.id] = session
        return session

    def get(self, session_id):
        now = self._clock()
        with self._lock:
            session = self._sessions.get(session_id)
            if session is None:
                return None
            if self._expired(session, now):
                del self._sessions[session_id]
                return None
            return session

    def touch(self, session):
        session.updated = self._clock()

    def delete(self, session_id):
        with self._lock:
            return self._sessions.pop(session_id, None) is not None

    def __len__(self):
        return len(self._sessions)


def _analysis_params(
    delta=1e-3, pi_p=0.999, probes=50, seed=0, workers=None
):
    return AnalysisParams(
        delta=delta, pi_coverage=pi_p, n_probes=probes, seed=seed, workers=workers
    )


async def _read_csv_payload(request, max_bytes):
    body = await request.body()
    if len(body) > max_bytes:
        raise HTTPException(
            status_code=413,
            detail=f"payload of {len(body)} bytes exceeds the {max_bytes}-byte limit",
        )
    content_type = request.headers.get("content-type", "")
    if content_type.startswith("multipart/form-data"):
        form = await request.form()
        upload = form.get("file")
        if upload is None:
            raise HTTPException(status_code=400, detail="multipart field 'file' missing")
        data = await upload.read()
        if len(data) > max_bytes:
            raise HTTPException(
                status_code=413,
                detail=f"file of {len(data)} bytes exceeds the {max_bytes}-byte limit",
            )
        return data
    return body


def _parse_dataset(csv_bytes, label_column):
    handle, path = tempfile.mkstemp(suffix=".csv")
    try:
        with os.fdopen(handle, "wb") as sink:
            sink.write(csv_bytes)
        return load_csv(path, label_column=label_column)
    finally:
        os.unlink(path)


def _parse_constraints(document):
    if not isinstance(document, dict) or "constraints" not in document:
        raise HTTPException(
            status_code=400, detail="body must be an object with a 'constraints' key"
        )
    mapping = document["constraints"]
    if not isinstance(mapping, dict):
        raise HTTPException(
            status_code=400, detail="'constraints' must map feature index to [min, max]"
        )
    entries = []
    for key, value in mapping.items():
        try:
            index = int(key)
            k_min, k_max = value
            entries.append((index, float(k_min), float(k_max)))
        except (TypeError, ValueError) as exc:
            raise HTTPException(
                status_code=400,
                detail=f"constraint {key!r}: expected integer index and [min, max] pair",
            ) from exc
    try:
        return ConstraintSet(tuple(entries))
    except MalformedProblem as exc:
        raise HTTPException(status_code=400, detail=str(exc)) from exc


def create_app(
    clock=time.monotonic,
    ttl_seconds=DEFAULT_TTL_SECONDS,
    recompute_budget_seconds=DEFAULT_RECOMPUTE_BUDGET_SECONDS,
    max_payload_bytes=MAX_PAYLOAD_BYTES,
    cors_origins=("*",),
):
    executor = ThreadPoolExecutor(max_workers=4)

    @asynccontextmanager
    async def lifespan(app):
        yield
        executor.shutdown(wait=False, cancel_futures=True)

    app = FastAPI(title="relint", version="1", lifespan=lifespan)
    app.add_middleware(
        CORSMiddleware,
        allow_origins=list(cors_origins),
        allow_methods=["*"],
        allow_headers=["*"],
    )
    store = SessionStore(clock=clock, ttl_seconds=ttl_seconds)
    app.state.store = store
    app.state.executor = executor
    app.state.recompute_budget = float(recompute_budget_seconds)

    def _session_or_404(session_id):
        session = store.get(session_id)
        if session is None:
            raise HTTPException(status_code=404, detail=f"no session {session_id}")
        return session

    @app.get("/health")
    def health():
        return {"status": "ok", "sessions": len(store)}

    @app.post("/sessions", status_code=201)
    async def create_session(
        request: Request,
        label_column: str = "label",
        delta: float = 1e-3,
        pi_p: float = 0.999,
        probes: int = 50,
        seed: int = 0,
    ):
        csv_bytes = await _read_csv_payload(request, max_payload_bytes)
        try:
            params = _analysis_params(
                delta=delta, pi_p=pi_p, probes=probes, seed=seed
            )
            dataset = _parse_dataset(csv_bytes, label_column)
            result = analyze(dataset, params)
        except _INPUT_ERRORS as exc:
            raise HTTPException(status_code=400, detail=str(exc)) from exc
        except _SOLVER_ERRORS as exc:
            raise HTTPException(status_code=422, detail=str(exc)) from exc
        session = store.create(result)
        return {
            "id": session.id,
            "baseline": {
                "C": float(result.baseline.C),
                "mu": float(result.baseline.mu),
                "rho": float(result.baseline.rho),
                "cv_score": float(result.baseline.cv_score),
            },
        }

    @app.get("/sessions/{session_id}/results")
    def get_results(session_id: str):
        session = _session_or_404(session_id)
        return session.result.to_document()

    @app.put("/sessions/{session_id}/constraints")
    async def apply_constraints(session_id: str, request: Request):
        session = _session_or_404(session_id)
        try:
            document = await request.json()
        except ValueError as exc:
            raise HTTPException(status_code=400, detail="body is not valid JSON") from exc
        constraints = _parse_constraints(document)
        with session.lock:
            future = executor.submit(
                constrained_intervals, session.result, constraints
            )
            try:
                intervals = future.result(timeout=app.state.recompute_budget)
            except FutureTimeout:
                future.cancel()
                raise HTTPException(
                    status_code=503,
                    detail=(
                        "constrained recompute exceeded the "
                        f"{app.state.recompute_budget:.0f}s budget"
                    ),
                ) from None
            except MalformedProblem as exc:
                raise HTTPException(status_code=400, detail=str(exc)) from exc
            except InfeasibleConstraints as exc:
                raise HTTPException(status_code=409, detail=str(exc)) from exc
            except _SOLVER_ERRORS as exc:
                raise HTTPException(status_code=422, detail=str(exc)) from exc
            session.constraints = constraints
            session.constrained = intervals
            store.touch(session)
        payload = intervals.to_payload(session.result.dataset.feature_names)
        return {
            "schema": SCHEMA_VERSION,
            "constraints": {
                str(idx): [lo, hi] for idx, (lo, hi) in constraints.as_dict().items()
            },
            "intervals": payload,
        }

    @app.delete("/sessions/{session_id}")
    def delete_session(session_id: str):
        if not store.delete(session_id):
            raise HTTPException(status_code=404, detail=f"no session {session_id}")
        return {"deleted": session_id}

    return app
