"""HTTP/JSON service for interactive simulation and estimation.

The service and the CLI call the same engine functions on the same loaded
resources, so their numerical outputs are bit-identical for identical
inputs.  Sessions live in memory with optional JSON snapshots under a
state directory; mutations are serialized per session id.
"""

from __future__ import annotations

import json
import threading
import time
import uuid
from dataclasses import dataclass, field
from importlib import resources as importlib_resources
from pathlib import Path

import numpy as np
from fastapi import FastAPI, Request
from fastapi.responses import JSONResponse
from pydantic import BaseModel

from .clustering import cluster_lexicon
from .corpus import MabmoSampler
from .epa import EpaVector, SentimentLexicon, read_lexicon_csv
from .equations import AmalgamationCoefficients, CoefficientSet, read_coefficients_tsv
from .errors import (
    AffectkitError,
    ConfigurationError,
    DependencyError,
    InvalidInputError,
    LexiconError,
    NotFoundError,
)
from .expand import PrecomputedEmbeddings, pin_and_estimate
from .head import HeadModel, load_model, read_embeddings_jsonl
from .simulation import PartySpec, SimulationState, create_state, step_event
from .solver import behavior_deflection, optimal_behavior

DEFAULT_SUGGESTIONS = 5


def packaged_data(name: str) -> Path:
    return Path(str(importlib_resources.files("affectkit").joinpath("data", name)))


@dataclass
class EngineResources:
    """Everything the service needs, loaded once at startup."""

    lexicon: SentimentLexicon
    coefficient_sets: dict[str, CoefficientSet]
    default_coefficients: str
    amalgamation: AmalgamationCoefficients = field(default_factory=AmalgamationCoefficients)
    model: HeadModel | None = None
    embeddings: PrecomputedEmbeddings | None = None
    estimation_seed: int = 0

    def coefficients(self, name: str | None) -> CoefficientSet:
        key = name if name is not None else self.default_coefficients
        try:
            return self.coefficient_sets[key]
        except KeyError:
            raise ConfigurationError(
                f"unknown coefficient set {key!r}; available: {sorted(self.coefficient_sets)}"
            ) from None


def load_resources(
    lexicon_path: str | Path | None = None,
    coefficient_paths: dict[str, str | Path] | None = None,
    default_coefficients: str | None = None,
    model_path: str | Path | None = None,
    embeddings_path: str | Path | None = None,
) -> EngineResources:
    """Load engine resources, falling back to the packaged demo data."""
    lexicon = read_lexicon_csv(lexicon_path or packaged_data("demo_lexicon.csv"))
    sets = {"identity": CoefficientSet.identity()}
    sets["synthetic"] = read_coefficients_tsv(packaged_data("synthetic_coefficients.tsv"))
    for name, path in (coefficient_paths or {}).items():
        sets[name] = read_coefficients_tsv(path)
    default = default_coefficients or "synthetic"
    if default not in sets:
        raise ConfigurationError(f"default coefficient set {default!r} was not loaded")
    model = load_model(model_path) if model_path else None
    embeddings = None
    if embeddings_path:
        dim, vectors = read_embeddings_jsonl(embeddings_path)
        embeddings = PrecomputedEmbeddings(dim, vectors)
    return EngineResources(
        lexicon=lexicon,
        coefficient_sets=sets,
        default_coefficients=default,
        model=model,
        embeddings=embeddings,
    )


@dataclass
class Session:
    id: str
    actor: PartySpec
    object: PartySpec
    coefficients: str
    state: SimulationState
    created: float
    updated: float
    lock: threading.Lock = field(default_factory=threading.Lock, repr=False)


def _epa_list(vector: EpaVector) -> list[float]:
    return [vector.e, vector.p, vector.a]


def session_view(session: Session) -> dict:
    state = session.state
    return {
        "id": session.id,
        "actor": {"identity": session.actor.identity, "modifier": session.actor.modifier},
        "object": {"identity": session.object.identity, "modifier": session.object.modifier},
        "coefficients": session.coefficients,
        "fundamentals": {
            "actor": _epa_list(state.actor_fundamental),
            "object": _epa_list(state.object_fundamental),
        },
        "transients": {
            "actor": _epa_list(state.actor_transient),
            "object": _epa_list(state.object_transient),
        },
        "deflection": state.state_deflection(),
        "history": [
            {
                "index": step.index,
                "side": step.side,
                "behavior": step.behavior_term,
                "behavior_epa": _epa_list(step.behavior_epa),
                "behavior_transient": _epa_list(step.behavior_transient),
                "actor_transient": _epa_list(step.actor_transient),
                "object_transient": _epa_list(step.object_transient),
                "deflection": step.deflection,
            }
            for step in state.history
        ],
        "created": session.created,
        "updated": session.updated,
    }


class SessionStore:
    def __init__(self, state_dir: str | Path | None = None):
        self._sessions: dict[str, Session] = {}
        self._registry_lock = threading.Lock()
        self.state_dir = Path(state_dir) if state_dir else None
        if self.state_dir:
            self.state_dir.mkdir(parents=True, exist_ok=True)

    def add(self, session: Session) -> None:
        with self._registry_lock:
            self._sessions[session.id] = session
        self._snapshot(session)

    def get(self, session_id: str) -> Session:
        try:
            return self._sessions[session_id]
        except KeyError:
            raise NotFoundError(f"unknown session {session_id!r}") from None

    def delete(self, session_id: str) -> None:
        with self._registry_lock:
            session = self._sessions.pop(session_id, None)
        if session is None:
            raise NotFoundError(f"unknown session {session_id!r}")
        if self.state_dir:
            path = self.state_dir / f"session_{session_id}.json"
            if path.exists():
                path.unlink()

    def _snapshot(self, session: Session) -> None:
        if not self.state_dir:
            return
        path = self.state_dir / f"session_{session.id}.json"
        path.write_text(json.dumps(session_view(session)), encoding="utf-8")

    def touch(self, session: Session) -> None:
        session.updated = time.time()
        self._snapshot(session)


class PartyBody(BaseModel):
    identity: str
    modifier: str | None = None


class SessionBody(BaseModel):
    actor: PartyBody
    object: PartyBody
    coefficients: str | None = None


class EventBody(BaseModel):
    side: str
    behavior_term: str


class SuggestBody(BaseModel):
    side: str
    k: int = DEFAULT_SUGGESTIONS


class EstimateBody(BaseModel):
    term: str
    category: str
    n: int = 300
    seed: int = 0


_ERROR_STATUS = {
    NotFoundError: 404,
    LexiconError: 404,
    ConfigurationError: 400,
    InvalidInputError: 400,
    DependencyError: 424,
}


def _error_response(exc: AffectkitError) -> JSONResponse:
    status = 400
    for kind, code in _ERROR_STATUS.items():
        if isinstance(exc, kind):
            status = code
            break
    return JSONResponse(
        status_code=status,
        content={"code": type(exc).__name__, "message": str(exc)},
    )


def create_app(
    resources: EngineResources,
    state_dir: str | Path | None = None,
) -> FastAPI:
    app = FastAPI(title="affectkit service", version="0.1.0")
    # The browser UI may be served from another origin (or file://).
    from fastapi.middleware.cors import CORSMiddleware

    app.add_middleware(
        CORSMiddleware, allow_origins=["*"], allow_methods=["*"], allow_headers=["*"]
    )
    store = SessionStore(state_dir=state_dir)
    app.state.resources = resources
    app.state.store = store

    estimation_lock = threading.Lock()
    estimation_context: dict[str, MabmoSampler] = {}

    @app.exception_handler(AffectkitError)
    def handle_engine_error(request: Request, exc: AffectkitError):
        return _error_response(exc)

    @app.get("/api/dictionary")
    def dictionary(category: str | None = None):
        entries = resources.lexicon.entries(category)
        return {
            "entries": [
                {"term": e.term, "category": e.category, "epa": _epa_list(e.epa)}
                for e in entries
            ]
        }

    @app.post("/api/sessions")
    def create_session(body: SessionBody):
        actor = PartySpec(identity=body.actor.identity, modifier=body.actor.modifier)
        obj = PartySpec(identity=body.object.identity, modifier=body.object.modifier)
        resources.coefficients(body.coefficients)  # validate before creating
        state = create_state(actor, obj, resources.lexicon, resources.amalgamation)
        now = time.time()
        session = Session(
            id=uuid.uuid4().hex[:12],
            actor=actor,
            object=obj,
            coefficients=body.coefficients or resources.default_coefficients,
            state=state,
            created=now,
            updated=now,
        )
        store.add(session)
        return session_view(session)

    @app.get("/api/sessions/{session_id}")
    def get_session(session_id: str):
        return session_view(store.get(session_id))

    def _apply_event(session: Session, body: EventBody) -> SimulationState:
        behavior = resources.lexicon.get(body.behavior_term, "behavior")
        coeffs = resources.coefficients(session.coefficients)
        return step_event(session.state, behavior, body.side, coeffs)

    @app.post("/api/sessions/{session_id}/events")
    def post_event(session_id: str, body: EventBody):
        session = store.get(session_id)
        with session.lock:
            session.state = _apply_event(session, body)
            store.touch(session)
            return session_view(session)

    @app.post("/api/sessions/{session_id}/preview")
    def preview_event(session_id: str, body: EventBody):
        session = store.get(session_id)
        with session.lock:
            next_state = _apply_event(session, body)
            preview = Session(
                id=session.id,
                actor=session.actor,
                object=session.object,
                coefficients=session.coefficients,
                state=next_state,
                created=session.created,
                updated=session.updated,
            )
            return session_view(preview)

    @app.post("/api/sessions/{session_id}/suggest")
    def suggest(session_id: str, body: SuggestBody):
        session = store.get(session_id)
        if body.side not in ("actor", "object"):
            raise ConfigurationError(f"side must be actor or object, got {body.side!r}")
        with session.lock:
            state = session.state
        coeffs = resources.coefficients(session.coefficients)
        if body.side == "actor":
            args = (
                state.actor_transient,
                state.object_transient,
                state.actor_fundamental,
                state.object_fundamental,
            )
        else:
            args = (
                state.object_transient,
                state.actor_transient,
                state.object_fundamental,
                state.actor_fundamental,
            )
        solved = optimal_behavior(*args, coeffs)
        optimal_deflection = behavior_deflection(solved, *args, coeffs)

        candidates = []
        for entry in resources.lexicon.entries("behavior"):
            distance = float(np.linalg.norm(entry.epa.as_array() - solved.as_array()))
            candidates.append((distance, entry))
        candidates.sort(key=lambda pair: (pair[0], pair[1].term))
        neighbors = [
            {
                "term": entry.term,
                "epa": _epa_list(entry.epa),
                "distance": distance,
                "deflection": behavior_deflection(entry.epa, *args, coeffs),
            }
            for distance, entry in candidates[: max(body.k, 1)]
        ]
        return {
            "side": body.side,
            "optimal": _epa_list(solved),
            "optimal_deflection": optimal_deflection,
            "neighbors": neighbors,
        }

    @app.post("/api/estimate")
    def estimate(body: EstimateBody):
        if resources.model is None:
            raise DependencyError("no head model loaded; start the service with --model")
        if resources.embeddings is None:
            raise DependencyError(
                "no embedding store loaded; start the service with --embeddings"
            )
        with estimation_lock:
            if "sampler" not in estimation_context:
                clusters = cluster_lexicon(resources.lexicon, seed=resources.estimation_seed)
                estimation_context["sampler"] = MabmoSampler(
                    resources.lexicon,
                    clusters,
                    resources.coefficients(None),
                    seed=resources.estimation_seed,
                )
            sampler = estimation_context["sampler"]
        distribution = pin_and_estimate(
            body.term,
            body.category,
            sampler,
            resources.model,
            resources.embeddings,
            n_events=body.n,
            seed=body.seed,
        )
        return {
            "term": body.term,
            "category": body.category,
            "n_events": distribution.n_events,
            "mean": [float(v) for v in distribution.mean],
            "sd": [float(v) for v in distribution.sd],
            "min": [float(v) for v in distribution.minimum],
            "max": [float(v) for v in distribution.maximum],
            "model_id": distribution.model_id,
        }

    @app.delete("/api/sessions/{session_id}")
    def delete_session(session_id: str):
        store.delete(session_id)
        return {"deleted": session_id}

    return app


def serve(
    resources: EngineResources,
    host: str = "127.0.0.1",
    port: int = 8571,
    state_dir: str | Path | None = None,
) -> None:
    import uvicorn

    app = create_app(resources, state_dir=state_dir)
    uvicorn.run(app, host=host, port=port, log_level="info")
