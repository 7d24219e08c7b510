"""Session state, append-only persistence, and deterministic replay.

Each session is one JSONL file of events plus an entry in an index file.
Reports never embed wall-clock time, so replaying a session's log against
the same model file reproduces byte-identical report serializations; the
replay helper asserts exactly that.
"""

from __future__ import annotations

import json
import threading
import uuid
from dataclasses import dataclass, field
from datetime import datetime, timezone
from pathlib import Path

from .errors import DucgError, EvidenceError
from .evidence import EvidenceSet
from .inference import suspicion
from .model import ChiefComplaintModel, VariableId
from .modelfile import load_model, model_to_dict
from .priors import ranked_priors
from .recommend import recommend
from .util import canonical_json, digest

STATUS_OPEN = "open"
STATUS_CONCLUDED = "concluded"
STATUS_FLAGGED = "flagged-disagreement"


class SessionNotFound(DucgError):
    pass


class SessionClosed(DucgError):
    pass


class ContradictoryBatch(DucgError):
    pass


def _now() -> str:
    return datetime.now(timezone.utc).isoformat()


@dataclass
class HistoryEntry:
    step: int
    observations: list[tuple[VariableId, int]]
    report_digest: str


@dataclass
class Session:
    session_id: str
    model_id: str
    created_at: str
    step: int = 1
    observed: dict[VariableId, int] = field(default_factory=dict)
    status: str = STATUS_OPEN
    history: list[HistoryEntry] = field(default_factory=list)
    last_response: dict | None = None

    def to_dict(self) -> dict:
        return {
            "session_id": self.session_id,
            "model_id": self.model_id,
            "created_at": self.created_at,
            "step": self.step,
            "status": self.status,
            "evidence": {
                "observed": [
                    {"variable": {"kind": v.kind, "index": v.index}, "state": s}
                    for v, s in sorted(self.observed.items())
                ]
            },
            "history": [
                {
                    "step": h.step,
                    "observations": [
                        {"variable": {"kind": v.kind, "index": v.index}, "state": s}
                        for v, s in h.observations
                    ],
                    "report_digest": h.report_digest,
                }
                for h in self.history
            ],
        }


def run_pipeline(model: ChiefComplaintModel, observed: dict[VariableId, int], step: int) -> dict:
    """One full diagnosis step: simplify, suspect, recommend."""
    evidence = EvidenceSet.for_model(model, observed, step=step)
    report = suspicion(model, evidence)
    recommendations = recommend(model, evidence, report)
    return {
        "report": report.to_dict(),
        "recommendations": recommendations.to_dict(),
    }


class ModelRegistry:
    """Read-shared registry of loaded models, persisted as plain files."""

    def __init__(self, data_dir: Path):
        self.dir = Path(data_dir) / "models"
        self.dir.mkdir(parents=True, exist_ok=True)
        self._models: dict[str, ChiefComplaintModel] = {}
        self._lock = threading.Lock()
        for path in sorted(self.dir.glob("*.json")):
            try:
                loaded = load_model(path.read_text(encoding="utf-8"))
            except DucgError:
                continue
            if isinstance(loaded, ChiefComplaintModel):
                self._models[loaded.model_id] = loaded

    def register(self, model: ChiefComplaintModel) -> str:
        with self._lock:
            self._models[model.model_id] = model
            path = self.dir / f"{model.model_id}.json"
            path.write_text(
                json.dumps(model_to_dict(model), indent=2, sort_keys=True),
                encoding="utf-8",
            )
        return model.model_id

    def get(self, model_id: str) -> ChiefComplaintModel | None:
        return self._models.get(model_id)

    def list_ids(self) -> list[dict]:
        """Model summaries with the variable metadata a client form needs."""
        out = []
        for m in sorted(self._models.values(), key=lambda m: m.model_id):
            out.append(
                {
                    "model_id": m.model_id,
                    "chief_complaints": list(m.chief_complaints),
                    "diseases": len(m.diseases),
                    "variables": [
                        {
                            "kind": var.id.kind,
                            "index": var.id.index,
                            "name": var.name,
                            "states": list(var.state_names),
                            "cost": var.beta,
                            "attention": var.epsilon,
                        }
                        for var in sorted(m.variables.values(), key=lambda v: v.id)
                    ],
                }
            )
        return out


class SessionStore:
    """Per-session serialized mutation over an append-only event log."""

    def __init__(self, data_dir: Path, registry: ModelRegistry):
        self.dir = Path(data_dir) / "sessions"
        self.dir.mkdir(parents=True, exist_ok=True)
        self.disagreement_file = Path(data_dir) / "disagreements.jsonl"
        self.registry = registry
        self._sessions: dict[str, Session] = {}
        self._locks: dict[str, threading.Lock] = {}
        self._global = threading.Lock()

    def _lock_for(self, session_id: str) -> threading.Lock:
        with self._global:
            return self._locks.setdefault(session_id, threading.Lock())

    def _log_path(self, session_id: str) -> Path:
        return self.dir / f"{session_id}.jsonl"

    def _append_event(self, session_id: str, event: dict):
        with self._log_path(session_id).open("a", encoding="utf-8") as fh:
            fh.write(canonical_json(event) + "\n")
        self._update_index()

    def _update_index(self):
        index = {
            sid: {"model_id": s.model_id, "status": s.status, "step": s.step}
            for sid, s in sorted(self._sessions.items())
        }
        (self.dir / "index.json").write_text(
            json.dumps(index, indent=2, sort_keys=True), encoding="utf-8"
        )

    def create(self, model_id: str) -> tuple[Session, list]:
        model = self.registry.get(model_id)
        if model is None:
            raise SessionNotFound(f"unknown model {model_id!r}")
        session = Session(
            session_id=uuid.uuid4().hex,
            model_id=model_id,
            created_at=_now(),
        )
        with self._global:
            self._sessions[session.session_id] = session
        initial = ranked_priors(model, EvidenceSet.for_model(model, {}))
        self._append_event(
            session.session_id,
            {
                "type": "created",
                "session_id": session.session_id,
                "model_id": model_id,
                "at": session.created_at,
            },
        )
        return session, initial

    def get(self, session_id: str) -> Session:
        session = self._sessions.get(session_id)
        if session is None:
            raise SessionNotFound(f"unknown session {session_id!r}")
        return session

    def model_for(self, session: Session) -> ChiefComplaintModel:
        model = self.registry.get(session.model_id)
        if model is None:
            raise SessionNotFound(f"model {session.model_id!r} no longer registered")
        return model

    def submit(self, session_id: str, observations: list[tuple[VariableId, int]]) -> dict:
        """Apply one observation batch; idempotent resubmission replays the
        cached response without advancing the step."""
        lock = self._lock_for(session_id)
        with lock:
            session = self.get(session_id)
            if session.status != STATUS_OPEN:
                raise SessionClosed(f"session {session_id} is {session.status}")
            model = self.model_for(session)

            batch: dict[VariableId, int] = {}
            for vid, state in observations:
                if vid in batch and batch[vid] != state:
                    raise ContradictoryBatch(
                        f"{vid} observed twice with different states in one batch"
                    )
                batch[vid] = state
            if not batch:
                raise EvidenceError("empty observation batch")
            for vid, state in batch.items():
                var = model.variables.get(vid)
                if var is None:
                    raise EvidenceError(f"unknown variable {vid}")
                if not 0 <= state < var.n_states:
                    raise EvidenceError(f"state {state} out of range for {vid}")

            changed = {
                vid: state for vid, state in batch.items()
                if session.observed.get(vid) != state
            }
            if not changed and session.last_response is not None:
                return session.last_response

            re_observed = sorted(
                str(vid) for vid in changed if vid in session.observed
            )
            merged = dict(session.observed)
            merged.update(batch)
            # validate against the engine before mutating the session
            response = run_pipeline(model, merged, session.step + 1)

            session.observed = merged
            session.step += 1
            session.last_response = response
            entry = HistoryEntry(
                step=session.step,
                observations=sorted(batch.items()),
                report_digest=digest(response["report"]),
            )
            session.history.append(entry)
            self._append_event(
                session_id,
                {
                    "type": "re-observe" if re_observed else "observe",
                    "at": _now(),
                    "step": session.step,
                    "observations": [
                        {"variable": {"kind": v.kind, "index": v.index}, "state": s}
                        for v, s in sorted(batch.items())
                    ],
                    "re_observed": re_observed,
                    "response": response,
                },
            )
            return response

    def flag_disagreement(self, session_id: str, note: str) -> dict:
        lock = self._lock_for(session_id)
        with lock:
            session = self.get(session_id)
            session.status = STATUS_FLAGGED
            at = _now()
            snapshot = {
                "at": at,
                "note": note,
                "session": session.to_dict(),
            }
            with self.disagreement_file.open("a", encoding="utf-8") as fh:
                fh.write(canonical_json(snapshot) + "\n")
            self._append_event(
                session_id,
                {"type": "flag-disagreement", "at": at, "note_digest": digest(note)},
            )
            return {"session_id": session_id, "status": session.status}

    def read_log(self, session_id: str) -> list[dict]:
        path = self._log_path(session_id)
        if not path.exists():
            raise SessionNotFound(f"no log for session {session_id!r}")
        return [json.loads(line) for line in path.read_text(encoding="utf-8").splitlines() if line]


def replay_session(log_events: list[dict], model: ChiefComplaintModel) -> list[tuple[int, bool]]:
    """Re-run every observation batch in a log and compare report bytes.

    Returns (step, matches) per batch; all True means the log replays
    deterministically against this model.
    """
    observed: dict[VariableId, int] = {}
    step = 1
    results = []
    for event in log_events:
        if event.get("type") not in ("observe", "re-observe"):
            continue
        for obs in event["observations"]:
            ref = obs["variable"]
            observed[VariableId(ref["kind"], ref["index"])] = obs["state"]
        step += 1
        response = run_pipeline(model, observed, step)
        stored = event.get("response")
        results.append((step, canonical_json(response) == canonical_json(stored)))
    return results
