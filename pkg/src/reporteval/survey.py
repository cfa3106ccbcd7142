"""Blinded two-phase report-authorship survey: service, log, analytics.

Physicians see candidate/reference report pairs, choose who wrote what on a
four-option scale, rate confidence (1-5 Likert) and four linguistic
rationale criteria, then reassess after the scan images are revealed.

Persistence is an append-only JSONL event log; replaying it reconstructs
all session state, which doubles as crash recovery. Truth labels live in
the server-side definition and log only; no client payload carries them
before a session is closed.
"""
from __future__ import annotations

import json
import random
import threading
import time
from dataclasses import dataclass, field
from enum import Enum
from pathlib import Path
from typing import Mapping, Optional, Sequence

import pydantic as _pydantic

from .stats import MannWhitneyResult, StatsError, mann_whitney_u

__all__ = [
    "Truth",
    "Phase",
    "SessionState",
    "RaterRole",
    "CRITERIA",
    "SurveyCase",
    "SurveyDefinition",
    "SurveyError",
    "PhaseError",
    "DuplicateResponseError",
    "UnknownSessionError",
    "SurveyService",
    "SurveyAnalytics",
    "analyze_log",
    "create_app",
]


class Truth(str, Enum):
    A_HUMAN_B_MACHINE = "a_human_b_machine"
    A_MACHINE_B_HUMAN = "a_machine_b_human"
    BOTH_HUMAN = "both_human"
    BOTH_MACHINE = "both_machine"


class Phase(str, Enum):
    PRE_IMAGE = "pre_image"
    POST_IMAGE = "post_image"


class SessionState(str, Enum):
    OPEN = "open"
    IMAGE_PHASE = "image_phase"
    CLOSED = "closed"


class RaterRole(str, Enum):
    RADIOLOGIST = "radiologist"
    NEUROLOGIST = "neurologist"
    OTHER_PHYSICIAN = "other_physician"


CRITERIA = (
    "familiarity_voice",
    "specificity_details",
    "continuity_coherence",
    "sentence_writing_quality",
)


class SurveyError(Exception):
    """Base class for survey protocol violations."""


class PhaseError(SurveyError):
    pass


class DuplicateResponseError(SurveyError):
    pass


class UnknownSessionError(SurveyError):
    pass


@dataclass(frozen=True)
class SurveyCase:
    case_id: str
    report_a: str
    report_b: str
    truth: Truth
    image_refs: tuple[str, ...] = ()

    def client_payload(self) -> dict:
        """Case content as shown to raters: no truth field, ever."""
        return {"case_id": self.case_id, "report_a": self.report_a, "report_b": self.report_b}


@dataclass(frozen=True)
class SurveyDefinition:
    cases: tuple[SurveyCase, ...]

    def __post_init__(self) -> None:
        if not self.cases:
            raise SurveyError("survey definition needs at least one case")
        ids = [c.case_id for c in self.cases]
        if len(set(ids)) != len(ids):
            raise SurveyError("duplicate case_id in survey definition")

    @classmethod
    def from_json(cls, path: str) -> "SurveyDefinition":
        with open(path, encoding="utf-8") as fh:
            data = json.load(fh)
        cases = tuple(
            SurveyCase(
                case_id=str(c["case_id"]),
                report_a=str(c["report_a"]),
                report_b=str(c["report_b"]),
                truth=Truth(c["truth"]),
                image_refs=tuple(c.get("image_refs", ())),
            )
            for c in data["cases"]
        )
        return cls(cases=cases)

    def case(self, case_id: str) -> SurveyCase:
        for c in self.cases:
            if c.case_id == case_id:
                return c
        raise SurveyError(f"unknown case_id {case_id!r}")


def _validate_response_fields(payload: Mapping) -> dict:
    choice = Truth(payload["choice"])
    confidence = payload["confidence"]
    if not isinstance(confidence, int) or not 1 <= confidence <= 5:
        raise SurveyError(f"confidence must be an integer in 1..5, got {confidence!r}")
    criteria = []
    seen = set()
    for entry in payload.get("criteria", []):
        name = entry["criterion"]
        if name not in CRITERIA:
            raise SurveyError(f"unknown criterion {name!r}")
        if name in seen:
            raise SurveyError(f"criterion {name!r} rated twice")
        seen.add(name)
        importance = entry.get("importance", 1)
        if not isinstance(importance, int) or not 1 <= importance <= 5:
            raise SurveyError(f"importance must be an integer in 1..5, got {importance!r}")
        criteria.append(
            {"criterion": name, "selected": bool(entry.get("selected", False)), "importance": importance}
        )
    return {"choice": choice.value, "confidence": confidence, "criteria": criteria}


@dataclass
class _Session:
    session_id: str
    rater_role: RaterRole
    case_order: tuple[str, ...]
    state: SessionState = SessionState.OPEN
    responses: dict = field(default_factory=dict)  # (case_id, phase) -> payload

    def answered(self, phase: Phase) -> set[str]:
        return {cid for (cid, ph) in self.responses if ph == phase.value}

    def summary(self) -> dict:
        return {
            "session_id": self.session_id,
            "rater_role": self.rater_role.value,
            "case_order": list(self.case_order),
            "state": self.state.value,
            "answered_pre": sorted(self.answered(Phase.PRE_IMAGE)),
            "answered_post": sorted(self.answered(Phase.POST_IMAGE)),
        }


class SurveyService:
    """Survey sessions over an append-only event log.

    The log is the single source of truth: on construction any existing
    events are replayed, so restarting the service resumes every session.
    All mutations happen under one lock (single-writer append channel).
    """

    def __init__(
        self,
        definition: SurveyDefinition,
        log_path: str,
        shuffle_seed: Optional[int] = None,
        clock=time.time,
    ):
        self.definition = definition
        self.log_path = Path(log_path)
        self.shuffle_seed = shuffle_seed
        self._clock = clock
        self._lock = threading.Lock()
        self._sessions: dict[str, _Session] = {}
        self._session_count = 0
        existing = load_events(self.log_path) if self.log_path.exists() else []
        for event in existing:
            self._apply(event)
        self.log_path.parent.mkdir(parents=True, exist_ok=True)
        self._log = open(self.log_path, "a", encoding="utf-8")
        if not existing:
            self._append(
                {
                    "type": "survey_defined",
                    "cases": [
                        {
                            "case_id": c.case_id,
                            "truth": c.truth.value,
                            "image_refs": list(c.image_refs),
                        }
                        for c in definition.cases
                    ],
                }
            )

    # -- event plumbing ----------------------------------------------------

    def _append(self, event: dict) -> dict:
        event = dict(event)
        event["ts"] = self._clock()
        self._log.write(json.dumps(event, sort_keys=True) + "\n")
        self._log.flush()
        self._apply(event)
        return event

    def _apply(self, event: dict) -> None:
        etype = event.get("type")
        if etype == "session_created":
            session = _Session(
                session_id=event["session_id"],
                rater_role=RaterRole(event["rater_role"]),
                case_order=tuple(event["case_order"]),
            )
            self._sessions[session.session_id] = session
            self._session_count += 1
        elif etype == "response_submitted":
            session = self._sessions[event["session_id"]]
            session.responses[(event["case_id"], event["phase"])] = {
                "choice": event["choice"],
                "confidence": event["confidence"],
                "criteria": event["criteria"],
            }
        elif etype == "images_revealed":
            self._sessions[event["session_id"]].state = SessionState.IMAGE_PHASE
        elif etype == "session_closed":
            self._sessions[event["session_id"]].state = SessionState.CLOSED

    def _session(self, session_id: str) -> _Session:
        try:
            return self._sessions[session_id]
        except KeyError:
            raise UnknownSessionError(f"unknown session {session_id!r}") from None

    # -- operations ----------------------------------------------------------

    def create_session(self, rater_role: RaterRole | str) -> dict:
        role = RaterRole(rater_role)
        with self._lock:
            session_id = f"s{self._session_count + 1:04d}"
            order = [c.case_id for c in self.definition.cases]
            if self.shuffle_seed is not None:
                rng = random.Random(f"{self.shuffle_seed}:{self._session_count}")
                rng.shuffle(order)
            self._append(
                {
                    "type": "session_created",
                    "session_id": session_id,
                    "rater_role": role.value,
                    "case_order": order,
                }
            )
            return self._sessions[session_id].summary()

    def session_summary(self, session_id: str) -> dict:
        with self._lock:
            return self._session(session_id).summary()

    def next_case(self, session_id: str) -> dict:
        """Next unanswered case payload for the session's current phase."""
        with self._lock:
            session = self._session(session_id)
            if session.state is SessionState.CLOSED:
                return {"done": True, "state": session.state.value}
            phase = Phase.PRE_IMAGE if session.state is SessionState.OPEN else Phase.POST_IMAGE
            answered = session.answered(phase)
            for case_id in session.case_order:
                if case_id in answered:
                    continue
                case = self.definition.case(case_id)
                payload = case.client_payload()
                payload.update(
                    {
                        "phase": phase.value,
                        "progress": {"answered": len(answered), "total": len(session.case_order)},
                        "state": session.state.value,
                    }
                )
                if phase is Phase.POST_IMAGE:
                    payload["image_refs"] = list(case.image_refs)
                    payload["pre_image_response"] = session.responses.get(
                        (case_id, Phase.PRE_IMAGE.value)
                    )
                return payload
            return {"done": True, "state": session.state.value}

    def submit_response(self, session_id: str, payload: Mapping) -> dict:
        """Validate and persist one response; idempotent on exact duplicates."""
        with self._lock:
            session = self._session(session_id)
            case_id = str(payload["case_id"])
            phase = Phase(payload["phase"])
            if case_id not in session.case_order:
                raise SurveyError(f"case {case_id!r} is not part of session {session_id}")
            if phase is Phase.PRE_IMAGE and session.state is not SessionState.OPEN:
                raise PhaseError(f"session {session_id} no longer accepts pre_image responses")
            if phase is Phase.POST_IMAGE and session.state is not SessionState.IMAGE_PHASE:
                raise PhaseError(
                    f"session {session_id} is in state {session.state.value}; "
                    "post_image responses require the images to be revealed first"
                )
            fields = _validate_response_fields(payload)
            existing = session.responses.get((case_id, phase.value))
            if existing is not None:
                if existing == fields:
                    return {"status": "ok", "duplicate": True, "state": session.state.value}
                raise DuplicateResponseError(
                    f"session {session_id} already has a different {phase.value} "
                    f"response for case {case_id}"
                )
            self._append(
                {
                    "type": "response_submitted",
                    "session_id": session_id,
                    "case_id": case_id,
                    "phase": phase.value,
                    **fields,
                }
            )
            if (
                phase is Phase.POST_IMAGE
                and session.answered(Phase.POST_IMAGE) == set(session.case_order)
            ):
                self._append({"type": "session_closed", "session_id": session_id})
            return {"status": "ok", "duplicate": False, "state": session.state.value}

    def reveal_images(self, session_id: str) -> dict:
        """Move the session to the image phase; idempotent."""
        with self._lock:
            session = self._session(session_id)
            if session.state is SessionState.CLOSED:
                raise PhaseError(f"session {session_id} is already closed")
            missing = [c for c in session.case_order if c not in session.answered(Phase.PRE_IMAGE)]
            if missing:
                raise PhaseError(
                    "cannot reveal images before all pre_image responses are in; "
                    "missing: " + ", ".join(missing)
                )
            if session.state is SessionState.OPEN:
                self._append({"type": "images_revealed", "session_id": session_id})
            return {
                "state": self._session(session_id).state.value,
                "images": {
                    c: list(self.definition.case(c).image_refs) for c in session.case_order
                },
            }

    def session_result(self, session_id: str) -> dict:
        """Truth labels and per-case correctness; only after closure."""
        with self._lock:
            session = self._session(session_id)
            if session.state is not SessionState.CLOSED:
                raise PhaseError(f"session {session_id} is not closed yet")
            cases = []
            for case_id in session.case_order:
                truth = self.definition.case(case_id).truth.value
                entry = {"case_id": case_id, "truth": truth}
                for phase in Phase:
                    response = session.responses.get((case_id, phase.value))
                    if response:
                        entry[f"{phase.value}_choice"] = response["choice"]
                        entry[f"{phase.value}_correct"] = response["choice"] == truth
                cases.append(entry)
            return {"session_id": session_id, "cases": cases}

    def close(self) -> None:
        self._log.close()


# ---------------------------------------------------------------------------
# Analytics
# ---------------------------------------------------------------------------


def load_events(path: str | Path) -> list[dict]:
    events = []
    with open(path, encoding="utf-8") as fh:
        for line in fh:
            line = line.strip()
            if line:
                events.append(json.loads(line))
    return events


@dataclass(frozen=True)
class _Rate:
    hits: int
    total: int

    @property
    def value(self) -> Optional[float]:
        return self.hits / self.total if self.total else None

    def as_dict(self) -> dict:
        return {"hits": self.hits, "total": self.total, "rate": self.value}


def _slot_truths(truth: Truth) -> dict[str, str]:
    mapping = {
        Truth.A_HUMAN_B_MACHINE: {"a": "human", "b": "machine"},
        Truth.A_MACHINE_B_HUMAN: {"a": "machine", "b": "human"},
        Truth.BOTH_HUMAN: {"a": "human", "b": "human"},
        Truth.BOTH_MACHINE: {"a": "machine", "b": "machine"},
    }
    return mapping[truth]


@dataclass(frozen=True)
class SurveyAnalytics:
    machine_judged_human: dict
    human_judged_human: dict
    decision_change: dict
    confidence: dict
    criteria: dict
    n_sessions: int
    n_responses: int

    def as_dict(self) -> dict:
        return {
            "n_sessions": self.n_sessions,
            "n_responses": self.n_responses,
            "machine_judged_human": self.machine_judged_human,
            "human_judged_human": self.human_judged_human,
            "decision_change": self.decision_change,
            "confidence": self.confidence,
            "criteria": self.criteria,
        }


def analyze_log(events: Sequence[Mapping]) -> SurveyAnalytics:
    """Aggregate rates over a survey event log.

    Counts are exact event tallies; only the final divisions are floats.
    Requires the log's own survey_defined event for truth labels.
    """
    if not events:
        raise SurveyError("empty event log")
    truths: dict[str, Truth] = {}
    for event in events:
        if event.get("type") == "survey_defined":
            for case in event["cases"]:
                truths[case["case_id"]] = Truth(case["truth"])
    if not truths:
        raise SurveyError("event log has no survey_defined event (no truth labels)")

    responses = [e for e in events if e.get("type") == "response_submitted"]
    if not responses:
        raise SurveyError("event log has no responses")
    sessions = {e["session_id"] for e in events if e.get("type") == "session_created"}

    machine = {p: [0, 0] for p in Phase}  # judged human, total machine slots
    human = {p: [0, 0] for p in Phase}  # judged human, total human slots
    confidences: dict[Phase, list[int]] = {p: [] for p in Phase}
    by_case: dict[tuple[str, str], dict[str, Mapping]] = {}
    for response in responses:
        case_id = response["case_id"]
        if case_id not in truths:
            raise SurveyError(f"response for case {case_id!r} missing from survey definition")
        phase = Phase(response["phase"])
        slot_truth = _slot_truths(truths[case_id])
        slot_judged = _slot_truths(Truth(response["choice"]))
        for slot in ("a", "b"):
            counter = machine if slot_truth[slot] == "machine" else human
            counter[phase][1] += 1
            if slot_judged[slot] == "human":
                counter[phase][0] += 1
        confidences[phase].append(int(response["confidence"]))
        by_case.setdefault((response["session_id"], case_id), {})[phase.value] = response

    changed = 0
    with_both = 0
    for pair in by_case.values():
        pre, post = pair.get(Phase.PRE_IMAGE.value), pair.get(Phase.POST_IMAGE.value)
        if pre is None or post is None:
            continue
        with_both += 1
        if pre["choice"] != post["choice"]:
            changed += 1

    mwu: Optional[MannWhitneyResult] = None
    if confidences[Phase.PRE_IMAGE] and confidences[Phase.POST_IMAGE]:
        try:
            mwu = mann_whitney_u(confidences[Phase.PRE_IMAGE], confidences[Phase.POST_IMAGE])
        except StatsError:
            mwu = None

    criteria_report: dict[str, dict] = {}
    pre_responses = [r for r in responses if r["phase"] == Phase.PRE_IMAGE.value]
    for criterion in CRITERIA:
        selected, not_selected = [], []
        for response in pre_responses:
            ratings = {c["criterion"]: c for c in response.get("criteria", [])}
            entry = ratings.get(criterion)
            correct = response["choice"] == truths[response["case_id"]].value
            if entry and entry.get("selected"):
                selected.append(correct)
            else:
                not_selected.append(correct)
        selection_rate = len(selected) / len(pre_responses) if pre_responses else None
        acc_sel = sum(selected) / len(selected) if selected else None
        acc_not = sum(not_selected) / len(not_selected) if not_selected else None
        delta = None
        if acc_sel is not None and acc_not is not None:
            delta = acc_sel - acc_not
        criteria_report[criterion] = {
            "selection_rate": selection_rate,
            "n_selected": len(selected),
            "accuracy_selected": acc_sel,
            "accuracy_not_selected": acc_not,
            "accuracy_delta": delta,
        }

    def rate_dict(counter: dict) -> dict:
        return {p.value: _Rate(*counter[p]).as_dict() for p in Phase}

    def mean(values: list[int]) -> Optional[float]:
        return sum(values) / len(values) if values else None

    return SurveyAnalytics(
        machine_judged_human=rate_dict(machine),
        human_judged_human=rate_dict(human),
        decision_change={
            "changed": changed,
            "total": with_both,
            "rate": changed / with_both if with_both else None,
        },
        confidence={
            "pre_image_mean": mean(confidences[Phase.PRE_IMAGE]),
            "post_image_mean": mean(confidences[Phase.POST_IMAGE]),
            "mann_whitney_u": None
            if mwu is None
            else {"u": mwu.u, "p_value": mwu.p_value, "method": mwu.method},
        },
        criteria=criteria_report,
        n_sessions=len(sessions),
        n_responses=len(responses),
    )


# ---------------------------------------------------------------------------
# HTTP layer
# ---------------------------------------------------------------------------


class CreateSessionBody(_pydantic.BaseModel):
    rater_role: RaterRole


class CriterionBody(_pydantic.BaseModel):
    criterion: str
    selected: bool = False
    importance: int = _pydantic.Field(default=1, ge=1, le=5)


class ResponseBody(_pydantic.BaseModel):
    case_id: str
    phase: Phase
    choice: Truth
    confidence: int = _pydantic.Field(ge=1, le=5)
    criteria: list[CriterionBody] = _pydantic.Field(default_factory=list)


def create_app(service: SurveyService, assets_dir: Optional[str] = None):
    """FastAPI app exposing the survey protocol plus static image assets."""
    from fastapi import FastAPI, HTTPException
    from fastapi.staticfiles import StaticFiles

    app = FastAPI(title="report authorship survey")

    def guard(fn, *args):
        try:
            return fn(*args)
        except UnknownSessionError as exc:
            raise HTTPException(status_code=404, detail=str(exc))
        except DuplicateResponseError as exc:
            raise HTTPException(status_code=409, detail=str(exc))
        except PhaseError as exc:
            raise HTTPException(status_code=409, detail=str(exc))
        except SurveyError as exc:
            raise HTTPException(status_code=400, detail=str(exc))

    @app.post("/sessions")
    def create_session(body: CreateSessionBody):
        return guard(service.create_session, body.rater_role)

    @app.get("/sessions/{session_id}")
    def session_summary(session_id: str):
        return guard(service.session_summary, session_id)

    @app.get("/sessions/{session_id}/next")
    def next_case(session_id: str):
        return guard(service.next_case, session_id)

    @app.post("/sessions/{session_id}/responses")
    def submit_response(session_id: str, body: ResponseBody):
        payload = {
            "case_id": body.case_id,
            "phase": body.phase.value,
            "choice": body.choice.value,
            "confidence": body.confidence,
            "criteria": [c.model_dump() for c in body.criteria],
        }
        return guard(service.submit_response, session_id, payload)

    @app.post("/sessions/{session_id}/reveal")
    def reveal(session_id: str):
        return guard(service.reveal_images, session_id)

    @app.get("/sessions/{session_id}/result")
    def result(session_id: str):
        return guard(service.session_result, session_id)

    @app.get("/analytics")
    def analytics():
        try:
            return analyze_log(load_events(service.log_path)).as_dict()
        except SurveyError as exc:
            raise HTTPException(status_code=400, detail=str(exc))

    if assets_dir:
        app.mount("/assets", StaticFiles(directory=assets_dir), name="assets")

    return app
