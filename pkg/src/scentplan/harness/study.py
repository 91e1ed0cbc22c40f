"""Study configuration, sessions, response records, and the append-only store.

Participants never see strategy names: every payload built for them labels
plans with opaque slot letters in the session's presentation order, and the
server maps slots back to strategies on submission.  Presentation orders are
a pure function of (study seed, participant id, question index), produced by
a counter-based SHA-256 byte stream feeding an unbiased Fisher-Yates
shuffle.
"""

from __future__ import annotations

import hashlib
import json
import threading
from dataclasses import dataclass, replace
from datetime import datetime, timezone
from pathlib import Path

STUDY_IDS = ("study1", "study2")
SLOT_LETTERS = "ABCDEFGH"


class HarnessError(ValueError):
    pass


class UnknownSessionError(HarnessError):
    pass


class UnknownQuestionError(HarnessError):
    pass


class CompletedSessionError(HarnessError):
    pass


@dataclass(frozen=True)
class LikertItem:
    construct_id: str
    prompt: str
    scale_points: int = 7

    def __post_init__(self) -> None:
        if self.scale_points != 7:
            raise HarnessError(f"Likert items use a 7-point scale, got {self.scale_points}")


@dataclass(frozen=True)
class StudyConfig:
    study_id: str
    clip_ids: tuple[str, ...]
    conditions: tuple[str, ...]
    likert_items: tuple[LikertItem, ...]
    seed: int

    def __post_init__(self) -> None:
        if self.study_id not in STUDY_IDS:
            raise HarnessError(f"study_id must be one of {STUDY_IDS}, got '{self.study_id}'")
        if not self.clip_ids:
            raise HarnessError("study needs at least one clip")
        if self.study_id == "study1":
            if len(self.conditions) != 3:
                raise HarnessError("study1 compares exactly 3 conditions")
            if self.likert_items:
                raise HarnessError("study1 is a ranking study; it has no Likert items")
        else:
            if len(self.conditions) != 2:
                raise HarnessError("study2 compares exactly 2 conditions")
            if not self.likert_items:
                raise HarnessError("study2 needs at least one Likert item")

    @property
    def task_kind(self) -> str:
        return "rank" if self.study_id == "study1" else "rate"

    @property
    def question_count(self) -> int:
        return len(self.clip_ids)


DEFAULT_LIKERT_ITEMS = (
    LikertItem("immersion", "Imagined together with the video, this scent plan would "
                            "enhance my sense of immersion."),
    LikertItem("distraction", "Imagined together with the video, this scent plan would "
                              "distract me from the video."),
    LikertItem("coherence", "This scent plan is coherent with how the video unfolds."),
    LikertItem("easy_to_imagine", "The scent experience this plan describes is easy "
                                  "to imagine."),
)


def default_study1(clip_ids, seed: int) -> StudyConfig:
    return StudyConfig(
        study_id="study1",
        clip_ids=tuple(clip_ids),
        conditions=("system", "over_inclusive", "naive"),
        likert_items=(),
        seed=seed,
    )


def default_study2(clip_ids, seed: int) -> StudyConfig:
    return StudyConfig(
        study_id="study2",
        clip_ids=tuple(clip_ids),
        conditions=("system", "over_inclusive"),
        likert_items=DEFAULT_LIKERT_ITEMS,
        seed=seed,
    )


def config_from_dict(doc: dict) -> StudyConfig:
    return StudyConfig(
        study_id=doc["study_id"],
        clip_ids=tuple(doc["clip_ids"]),
        conditions=tuple(doc["conditions"]),
        likert_items=tuple(
            LikertItem(li["construct_id"], li["prompt"], int(li.get("scale_points", 7)))
            for li in doc.get("likert_items", [])
        ),
        seed=int(doc["seed"]),
    )


def load_study_config(path: str | Path) -> StudyConfig:
    return config_from_dict(json.loads(Path(path).read_text("utf-8")))


class _CounterStream:
    """Deterministic byte stream: SHA-256 of key plus a block counter."""

    def __init__(self, key: str):
        self._key = key.encode("utf-8")
        self._block = -1
        self._buf = b""
        self._pos = 0

    def take(self, n: int) -> bytes:
        out = b""
        while len(out) < n:
            if self._pos >= len(self._buf):
                self._block += 1
                self._buf = hashlib.sha256(
                    self._key + b":" + str(self._block).encode()
                ).digest()
                self._pos = 0
            chunk = self._buf[self._pos : self._pos + n - len(out)]
            self._pos += len(chunk)
            out += chunk
        return out

    def uniform_int(self, m: int) -> int:
        # rejection sampling keeps every residue exactly equally likely
        limit = (2**32 // m) * m
        while True:
            v = int.from_bytes(self.take(4), "big")
            if v < limit:
                return v % m


def presentation_order(seed: int, participant_id: str, question_index: int,
                       conditions: tuple[str, ...]) -> tuple[str, ...]:
    """The exact-uniform random order in which one question shows its conditions."""
    stream = _CounterStream(f"{seed}:{participant_id}:{question_index}")
    order = list(conditions)
    for i in range(len(order) - 1, 0, -1):
        j = stream.uniform_int(i + 1)
        order[i], order[j] = order[j], order[i]
    return tuple(order)


@dataclass(frozen=True)
class Session:
    session_id: str
    participant_id: str
    study_id: str
    orders: tuple[tuple[str, ...], ...]  # orders[q][slot] = strategy shown at that slot
    created_at: str
    completed: bool = False

    def public_view(self) -> dict:
        # orders stay server-side: exposing them would unblind the conditions
        return {
            "session_id": self.session_id,
            "participant_id": self.participant_id,
            "study_id": self.study_id,
            "question_count": len(self.orders),
            "completed": self.completed,
        }


@dataclass(frozen=True)
class ResponseRecord:
    session_id: str
    question_id: str
    clip_id: str
    ranking: tuple[str, ...] | None = None
    likert: dict | None = None  # construct_id -> {condition: 1..7}
    preference: str | None = None
    free_text: str | None = None

    def to_dict(self) -> dict:
        return {
            "session_id": self.session_id,
            "question_id": self.question_id,
            "clip_id": self.clip_id,
            "ranking": list(self.ranking) if self.ranking is not None else None,
            "likert": self.likert,
            "preference": self.preference,
            "free_text": self.free_text,
        }


def question_id_for(index: int) -> str:
    return f"q{index:02d}"


class StudyStore:
    """Append-only event log per study plus an in-memory replay.

    Every mutation appends one JSON line to ``events.jsonl``; the current
    state is the deterministic fold of that log, so exports are a pure
    function of the file.  Writes are serialized under one lock.
    """

    def __init__(self, config: StudyConfig, directory: str | Path):
        self.config = config
        self.directory = Path(directory)
        self.directory.mkdir(parents=True, exist_ok=True)
        self._lock = threading.Lock()
        self.sessions: dict[str, Session] = {}
        # (session_id, question_id) -> latest record
        self.responses: dict[tuple[str, str], ResponseRecord] = {}
        self._save_config()
        self._replay()

    # ---------------------------------------------------------------- log io

    @property
    def log_path(self) -> Path:
        return self.directory / "events.jsonl"

    def _save_config(self) -> None:
        doc = {
            "study_id": self.config.study_id,
            "clip_ids": list(self.config.clip_ids),
            "conditions": list(self.config.conditions),
            "likert_items": [
                {"construct_id": li.construct_id, "prompt": li.prompt,
                 "scale_points": li.scale_points}
                for li in self.config.likert_items
            ],
            "seed": self.config.seed,
        }
        (self.directory / "config.json").write_text(
            json.dumps(doc, indent=2, ensure_ascii=False) + "\n", "utf-8"
        )

    def _append(self, event: dict) -> None:
        with self.log_path.open("a", encoding="utf-8") as fh:
            fh.write(json.dumps(event, ensure_ascii=False) + "\n")

    def _replay(self) -> None:
        if not self.log_path.exists():
            return
        for line in self.log_path.read_text("utf-8").splitlines():
            if not line.strip():
                continue
            event = json.loads(line)
            if event["type"] == "session_created":
                s = event["session"]
                self.sessions[s["session_id"]] = Session(
                    session_id=s["session_id"],
                    participant_id=s["participant_id"],
                    study_id=s["study_id"],
                    orders=tuple(tuple(o) for o in s["orders"]),
                    created_at=s["created_at"],
                )
            elif event["type"] == "response":
                r = event["record"]
                rec = ResponseRecord(
                    session_id=r["session_id"],
                    question_id=r["question_id"],
                    clip_id=r["clip_id"],
                    ranking=tuple(r["ranking"]) if r.get("ranking") else None,
                    likert=r.get("likert"),
                    preference=r.get("preference"),
                    free_text=r.get("free_text"),
                )
                self.responses[(rec.session_id, rec.question_id)] = rec
        for sid in list(self.sessions):
            self.sessions[sid] = replace(
                self.sessions[sid], completed=self._is_complete(sid)
            )

    # ------------------------------------------------------------- sessions

    def create_session(self, participant_id: str) -> Session:
        """Create (or resume) the participant's session for this study.

        Presentation orders depend only on (seed, participant, question), so
        re-creating a session reproduces the same blinded orders.
        """
        if not participant_id or not participant_id.strip():
            raise HarnessError("participant_id must be non-empty")
        with self._lock:
            session_id = hashlib.sha256(
                f"{self.config.study_id}:{participant_id}".encode()
            ).hexdigest()[:12]
            if session_id in self.sessions:
                return self.sessions[session_id]
            orders = tuple(
                presentation_order(self.config.seed, participant_id, q, self.config.conditions)
                for q in range(self.config.question_count)
            )
            session = Session(
                session_id=session_id,
                participant_id=participant_id,
                study_id=self.config.study_id,
                orders=orders,
                created_at=datetime.now(timezone.utc).isoformat(),
            )
            self.sessions[session_id] = session
            self._append(
                {
                    "type": "session_created",
                    "session": {
                        "session_id": session.session_id,
                        "participant_id": session.participant_id,
                        "study_id": session.study_id,
                        "orders": [list(o) for o in session.orders],
                        "created_at": session.created_at,
                    },
                }
            )
            return session

    def get_session(self, session_id: str) -> Session:
        try:
            return self.sessions[session_id]
        except KeyError:
            raise UnknownSessionError(f"unknown session '{session_id}'") from None

    # ----------------------------------------------------------- task views

    def task_view(self, session_id: str, question_index: int,
                  plan_texts: dict[tuple[str, str], str]) -> dict:
        """Participant-facing payload for one question: clip plus blinded plans.

        ``plan_texts`` maps (clip_id, strategy) to rendered text.  Plans come
        back slot-labelled in this session's presentation order; nothing in
        the payload names a strategy.
        """
        session = self.get_session(session_id)
        if not 0 <= question_index < self.config.question_count:
            raise UnknownQuestionError(f"unknown question {question_index}")
        clip_id = self.config.clip_ids[question_index]
        order = session.orders[question_index]
        plans = []
        for slot, strategy in enumerate(order):
            try:
                text = plan_texts[(clip_id, strategy)]
            except KeyError:
                raise HarnessError(
                    f"no stimulus text for clip '{clip_id}' condition #{slot}"
                ) from None
            plans.append({"slot": SLOT_LETTERS[slot], "text": text})
        view = {
            "question_index": question_index,
            "question_count": self.config.question_count,
            "kind": self.config.task_kind,
            "clip": {"clip_id": clip_id, "url": f"/clips/{clip_id}"},
            "plans": plans,
        }
        if self.config.task_kind == "rate":
            view["likert_items"] = [
                {"construct_id": li.construct_id, "prompt": li.prompt,
                 "scale_points": li.scale_points}
                for li in self.config.likert_items
            ]
        return view

    # ------------------------------------------------------------ responses

    def _slot_to_strategy(self, order: tuple[str, ...], slot: str) -> str:
        letters = SLOT_LETTERS[: len(order)]
        if not isinstance(slot, str) or slot not in letters:
            raise HarnessError(f"unknown plan slot '{slot}'")
        return order[letters.index(slot)]

    def submit_response(self, session_id: str, payload: dict) -> ResponseRecord:
        """Validate and persist one answer; slots are resolved to strategies here.

        Re-submitting a question before the session completes overwrites the
        stored record (the supersession is logged); completed sessions are
        closed to further writes.
        """
        with self._lock:
            session = self.get_session(session_id)
            if session.completed:
                raise CompletedSessionError(f"session '{session_id}' is already completed")
            try:
                question_index = int(payload["question_index"])
            except (KeyError, TypeError, ValueError):
                raise HarnessError("payload needs an integer question_index") from None
            if not 0 <= question_index < self.config.question_count:
                raise UnknownQuestionError(f"unknown question {question_index}")
            order = session.orders[question_index]
            qid = question_id_for(question_index)
            record = self._build_record(session, qid, question_index, order, payload)
            key = (session_id, qid)
            superseded = key in self.responses
            self.responses[key] = record
            self._append(
                {"type": "response", "record": record.to_dict(), "supersedes": superseded}
            )
            if self._is_complete(session_id):
                self.sessions[session_id] = replace(session, completed=True)
            return record

    def _build_record(self, session: Session, qid: str, question_index: int,
                      order: tuple[str, ...], payload: dict) -> ResponseRecord:
        clip_id = self.config.clip_ids[question_index]
        free_text = payload.get("free_text")
        if free_text is not None and not isinstance(free_text, str):
            raise HarnessError("free_text must be a string")

        if self.config.task_kind == "rank":
            slots = payload.get("ranking")
            if not isinstance(slots, list) or sorted(slots) != sorted(
                SLOT_LETTERS[: len(order)]
            ):
                raise HarnessError(
                    f"ranking {slots!r} is not a permutation of the "
                    f"{len(order)} plan slots"
                )
            ranking = tuple(self._slot_to_strategy(order, s) for s in slots)
            return ResponseRecord(
                session_id=session.session_id, question_id=qid, clip_id=clip_id,
                ranking=ranking, free_text=free_text,
            )

        likert_payload = payload.get("likert")
        if not isinstance(likert_payload, dict):
            raise HarnessError("rating payload needs a likert object")
        wanted = {li.construct_id for li in self.config.likert_items}
        likert: dict[str, dict[str, int]] = {}
        for construct, per_slot in likert_payload.items():
            if construct not in wanted:
                raise HarnessError(f"unknown construct '{construct}'")
            if not isinstance(per_slot, dict):
                raise HarnessError(f"construct '{construct}' needs slot ratings")
            per_cond: dict[str, int] = {}
            for slot, value in per_slot.items():
                strategy = self._slot_to_strategy(order, slot)
                if not isinstance(value, int) or not 1 <= value <= 7:
                    raise HarnessError(f"Likert value {value!r} out of range 1..7")
                per_cond[strategy] = value
            if set(per_cond) != set(order):
                raise HarnessError(f"construct '{construct}' must rate every plan")
            likert[construct] = per_cond
        if set(likert) != wanted:
            raise HarnessError("every Likert construct must be answered")
        preference = payload.get("preference")
        if preference is None:
            raise HarnessError("rating payload needs a preference slot")
        pref_strategy = self._slot_to_strategy(order, preference)
        return ResponseRecord(
            session_id=session.session_id, question_id=qid, clip_id=clip_id,
            likert=likert, preference=pref_strategy, free_text=free_text,
        )

    # -------------------------------------------------------------- export

    def _record_complete(self, rec: ResponseRecord) -> bool:
        if self.config.task_kind == "rank":
            return rec.ranking is not None
        if rec.likert is None or rec.preference is None:
            return False
        wanted = {li.construct_id for li in self.config.likert_items}
        if set(rec.likert) != wanted:
            return False
        return all(set(per) == set(self.config.conditions) for per in rec.likert.values())

    def _is_complete(self, session_id: str) -> bool:
        for q in range(self.config.question_count):
            rec = self.responses.get((session_id, question_id_for(q)))
            if rec is None or not self._record_complete(rec):
                return False
        return True

    def export(self) -> tuple[dict, dict]:
        """(dataset, exclusion sidecar): complete sessions only, deterministic bytes.

        A pure function of the persisted log: repeated exports of an
        unchanged store are byte-identical once serialized.
        """
        with self._lock:
            complete_ids = sorted(
                sid for sid in self.sessions if self._is_complete(sid)
            )
            excluded_ids = sorted(set(self.sessions) - set(complete_ids))
            sessions_out = []
            for sid in complete_ids:
                session = self.sessions[sid]
                records = [
                    self.responses[(sid, question_id_for(q))].to_dict()
                    for q in range(self.config.question_count)
                ]
                sessions_out.append(
                    {
                        "session_id": sid,
                        "participant_id": session.participant_id,
                        "responses": records,
                    }
                )
            dataset = {
                "study_id": self.config.study_id,
                "conditions": list(self.config.conditions),
                "clip_ids": list(self.config.clip_ids),
                "sessions": sessions_out,
            }
            sidecar = {
                "study_id": self.config.study_id,
                "total_sessions": len(self.sessions),
                "complete_sessions": len(complete_ids),
                "excluded_incomplete": len(excluded_ids),
                "excluded_session_ids": excluded_ids,
            }
            return dataset, sidecar
