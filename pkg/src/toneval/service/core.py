"""Session management, opaque stimulus tokens, and durable rating storage.

Everything the client sees is blind to conditions: stimulus tokens are
HMAC-signed (session, position) pairs, so no response can leak which system
produced the audio. Ratings are appended to a JSONL log and fsynced before
the acknowledgement; replaying the log on startup restores all sessions.
"""

from __future__ import annotations

import base64
import hashlib
import hmac
import io
import json
import os
import random
import secrets
import struct
import threading
from dataclasses import dataclass, field
from datetime import datetime, timezone
from pathlib import Path

from ..errors import SchemaError
from .study import Study

TOKEN_SIG_BYTES = 12


class TokenError(ValueError):
    pass


class TokenCodec:
    """Signs presentation positions into opaque per-session tokens."""

    def __init__(self, study_seed: int):
        self._key = hashlib.sha256(f"stimulus-token:{study_seed}".encode()).digest()

    def _sig(self, session_id: str, position: int) -> bytes:
        msg = session_id.encode() + b"\x00" + struct.pack(">I", position)
        return hmac.new(self._key, msg, hashlib.sha256).digest()[:TOKEN_SIG_BYTES]

    def encode(self, session_id: str, position: int) -> str:
        payload = struct.pack(">I", position) + self._sig(session_id, position)
        return base64.urlsafe_b64encode(payload).decode().rstrip("=")

    def decode(self, session_id: str, token: str) -> int:
        pad = "=" * (-len(token) % 4)
        try:
            payload = base64.urlsafe_b64decode(token + pad)
        except Exception:
            raise TokenError("malformed token")
        if len(payload) != 4 + TOKEN_SIG_BYTES:
            raise TokenError("malformed token")
        (position,) = struct.unpack(">I", payload[:4])
        if not hmac.compare_digest(payload[4:], self._sig(session_id, position)):
            raise TokenError("token does not belong to this session")
        return position


@dataclass
class SessionState:
    session_id: str
    subject_id: str
    order: list[int]  # presentation order: position -> stimulus index
    cursor: int = 0
    ratings: dict[int, dict] = field(default_factory=dict)  # position -> latest

    @property
    def completed(self) -> bool:
        return self.cursor >= len(self.order)


def _permutation(seed: int, subject_id: str, n: int) -> list[int]:
    digest = hashlib.sha256(f"{seed}\x00{subject_id}".encode()).digest()
    rng = random.Random(int.from_bytes(digest, "big"))
    order = list(range(n))
    rng.shuffle(order)
    return order


def _utcnow() -> str:
    return datetime.now(timezone.utc).isoformat()


class EvalServer:
    """Study state plus the append-only record log. Thread-safe."""

    def __init__(self, study: Study, log_path):
        self.study = study
        self.codec = TokenCodec(study.seed)
        self.log_path = Path(log_path)
        self._lock = threading.Lock()
        self.sessions: dict[str, SessionState] = {}
        self.by_subject: dict[str, str] = {}
        self._replay()
        self._log = open(self.log_path, "ab")

    # -- persistence ------------------------------------------------------

    def _replay(self) -> None:
        if not self.log_path.exists():
            return
        with open(self.log_path, "rb") as fh:
            lines = fh.read().splitlines()
        for lineno, line in enumerate(lines, start=1):
            line = line.strip()
            if not line:
                continue
            try:
                rec = json.loads(line)
            except json.JSONDecodeError:
                if lineno == len(lines):
                    # A torn final line was never acknowledged; drop it.
                    import warnings

                    warnings.warn(
                        f"{self.log_path}: dropping torn trailing record (crash artifact)"
                    )
                    break
                raise SchemaError(f"{self.log_path}: corrupt record log", row=lineno)
            self._dispatch(rec, lineno)

    def _dispatch(self, rec: dict, lineno: int) -> None:
        kind = rec.get("kind")
        if kind == "session":
            self._restore_session(rec)
        elif kind == "rating":
            self._restore_rating(rec, lineno)
        else:
            raise SchemaError(
                f"{self.log_path}: unknown record kind {kind!r}", row=lineno
            )

    def _restore_session(self, rec: dict) -> None:
        sid, subject = rec["session_id"], rec["subject_id"]
        state = SessionState(
            session_id=sid,
            subject_id=subject,
            order=_permutation(self.study.seed, subject, len(self.study.stimuli)),
        )
        self.sessions[sid] = state
        self.by_subject[subject] = sid

    def _restore_rating(self, rec: dict, lineno: int) -> None:
        state = self.sessions.get(rec["session_id"])
        if state is None:
            raise SchemaError(
                f"{self.log_path}: rating for unknown session", row=lineno
            )
        position = rec["position"]
        state.ratings[position] = rec
        state.cursor = max(state.cursor, position + 1)

    def _append(self, rec: dict) -> None:
        self._log.write(json.dumps(rec, sort_keys=True).encode() + b"\n")
        self._log.flush()
        os.fsync(self._log.fileno())

    def close(self) -> None:
        if not self._log.closed:
            self._log.flush()
            os.fsync(self._log.fileno())
            self._log.close()

    # -- API operations ----------------------------------------------------

    def create_session(self, subject_id: str) -> SessionState:
        """New session, or the subject's existing one (deterministic resume)."""
        if not subject_id or not subject_id.strip():
            raise ValueError("subject_id must be non-empty")
        subject_id = subject_id.strip()
        with self._lock:
            if subject_id in self.by_subject:
                return self.sessions[self.by_subject[subject_id]]
            sid = secrets.token_urlsafe(16)
            state = SessionState(
                session_id=sid,
                subject_id=subject_id,
                order=_permutation(self.study.seed, subject_id, len(self.study.stimuli)),
            )
            self._append(
                {
                    "kind": "session",
                    "session_id": sid,
                    "subject_id": subject_id,
                    "created_at": _utcnow(),
                }
            )
            self.sessions[sid] = state
            self.by_subject[subject_id] = sid
            return state

    def _session(self, session_id: str) -> SessionState:
        state = self.sessions.get(session_id)
        if state is None:
            raise KeyError(f"unknown session {session_id!r}")
        return state

    def progress(self, state: SessionState) -> dict:
        return {"completed": state.cursor, "total": len(state.order)}

    def next_stimulus(self, session_id: str):
        """(token, position) for the session cursor, or None when done."""
        with self._lock:
            state = self._session(session_id)
            if state.completed:
                return None
            return self.codec.encode(session_id, state.cursor), state.cursor

    def audio_for_token(self, session_id: str, token: str) -> Path:
        with self._lock:
            state = self._session(session_id)
            position = self.codec.decode(session_id, token)
            if position >= len(state.order):
                raise TokenError("token position out of range")
            return self.study.stimuli[state.order[position]].audio_path

    def submit_rating(
        self, session_id: str, token: str, naturalness: str, likert: int
    ) -> dict:
        """Persist one rating durably, advancing the cursor when current.

        The token must point at the session's current position or an
        already-rated one (revision, latest wins).
        """
        if naturalness not in ("Real", "Artificial"):
            raise ValueError(f"naturalness must be Real or Artificial, got {naturalness!r}")
        if not isinstance(likert, int) or isinstance(likert, bool) or not 1 <= likert <= 5:
            raise ValueError(f"likert rating {likert!r} outside 1..5")
        with self._lock:
            state = self._session(session_id)
            position = self.codec.decode(session_id, token)
            if position > state.cursor or position >= len(state.order):
                raise TokenError("token is not for a current or past stimulus")
            stim = self.study.stimuli[state.order[position]]
            resubmission = position in state.ratings
            rec = {
                "kind": "rating",
                "session_id": session_id,
                "subject_id": state.subject_id,
                "position": position,
                "utterance_id": stim.utterance_id,
                "condition": stim.condition,
                "naturalness": naturalness,
                "likert": likert,
                "received_at": _utcnow(),
                "resubmission": resubmission,
            }
            self._append(rec)
            state.ratings[position] = rec
            if position == state.cursor:
                state.cursor += 1
            return self.progress(state)

    def export_csv(self) -> str:
        """Latest rating per (session, stimulus), ordered by subject then position."""
        import csv

        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(["subject", "sentence", "type", "mos", "naturalness"])
        with self._lock:
            states = sorted(self.sessions.values(), key=lambda s: s.subject_id)
            for state in states:
                for position in sorted(state.ratings):
                    rec = state.ratings[position]
                    writer.writerow(
                        [
                            state.subject_id,
                            rec["utterance_id"],
                            rec["condition"],
                            rec["likert"],
                            rec["naturalness"],
                        ]
                    )
        return buf.getvalue()
