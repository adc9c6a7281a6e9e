"""HTTP API driving the ingest -> iterate -> inspect -> assert loop.

One writer per session: mutating calls take the session's lock without
blocking and answer 409 with a retry flag when another write is in flight.
Reads serve the latest immutable snapshot.
"""

from __future__ import annotations

import threading
from pathlib import Path

from fastapi import Depends, FastAPI, HTTPException, Request
from pydantic import BaseModel, Field

from .dsl import ParseError
from .formulas import ConfigError
from .logio import LogFormatError
from .session import (
    AuditSession,
    SessionError,
    session_assert,
    session_create,
    session_ingest,
    session_iterate,
    session_load,
    session_report,
)
from .structures import ConflictError


class CreateSessionBody(BaseModel):
    policy: str
    schema_text: str | None = Field(default=None, alias="schema")

    model_config = {"populate_by_name": True}


class LogsBody(BaseModel):
    lines: list[str]


class AssertionBody(BaseModel):
    atom: str
    value: str
    justification: str


class SessionStore:
    def __init__(self, root: Path | None = None):
        self.root = root
        self.sessions: dict[str, AuditSession] = {}
        self.locks: dict[str, threading.Lock] = {}
        self._registry_lock = threading.Lock()

    def directory_for(self, session_id: str) -> Path | None:
        return self.root / session_id if self.root else None

    def add(self, session: AuditSession) -> None:
        with self._registry_lock:
            self.sessions[session.id] = session
            self.locks[session.id] = threading.Lock()

    def get(self, session_id: str) -> AuditSession:
        with self._registry_lock:
            session = self.sessions.get(session_id)
        if session is None and self.root is not None:
            candidate = self.root / session_id
            if (candidate / "history.jsonl").exists():
                session = session_load(candidate)
                self.add(session)
        if session is None:
            raise HTTPException(status_code=404, detail=f"no session {session_id}")
        return session

    def lock_for(self, session_id: str) -> threading.Lock:
        with self._registry_lock:
            lock = self.locks.get(session_id)
        if lock is None:
            raise HTTPException(status_code=404, detail=f"no session {session_id}")
        return lock


def create_app(root: Path | str | None = None, token: str | None = None) -> FastAPI:
    app = FastAPI(title="residua audit service")
    store = SessionStore(Path(root) if root else None)
    app.state.store = store

    def authorized(request: Request) -> None:
        if token is None:
            return
        header = request.headers.get("authorization", "")
        if header != f"Bearer {token}":
            raise HTTPException(status_code=401, detail="missing or wrong token")

    def write_lock(session_id: str):
        lock = store.lock_for(session_id)
        if not lock.acquire(blocking=False):
            raise HTTPException(
                status_code=409,
                detail="another write is in progress on this session; retry",
                headers={"Retry-After": "0"},
            )
        return lock

    @app.post("/sessions", status_code=201)
    def create_session(body: CreateSessionBody, _: None = Depends(authorized)):
        try:
            session = session_create(body.policy, body.schema_text)
            if store.root is not None:
                session.directory = store.directory_for(session.id)
                session.save()
        except (ParseError, ConfigError, SessionError) as err:
            raise HTTPException(status_code=422, detail=str(err)) from err
        store.add(session)
        return session_report(session)

    @app.post("/sessions/{session_id}/logs")
    def ingest(session_id: str, body: LogsBody, _: None = Depends(authorized)):
        session = store.get(session_id)
        lock = write_lock(session_id)
        try:
            session_ingest(session, body.lines)
        except (LogFormatError, ConflictError, ConfigError) as err:
            raise HTTPException(status_code=422, detail=str(err)) from err
        finally:
            lock.release()
        return session_report(session)

    @app.post("/sessions/{session_id}/iterate")
    def iterate(session_id: str, _: None = Depends(authorized)):
        session = store.get(session_id)
        lock = write_lock(session_id)
        try:
            session_iterate(session)
        finally:
            lock.release()
        return session_report(session)

    @app.get("/sessions/{session_id}/residual")
    def residual(session_id: str, _: None = Depends(authorized)):
        session = store.get(session_id)
        report = session_report(session)
        return report["residual"]

    @app.get("/sessions/{session_id}/pending")
    def pending(session_id: str, _: None = Depends(authorized)):
        session = store.get(session_id)
        return session_report(session)["pending"]

    @app.post("/sessions/{session_id}/assertions")
    def assertion(session_id: str, body: AssertionBody, _: None = Depends(authorized)):
        session = store.get(session_id)
        lock = write_lock(session_id)
        try:
            session_assert(session, body.atom, body.value, body.justification)
        except (SessionError, ConflictError) as err:
            raise HTTPException(status_code=422, detail=str(err)) from err
        finally:
            lock.release()
        return session_report(session)

    @app.get("/sessions/{session_id}/report")
    def report(session_id: str, _: None = Depends(authorized)):
        session = store.get(session_id)
        return session_report(session)

    return app
