"""HTTP/1.1 JSON API over the evaluation server state.

Endpoints (all bodies JSON unless noted):
  GET  /api/health                     -> {study_id}
  POST /api/session {subject_id}       -> {session_id, progress}
  GET  /api/session/{sid}/next         -> {token, audio_url, progress} | {done, progress}
  GET  /api/session/{sid}/audio/{tok}  -> audio/wav bytes
  POST /api/session/{sid}/rating {token, naturalness, likert} -> {ok, progress}
  GET  /api/export  (Bearer auth)      -> text/csv

No response before /api/export carries a condition label or utterance id.
"""

from __future__ import annotations

from contextlib import asynccontextmanager

from fastapi import FastAPI, HTTPException, Request, Response
from fastapi.responses import PlainTextResponse
from pydantic import BaseModel, Field

from .core import EvalServer, TokenError


class SessionRequest(BaseModel):
    subject_id: str = Field(min_length=1)


class RatingRequest(BaseModel):
    token: str
    naturalness: str
    likert: int


def create_app(
    server: EvalServer, export_token: str | None, ui_dir: str | None = None
) -> FastAPI:
    @asynccontextmanager
    async def lifespan(app: FastAPI):
        yield
        server.close()  # flush the record log on graceful shutdown

    app = FastAPI(title="listening-test", docs_url=None, redoc_url=None, lifespan=lifespan)
    app.state.server = server

    @app.get("/api/health")
    def health():
        return {"study_id": server.study.study_id, "ok": True}

    @app.post("/api/session")
    def create_session(req: SessionRequest):
        try:
            state = server.create_session(req.subject_id)
        except ValueError as exc:
            raise HTTPException(status_code=400, detail=str(exc))
        return {
            "session_id": state.session_id,
            "progress": server.progress(state),
            "allow_replay": server.study.allow_replay,
        }

    @app.get("/api/session/{session_id}/next")
    def next_stimulus(session_id: str):
        try:
            nxt = server.next_stimulus(session_id)
        except KeyError:
            raise HTTPException(status_code=404, detail="unknown session")
        state = server.sessions[session_id]
        if nxt is None:
            return {"done": True, "progress": server.progress(state)}
        token, _ = nxt
        return {
            "token": token,
            "audio_url": f"/api/session/{session_id}/audio/{token}",
            "progress": server.progress(state),
        }

    @app.get("/api/session/{session_id}/audio/{token}")
    def audio(session_id: str, token: str):
        try:
            path = server.audio_for_token(session_id, token)
        except KeyError:
            raise HTTPException(status_code=404, detail="unknown session")
        except TokenError as exc:
            raise HTTPException(status_code=403, detail=str(exc))
        return Response(content=path.read_bytes(), media_type="audio/wav")

    @app.post("/api/session/{session_id}/rating")
    def rating(session_id: str, req: RatingRequest):
        try:
            progress = server.submit_rating(
                session_id, req.token, req.naturalness, req.likert
            )
        except KeyError:
            raise HTTPException(status_code=404, detail="unknown session")
        except TokenError as exc:
            raise HTTPException(status_code=403, detail=str(exc))
        except ValueError as exc:
            raise HTTPException(status_code=400, detail=str(exc))
        return {"ok": True, "progress": progress}

    @app.get("/api/export")
    def export(request: Request):
        if not export_token:
            raise HTTPException(status_code=403, detail="export disabled (no token configured)")
        auth = request.headers.get("authorization", "")
        if auth != f"Bearer {export_token}":
            raise HTTPException(status_code=401, detail="bad export token")
        return PlainTextResponse(server.export_csv(), media_type="text/csv")

    if ui_dir:
        from fastapi.staticfiles import StaticFiles

        app.mount("/", StaticFiles(directory=ui_dir, html=True), name="ui")

    return app
