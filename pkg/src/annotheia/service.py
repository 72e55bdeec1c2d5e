"""HTTP API over the candidate store, powering the annotation UI."""

from __future__ import annotations

import json
from pathlib import Path

from fastapi import FastAPI, HTTPException
from fastapi.middleware.cors import CORSMiddleware
from fastapi.responses import FileResponse, PlainTextResponse
from fastapi.staticfiles import StaticFiles
from pydantic import BaseModel

from annotheia.store import DECISION_KINDS, CandidateStore, export_rows


class DecisionBody(BaseModel):
    decision: str
    edited_text: str | None = None
    annotator: str = "anonymous"


class TranscriptBody(BaseModel):
    edited_text: str
    annotator: str = "anonymous"


def _candidate_payload(candidate, state, asset):
    fps = asset.fps if asset is not None else 25.0
    payload = candidate.to_dict()
    payload["status"] = state["status"]
    payload["edited_text"] = state["edited_text"]
    payload["fps"] = fps
    payload["frame_width"] = asset.width if asset is not None else None
    payload["frame_height"] = asset.height if asset is not None else None
    payload["start_seconds"] = candidate.start_frame / fps
    payload["end_seconds"] = candidate.end_frame / fps
    payload["media_url"] = f"/api/media/{candidate.candidate_id}.mp4"
    return payload


def create_app(store_root, media_root=None, frontend_dir=None) -> FastAPI:
    store = CandidateStore(store_root, writable=True)
    media_root = Path(media_root) if media_root else None

    app = FastAPI(title="annotheia review service")
    app.add_middleware(
        CORSMiddleware,
        allow_origins=["*"],
        allow_methods=["*"],
        allow_headers=["*"],
    )
    app.state.store = store

    def sorted_candidates():
        return sorted(store.candidates(), key=lambda c: c.candidate_id)

    def get_candidate(candidate_id):
        for candidate in store.candidates():
            if candidate.candidate_id == candidate_id:
                return candidate
        raise HTTPException(status_code=404,
                            detail=f"unknown candidate {candidate_id!r}")

    @app.get("/api/candidates")
    def list_candidates(status: str | None = None, limit: int = 50,
                        cursor: str | None = None):
        states = store.effective_states()
        rows = sorted_candidates()
        if status is not None:
            rows = [c for c in rows if states[c.candidate_id]["status"] == status]
        if cursor is not None:
            rows = [c for c in rows if c.candidate_id > cursor]
        page = rows[:limit]
        next_cursor = page[-1].candidate_id if len(rows) > limit else None
        return {
            "candidates": [
                _candidate_payload(c, states[c.candidate_id],
                                   store.video_asset(c.video_id))
                for c in page
            ],
            "next_cursor": next_cursor,
        }

    @app.get("/api/candidates/{candidate_id}")
    def get_one(candidate_id: str):
        candidate = get_candidate(candidate_id)
        state = store.effective_states()[candidate_id]
        return _candidate_payload(candidate, state,
                                  store.video_asset(candidate.video_id))

    @app.get("/api/candidates/{candidate_id}/neighbors")
    def neighbors(candidate_id: str):
        ids = [c.candidate_id for c in sorted_candidates()]
        if candidate_id not in ids:
            raise HTTPException(status_code=404,
                                detail=f"unknown candidate {candidate_id!r}")
        index = ids.index(candidate_id)
        return {
            "prev": ids[index - 1] if index > 0 else None,
            "next": ids[index + 1] if index + 1 < len(ids) else None,
        }

    @app.post("/api/candidates/{candidate_id}/decision")
    def post_decision(candidate_id: str, body: DecisionBody):
        if body.decision not in DECISION_KINDS:
            raise HTTPException(
                status_code=400,
                detail=f"decision must be one of {DECISION_KINDS}, got {body.decision!r}",
            )
        get_candidate(candidate_id)
        store.record_decision(candidate_id, body.decision,
                              edited_text=body.edited_text,
                              annotator=body.annotator)
        return {
            "candidate_id": candidate_id,
            "status": store.effective_states()[candidate_id]["status"],
        }

    @app.patch("/api/candidates/{candidate_id}/transcript")
    def patch_transcript(candidate_id: str, body: TranscriptBody):
        get_candidate(candidate_id)
        store.record_transcript_edit(candidate_id, body.edited_text,
                                     annotator=body.annotator)
        return {"candidate_id": candidate_id, "edited_text": body.edited_text}

    @app.get("/api/media/{candidate_id}.mp4")
    def media(candidate_id: str):
        if media_root is None:
            raise HTTPException(status_code=404, detail="no media directory configured")
        path = media_root / f"{candidate_id}.mp4"
        if not path.exists():
            raise HTTPException(status_code=404,
                                detail=f"no clip for candidate {candidate_id!r}")
        return FileResponse(path, media_type="video/mp4")

    @app.get("/api/export")
    def export():
        lines = [json.dumps(row, ensure_ascii=False) for row in export_rows(store)]
        return PlainTextResponse("".join(line + "\n" for line in lines),
                                 media_type="application/x-ndjson")

    if frontend_dir and Path(frontend_dir).is_dir():
        app.mount("/app", StaticFiles(directory=frontend_dir, html=True), name="app")

    return app


def serve(store_root, media_root=None, port=8000, host="127.0.0.1",
          frontend_dir=None):
    import uvicorn

    app = create_app(store_root, media_root, frontend_dir)
    uvicorn.run(app, host=host, port=port, log_level="warning")
