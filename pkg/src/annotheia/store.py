"""On-disk candidate store: append-only JSON Lines plus a decision log.

Layout under the store root:
    candidates.jsonl   one CandidateSample per line, append-only
    decisions.jsonl    decision/edit records, append-only audit trail
    videos.jsonl       VideoAsset registry (fps lookup for export)
    state/<video>.json run-state markers for resume
    .lock              advisory single-writer lock

Appends are the only mutation, which keeps the store crash-safe: a torn
final line is detected and ignored on read.
"""

from __future__ import annotations

import fcntl
import json
import os
from datetime import datetime, timezone
from pathlib import Path

from annotheia.types import CandidateSample, ValidationError, VideoAsset

DECISION_KINDS = ("accepted", "discarded")


class StoreError(Exception):
    pass


class StoreLockedError(StoreError):
    pass


class DuplicateCandidateError(StoreError):
    pass


class UnknownCandidateError(StoreError):
    pass


def utc_now_iso():
    """UTC ISO-8601 with millisecond precision; lexicographic order = time order."""
    return datetime.now(timezone.utc).isoformat(timespec="milliseconds").replace("+00:00", "Z")


def _read_jsonl(path: Path):
    if not path.exists():
        return []
    rows = []
    with path.open("r", encoding="utf-8") as fh:
        for line in fh:
            line = line.strip()
            if not line:
                continue
            try:
                rows.append(json.loads(line))
            except json.JSONDecodeError:
                # A torn final line from a crashed writer is not an error.
                continue
    return rows


class CandidateStore:
    """One writer at a time (advisory lock); any number of readers."""

    def __init__(self, root, writable=False):
        self.root = Path(root)
        self.writable = writable
        self.root.mkdir(parents=True, exist_ok=True)
        (self.root / "state").mkdir(exist_ok=True)
        self._lock_fh = None
        if writable:
            self._acquire_lock()
        self._ids = {c.candidate_id for c in self.candidates()}

    def _acquire_lock(self):
        lock_path = self.root / ".lock"
        fh = lock_path.open("w")
        try:
            fcntl.flock(fh, fcntl.LOCK_EX | fcntl.LOCK_NB)
        except OSError:
            fh.close()
            raise StoreLockedError(f"{lock_path} is held by another writer")
        fh.write(str(os.getpid()))
        fh.flush()
        self._lock_fh = fh

    def close(self):
        if self._lock_fh is not None:
            fcntl.flock(self._lock_fh, fcntl.LOCK_UN)
            self._lock_fh.close()
            self._lock_fh = None

    def __enter__(self):
        return self

    def __exit__(self, *exc):
        self.close()

    # -- paths ---------------------------------------------------------------

    @property
    def candidates_path(self):
        return self.root / "candidates.jsonl"

    @property
    def decisions_path(self):
        return self.root / "decisions.jsonl"

    @property
    def videos_path(self):
        return self.root / "videos.jsonl"

    def _append(self, path: Path, record: dict):
        if not self.writable:
            raise StoreError("store opened read-only")
        with path.open("a", encoding="utf-8") as fh:
            fh.write(json.dumps(record, ensure_ascii=False) + "\n")
            fh.flush()
            os.fsync(fh.fileno())

    # -- candidates ----------------------------------------------------------

    def append_candidate(self, candidate: CandidateSample) -> str:
        candidate.validate()
        if candidate.candidate_id in self._ids:
            raise DuplicateCandidateError(
                f"candidate {candidate.candidate_id} already stored; "
                "re-runs must go through resume"
            )
        self._append(self.candidates_path, candidate.to_dict())
        self._ids.add(candidate.candidate_id)
        return candidate.candidate_id

    def candidates(self):
        return [CandidateSample.from_dict(d) for d in _read_jsonl(self.candidates_path)]

    def has_candidate(self, candidate_id):
        return candidate_id in self._ids

    # -- decisions -----------------------------------------------------------

    def record_decision(self, candidate_id, decision, edited_text=None,
                        annotator="anonymous", timestamp=None):
        if decision not in DECISION_KINDS:
            raise ValidationError(f"decision must be one of {DECISION_KINDS}, got {decision!r}")
        if candidate_id not in self._ids:
            raise UnknownCandidateError(f"unknown candidate {candidate_id!r}")
        self._append(self.decisions_path, {
            "candidate_id": candidate_id,
            "decision": decision,
            "edited_text": edited_text,
            "annotator": annotator,
            "timestamp": timestamp or utc_now_iso(),
        })

    def record_transcript_edit(self, candidate_id, edited_text,
                               annotator="anonymous", timestamp=None):
        """Persist a transcript edit without an accept/discard decision."""
        if candidate_id not in self._ids:
            raise UnknownCandidateError(f"unknown candidate {candidate_id!r}")
        self._append(self.decisions_path, {
            "candidate_id": candidate_id,
            "decision": "edit",
            "edited_text": edited_text,
            "annotator": annotator,
            "timestamp": timestamp or utc_now_iso(),
        })

    def decisions(self):
        return _read_jsonl(self.decisions_path)

    def effective_states(self):
        """Replay the decision log: id -> {"status", "edited_text"}.

        Effective status is the last accept/discard by timestamp (file order
        breaks ties); the effective transcript is the last record carrying an
        edited_text, whatever its kind.
        """
        states = {
            c.candidate_id: {"status": c.status, "edited_text": c.edited_text}
            for c in self.candidates()
        }
        best_status = {}
        best_edit = {}
        for index, rec in enumerate(self.decisions()):
            cid = rec.get("candidate_id")
            if cid not in states:
                continue
            key = (rec.get("timestamp") or "", index)
            if rec.get("decision") in DECISION_KINDS:
                if cid not in best_status or key >= best_status[cid][0]:
                    best_status[cid] = (key, rec["decision"])
            if rec.get("edited_text") is not None:
                if cid not in best_edit or key >= best_edit[cid][0]:
                    best_edit[cid] = (key, rec["edited_text"])
        for cid, (_, decision) in best_status.items():
            states[cid]["status"] = decision
        for cid, (_, text) in best_edit.items():
            states[cid]["edited_text"] = text
        return states

    def effective_status(self, candidate_id):
        states = self.effective_states()
        if candidate_id not in states:
            raise UnknownCandidateError(f"unknown candidate {candidate_id!r}")
        return states[candidate_id]["status"]

    # -- video registry ------------------------------------------------------

    def register_video(self, asset: VideoAsset):
        asset.validate()
        if asset.id not in {v.id for v in self.videos()}:
            self._append(self.videos_path, asset.to_dict())

    def videos(self):
        return [VideoAsset.from_dict(d) for d in _read_jsonl(self.videos_path)]

    def video_asset(self, video_id):
        for v in self.videos():
            if v.id == video_id:
                return v
        return None

    def video_fps(self, video_id, default=25.0):
        asset = self.video_asset(video_id)
        return asset.fps if asset is not None else default

    # -- run state (resume) ----------------------------------------------------

    def _state_path(self, video_id):
        return self.root / "state" / f"{video_id}.json"

    def write_run_state(self, video_id, cfg_hash):
        if not self.writable:
            raise StoreError("store opened read-only")
        payload = {"video_id": video_id, "config_hash": cfg_hash,
                   "completed_at": utc_now_iso()}
        path = self._state_path(video_id)
        tmp = path.with_suffix(".tmp")
        tmp.write_text(json.dumps(payload), encoding="utf-8")
        tmp.replace(path)

    def read_run_state(self, video_id):
        path = self._state_path(video_id)
        if not path.exists():
            return None
        try:
            return json.loads(path.read_text(encoding="utf-8"))
        except (json.JSONDecodeError, OSError):
            return "corrupt"


def export_rows(store: CandidateStore, fps_default=25.0):
    """Accepted candidates as export dicts, ordered by candidate id.

    The exported text is the annotator's edit when present, otherwise the
    automatic transcription.
    """
    states = store.effective_states()
    rows = []
    for candidate in sorted(store.candidates(), key=lambda c: c.candidate_id):
        state = states[candidate.candidate_id]
        if state["status"] != "accepted":
            continue
        fps = store.video_fps(candidate.video_id, default=fps_default)
        text = state["edited_text"] if state["edited_text"] is not None \
            else candidate.transcription.text
        rows.append({
            "candidate_id": candidate.candidate_id,
            "video_id": candidate.video_id,
            "scene_index": candidate.scene_index,
            "track_id": candidate.track_id,
            "start_frame": candidate.start_frame,
            "end_frame": candidate.end_frame,
            "start_seconds": candidate.start_frame / fps,
            "end_seconds": candidate.end_frame / fps,
            "text": text,
            "language": candidate.transcription.language,
            "per_frame_bboxes": [b.as_list() for b in candidate.per_frame_bboxes],
        })
    return rows


def export_accepted(store: CandidateStore, destination, fps_default=25.0):
    """Write accepted candidates as JSON Lines; returns the row count."""
    rows = export_rows(store, fps_default=fps_default)
    payload = "".join(json.dumps(r, ensure_ascii=False) + "\n" for r in rows)
    Path(destination).write_text(payload, encoding="utf-8")
    return len(rows)
