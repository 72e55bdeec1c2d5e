"""Per-frame face detection and greedy proximity tracking."""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field

import numpy as np

from annotheia import kernels
from annotheia.backends.payloads import write_png
from annotheia.backends.protocol import BackendCallError, BackendError, ProtocolError
from annotheia.types import BoundingBox, FaceObservation, FaceTrack, ValidationError

log = logging.getLogger("annotheia.tracking")

CROP_SIZE = 112
CROP_MARGIN = 1.2


def detect_faces(frame, frame_index, backend, scratch, min_confidence=0.5):
    """Detect faces on one frame; observations sorted by descending confidence."""
    path = scratch.frame_png(frame_index)
    if not path.exists():
        write_png(path, frame)
    result = backend.call("detect_faces", {"image_path": str(path)})
    try:
        faces = result["faces"]
        observations = [
            FaceObservation(
                frame_index=frame_index,
                bbox=BoundingBox.from_list(f["bbox"]),
                confidence=float(f["confidence"]),
            )
            for f in faces
        ]
    except (KeyError, TypeError, ValidationError) as exc:
        raise ProtocolError(
            f"frame {frame_index}: malformed detect_faces reply: {exc}"
        ) from None
    observations = [o for o in observations if o.confidence >= min_confidence]
    observations.sort(key=lambda o: -o.confidence)
    return observations


def assign_tracks(open_tracks, detections, frame_index, max_match_dist,
                  max_track_gap, frame_diagonal, next_track_id,
                  video_id="", scene_index=0):
    """One step of greedy proximity matching.

    Distance is the Euclidean distance between bbox centers divided by the
    frame diagonal. Pairs are bound globally-smallest-first among distances
    <= max_match_dist; ties prefer the lower track_id, then the higher
    detection confidence. Unmatched detections spawn new tracks; tracks whose
    last observation is older than frame_index - max_track_gap are closed.

    Returns (open_tracks, closed_tracks, next_track_id).
    """
    still_open, closed = [], []
    for track in open_tracks:
        if track.last_frame < frame_index - max_track_gap:
            closed.append(track)
        else:
            still_open.append(track)

    pairs = []
    for ti, track in enumerate(still_open):
        cx, cy = track.observations[-1].bbox.center
        for di, det in enumerate(detections):
            dx, dy = det.bbox.center
            dist = math.hypot(dx - cx, dy - cy) / frame_diagonal
            if dist <= max_match_dist:
                pairs.append((dist, track.track_id, -det.confidence, ti, di))
    pairs.sort()

    used_tracks, used_dets = set(), set()
    for dist, _tid, _negconf, ti, di in pairs:
        if ti in used_tracks or di in used_dets:
            continue
        used_tracks.add(ti)
        used_dets.add(di)
        still_open[ti].observations.append(detections[di])

    for di, det in enumerate(detections):
        if di in used_dets:
            continue
        track = FaceTrack(track_id=next_track_id, video_id=video_id,
                          scene_index=scene_index, observations=[det])
        next_track_id += 1
        still_open.append(track)

    return still_open, closed, next_track_id


@dataclass
class SceneTracker:
    """Folds assign_tracks over a scene's frames; track ids are scene-local."""

    video_id: str
    scene_index: int
    frame_width: int
    frame_height: int
    max_match_dist: float = 0.10
    max_track_gap: int = 5
    open_tracks: list = field(default_factory=list)
    closed_tracks: list = field(default_factory=list)
    next_track_id: int = 0

    @property
    def frame_diagonal(self):
        return math.hypot(self.frame_width, self.frame_height)

    def update(self, frame_index, detections):
        self.open_tracks, closed, self.next_track_id = assign_tracks(
            self.open_tracks, detections, frame_index,
            self.max_match_dist, self.max_track_gap, self.frame_diagonal,
            self.next_track_id, self.video_id, self.scene_index,
        )
        self.closed_tracks.extend(closed)

    def finish(self):
        """Close everything and return all tracks ordered by track_id."""
        self.closed_tracks.extend(self.open_tracks)
        self.open_tracks = []
        return sorted(self.closed_tracks, key=lambda t: t.track_id)


@dataclass
class LandmarkReport:
    attached: int = 0
    failed: int = 0


def attach_landmarks(track, frames, backend, scratch, frame_width, frame_height):
    """Attach 68-point landmarks to each observation; per-frame soft failures.

    `frames` maps frame_index -> RGB frame (a callable or a mapping).
    Observations whose alignment fails or comes back malformed keep
    landmarks=None and are counted in the report.
    """
    lookup = frames if callable(frames) else frames.__getitem__
    report = LandmarkReport()
    for obs in track.observations:
        path = scratch.frame_png(obs.frame_index)
        if not path.exists():
            write_png(path, lookup(obs.frame_index))
        try:
            result = backend.call("align_face", {
                "image_path": str(path),
                "bbox": obs.bbox.as_list(),
            })
            points = [(float(p[0]), float(p[1])) for p in result["landmarks"]]
            candidate = FaceObservation(obs.frame_index, obs.bbox, obs.confidence,
                                        landmarks=points)
            candidate.validate(frame_width, frame_height)
        except (BackendCallError, ProtocolError, BackendError,
                ValidationError, KeyError, TypeError) as exc:
            report.failed += 1
            log.warning("landmarks failed on frame %d of track %d: %s",
                        obs.frame_index, track.track_id, exc)
            continue
        obs.landmarks = points
        report.attached += 1
    return report


def crop_face(frame, bbox, out_size=CROP_SIZE, grayscale=True):
    """Square crop around the bbox center, resized and converted to luma.

    The box is expanded to a square of side max(w, h) * 1.2, clamped to the
    frame, then nearest-neighbor resampled to out_size x out_size.
    """
    frame = np.asarray(frame)
    fh, fw = frame.shape[:2]
    cx, cy = bbox.center
    side = max(bbox.width, bbox.height) * CROP_MARGIN
    x1 = max(cx - side / 2.0, 0.0)
    x2 = min(cx + side / 2.0, float(fw))
    y1 = max(cy - side / 2.0, 0.0)
    y2 = min(cy + side / 2.0, float(fh))
    if x2 - x1 <= 0 or y2 - y1 <= 0:
        raise ValidationError(f"bbox {bbox.as_list()} degenerate after clamping")

    # Nearest-neighbor sampling at output pixel centers.
    xs = np.floor(x1 + (np.arange(out_size) + 0.5) * (x2 - x1) / out_size).astype(int)
    ys = np.floor(y1 + (np.arange(out_size) + 0.5) * (y2 - y1) / out_size).astype(int)
    xs = np.clip(xs, 0, fw - 1)
    ys = np.clip(ys, 0, fh - 1)
    crop = frame[ys[:, None], xs[None, :]]
    if grayscale:
        if crop.ndim == 3:
            crop = np.asarray(kernels.rgb_to_gray(np.ascontiguousarray(crop)))
        return crop
    return crop
