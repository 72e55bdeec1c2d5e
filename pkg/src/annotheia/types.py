"""Domain types shared across the pipeline, with JSON (de)serialization."""

from __future__ import annotations

from dataclasses import dataclass, field

CANDIDATE_STATUSES = ("pending", "accepted", "discarded")
VALID_SAMPLE_RATES = (8000, 16000, 22050, 44100, 48000)
N_LANDMARKS = 68


class ValidationError(ValueError):
    """A domain invariant does not hold."""


@dataclass
class VideoAsset:
    id: str
    path: str
    fps: float
    frame_count: int
    width: int
    height: int
    audio_sample_rate: int

    def validate(self):
        if self.fps <= 0:
            raise ValidationError("fps must be > 0")
        if self.frame_count < 1:
            raise ValidationError("frame_count must be >= 1")
        if self.width < 1 or self.height < 1:
            raise ValidationError("width and height must be >= 1")
        if self.audio_sample_rate not in VALID_SAMPLE_RATES:
            raise ValidationError(
                f"audio_sample_rate {self.audio_sample_rate} not in {VALID_SAMPLE_RATES}"
            )

    def to_dict(self):
        return {
            "id": self.id,
            "path": self.path,
            "fps": self.fps,
            "frame_count": self.frame_count,
            "width": self.width,
            "height": self.height,
            "audio_sample_rate": self.audio_sample_rate,
        }

    @classmethod
    def from_dict(cls, d):
        return cls(
            id=d["id"],
            path=d["path"],
            fps=d["fps"],
            frame_count=d["frame_count"],
            width=d["width"],
            height=d["height"],
            audio_sample_rate=d["audio_sample_rate"],
        )


@dataclass
class BoundingBox:
    x1: float
    y1: float
    x2: float
    y2: float

    def validate(self, width=None, height=None):
        if not (self.x1 < self.x2 and self.y1 < self.y2):
            raise ValidationError(f"degenerate bbox {self.as_list()}")
        if width is not None and not (0 <= self.x1 and self.x2 <= width):
            raise ValidationError(f"bbox {self.as_list()} outside frame width {width}")
        if height is not None and not (0 <= self.y1 and self.y2 <= height):
            raise ValidationError(f"bbox {self.as_list()} outside frame height {height}")

    @property
    def center(self):
        return ((self.x1 + self.x2) / 2.0, (self.y1 + self.y2) / 2.0)

    @property
    def width(self):
        return self.x2 - self.x1

    @property
    def height(self):
        return self.y2 - self.y1

    def as_list(self):
        return [self.x1, self.y1, self.x2, self.y2]

    @classmethod
    def from_list(cls, xs):
        if len(xs) != 4:
            raise ValidationError(f"bbox needs 4 coordinates, got {len(xs)}")
        return cls(float(xs[0]), float(xs[1]), float(xs[2]), float(xs[3]))


@dataclass
class FaceObservation:
    frame_index: int
    bbox: BoundingBox
    confidence: float
    landmarks: list | None = None

    def validate(self, frame_width=None, frame_height=None):
        if not (0.0 <= self.confidence <= 1.0):
            raise ValidationError(f"confidence {self.confidence} outside [0, 1]")
        self.bbox.validate(frame_width, frame_height)
        if self.landmarks is not None:
            if len(self.landmarks) != N_LANDMARKS:
                raise ValidationError(
                    f"expected {N_LANDMARKS} landmarks, got {len(self.landmarks)}"
                )
            if frame_width is not None and frame_height is not None:
                # Alignment may overshoot the face box; allow 10% beyond the frame.
                mx, my = 0.1 * frame_width, 0.1 * frame_height
                for x, y in self.landmarks:
                    if not (-mx <= x <= frame_width + mx and -my <= y <= frame_height + my):
                        raise ValidationError(f"landmark ({x}, {y}) outside expanded frame")

    def to_dict(self):
        d = {
            "frame_index": self.frame_index,
            "bbox": self.bbox.as_list(),
            "confidence": self.confidence,
        }
        if self.landmarks is not None:
            d["landmarks"] = [[x, y] for x, y in self.landmarks]
        return d

    @classmethod
    def from_dict(cls, d):
        landmarks = d.get("landmarks")
        if landmarks is not None:
            landmarks = [(p[0], p[1]) for p in landmarks]
        return cls(
            frame_index=d["frame_index"],
            bbox=BoundingBox.from_list(d["bbox"]),
            confidence=d["confidence"],
            landmarks=landmarks,
        )


@dataclass
class FaceTrack:
    track_id: int
    video_id: str
    scene_index: int
    observations: list = field(default_factory=list)

    @property
    def first_frame(self):
        return self.observations[0].frame_index

    @property
    def last_frame(self):
        return self.observations[-1].frame_index

    def frame_span(self):
        """(first, last + 1) over the observed frames."""
        return self.first_frame, self.last_frame + 1

    def validate(self, max_track_gap, scene=None):
        if not self.observations:
            raise ValidationError("track has no observations")
        prev = None
        for obs in self.observations:
            if prev is not None:
                if obs.frame_index <= prev:
                    raise ValidationError("observation frames not strictly increasing")
                if obs.frame_index - prev > max_track_gap:
                    raise ValidationError(
                        f"gap {obs.frame_index - prev} exceeds max_track_gap {max_track_gap}"
                    )
            prev = obs.frame_index
        if scene is not None:
            if self.first_frame < scene.start_frame or self.last_frame >= scene.end_frame:
                raise ValidationError("track extends outside its scene")


@dataclass
class SceneSegment:
    scene_index: int
    start_frame: int
    end_frame: int
    cut_score: float = 0.0

    def validate(self):
        if self.start_frame >= self.end_frame:
            raise ValidationError(
                f"scene [{self.start_frame}, {self.end_frame}) is empty"
            )

    @property
    def length(self):
        return self.end_frame - self.start_frame

    def to_dict(self):
        return {
            "scene_index": self.scene_index,
            "start_frame": self.start_frame,
            "end_frame": self.end_frame,
            "cut_score": self.cut_score,
        }

    @classmethod
    def from_dict(cls, d):
        return cls(d["scene_index"], d["start_frame"], d["end_frame"], d["cut_score"])


@dataclass
class ScoreSeries:
    track_id: int
    first_frame: int
    values: list

    def validate(self):
        for v in self.values:
            if v != v or v in (float("inf"), float("-inf")):
                raise ValidationError("score series contains non-finite values")


@dataclass
class Word:
    word: str
    t0: float
    t1: float

    def to_dict(self):
        return {"word": self.word, "t0": self.t0, "t1": self.t1}

    @classmethod
    def from_dict(cls, d):
        return cls(d["word"], d["t0"], d["t1"])


@dataclass
class Transcription:
    text: str
    language: str
    words: list = field(default_factory=list)

    def to_dict(self):
        return {
            "text": self.text,
            "language": self.language,
            "words": [w.to_dict() for w in self.words],
        }

    @classmethod
    def from_dict(cls, d):
        return cls(d["text"], d["language"], [Word.from_dict(w) for w in d["words"]])

    @classmethod
    def empty(cls, language="unknown"):
        return cls(text="", language=language, words=[])


def make_candidate_id(video_id, scene_index, track_id, start_frame):
    """Deterministic id; injective because video ids never contain ':'."""
    return f"{video_id}:{scene_index}:{track_id}:{start_frame}"


@dataclass
class CandidateSample:
    candidate_id: str
    video_id: str
    scene_index: int
    track_id: int
    start_frame: int
    end_frame: int
    per_frame_bboxes: list
    transcription: Transcription
    status: str = "pending"
    edited_text: str | None = None
    transcription_failed: bool = False

    def validate(self, scene=None):
        if self.start_frame >= self.end_frame:
            raise ValidationError(
                f"candidate span [{self.start_frame}, {self.end_frame}) is empty"
            )
        if scene is not None:
            if self.start_frame < scene.start_frame or self.end_frame > scene.end_frame:
                raise ValidationError("candidate span extends outside its scene")
        if len(self.per_frame_bboxes) != self.end_frame - self.start_frame:
            raise ValidationError(
                f"per_frame_bboxes has {len(self.per_frame_bboxes)} entries for a "
                f"{self.end_frame - self.start_frame}-frame span"
            )
        if self.status not in CANDIDATE_STATUSES:
            raise ValidationError(f"unknown status {self.status!r}")

    def to_dict(self):
        return {
            "candidate_id": self.candidate_id,
            "video_id": self.video_id,
            "scene_index": self.scene_index,
            "track_id": self.track_id,
            "start_frame": self.start_frame,
            "end_frame": self.end_frame,
            "per_frame_bboxes": [b.as_list() for b in self.per_frame_bboxes],
            "transcription": self.transcription.to_dict(),
            "status": self.status,
            "edited_text": self.edited_text,
            "transcription_failed": self.transcription_failed,
        }

    @classmethod
    def from_dict(cls, d):
        return cls(
            candidate_id=d["candidate_id"],
            video_id=d["video_id"],
            scene_index=d["scene_index"],
            track_id=d["track_id"],
            start_frame=d["start_frame"],
            end_frame=d["end_frame"],
            per_frame_bboxes=[BoundingBox.from_list(b) for b in d["per_frame_bboxes"]],
            transcription=Transcription.from_dict(d["transcription"]),
            status=d.get("status", "pending"),
            edited_text=d.get("edited_text"),
            transcription_failed=d.get("transcription_failed", False),
        )
