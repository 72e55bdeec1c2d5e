"""Scene segmentation by HSV content change, plus the person-presence filter."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from annotheia import kernels
from annotheia.types import SceneSegment


class SceneDetectionError(Exception):
    pass


@dataclass
class HsvFrame:
    """Downscaled HSV planes of one frame, each uint8 in [0, 255]."""

    planes: np.ndarray  # (3, h, w): H, S, V

    @property
    def width(self):
        return self.planes.shape[2]

    @property
    def height(self):
        return self.planes.shape[1]


def to_hsv(rgb, downscale_factor=1) -> HsvFrame:
    """Nearest-neighbor downscale then RGB -> HSV (H maps [0,360) to [0,255])."""
    rgb = np.ascontiguousarray(rgb, dtype=np.uint8)
    if rgb.size == 0:
        raise SceneDetectionError("zero-sized frame")
    return HsvFrame(np.asarray(kernels.hsv_planes(rgb, downscale_factor)))


def content_score(prev: HsvFrame, cur: HsvFrame) -> float:
    """Mean over H, S, V of the per-pixel mean absolute difference, in [0, 255]."""
    if prev.planes.shape != cur.planes.shape:
        raise SceneDetectionError(
            f"frame size changed: {prev.planes.shape} vs {cur.planes.shape}"
        )
    return float(kernels.mean_abs_diff(prev.planes, cur.planes))


def detect_scenes(frames, scene_threshold=27.0, min_scene_len_frames=15,
                  downscale_factor=1):
    """Split a frame stream into scenes tiling [0, frame_count).

    A cut opens a new scene at frame i when the content score against frame
    i-1 reaches the threshold and the current scene is already
    min_scene_len_frames long. The final scene is closed by end-of-video and
    may be shorter.
    """
    scenes = []
    prev = None
    current_start = 0
    opening_score = 0.0
    n = 0
    for n, frame in enumerate(frames, start=1):
        i = n - 1
        hsv = to_hsv(frame, downscale_factor)
        if prev is not None:
            score = content_score(prev, hsv)
            if score >= scene_threshold and (i - current_start) >= min_scene_len_frames:
                scenes.append(SceneSegment(len(scenes), current_start, i, opening_score))
                current_start = i
                opening_score = score
        prev = hsv
    if n == 0:
        raise SceneDetectionError("empty frame stream")
    scenes.append(SceneSegment(len(scenes), current_start, n, opening_score))
    return scenes


def filter_scenes_with_faces(scenes, video, face_backend, face_confidence_min=0.5,
                             scratch=None):
    """Keep scenes whose first frame contains at least one confident face."""
    from annotheia.scratch import ScratchDir
    from annotheia.tracking import detect_faces

    own_scratch = scratch is None
    scratch = scratch or ScratchDir()
    kept = []
    try:
        for scene in scenes:
            frame = video.read_frame(scene.start_frame)
            try:
                faces = detect_faces(frame, scene.start_frame, face_backend,
                                     scratch, min_confidence=face_confidence_min)
            except Exception as exc:
                raise SceneDetectionError(
                    f"face check failed on scene {scene.scene_index} "
                    f"(frame {scene.start_frame}): {exc}"
                ) from exc
            if faces:
                kept.append(scene)
    finally:
        if own_scratch:
            scratch.cleanup()
    return kept
