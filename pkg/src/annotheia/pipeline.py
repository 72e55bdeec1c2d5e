"""End-to-end per-video orchestration with resume support.

Stage order per video: scene detection, person-presence filter, per-scene
face tracking, ASD scoring + smoothing + thresholding, trimming,
transcription, persistence. Scene failures are isolated: one broken scene
must not kill a multi-hour run.
"""

from __future__ import annotations

import logging
import os
import shutil
import subprocess
import threading
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from annotheia.asd import (decide_activity, dense_track_bboxes, score_track,
                           smooth_scores, trim_scene)
from annotheia.backends.protocol import BackendError
from annotheia.config import PipelineConfig, config_hash
from annotheia.media import file_video_id
from annotheia.scenes import SceneDetectionError, detect_scenes, filter_scenes_with_faces
from annotheia.scratch import ScratchDir
from annotheia.store import CandidateStore
from annotheia.tracking import SceneTracker, attach_landmarks, detect_faces
from annotheia.transcribe import TranscriptionError, transcribe
from annotheia.types import CandidateSample, Transcription, make_candidate_id

log = logging.getLogger("annotheia.pipeline")


@dataclass
class RunReport:
    video_id: str
    scenes_found: int = 0
    scenes_kept: int = 0
    tracks: int = 0
    candidates: int = 0
    transcription_failures: int = 0
    landmark_failures: int = 0
    errors: list = field(default_factory=list)

    def summary(self):
        line = (f"{self.video_id}: {self.scenes_found} scenes found, "
                f"{self.scenes_kept} kept, {self.tracks} tracks, "
                f"{self.candidates} candidates")
        if self.transcription_failures:
            line += f", {self.transcription_failures} transcription failures"
        if self.landmark_failures:
            line += f", {self.landmark_failures} landmark failures"
        if self.errors:
            line += f", {len(self.errors)} scene errors"
        return line


def _process_scene(source, scene, config, backends, scratch, report_lock, report):
    """Track, score, trim, and transcribe one scene; returns candidates."""
    asset = source.asset
    frames = list(source.iter_frames(scene.start_frame, scene.end_frame))

    def frame_at(index):
        return frames[index - scene.start_frame]

    tracker = SceneTracker(
        video_id=asset.id,
        scene_index=scene.scene_index,
        frame_width=asset.width,
        frame_height=asset.height,
        max_match_dist=config.max_match_dist,
        max_track_gap=config.max_track_gap,
    )
    for offset, frame in enumerate(frames):
        detections = detect_faces(frame, scene.start_frame + offset,
                                  backends["face"], scratch,
                                  min_confidence=config.face_confidence_min)
        tracker.update(scene.start_frame + offset, detections)
    tracks = tracker.finish()

    landmark_failures = 0
    if backends.get("landmarks") is not None:
        for track in tracks:
            landmark_report = attach_landmarks(track, frame_at, backends["landmarks"],
                                               scratch, asset.width, asset.height)
            landmark_failures += landmark_report.failed

    candidates = []
    transcription_failures = 0
    for track in tracks:
        track.validate(config.max_track_gap, scene)
        first, end = track.frame_span()
        audio = source.audio_slice(first / source.fps, end / source.fps)
        raw = score_track(track, frame_at, audio, backends["asd"], config,
                          scratch, fps=source.fps)
        smoothed = smooth_scores(raw, config.smooth_window_frames)
        _, spans = decide_activity(smoothed, config.asd_threshold)
        for span in spans:
            start, stop = trim_scene(scene, span, config.trim_margin_frames)
            clip_audio = source.audio_slice(start / source.fps, stop / source.fps)
            failed = False
            try:
                transcription = transcribe(
                    clip_audio, config.language, backends["asr"], scratch,
                    clip_name=f"c_{scene.scene_index}_{track.track_id}_{start}",
                )
            except (TranscriptionError, BackendError) as exc:
                log.warning("transcription failed for scene %d track %d: %s",
                            scene.scene_index, track.track_id, exc)
                transcription = Transcription.empty()
                failed = True
                transcription_failures += 1
            candidate = CandidateSample(
                candidate_id=make_candidate_id(asset.id, scene.scene_index,
                                               track.track_id, start),
                video_id=asset.id,
                scene_index=scene.scene_index,
                track_id=track.track_id,
                start_frame=start,
                end_frame=stop,
                per_frame_bboxes=dense_track_bboxes(track, start, stop),
                transcription=transcription,
                status="pending",
                transcription_failed=failed,
            )
            candidate.validate(scene)
            candidates.append(candidate)

    with report_lock:
        report.tracks += len(tracks)
        report.landmark_failures += landmark_failures
        report.transcription_failures += transcription_failures
    return candidates


def process_video(source, config: PipelineConfig, backends, store: CandidateStore,
                  scratch=None, media_dir=None) -> RunReport:
    """Run the full pipeline on one video and persist pending candidates."""
    asset = source.asset
    report = RunReport(video_id=asset.id)
    store.register_video(asset)
    own_scratch = scratch is None
    scratch = scratch or ScratchDir()
    try:
        scenes = detect_scenes(source.iter_frames(),
                               scene_threshold=config.scene_threshold,
                               min_scene_len_frames=config.min_scene_len_frames,
                               downscale_factor=config.downscale_factor)
        report.scenes_found = len(scenes)

        kept = []
        for scene in scenes:
            try:
                kept.extend(filter_scenes_with_faces(
                    [scene], source, backends["face"],
                    face_confidence_min=config.face_confidence_min,
                    scratch=scratch))
            except SceneDetectionError as exc:
                report.errors.append(str(exc))
        report.scenes_kept = len(kept)

        report_lock = threading.Lock()
        results = {}
        workers = config.workers or os.cpu_count() or 1
        with ThreadPoolExecutor(max_workers=workers) as pool:
            futures = {
                scene.scene_index: pool.submit(
                    _process_scene, source, scene, config, backends,
                    scratch, report_lock, report)
                for scene in kept
            }
            for scene_index, future in futures.items():
                try:
                    results[scene_index] = future.result()
                except Exception as exc:  # per-scene isolation
                    report.errors.append(f"scene {scene_index}: {exc}")
                    log.warning("scene %d failed: %s", scene_index, exc)

        ordered = []
        for scene_index in sorted(results):
            ordered.extend(sorted(results[scene_index],
                                  key=lambda c: (c.track_id, c.start_frame)))
        for candidate in ordered:
            store.append_candidate(candidate)
            if media_dir is not None:
                write_clip_mp4(source, candidate, media_dir)
        report.candidates = len(ordered)

        store.write_run_state(asset.id, config_hash(config))
    finally:
        if own_scratch:
            scratch.cleanup()
    return report


def resume(video_paths, store: CandidateStore, config: PipelineConfig):
    """Paths still needing work: unknown, unfinished, or stale-config videos."""
    wanted = config_hash(config)
    pending = []
    for path in video_paths:
        video_id = file_video_id(path)
        state = store.read_run_state(video_id)
        if state == "corrupt":
            log.warning("corrupt run state for %s; re-queueing", path)
            pending.append(path)
        elif state is None or state.get("config_hash") != wanted:
            pending.append(path)
    return pending


def write_clip_mp4(source, candidate, media_dir):
    """Best-effort trimmed clip for the review UI; needs ffmpeg."""
    if not shutil.which("ffmpeg"):
        return False
    from annotheia.backends.payloads import write_wav

    media_dir = os.fspath(media_dir)
    os.makedirs(media_dir, exist_ok=True)
    out = os.path.join(media_dir, f"{candidate.candidate_id}.mp4")
    wav = out + ".wav"
    fps = source.fps
    frames = list(source.iter_frames(candidate.start_frame, candidate.end_frame))
    height, width = frames[0].shape[:2]
    write_wav(wav, source.audio_slice(candidate.start_frame / fps,
                                      candidate.end_frame / fps))
    args = [
        "ffmpeg", "-v", "error", "-y",
        "-f", "rawvideo", "-pix_fmt", "rgb24", "-s", f"{width}x{height}",
        "-r", str(fps), "-i", "-",
        "-i", wav,
        "-pix_fmt", "yuv420p", "-shortest", out,
    ]
    try:
        proc = subprocess.Popen(args, stdin=subprocess.PIPE)
        for frame in frames:
            proc.stdin.write(np.ascontiguousarray(frame).tobytes())
        proc.stdin.close()
        proc.wait(timeout=60)
        return proc.returncode == 0
    except (OSError, subprocess.TimeoutExpired):
        return False
    finally:
        if os.path.exists(wav):
            os.unlink(wav)
