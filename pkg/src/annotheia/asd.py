"""Active-speaker scoring: windowing, backend calls, smoothing, decisions."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from annotheia import mfcc as mfcc_mod
from annotheia.backends.payloads import write_gray_crops, write_mfcc
from annotheia.backends.protocol import ProtocolError
from annotheia.tracking import CROP_SIZE, crop_face
from annotheia.types import ScoreSeries


class AsdError(Exception):
    pass


@dataclass
class WindowSlice:
    """One non-overlapping window of a track, dense over its frame span."""

    first_frame: int
    bboxes: list  # one BoundingBox per frame in the window

    @property
    def n_frames(self):
        return len(self.bboxes)


def dense_track_bboxes(track, start_frame, end_frame):
    """One bbox per frame of [start_frame, end_frame), holding the nearest
    observation at or before each frame (the first observation before it)."""
    result = []
    obs = track.observations
    j = 0
    for f in range(start_frame, end_frame):
        while j + 1 < len(obs) and obs[j + 1].frame_index <= f:
            j += 1
        result.append(obs[j].bbox)
    return result


def slice_windows(track, asd_window_frames):
    """Consecutive windows of exactly asd_window_frames frames; the final
    slice keeps the remainder and is scored as-is."""
    if not track.observations:
        raise AsdError("cannot slice an empty track")
    first, end = track.frame_span()
    bboxes = dense_track_bboxes(track, first, end)
    slices = []
    for offset in range(0, end - first, asd_window_frames):
        chunk = bboxes[offset:offset + asd_window_frames]
        slices.append(WindowSlice(first_frame=first + offset, bboxes=chunk))
    return slices


def score_track(track, frames, audio, backend, config, scratch, fps=None) -> ScoreSeries:
    """Send each window's crops + aligned MFCC rows to the backend and
    concatenate the per-frame scores.

    `frames` maps frame_index -> RGB frame (callable or mapping); `audio` is
    16 kHz mono PCM covering the track's span. fps defaults to the
    configured assumption when the source's true rate is unknown.
    """
    lookup = frames if callable(frames) else frames.__getitem__
    first, end = track.frame_span()
    span = end - first
    rpf = mfcc_mod.rows_per_frame(fps or config.fps_assumed)
    coeffs = mfcc_mod.fit_rows(mfcc_mod.extract_mfcc(audio), span * rpf)

    values = []
    for w, piece in enumerate(slice_windows(track, config.asd_window_frames)):
        crops = np.stack([
            crop_face(lookup(piece.first_frame + i), bbox, out_size=CROP_SIZE)
            for i, bbox in enumerate(piece.bboxes)
        ])
        offset = piece.first_frame - first
        rows = coeffs[offset * rpf:(offset + piece.n_frames) * rpf]

        # Scene-scoped names: track ids restart at 0 in every scene.
        stem = f"s{track.scene_index}_t{track.track_id}_w{w}"
        crops_path = scratch.file(f"{stem}.gray")
        mfcc_path = scratch.file(f"{stem}.mfcc")
        write_gray_crops(crops_path, crops)
        write_mfcc(mfcc_path, rows)
        result = backend.call("score_asd", {
            "crops_path": str(crops_path),
            "n_frames": piece.n_frames,
            "crop_size": CROP_SIZE,
            "mfcc_path": str(mfcc_path),
            "n_mfcc_rows": rows.shape[0],
        })
        scores = result.get("scores") if isinstance(result, dict) else None
        if not isinstance(scores, list) or len(scores) != piece.n_frames:
            got = len(scores) if isinstance(scores, list) else "no"
            raise ProtocolError(
                f"track {track.track_id} window {w}: expected "
                f"{piece.n_frames} scores, got {got}"
            )
        values.extend(float(s) for s in scores)

    series = ScoreSeries(track_id=track.track_id, first_frame=first, values=values)
    series.validate()
    return series


def smooth_scores(series: ScoreSeries, smooth_window_frames: int) -> ScoreSeries:
    """Sliding mean assigned to the central frame; the window truncates to
    valid indices at the edges."""
    k = smooth_window_frames
    if k < 1 or k % 2 == 0:
        raise AsdError(f"smoothing window must be odd and >= 1, got {k}")
    values = np.asarray(series.values, dtype=np.float64)
    n = values.size
    half = (k - 1) // 2
    out = []
    for i in range(n):
        lo = max(0, i - half)
        hi = min(n - 1, i + half)
        out.append(float(values[lo:hi + 1].sum() / (hi + 1 - lo)))
    return ScoreSeries(series.track_id, series.first_frame, out)


def decide_activity(series: ScoreSeries, asd_threshold: float):
    """Threshold the series; spans are maximal runs of active frames,
    as (start_frame, end_frame) in global frame numbers, end exclusive."""
    mask = [v >= asd_threshold for v in series.values]
    spans = []
    start = None
    for i, active in enumerate(mask):
        if active and start is None:
            start = i
        elif not active and start is not None:
            spans.append((series.first_frame + start, series.first_frame + i))
            start = None
    if start is not None:
        spans.append((series.first_frame + start, series.first_frame + len(mask)))
    return mask, spans


@dataclass
class ThresholdReport:
    threshold: float
    tpr: float
    fpr: float
    j_statistic: float


def optimal_threshold(scores, labels) -> ThresholdReport:
    """Pick the score threshold maximizing J = TPR - FPR.

    Every unique score value is a candidate (predict positive iff
    score >= t); ties on J go to the smallest threshold, which keeps the
    most candidates.
    """
    scores = np.asarray(scores, dtype=np.float64)
    labels = np.asarray(labels, dtype=bool)
    if scores.shape != labels.shape or scores.ndim != 1:
        raise AsdError("scores and labels must be equal-length 1-D sequences")
    n_pos = int(labels.sum())
    n_neg = labels.size - n_pos
    if n_pos == 0 or n_neg == 0:
        raise AsdError("both classes must be present to tune a threshold")

    order = np.argsort(-scores, kind="stable")
    sorted_scores = scores[order]
    sorted_labels = labels[order]
    tps = np.cumsum(sorted_labels)
    fps = np.cumsum(~sorted_labels)
    # Last index of each run of equal scores covers all ties at that value.
    last_of_run = np.nonzero(np.diff(sorted_scores, append=np.nan) != 0)[0]
    tpr = tps[last_of_run] / n_pos
    fpr = fps[last_of_run] / n_neg
    j = tpr - fpr
    # argmax on the reversed array -> last maximal run = smallest threshold.
    best = j.size - 1 - int(np.argmax(j[::-1]))
    return ThresholdReport(
        threshold=float(sorted_scores[last_of_run[best]]),
        tpr=float(tpr[best]),
        fpr=float(fpr[best]),
        j_statistic=float(j[best]),
    )


def trim_scene(scene, active_span, trim_margin_frames):
    """Widen an active span by the margin, clamped to the scene."""
    start, end = active_span
    return (
        max(scene.start_frame, start - trim_margin_frames),
        min(scene.end_frame, end + trim_margin_frames),
    )
