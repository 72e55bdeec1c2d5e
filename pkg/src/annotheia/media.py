"""Video/audio sources and the media resolvers used by the eval harness.

Two frame sources are supported: a self-contained .npz fixture format
(frames + PCM audio in one file, used by tests and demos) and an ffmpeg
subprocess decoder for real containers when ffmpeg is installed. The
pipeline core only sees the common surface: asset metadata, ranged frame
iteration, and 16 kHz audio slices.
"""

from __future__ import annotations

import hashlib
import json
import math
import shutil
import subprocess
import zipfile
from pathlib import Path

import numpy as np
from scipy.signal import resample_poly

from annotheia import mfcc as mfcc_mod
from annotheia.tracking import CROP_SIZE
from annotheia.types import VALID_SAMPLE_RATES, VideoAsset

TARGET_RATE = 16000


class MediaError(Exception):
    pass


def file_video_id(path) -> str:
    """Stable id from the absolute path and file size."""
    p = Path(path)
    digest = hashlib.sha1(f"{p.resolve()}:{p.stat().st_size}".encode()).hexdigest()
    return digest[:16]


def resample_to_16k(samples, rate):
    samples = np.asarray(samples)
    if rate == TARGET_RATE:
        return samples.astype(np.int16)
    if rate not in VALID_SAMPLE_RATES:
        raise MediaError(f"unsupported sample rate {rate}")
    g = math.gcd(rate, TARGET_RATE)
    out = resample_poly(samples.astype(np.float64), TARGET_RATE // g, rate // g)
    return np.clip(np.round(out), -32768, 32767).astype(np.int16)


def write_npz_video(path, frames, fps, audio, audio_sample_rate):
    """Write the self-contained fixture format used for tests and demos."""
    frames = np.asarray(frames, dtype=np.uint8)
    if frames.ndim != 4 or frames.shape[3] != 3:
        raise MediaError(f"frames must be (N, H, W, 3), got {frames.shape}")
    np.savez_compressed(
        path,
        frames=frames,
        fps=np.float64(fps),
        audio=np.asarray(audio, dtype=np.int16),
        audio_sample_rate=np.int64(audio_sample_rate),
    )


class NpzVideoSource:
    """Frame/audio source over the .npz fixture format."""

    def __init__(self, path):
        self.path = Path(path)
        try:
            data = np.load(self.path)
            self.frames = data["frames"]
            fps = float(data["fps"])
            audio = data["audio"]
            rate = int(data["audio_sample_rate"])
        except (OSError, KeyError, ValueError, zipfile.BadZipFile) as exc:
            raise MediaError(f"{path}: not a readable video fixture: {exc}") from None
        self.asset = VideoAsset(
            id=file_video_id(self.path),
            path=str(self.path),
            fps=fps,
            frame_count=int(self.frames.shape[0]),
            width=int(self.frames.shape[2]),
            height=int(self.frames.shape[1]),
            audio_sample_rate=rate,
        )
        self.asset.validate()
        self._audio16k = resample_to_16k(audio, rate)

    @property
    def fps(self):
        return self.asset.fps

    def iter_frames(self, start=0, end=None):
        end = self.asset.frame_count if end is None else end
        for i in range(start, end):
            yield self.frames[i]

    def read_frame(self, index):
        return self.frames[index]

    def audio_slice(self, t0, t1):
        """16 kHz mono PCM for [t0, t1) seconds, zero-padded outside."""
        n0 = int(round(t0 * TARGET_RATE))
        n1 = int(round(t1 * TARGET_RATE))
        out = np.zeros(max(n1 - n0, 0), dtype=np.int16)
        lo = max(n0, 0)
        hi = min(n1, self._audio16k.size)
        if hi > lo:
            out[lo - n0:hi - n0] = self._audio16k[lo:hi]
        return out


class FfmpegVideoSource:
    """Decode real containers through ffmpeg/ffprobe subprocesses.

    Ranged reads decode from the start and skip, which is frame-accurate if
    not fast. Requires ffmpeg and ffprobe on PATH.
    """

    def __init__(self, path):
        if not (shutil.which("ffmpeg") and shutil.which("ffprobe")):
            raise MediaError("ffmpeg/ffprobe not found on PATH")
        self.path = Path(path)
        probe = subprocess.run(
            ["ffprobe", "-v", "error", "-select_streams", "v:0",
             "-count_frames", "-show_entries",
             "stream=width,height,r_frame_rate,nb_read_frames",
             "-of", "json", str(path)],
            capture_output=True, text=True, check=True,
        )
        stream = json.loads(probe.stdout)["streams"][0]
        num, den = stream["r_frame_rate"].split("/")
        fps = float(num) / float(den)
        self.asset = VideoAsset(
            id=file_video_id(path),
            path=str(path),
            fps=fps,
            frame_count=int(stream["nb_read_frames"]),
            width=int(stream["width"]),
            height=int(stream["height"]),
            audio_sample_rate=TARGET_RATE,
        )
        self.asset.validate()
        raw = subprocess.run(
            ["ffmpeg", "-v", "error", "-i", str(path), "-f", "s16le",
             "-acodec", "pcm_s16le", "-ar", str(TARGET_RATE), "-ac", "1", "-"],
            capture_output=True, check=True,
        )
        self._audio16k = np.frombuffer(raw.stdout, dtype=np.int16)

    @property
    def fps(self):
        return self.asset.fps

    def iter_frames(self, start=0, end=None):
        end = self.asset.frame_count if end is None else end
        frame_bytes = self.asset.width * self.asset.height * 3
        proc = subprocess.Popen(
            ["ffmpeg", "-v", "error", "-i", str(self.path), "-f", "rawvideo",
             "-pix_fmt", "rgb24", "-"],
            stdout=subprocess.PIPE,
        )
        try:
            for i in range(end):
                chunk = proc.stdout.read(frame_bytes)
                if len(chunk) < frame_bytes:
                    break
                if i >= start:
                    frame = np.frombuffer(chunk, dtype=np.uint8)
                    yield frame.reshape(self.asset.height, self.asset.width, 3)
        finally:
            proc.stdout.close()
            proc.terminate()
            proc.wait()

    def read_frame(self, index):
        for frame in self.iter_frames(index, index + 1):
            return frame
        raise MediaError(f"frame {index} past end of {self.path}")

    def audio_slice(self, t0, t1):
        n0 = int(round(t0 * TARGET_RATE))
        n1 = int(round(t1 * TARGET_RATE))
        out = np.zeros(max(n1 - n0, 0), dtype=np.int16)
        lo = max(n0, 0)
        hi = min(n1, self._audio16k.size)
        if hi > lo:
            out[lo - n0:hi - n0] = self._audio16k[lo:hi]
        return out


def open_video(path):
    path = Path(path)
    if not path.exists():
        raise MediaError(f"no such video: {path}")
    if path.suffix == ".npz":
        return NpzVideoSource(path)
    return FfmpegVideoSource(path)


# -- item resolvers for the eval harness --------------------------------------

def _gray_resize(frame, out_size=CROP_SIZE):
    from annotheia import kernels

    gray = np.asarray(kernels.rgb_to_gray(np.ascontiguousarray(frame)))
    h, w = gray.shape
    ys = np.minimum((np.arange(out_size) * h) // out_size, h - 1)
    xs = np.minimum((np.arange(out_size) * w) // out_size, w - 1)
    return gray[ys[:, None], xs[None, :]]


class NpzItemResolver:
    """Resolve dataset items against .npz media under a root directory.

    Utterance video segments are face-region clips, so whole frames act as
    the crops. Media files are looked up as <root>/<video_id>.npz.
    """

    def __init__(self, media_root, fps=25.0):
        self.media_root = Path(media_root)
        self.fps = fps
        self._cache = {}

    def _source(self, video_id):
        if video_id not in self._cache:
            path = self.media_root / f"{video_id}.npz"
            if not path.exists():
                raise MediaError(f"no media for video id {video_id} under {self.media_root}")
            self._cache[video_id] = NpzVideoSource(path)
        return self._cache[video_id]

    def __call__(self, item, n_frames):
        video = self._source(item.video_ref["video_id"])
        start = item.video_ref["start_frame"]
        stop = min(start + n_frames, item.video_ref["end_frame"])
        frames = [video.read_frame(i) for i in range(start, stop)]
        while len(frames) < n_frames:
            frames.append(frames[-1])
        crops = np.stack([_gray_resize(f) for f in frames])

        audio_src = self._source(item.audio_ref["video_id"])
        shift = item.audio_ref.get("shift", 0.0)
        t0 = item.audio_ref["t0"] + shift
        audio = audio_src.audio_slice(t0, t0 + n_frames / self.fps)
        rpf = mfcc_mod.rows_per_frame(self.fps)
        if audio.size < mfcc_mod.WIN_SAMPLES:
            audio = np.pad(audio, (0, mfcc_mod.WIN_SAMPLES - audio.size))
        rows = mfcc_mod.fit_rows(mfcc_mod.extract_mfcc(audio), n_frames * rpf)
        return crops, rows


class SyntheticItemResolver:
    """Label-encoded synthetic media for exercising scripted scorers.

    Positive items render bright crops, negatives dark ones, so a mock
    backend can recover the label from pixel content alone. Useful for
    demos and harness tests; never a substitute for real media.
    """

    def __init__(self, fps=25.0, crop_size=CROP_SIZE):
        self.fps = fps
        self.crop_size = crop_size

    def __call__(self, item, n_frames):
        value = 200 if item.label == 1 else 60
        crops = np.full((n_frames, self.crop_size, self.crop_size), value, np.uint8)
        rows = np.zeros((n_frames * mfcc_mod.rows_per_frame(self.fps),
                         mfcc_mod.N_COEFFS))
        return crops, rows
