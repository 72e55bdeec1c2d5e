"""Shared fixtures: in-process fake backends and synthetic video builders."""

import numpy as np
import pytest

from annotheia.scratch import ScratchDir


class FakeBackend:
    """In-process stand-in for a spawned backend: records calls, answers
    through a handler(method, params) function."""

    def __init__(self, handler, capabilities=None):
        self.handler = handler
        self.capabilities = capabilities or {}
        self.calls = []

    def call(self, method, params=None, timeout=None):
        params = params or {}
        self.calls.append((method, params))
        return self.handler(method, params)


def face_backend_from_map(faces_by_frame, default=None):
    """Fake face detector keyed by the frame index in the image filename."""
    import re

    pattern = re.compile(r"f(\d+)\.png$")

    def handler(method, params):
        assert method == "detect_faces"
        m = pattern.search(params["image_path"])
        index = int(m.group(1))
        faces = faces_by_frame.get(index, default if default is not None else [])
        return {"faces": faces}

    return FakeBackend(handler)


def asd_backend_spans(spans_by_track, high=0.9, low=0.1):
    """Fake scorer: high inside track-relative spans, low elsewhere.

    Tracks windows per crops-path prefix exactly like the shipped mock.
    """
    seen = {}

    def handler(method, params):
        assert method == "score_asd"
        import re
        from pathlib import Path

        name = Path(params["crops_path"]).name
        track = int(re.search(r"t(\d+)_w(\d+)", name).group(1))
        key = name.rsplit("_w", 1)[0]
        offset = seen.get(key, 0)
        n = params["n_frames"]
        seen[key] = offset + n
        spans = spans_by_track.get(track, [])
        scores = [
            high if any(lo <= i < hi for lo, hi in spans) else low
            for i in range(offset, offset + n)
        ]
        return {"scores": scores}

    return FakeBackend(handler)


def asr_backend_canned(text="hola mundo", language="es", words=None):
    if words is None:
        words = [{"w": "hola", "t0": 0.10, "t1": 0.48},
                 {"w": "mundo", "t0": 0.55, "t1": 1.02}]

    def handler(method, params):
        assert method == "transcribe"
        return {"text": text, "language": language, "words": words}

    return FakeBackend(handler)


def make_color_video(segments, size=(48, 64), fps=25.0, audio_rate=16000):
    """Frames of solid colors: segments = [(n_frames, (r, g, b)), ...].

    Returns (frames, audio) with silent audio covering the video span.
    """
    h, w = size
    chunks = [np.full((n, h, w, 3), color, dtype=np.uint8) for n, color in segments]
    frames = np.concatenate(chunks)
    n_samples = int(round(frames.shape[0] / fps * audio_rate))
    audio = np.zeros(n_samples, dtype=np.int16)
    return frames, audio


@pytest.fixture
def scratch(tmp_path):
    s = ScratchDir(root=tmp_path / "scratch")
    yield s
    s.cleanup()
