"""Deterministic scripted mock backends for tests and end-to-end demos.

Run as:  python -m annotheia.backends.mocks <kind> [--fixture file.json] [...]

Each kind answers the corresponding pipeline method with replies driven by
an optional JSON fixture, so runs are byte-identical. Misbehavior flags
(--protocol, --garbage, --sleep, --hang-shutdown) exist to exercise the
client's error paths.

Fixture shapes:
    face:      {"default": [{"bbox": [x1,y1,x2,y2], "confidence": 0.97}],
                "frames": {"30": [...]}}            frame index parsed from
                                                    the image filename
    landmarks: {"fail_frames": [5], "short_frames": [7]}
    asd:       {"mode": "constant", "value": 1.0}
               {"mode": "parity"}
               {"mode": "spans", "spans": {"0": [[10, 41]], "*": []},
                "high": 0.9, "low": 0.1}            track-relative frames;
                                                    track/window parsed from
                                                    the crops filename
               {"mode": "windowcurve", "base_rate": 0.45}
                                                    label read from crop
                                                    brightness; error rate
                                                    shrinks with n_frames
    asr:       {"text": "...", "language": "es",
                "words": [{"w": "...", "t0": 0.1, "t1": 0.4}]}
"""

from __future__ import annotations

import argparse
import json
import re
import sys
import time
from pathlib import Path

PROTOCOL_VERSION = 1

_FRAME_RE = re.compile(r"f(\d+)\.png$")
_CROPS_RE = re.compile(r"t(\d+)_w(\d+)\.gray$")
_ITEM_RE = re.compile(r"item(\d+)_")


def _reply(obj):
    sys.stdout.write(json.dumps(obj) + "\n")
    sys.stdout.flush()


def _frame_index(image_path):
    m = _FRAME_RE.search(Path(image_path).name)
    return int(m.group(1)) if m else None


class FaceMock:
    capabilities = {"max_batch": 1}

    def __init__(self, fixture):
        self.default = fixture.get("default", [])
        self.frames = {int(k): v for k, v in fixture.get("frames", {}).items()}

    def handle(self, method, params):
        if method != "detect_faces":
            raise KeyError(method)
        index = _frame_index(params["image_path"])
        faces = self.frames.get(index, self.default) if index is not None else self.default
        return {"faces": faces}


class LandmarksMock:
    capabilities = {}

    def __init__(self, fixture):
        self.fail_frames = set(fixture.get("fail_frames", []))
        self.short_frames = set(fixture.get("short_frames", []))

    def handle(self, method, params):
        if method != "align_face":
            raise KeyError(method)
        index = _frame_index(params["image_path"])
        if index in self.fail_frames:
            return {"__error__": (500, f"alignment failed on frame {index}")}
        x1, y1, x2, y2 = params["bbox"]
        count = 67 if index in self.short_frames else 68
        points = []
        for k in range(count):
            fx = (k % 10) / 9.0
            fy = (k // 10) / 7.0
            points.append([x1 + fx * (x2 - x1), y1 + fy * (y2 - y1)])
        return {"landmarks": points}


class AsdMock:
    capabilities = {"crop_size": 112}

    def __init__(self, fixture):
        self.mode = fixture.get("mode", "constant")
        self.value = fixture.get("value", 1.0)
        self.high = fixture.get("high", 0.9)
        self.low = fixture.get("low", 0.1)
        self.base_rate = fixture.get("base_rate", 0.45)
        self.spans = {k: [tuple(s) for s in v]
                      for k, v in fixture.get("spans", {}).items()}
        self._seen_frames = {}  # track id -> frames already scored
        self.short_reply = fixture.get("short_reply", False)

    def _span_scores(self, track_id, offset, n_frames):
        spans = self.spans.get(str(track_id), self.spans.get("*", []))
        scores = []
        for i in range(offset, offset + n_frames):
            active = any(lo <= i < hi for lo, hi in spans)
            scores.append(self.high if active else self.low)
        return scores

    def _track_offset(self, params, n_frames):
        """Track-relative frame offset, counted per track across its windows."""
        name = Path(params["crops_path"]).name
        m = _CROPS_RE.search(name)
        track = int(m.group(1)) if m else 0
        key = str(Path(params["crops_path"]).parent / name.rsplit("_w", 1)[0])
        offset = self._seen_frames.get(key, 0)
        self._seen_frames[key] = offset + n_frames
        return track, offset

    def _windowcurve_scores(self, params, n_frames):
        item_match = _ITEM_RE.search(Path(params["crops_path"]).name)
        item = int(item_match.group(1)) if item_match else 0
        data = Path(params["crops_path"]).read_bytes()
        label = (sum(data) / len(data)) > 127 if data else False
        # Deterministic flips that shrink as the window grows: the wrongly
        # scored item set at a larger window nests inside the smaller one.
        rate = self.base_rate * 5.0 / max(n_frames, 1)
        h = ((item + 1) * 2654435761 % (2 ** 32)) / 2 ** 32
        wrong = h < rate
        side = label != wrong
        return [self.high if side else self.low] * n_frames

    def handle(self, method, params):
        if method != "score_asd":
            raise KeyError(method)
        n_frames = params["n_frames"]
        if self.mode == "constant":
            scores = [self.value] * n_frames
        elif self.mode == "parity":
            _, offset = self._track_offset(params, n_frames)
            scores = [float((offset + i) % 2 == 0) for i in range(n_frames)]
        elif self.mode == "spans":
            track, offset = self._track_offset(params, n_frames)
            scores = self._span_scores(track, offset, n_frames)
        elif self.mode == "windowcurve":
            scores = self._windowcurve_scores(params, n_frames)
        else:
            return {"__error__": (400, f"unknown mock mode {self.mode!r}")}
        if self.short_reply:
            scores = scores[:-1]
        return {"scores": scores}


class AsrMock:
    capabilities = {"languages": ["es", "en"]}

    def __init__(self, fixture):
        self.text = fixture.get("text", "hola mundo")
        self.language = fixture.get("language", "es")
        self.words = fixture.get(
            "words",
            [{"w": "hola", "t0": 0.10, "t1": 0.48},
             {"w": "mundo", "t0": 0.55, "t1": 1.02}],
        )

    def handle(self, method, params):
        if method != "transcribe":
            raise KeyError(method)
        return {"text": self.text, "language": self.language, "words": self.words}


MOCKS = {"face": FaceMock, "landmarks": LandmarksMock, "asd": AsdMock, "asr": AsrMock}


def main(argv=None):
    parser = argparse.ArgumentParser(prog="annotheia-mock-backend")
    parser.add_argument("kind", choices=sorted(MOCKS))
    parser.add_argument("--fixture", help="JSON fixture file")
    parser.add_argument("--protocol", type=int, default=PROTOCOL_VERSION,
                        help="protocol version to claim in the handshake")
    parser.add_argument("--garbage", action="store_true",
                        help="emit a non-JSON line instead of the first reply")
    parser.add_argument("--sleep", type=float, default=0.0,
                        help="seconds to sleep before every reply")
    parser.add_argument("--hang-shutdown", action="store_true",
                        help="ignore shutdown requests")
    args = parser.parse_args(argv)

    fixture = {}
    if args.fixture:
        fixture = json.loads(Path(args.fixture).read_text(encoding="utf-8"))
    mock = MOCKS[args.kind](fixture)

    first = True
    for line in sys.stdin:
        line = line.strip()
        if not line:
            continue
        request = json.loads(line)
        method = request.get("method")
        if method == "shutdown":
            if args.hang_shutdown:
                continue
            return 0
        if args.sleep:
            time.sleep(args.sleep)
        request_id = request.get("id")
        if method == "hello":
            _reply({"id": request_id,
                    "result": {"protocol": args.protocol,
                               "capabilities": mock.capabilities}})
            continue
        if args.garbage and first:
            first = False
            sys.stdout.write("this is not json\n")
            sys.stdout.flush()
            continue
        first = False
        try:
            result = mock.handle(method, request.get("params", {}))
        except KeyError:
            _reply({"id": request_id,
                    "error": {"code": 404, "message": f"unknown method {method!r}"}})
            continue
        if isinstance(result, dict) and "__error__" in result:
            code, message = result["__error__"]
            _reply({"id": request_id, "error": {"code": code, "message": message}})
        else:
            _reply({"id": request_id, "result": result})
    if args.hang_shutdown:
        time.sleep(3600)  # simulate a backend that must be killed
    return 0


if __name__ == "__main__":
    sys.exit(main())
