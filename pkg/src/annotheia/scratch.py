"""Per-run scratch directory for backend payload files."""

from __future__ import annotations

import os
import shutil
import tempfile
import uuid
from pathlib import Path


class ScratchDir:
    """Holds the large binary payloads exchanged with backends.

    The root comes from ANNOTHEIA_SCRATCH when set, otherwise a fresh temp
    directory. Each instance owns a unique run subdirectory, removed by
    cleanup() unless keep=True.
    """

    def __init__(self, root=None, keep=False):
        base = root or os.environ.get("ANNOTHEIA_SCRATCH")
        if base:
            Path(base).mkdir(parents=True, exist_ok=True)
            self.path = Path(tempfile.mkdtemp(prefix="run-", dir=base))
        else:
            self.path = Path(tempfile.mkdtemp(prefix="annotheia-"))
        self.keep = keep

    def file(self, name) -> Path:
        return self.path / name

    def frame_png(self, frame_index) -> Path:
        return self.path / f"f{frame_index:06d}.png"

    def unique(self, suffix) -> Path:
        return self.path / f"{uuid.uuid4().hex[:12]}{suffix}"

    def cleanup(self):
        if not self.keep:
            shutil.rmtree(self.path, ignore_errors=True)

    def __enter__(self):
        return self

    def __exit__(self, *exc):
        self.cleanup()
