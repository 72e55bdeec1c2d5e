"""Pipeline configuration: parsing, validation, serialization, hashing."""

from __future__ import annotations

import configparser
import hashlib
import math
from dataclasses import dataclass, fields


class ConfigError(ValueError):
    """Raised for unknown keys or invariant violations, naming the key."""


@dataclass
class PipelineConfig:
    scene_threshold: float = 27.0
    min_scene_len_frames: int = 15
    downscale_factor: int = 4
    face_confidence_min: float = 0.5
    max_match_dist: float = 0.10
    max_track_gap: int = 5
    asd_window_frames: int = 51
    smooth_window_frames: int = 11
    asd_threshold: float = 0.0
    trim_margin_frames: int = 12
    language: str = "auto"
    fps_assumed: float = 25.0
    workers: int = 0  # 0 = one per processor

    def validate(self):
        def require(cond, key, why):
            if not cond:
                raise ConfigError(f"{key}: {why}")

        require(math.isfinite(self.scene_threshold) and self.scene_threshold >= 0,
                "scene_threshold", "must be a finite value >= 0")
        require(self.min_scene_len_frames >= 1, "min_scene_len_frames", "must be >= 1")
        require(self.downscale_factor >= 1, "downscale_factor", "must be >= 1")
        require(0.0 <= self.face_confidence_min <= 1.0,
                "face_confidence_min", "must be in [0, 1]")
        require(self.max_match_dist > 0, "max_match_dist", "must be > 0")
        require(self.max_track_gap >= 0, "max_track_gap", "must be >= 0")
        require(self.asd_window_frames >= 1, "asd_window_frames", "must be >= 1")
        require(self.smooth_window_frames >= 1, "smooth_window_frames", "must be >= 1")
        require(self.smooth_window_frames % 2 == 1, "smooth_window_frames", "must be odd")
        require(self.trim_margin_frames >= 0, "trim_margin_frames", "must be >= 0")
        require(bool(self.language), "language", "must be non-empty")
        require(self.fps_assumed > 0, "fps_assumed", "must be > 0")
        require(self.workers >= 0, "workers", "must be >= 0")
        return self


_FIELD_TYPES = {f.name: f.type for f in fields(PipelineConfig)}


def _coerce(key, raw):
    kind = _FIELD_TYPES[key]
    try:
        if kind in ("int", int):
            return int(raw)
        if kind in ("float", float):
            return float(raw)
    except ValueError as exc:
        raise ConfigError(f"{key}: {exc}") from None
    return raw


def parse_config(data: bytes | str) -> PipelineConfig:
    """Parse `key = value` config text (a [section] header is optional)."""
    text = data.decode("utf-8") if isinstance(data, bytes) else data
    parser = configparser.ConfigParser()
    try:
        parser.read_string(text)
    except configparser.MissingSectionHeaderError:
        parser.read_string("[pipeline]\n" + text)
    except configparser.Error as exc:
        raise ConfigError(str(exc)) from None

    values = {}
    for section in parser.sections():
        for key, raw in parser.items(section):
            if key not in _FIELD_TYPES:
                raise ConfigError(f"unknown key {key!r}")
            values[key] = _coerce(key, raw)
    return PipelineConfig(**values).validate()


def serialize_config(config: PipelineConfig) -> str:
    lines = ["[pipeline]"]
    for f in fields(PipelineConfig):
        lines.append(f"{f.name} = {getattr(config, f.name)}")
    return "\n".join(lines) + "\n"


def config_hash(config: PipelineConfig) -> str:
    return hashlib.sha256(serialize_config(config).encode("utf-8")).hexdigest()[:16]
