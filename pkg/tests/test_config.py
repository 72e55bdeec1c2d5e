import pytest

from annotheia.config import (ConfigError, PipelineConfig, config_hash,
                              parse_config, serialize_config)


def test_empty_file_gives_defaults():
    config = parse_config(b"")
    assert config.asd_window_frames == 51
    assert config.scene_threshold == 27.0
    assert config.min_scene_len_frames == 15
    assert config.smooth_window_frames == 11
    assert config.trim_margin_frames == 12
    assert config.language == "auto"
    assert config.fps_assumed == 25.0


def test_sectionless_and_sectioned_keys():
    assert parse_config(b"scene_threshold = 30.5\n").scene_threshold == 30.5
    assert parse_config(b"[pipeline]\nscene_threshold = 30.5\n").scene_threshold == 30.5


def test_even_smoothing_window_rejected():
    with pytest.raises(ConfigError, match="must be odd"):
        parse_config(b"smooth_window_frames = 4\n")


def test_unknown_key_rejected():
    with pytest.raises(ConfigError, match="scene_treshold"):
        parse_config(b"scene_treshold = 27.0\n")


def test_bad_int_rejected_with_key():
    with pytest.raises(ConfigError, match="max_track_gap"):
        parse_config(b"max_track_gap = 2.5\n")


def test_roundtrip_preserves_values():
    config = PipelineConfig(scene_threshold=27.0, asd_threshold=0.62,
                            language="es", max_match_dist=0.08)
    again = parse_config(serialize_config(config).encode())
    assert again == config


def test_config_hash_tracks_changes():
    a = PipelineConfig()
    b = PipelineConfig(asd_threshold=0.5)
    assert config_hash(a) != config_hash(b)
    assert config_hash(a) == config_hash(PipelineConfig())
