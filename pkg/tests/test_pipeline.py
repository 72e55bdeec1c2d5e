import numpy as np
import pytest

from annotheia.config import PipelineConfig, config_hash
from annotheia.media import NpzVideoSource, write_npz_video
from annotheia.pipeline import process_video, resume
from annotheia.store import CandidateStore
from conftest import (asd_backend_spans, asr_backend_canned,
                      face_backend_from_map, make_color_video)

FACE = {"bbox": [20.0, 10.0, 44.0, 38.0], "confidence": 0.95}


def fixture_source(tmp_path, n_frames=60, name="clip.npz"):
    frames, audio = make_color_video([(n_frames, (90, 120, 150))])
    path = tmp_path / name
    write_npz_video(path, frames, 25.0, audio, 16000)
    return path, NpzVideoSource(path)


def backends_for(spans, n_frames=60):
    return {
        "face": face_backend_from_map({}, default=[FACE]),
        "asd": asd_backend_spans(spans),
        "asr": asr_backend_canned(),
    }


class TestProcessVideo:
    def test_single_active_span_trimmed(self, tmp_path):
        _, source = fixture_source(tmp_path)
        config = PipelineConfig(asd_threshold=0.5, min_scene_len_frames=15)
        store = CandidateStore(tmp_path / "store", writable=True)
        # High scores on frames 10..40 of the 60-frame scene; margin 12
        # widens [10, 41) to [0, 53).
        report = process_video(source, config, backends_for({0: [(10, 41)]}), store)
        candidates = store.candidates()
        store.close()
        assert report.scenes_found == 1
        assert report.scenes_kept == 1
        assert report.tracks == 1
        assert report.candidates == 1
        c = candidates[0]
        assert (c.start_frame, c.end_frame) == (0, 53)
        assert len(c.per_frame_bboxes) == 53
        assert c.transcription.text == "hola mundo"
        assert c.transcription.language == "auto-detected:es"
        assert c.status == "pending"
        assert c.candidate_id == f"{source.asset.id}:0:0:0"

    def test_no_active_frames_no_candidates(self, tmp_path):
        _, source = fixture_source(tmp_path)
        config = PipelineConfig(asd_threshold=0.5)
        store = CandidateStore(tmp_path / "store", writable=True)
        report = process_video(source, config, backends_for({0: []}), store)
        assert report.candidates == 0
        assert store.candidates() == []
        store.close()

    def test_two_active_spans_two_candidates(self, tmp_path):
        _, source = fixture_source(tmp_path)
        # Margin 2 keeps the spans separated after trimming.
        config = PipelineConfig(asd_threshold=0.5, trim_margin_frames=2)
        store = CandidateStore(tmp_path / "store", writable=True)
        report = process_video(source, config,
                               backends_for({0: [(10, 21), (40, 51)]}), store)
        candidates = store.candidates()
        store.close()
        assert report.candidates == 2
        assert [(c.start_frame, c.end_frame) for c in candidates] == \
            [(8, 23), (38, 53)]

    def test_scene_without_face_filtered(self, tmp_path):
        _, source = fixture_source(tmp_path)
        config = PipelineConfig(asd_threshold=0.5)
        backends = backends_for({0: [(10, 41)]})
        backends["face"] = face_backend_from_map({})  # no faces anywhere
        store = CandidateStore(tmp_path / "store", writable=True)
        report = process_video(source, config, backends, store)
        store.close()
        assert report.scenes_kept == 0
        assert report.candidates == 0

    def test_transcription_failure_flags_candidate(self, tmp_path):
        from conftest import FakeBackend

        _, source = fixture_source(tmp_path)
        config = PipelineConfig(asd_threshold=0.5)
        backends = backends_for({0: [(10, 41)]})

        def broken(method, params):
            raise RuntimeError("asr exploded")

        from annotheia.backends.protocol import BackendCallError

        def failing(method, params):
            raise BackendCallError(500, "asr exploded")

        backends["asr"] = FakeBackend(failing)
        store = CandidateStore(tmp_path / "store", writable=True)
        report = process_video(source, config, backends, store)
        candidates = store.candidates()
        store.close()
        assert report.transcription_failures == 1
        assert report.candidates == 1  # still persisted
        assert candidates[0].transcription_failed
        assert candidates[0].transcription.text == ""

    def test_landmarks_attached_when_backend_given(self, tmp_path):
        from conftest import FakeBackend

        _, source = fixture_source(tmp_path)
        config = PipelineConfig(asd_threshold=0.5)
        backends = backends_for({0: [(10, 41)]})
        backends["landmarks"] = FakeBackend(
            lambda m, p: {"landmarks": [[1.0, 1.0]] * 68})
        store = CandidateStore(tmp_path / "store", writable=True)
        report = process_video(source, config, backends, store)
        store.close()
        assert report.landmark_failures == 0


class TestResume:
    def test_completed_video_skipped(self, tmp_path):
        path, source = fixture_source(tmp_path)
        config = PipelineConfig(asd_threshold=0.5)
        store = CandidateStore(tmp_path / "store", writable=True)
        process_video(source, config, backends_for({0: [(10, 41)]}), store)
        assert resume([path], store, config) == []
        store.close()

    def test_config_change_requeues(self, tmp_path):
        path, source = fixture_source(tmp_path)
        config = PipelineConfig(asd_threshold=0.5)
        store = CandidateStore(tmp_path / "store", writable=True)
        process_video(source, config, backends_for({0: [(10, 41)]}), store)
        changed = PipelineConfig(asd_threshold=0.7)
        assert config_hash(changed) != config_hash(config)
        assert resume([path], store, changed) == [path]
        store.close()

    def test_corrupt_marker_requeues(self, tmp_path):
        path, source = fixture_source(tmp_path)
        config = PipelineConfig(asd_threshold=0.5)
        store = CandidateStore(tmp_path / "store", writable=True)
        process_video(source, config, backends_for({0: [(10, 41)]}), store)
        marker = store.root / "state" / f"{source.asset.id}.json"
        marker.write_text("{corrupt")
        assert resume([path], store, config) == [path]
        store.close()

    def test_only_unfinished_video_queued(self, tmp_path):
        config = PipelineConfig(asd_threshold=0.5)
        paths = []
        store = CandidateStore(tmp_path / "store", writable=True)
        for i, frames in enumerate((40, 45, 50)):
            path, source = fixture_source(tmp_path, n_frames=frames,
                                          name=f"v{i}.npz")
            paths.append(path)
            if i != 1:
                process_video(source, config,
                              backends_for({0: [(10, 20)]}), store)
        assert resume(paths, store, config) == [paths[1]]
        store.close()

    def test_rerun_appends_nothing(self, tmp_path):
        path, source = fixture_source(tmp_path)
        config = PipelineConfig(asd_threshold=0.5)
        store = CandidateStore(tmp_path / "store", writable=True)
        process_video(source, config, backends_for({0: [(10, 41)]}), store)
        before = store.candidates_path.read_bytes()
        # Resume reports nothing to do; an honest second run is a no-op.
        assert resume([path], store, config) == []
        assert store.candidates_path.read_bytes() == before
        store.close()
