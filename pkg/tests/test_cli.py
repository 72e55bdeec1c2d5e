"""Every subcommand runs end-to-end with the shipped mock backends."""

import json
import sys

import numpy as np
import pytest

from annotheia.cli import main
from annotheia.media import file_video_id, write_npz_video
from conftest import make_color_video

MOCK = f"{sys.executable} -m annotheia.backends.mocks"


def write_process_fixture(tmp_path):
    """400-frame video: scene [0,100) has no face, scene [100,400) has one
    face speaking on global frames [150,200)."""
    frames, audio = make_color_video(
        [(100, (200, 40, 40)), (300, (40, 200, 40))], size=(48, 64))
    video = tmp_path / "episode.npz"
    write_npz_video(video, frames, 25.0, audio, 16000)

    face_fixture = tmp_path / "face.json"
    face_fixture.write_text(json.dumps({
        "default": [{"bbox": [20.0, 10.0, 44.0, 38.0], "confidence": 0.95}],
        "frames": {"0": []},
    }))
    asd_fixture = tmp_path / "asd.json"
    asd_fixture.write_text(json.dumps({
        "mode": "spans", "spans": {"0": [[50, 100]]}, "high": 0.9, "low": 0.1,
    }))
    config = tmp_path / "pipeline.conf"
    config.write_text("asd_threshold = 0.5\n")
    return video, face_fixture, asd_fixture, config


def process_argv(tmp_path, video, face_fixture, asd_fixture, config):
    return [
        "process", str(video),
        "--config", str(config),
        "--store", str(tmp_path / "store"),
        "--face-backend", f"{MOCK} face --fixture {face_fixture}",
        "--asd-backend", f"{MOCK} asd --fixture {asd_fixture}",
        "--asr-backend", f"{MOCK} asr",
    ]


class TestProcess:
    def test_end_to_end_and_resume(self, tmp_path, capsys):
        video, face_fixture, asd_fixture, config = write_process_fixture(tmp_path)
        argv = process_argv(tmp_path, video, face_fixture, asd_fixture, config)

        assert main(argv) == 0
        out = capsys.readouterr().out
        assert "1 videos processed" in out

        candidates_path = tmp_path / "store" / "candidates.jsonl"
        rows = [json.loads(l) for l in
                candidates_path.read_text().strip().splitlines()]
        assert len(rows) == 1
        row = rows[0]
        vid = file_video_id(video)
        # Active [150, 200) widened by the 12-frame margin inside [100, 400).
        assert row["candidate_id"] == f"{vid}:1:0:138"
        assert (row["start_frame"], row["end_frame"]) == (138, 212)
        assert len(row["per_frame_bboxes"]) == 74
        assert row["transcription"]["text"] == "hola mundo"
        assert row["transcription"]["language"] == "auto-detected:es"
        assert row["status"] == "pending"

        before = candidates_path.read_bytes()
        assert main(argv) == 0
        assert "0 videos processed (all complete)" in capsys.readouterr().out
        assert candidates_path.read_bytes() == before

    def test_declared_language_forced_through(self, tmp_path, capsys):
        video, face_fixture, asd_fixture, config = write_process_fixture(tmp_path)
        argv = process_argv(tmp_path, video, face_fixture, asd_fixture, config)
        argv += ["--language", "es"]
        assert main(argv) == 0
        rows = [json.loads(l) for l in
                (tmp_path / "store" / "candidates.jsonl").read_text().splitlines()]
        assert rows[0]["transcription"]["language"] == "es"

    def test_unknown_flag_exits_2(self, tmp_path, capsys):
        assert main(["process", "x.npz", "--nope"]) == 2

    def test_bad_config_exits_1(self, tmp_path, capsys):
        video, face_fixture, asd_fixture, _ = write_process_fixture(tmp_path)
        bad = tmp_path / "bad.conf"
        bad.write_text("smooth_window_frames = 4\n")
        argv = process_argv(tmp_path, video, face_fixture, asd_fixture, bad)
        assert main(argv) == 1
        assert "must be odd" in capsys.readouterr().err


class TestTuneThreshold:
    def test_worked_example(self, tmp_path, capsys):
        scores = tmp_path / "scores.txt"
        labels = tmp_path / "labels.txt"
        scores.write_text("0.1\n0.4\n0.35\n0.8\n")
        labels.write_text("0\n0\n1\n1\n")
        assert main(["tune-threshold", "--scores", str(scores),
                     "--labels", str(labels)]) == 0
        out = capsys.readouterr().out
        assert "threshold 0.35" in out
        assert "tpr 1" in out
        assert "fpr 0.5" in out


def write_dataset_inputs(tmp_path, n_speakers=6, utts_per_speaker=10):
    sources = tmp_path / "sources.jsonl"
    lines = []
    k = 0
    for s in range(n_speakers):
        for _ in range(utts_per_speaker):
            lines.append(json.dumps({
                "utterance_id": f"u{k}", "video_id": f"vid{k}",
                "start_frame": 0, "end_frame": 50,
                "t0": 10.0, "t1": 12.0, "speaker_id": f"spk{s}",
                "speaker_sex": "F" if s % 2 == 0 else "M",
                "recording_duration": 60.0,
            }))
            k += 1
    sources.write_text("\n".join(lines) + "\n")
    splits = tmp_path / "splits.json"
    splits.write_text(json.dumps({
        f"spk{s}": ("training", "validation", "test")[s % 3]
        for s in range(n_speakers)
    }))
    return sources, splits


class TestDatasetAndEval:
    def test_build_then_eval(self, tmp_path, capsys):
        sources, splits = write_dataset_inputs(tmp_path)
        manifest = tmp_path / "manifest.jsonl"
        assert main(["build-asd-dataset", "--sources", str(sources),
                     "--splits", str(splits), "--seed", "7",
                     "--out", str(manifest)]) == 0
        out = capsys.readouterr().out
        assert "Dataset" in out and "Total" in out
        assert manifest.exists()

        curve = tmp_path / "curve.json"
        curve.write_text(json.dumps({"mode": "windowcurve"}))
        report = tmp_path / "report.json"
        config = tmp_path / "eval.conf"
        config.write_text("asd_threshold = 0.5\n")
        assert main(["eval-asd", "--manifest", str(manifest),
                     "--asd-backend", f"{MOCK} asd --fixture {curve}",
                     "--windows", "5,25,51", "--synthetic-media",
                     "--config", str(config), "--out", str(report)]) == 0
        out = capsys.readouterr().out
        assert "frames" in out and "2.04" in out
        rows = json.loads(report.read_text())
        assert [r["frames"] for r in rows] == [5, 25, 51]
        accs = [r["accuracy"] for r in rows]
        assert accs == sorted(accs)

    def test_custom_mix(self, tmp_path, capsys):
        sources, splits = write_dataset_inputs(tmp_path)
        manifest = tmp_path / "manifest.jsonl"
        assert main(["build-asd-dataset", "--sources", str(sources),
                     "--splits", str(splits), "--mix", "1.0,0.0,0.0,0.0",
                     "--out", str(manifest)]) == 0
        rows = [json.loads(l) for l in
                manifest.read_text().splitlines()[1:] if l]
        assert all(r["sample_type"] == "positive" for r in rows)


class TestExportCli:
    def test_export_runs(self, tmp_path, capsys):
        video, face_fixture, asd_fixture, config = write_process_fixture(tmp_path)
        main(process_argv(tmp_path, video, face_fixture, asd_fixture, config))
        capsys.readouterr()
        out_file = tmp_path / "export.jsonl"
        assert main(["export", "--store", str(tmp_path / "store"),
                     "--out", str(out_file)]) == 0
        assert "exported 0 accepted" in capsys.readouterr().out
        assert out_file.read_text() == ""
