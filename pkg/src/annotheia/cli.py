"""Operator entry point: process, serve, build-asd-dataset, eval-asd,
tune-threshold, export."""

from __future__ import annotations

import argparse
import json
import logging
import sys
from pathlib import Path

from annotheia.asd import AsdError, optimal_threshold
from annotheia.backends import protocol
from annotheia.config import ConfigError, PipelineConfig, parse_config
from annotheia.dataset import (DatasetError, SourceUtterance, build_splits,
                               format_stats_table, read_manifest, write_manifest)
from annotheia.media import MediaError, NpzItemResolver, SyntheticItemResolver, open_video
from annotheia.metrics import (DEFAULT_WINDOWS, MetricsError,
                               ablate_context_windows, format_ablation_table)
from annotheia.pipeline import process_video, resume
from annotheia.scratch import ScratchDir
from annotheia.store import CandidateStore, StoreError, export_accepted
from annotheia.types import ValidationError

log = logging.getLogger("annotheia")

HARD_ERRORS = (ConfigError, StoreError, DatasetError, MetricsError, MediaError,
               AsdError, ValidationError, protocol.BackendError, OSError)


def build_parser():
    parser = argparse.ArgumentParser(
        prog="annotheia",
        description="Semi-automatic annotation pipeline for audio-visual speech corpora",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("process", help="run the full pipeline over videos")
    p.add_argument("videos", nargs="+", help="video files (.npz fixtures or media files)")
    p.add_argument("--config", required=True, help="pipeline config file")
    p.add_argument("--store", required=True, help="candidate store directory")
    p.add_argument("--face-backend", required=True, help="face detector command line")
    p.add_argument("--asd-backend", required=True, help="ASD scorer command line")
    p.add_argument("--asr-backend", required=True, help="speech recognizer command line")
    p.add_argument("--landmarks-backend", help="face alignment command line")
    p.add_argument("--language", help="ISO language code, or 'auto'")
    p.add_argument("--media", help="directory for trimmed review clips (needs ffmpeg)")

    p = sub.add_parser("serve", help="run the review service")
    p.add_argument("--store", required=True)
    p.add_argument("--port", type=int, required=True)
    p.add_argument("--media", required=True, help="directory holding trimmed clips")
    p.add_argument("--host", default="127.0.0.1")
    p.add_argument("--frontend", help="built annotation UI directory to serve at /app")

    p = sub.add_parser("build-asd-dataset", help="generate an ASD training manifest")
    p.add_argument("--sources", required=True, help="JSONL of source utterances")
    p.add_argument("--splits", required=True,
                   help="JSON file mapping speaker_id to training/validation/test")
    p.add_argument("--mix", default=None,
                   help="proportions positive,temporal,partial,complete (default 0.5,1/6,1/6,1/6)")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True, help="output manifest path")

    p = sub.add_parser("eval-asd", help="context-window ablation over a manifest")
    p.add_argument("--manifest", required=True)
    p.add_argument("--asd-backend", required=True)
    p.add_argument("--windows", default=",".join(str(w) for w in DEFAULT_WINDOWS))
    p.add_argument("--config", help="pipeline config file (threshold, fps)")
    p.add_argument("--split", default="validation")
    p.add_argument("--media-root", help="directory of .npz media, one per video id")
    p.add_argument("--synthetic-media", action="store_true",
                   help="render label-encoded synthetic media (mock backends only)")
    p.add_argument("--out", help="also write the report as JSON")

    p = sub.add_parser("tune-threshold", help="pick the TPR/FPR trade-off threshold")
    p.add_argument("--scores", required=True, help="file with one score per line")
    p.add_argument("--labels", required=True, help="file with one 0/1 label per line")

    p = sub.add_parser("export", help="export accepted candidates")
    p.add_argument("--store", required=True)
    p.add_argument("--out", required=True)

    return parser


def _load_config(path, language=None):
    config = parse_config(Path(path).read_bytes()) if path else PipelineConfig().validate()
    if language:
        config.language = language
        config.validate()
    return config


def _spawn_backends(args):
    backends = {}
    try:
        backends["face"] = protocol.spawn(args.face_backend, "face")
        backends["asd"] = protocol.spawn(args.asd_backend, "asd")
        backends["asr"] = protocol.spawn(args.asr_backend, "asr")
        if args.landmarks_backend:
            backends["landmarks"] = protocol.spawn(args.landmarks_backend, "landmarks")
    except protocol.BackendError:
        for handle in backends.values():
            handle.shutdown()
        raise
    return backends


def cmd_process(args):
    config = _load_config(args.config, args.language)
    with CandidateStore(args.store, writable=True) as store:
        pending = resume(args.videos, store, config)
        if not pending:
            print("0 videos processed (all complete)")
            return 0
        backends = _spawn_backends(args)
        try:
            with ScratchDir() as scratch:
                for path in pending:
                    source = open_video(path)
                    report = process_video(source, config, backends, store,
                                           scratch=scratch, media_dir=args.media)
                    print(report.summary())
                    for error in report.errors:
                        print(f"  error: {error}", file=sys.stderr)
        finally:
            for handle in backends.values():
                handle.shutdown()
        print(f"{len(pending)} videos processed")
    return 0


def cmd_serve(args):
    from annotheia.service import serve

    serve(args.store, media_root=args.media, port=args.port, host=args.host,
          frontend_dir=args.frontend)
    return 0


def _parse_mix(text):
    if text is None:
        return None
    parts = [float(x) for x in text.split(",")]
    if len(parts) != 4:
        raise DatasetError("--mix needs 4 comma-separated proportions")
    return {
        "positive": parts[0],
        "temporal_mismatch": parts[1],
        "partial_mismatch": parts[2],
        "complete_mismatch": parts[3],
    }


def cmd_build_dataset(args):
    utterances = []
    with open(args.sources, encoding="utf-8") as fh:
        for line in fh:
            line = line.strip()
            if line:
                utterances.append(SourceUtterance.from_dict(json.loads(line)))
    split_assignment = json.loads(Path(args.splits).read_text(encoding="utf-8"))
    manifest = build_splits(utterances, split_assignment,
                            mix=_parse_mix(args.mix), seed=args.seed)
    write_manifest(manifest, args.out)
    total = sum(len(v) for v in manifest.items.values())
    print(format_stats_table(manifest.stats))
    print(f"wrote {total} items to {args.out}")
    return 0


def cmd_eval(args):
    manifest = read_manifest(args.manifest)
    config = _load_config(args.config)
    windows = [int(w) for w in args.windows.split(",") if w]
    if args.synthetic_media:
        resolver = SyntheticItemResolver(fps=config.fps_assumed)
    elif args.media_root:
        resolver = NpzItemResolver(args.media_root, fps=config.fps_assumed)
    else:
        raise MediaError("eval-asd needs --media-root or --synthetic-media")
    backend = protocol.spawn(args.asd_backend, "asd")
    try:
        with ScratchDir() as scratch:
            rows = ablate_context_windows(manifest, backend, resolver, scratch,
                                          config, windows=windows, split=args.split)
    finally:
        backend.shutdown()
    print(format_ablation_table(rows))
    if args.out:
        Path(args.out).write_text(json.dumps(rows, indent=2), encoding="utf-8")
    return 0


def _read_column(path, cast):
    values = []
    for line in Path(path).read_text(encoding="utf-8").splitlines():
        line = line.strip()
        if line:
            values.append(cast(line))
    return values


def cmd_tune_threshold(args):
    scores = _read_column(args.scores, float)
    labels = [bool(int(x)) for x in _read_column(args.labels, str)]
    report = optimal_threshold(scores, labels)
    print(f"threshold {report.threshold:g}  tpr {report.tpr:g}  "
          f"fpr {report.fpr:g}  j {report.j_statistic:g}")
    return 0


def cmd_export(args):
    with CandidateStore(args.store) as store:
        count = export_accepted(store, args.out)
    print(f"exported {count} accepted candidates to {args.out}")
    return 0


COMMANDS = {
    "process": cmd_process,
    "serve": cmd_serve,
    "build-asd-dataset": cmd_build_dataset,
    "eval-asd": cmd_eval,
    "tune-threshold": cmd_tune_threshold,
    "export": cmd_export,
}


def main(argv=None) -> int:
    logging.basicConfig(level=logging.WARNING,
                        format="%(name)s %(levelname)s %(message)s")
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return exc.code if isinstance(exc.code, int) else 2
    try:
        return COMMANDS[args.command](args)
    except HARD_ERRORS as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
