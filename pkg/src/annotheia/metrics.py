"""Evaluation metrics for ASD scorers and the context-window ablation harness."""

from __future__ import annotations

import math

import numpy as np

from annotheia.backends.payloads import write_gray_crops, write_mfcc
from annotheia.dataset import SPLITS

DEFAULT_WINDOWS = (5, 9, 13, 17, 21, 25, 35, 43, 51)


class MetricsError(ValueError):
    pass


def accuracy(predictions, labels):
    """(accuracy, binomial standard error)."""
    predictions = np.asarray(predictions, dtype=bool)
    labels = np.asarray(labels, dtype=bool)
    if predictions.shape != labels.shape or predictions.ndim != 1:
        raise MetricsError("predictions and labels must be equal-length 1-D sequences")
    n = predictions.size
    if n == 0:
        raise MetricsError("empty input")
    acc = float(np.count_nonzero(predictions == labels)) / n
    stderr = math.sqrt(acc * (1.0 - acc) / n)
    return acc, stderr


def average_precision(scores, labels):
    """AP over descending scores, ties broken by original index.

    AP = (1/P) * sum over positives at rank k of (positives within top k)/k.
    """
    scores = np.asarray(scores, dtype=np.float64)
    labels = np.asarray(labels, dtype=bool)
    if scores.shape != labels.shape or scores.ndim != 1:
        raise MetricsError("scores and labels must be equal-length 1-D sequences")
    n_pos = int(labels.sum())
    if n_pos == 0:
        raise MetricsError("average precision needs at least one positive label")
    order = np.argsort(-scores, kind="stable")
    hits = labels[order]
    ranks = np.arange(1, scores.size + 1)
    cum_pos = np.cumsum(hits)
    return float(np.sum(cum_pos[hits] / ranks[hits]) / n_pos)


def _average_ranks(values):
    """Ascending 1-based ranks with ties given their average rank."""
    order = np.argsort(values, kind="stable")
    ranks = np.empty(values.size, dtype=np.float64)
    sorted_values = values[order]
    i = 0
    while i < values.size:
        j = i
        while j + 1 < values.size and sorted_values[j + 1] == sorted_values[i]:
            j += 1
        ranks[order[i:j + 1]] = (i + j) / 2.0 + 1.0
        i = j + 1
    return ranks


def roc_auc(scores, labels):
    """Rank-statistic AUC: (sum of positive ranks - P(P+1)/2) / (P * N)."""
    scores = np.asarray(scores, dtype=np.float64)
    labels = np.asarray(labels, dtype=bool)
    if scores.shape != labels.shape or scores.ndim != 1:
        raise MetricsError("scores and labels must be equal-length 1-D sequences")
    n_pos = int(labels.sum())
    n_neg = labels.size - n_pos
    if n_pos == 0 or n_neg == 0:
        raise MetricsError("AUC needs both classes present")
    ranks = _average_ranks(scores)
    return float((ranks[labels].sum() - n_pos * (n_pos + 1) / 2.0) / (n_pos * n_neg))


def score_manifest_items(items, backend, window_frames, resolver, scratch,
                         crop_size=112):
    """One score per item: the backend's mean frame score over the first
    window of the item's media."""
    scores = []
    for index, item in enumerate(items):
        crops, mfcc_rows = resolver(item, window_frames)
        crops_path = scratch.file(f"item{index}_w{window_frames}.gray")
        mfcc_path = scratch.file(f"item{index}_w{window_frames}.mfcc")
        write_gray_crops(crops_path, crops)
        write_mfcc(mfcc_path, mfcc_rows)
        result = backend.call("score_asd", {
            "crops_path": str(crops_path),
            "n_frames": int(crops.shape[0]),
            "crop_size": crop_size,
            "mfcc_path": str(mfcc_path),
            "n_mfcc_rows": int(mfcc_rows.shape[0]),
        })
        scores.append(float(np.mean(result["scores"])))
    return scores


def ablate_context_windows(manifest, backend, resolver, scratch, config,
                           windows=DEFAULT_WINDOWS, split="validation"):
    """Score the manifest at each context window size and tabulate metrics.

    Evaluates the given split (falling back to all items when that split is
    empty). Returns a list of row dicts; see format_ablation_table.
    """
    items = list(manifest.items.get(split, []))
    if not items:
        items = [i for s in SPLITS for i in manifest.items.get(s, [])]
    if not items:
        raise MetricsError("manifest contains no items")
    labels = [bool(i.label) for i in items]

    rows = []
    for window_frames in windows:
        scores = score_manifest_items(items, backend, window_frames, resolver, scratch)
        predictions = [s >= config.asd_threshold for s in scores]
        acc, stderr = accuracy(predictions, labels)
        rows.append({
            "frames": int(window_frames),
            "seconds": window_frames / config.fps_assumed,
            "accuracy": acc,
            "accuracy_stderr": stderr,
            "map": average_precision(scores, labels),
            "auc": roc_auc(scores, labels),
        })
    return rows


def format_ablation_table(rows):
    """Aligned text table: frames, seconds, accuracy +/- stderr, mAP%, AUC%."""
    header = ("frames", "seconds", "accuracy", "mAP (%)", "AUC (%)")
    body = []
    for r in rows:
        body.append((
            str(r["frames"]),
            f"{r['seconds']:.2f}",
            f"{100 * r['accuracy']:.1f}±{100 * r['accuracy_stderr']:.1f}",
            f"{100 * r['map']:.1f}",
            f"{100 * r['auc']:.1f}",
        ))
    widths = [max(len(row[c]) for row in [header] + body) for c in range(5)]
    lines = ["  ".join(cell.rjust(widths[c]) for c, cell in enumerate(row))
             for row in [header] + body]
    return "\n".join(lines)
