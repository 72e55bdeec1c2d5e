"""ASD corpus construction from single-speaker utterance clips.

Every source clip shows its speaker talking for the whole clip, so positives
are free; negatives come in three flavors: temporally shifted audio (overlap
capped at 50%), same-speaker/different-utterance audio, and
different-speaker audio.
"""

from __future__ import annotations

import json
from collections import Counter
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

SAMPLE_TYPES = ("positive", "temporal_mismatch", "partial_mismatch", "complete_mismatch")
SPLITS = ("training", "validation", "test")

DEFAULT_MIX = {
    "positive": 0.5,
    "temporal_mismatch": 1.0 / 6.0,
    "partial_mismatch": 1.0 / 6.0,
    "complete_mismatch": 1.0 / 6.0,
}


class DatasetError(Exception):
    pass


class UnsatisfiableSample(DatasetError):
    """This utterance cannot yield the requested sample type; skip it."""


@dataclass
class SourceUtterance:
    utterance_id: str
    video_id: str
    start_frame: int
    end_frame: int
    t0: float
    t1: float
    speaker_id: str
    speaker_sex: str | None = None  # "F" or "M" when known
    recording_duration: float | None = None  # parent recording length, seconds

    @property
    def duration(self):
        return self.t1 - self.t0

    def validate(self):
        if self.duration <= 0:
            raise DatasetError(f"{self.utterance_id}: duration must be > 0")
        if self.speaker_sex not in (None, "F", "M"):
            raise DatasetError(f"{self.utterance_id}: speaker_sex must be F or M")

    def to_dict(self):
        return {
            "utterance_id": self.utterance_id,
            "video_id": self.video_id,
            "start_frame": self.start_frame,
            "end_frame": self.end_frame,
            "t0": self.t0,
            "t1": self.t1,
            "speaker_id": self.speaker_id,
            "speaker_sex": self.speaker_sex,
            "recording_duration": self.recording_duration,
        }

    @classmethod
    def from_dict(cls, d):
        return cls(
            utterance_id=d["utterance_id"],
            video_id=d["video_id"],
            start_frame=d["start_frame"],
            end_frame=d["end_frame"],
            t0=d["t0"],
            t1=d["t1"],
            speaker_id=d["speaker_id"],
            speaker_sex=d.get("speaker_sex"),
            recording_duration=d.get("recording_duration"),
        )


@dataclass
class DatasetItem:
    item_id: str
    sample_type: str
    label: int
    video_ref: dict  # {"video_id", "start_frame", "end_frame"}
    audio_ref: dict  # {"video_id", "t0", "t1", "shift"}
    speaker_video: str
    speaker_audio: str

    def to_dict(self):
        return {
            "item_id": self.item_id,
            "sample_type": self.sample_type,
            "label": self.label,
            "video_ref": dict(self.video_ref),
            "audio_ref": dict(self.audio_ref),
            "speaker_video": self.speaker_video,
            "speaker_audio": self.speaker_audio,
        }

    @classmethod
    def from_dict(cls, d):
        return cls(
            item_id=d["item_id"],
            sample_type=d["sample_type"],
            label=d["label"],
            video_ref=d["video_ref"],
            audio_ref=d["audio_ref"],
            speaker_video=d["speaker_video"],
            speaker_audio=d["speaker_audio"],
        )


def _video_ref(utt):
    return {"utterance_id": utt.utterance_id, "video_id": utt.video_id,
            "start_frame": utt.start_frame, "end_frame": utt.end_frame}


def _audio_ref(utt, shift=0.0):
    return {"utterance_id": utt.utterance_id, "video_id": utt.video_id,
            "t0": utt.t0, "t1": utt.t1, "shift": shift}


def make_positive(utterance) -> DatasetItem:
    """Audio and video from the same utterance, unshifted."""
    return DatasetItem(
        item_id=f"{utterance.utterance_id}:positive",
        sample_type="positive",
        label=1,
        video_ref=_video_ref(utterance),
        audio_ref=_audio_ref(utterance, 0.0),
        speaker_video=utterance.speaker_id,
        speaker_audio=utterance.speaker_id,
    )


def temporal_shift_bounds(utterance):
    """Feasible |shift| ranges per sign: {+1: (lo, hi), -1: (lo, hi)}.

    |shift| is drawn from [D/2, D] so the modality overlap never exceeds
    50%; a sign is feasible only when the shifted audio stays inside the
    parent recording (unknown recording length = unbounded).
    """
    d = utterance.duration
    lo = d / 2.0
    bounds = {}
    r = utterance.recording_duration
    hi_pos = d if r is None else min(d, r - utterance.t1)
    if hi_pos >= lo:
        bounds[+1] = (lo, hi_pos)
    hi_neg = min(d, utterance.t0)
    if hi_neg >= lo:
        bounds[-1] = (lo, hi_neg)
    return bounds


def make_temporal_mismatch(utterance, rng) -> DatasetItem:
    """Same utterance, audio shifted so the overlap is at most 50%."""
    bounds = temporal_shift_bounds(utterance)
    if not bounds:
        raise UnsatisfiableSample(
            f"{utterance.utterance_id}: recording too short for any valid shift"
        )
    signs = sorted(bounds)
    sign = signs[0] if len(signs) == 1 else (1 if rng.random() < 0.5 else -1)
    lo, hi = bounds[sign]
    shift = sign * float(rng.uniform(lo, hi))
    return DatasetItem(
        item_id=f"{utterance.utterance_id}:temporal_mismatch",
        sample_type="temporal_mismatch",
        label=0,
        video_ref=_video_ref(utterance),
        audio_ref=_audio_ref(utterance, shift),
        speaker_video=utterance.speaker_id,
        speaker_audio=utterance.speaker_id,
    )


def _partial_item(utterance, donor) -> DatasetItem:
    return DatasetItem(
        item_id=f"{utterance.utterance_id}:partial_mismatch",
        sample_type="partial_mismatch",
        label=0,
        video_ref=_video_ref(utterance),
        audio_ref=_audio_ref(donor, 0.0),
        speaker_video=utterance.speaker_id,
        speaker_audio=donor.speaker_id,
    )


def _complete_item(utterance, donor) -> DatasetItem:
    return DatasetItem(
        item_id=f"{utterance.utterance_id}:complete_mismatch",
        sample_type="complete_mismatch",
        label=0,
        video_ref=_video_ref(utterance),
        audio_ref=_audio_ref(donor, 0.0),
        speaker_video=utterance.speaker_id,
        speaker_audio=donor.speaker_id,
    )


def make_partial_mismatch(utterance, pool, rng) -> DatasetItem:
    """Same speaker, audio from a different utterance of theirs."""
    others = [u for u in pool
              if u.speaker_id == utterance.speaker_id
              and u.utterance_id != utterance.utterance_id]
    if not others:
        raise UnsatisfiableSample(
            f"{utterance.utterance_id}: speaker {utterance.speaker_id} "
            "has no other utterance"
        )
    return _partial_item(utterance, others[int(rng.integers(len(others)))])


def make_complete_mismatch(utterance, pool, rng) -> DatasetItem:
    """Audio from a different speaker entirely."""
    others = [u for u in pool if u.speaker_id != utterance.speaker_id]
    if not others:
        raise DatasetError("complete mismatch needs more than one speaker in the pool")
    return _complete_item(utterance, others[int(rng.integers(len(others)))])


def validate_item(item: DatasetItem):
    """Per-type structural constraints; raises DatasetError on violation."""
    shift = item.audio_ref.get("shift", 0.0)
    duration = item.audio_ref["t1"] - item.audio_ref["t0"]
    same_utterance = item.video_ref["utterance_id"] == item.audio_ref["utterance_id"]
    if item.sample_type == "positive":
        if item.label != 1 or shift != 0.0 or not same_utterance:
            raise DatasetError(f"{item.item_id}: malformed positive")
    elif item.sample_type == "temporal_mismatch":
        overlap = max(0.0, duration - abs(shift)) / duration
        if item.label != 0 or overlap > 0.5:
            raise DatasetError(
                f"{item.item_id}: temporal mismatch overlap {overlap:.3f} > 0.5"
            )
        if item.speaker_video != item.speaker_audio:
            raise DatasetError(f"{item.item_id}: temporal mismatch crosses speakers")
    elif item.sample_type == "partial_mismatch":
        if item.label != 0 or item.speaker_video != item.speaker_audio:
            raise DatasetError(f"{item.item_id}: partial mismatch must keep the speaker")
        if same_utterance:
            raise DatasetError(f"{item.item_id}: partial mismatch reuses the utterance")
    elif item.sample_type == "complete_mismatch":
        if item.label != 0 or item.speaker_video == item.speaker_audio:
            raise DatasetError(f"{item.item_id}: complete mismatch must cross speakers")
    else:
        raise DatasetError(f"{item.item_id}: unknown sample type {item.sample_type!r}")


@dataclass
class DatasetManifest:
    seed: int
    mix: dict
    stats: dict = field(default_factory=dict)   # split -> stats dict
    items: dict = field(default_factory=dict)   # split -> [DatasetItem]


def apportion(total: int, mix: dict) -> dict:
    """Largest-remainder apportionment of `total` items across sample types."""
    base = {t: int(np.floor(mix[t] * total)) for t in SAMPLE_TYPES}
    remainder = total - sum(base.values())
    fractions = sorted(
        SAMPLE_TYPES,
        key=lambda t: (mix[t] * total) - base[t],
        reverse=True,
    )
    for t in fractions[:remainder]:
        base[t] += 1
    return base


def split_speaker_stats(utterances):
    speakers = {}
    for u in utterances:
        speakers.setdefault(u.speaker_id, u.speaker_sex)
    return {
        "speakers_female": sum(1 for s in speakers.values() if s == "F"),
        "speakers_male": sum(1 for s in speakers.values() if s == "M"),
        "speakers_total": len(speakers),
    }


def build_splits(utterances, split_assignment, mix=None, seed=0) -> DatasetManifest:
    """Generate one dataset item per utterance, split by speaker.

    split_assignment maps speaker_id -> split name and must cover every
    speaker; splits are therefore speaker-disjoint by construction. The mix
    gives per-type proportions (summing to 1) applied within each split by
    largest-remainder rounding.
    """
    mix = dict(DEFAULT_MIX if mix is None else mix)
    unknown = set(mix) - set(SAMPLE_TYPES)
    if unknown:
        raise DatasetError(f"unknown sample types in mix: {sorted(unknown)}")
    for t in SAMPLE_TYPES:
        mix.setdefault(t, 0.0)
    if abs(sum(mix.values()) - 1.0) > 1e-9:
        raise DatasetError(f"mix must sum to 1, got {sum(mix.values())}")

    for u in utterances:
        u.validate()
        if u.speaker_id not in split_assignment:
            raise DatasetError(f"speaker {u.speaker_id} missing from split assignment")

    rng = np.random.default_rng(seed)
    manifest = DatasetManifest(seed=seed, mix=mix)
    for split in SPLITS:
        pool = [u for u in utterances if split_assignment[u.speaker_id] == split]
        if not pool:
            manifest.items[split] = []
            manifest.stats[split] = {**split_speaker_stats([]), "utterances": 0,
                                     "sample_types": {}}
            continue
        counts = apportion(len(pool), mix)

        groups = {}  # speaker -> indices into pool
        for i, u in enumerate(pool):
            groups.setdefault(u.speaker_id, []).append(i)
        multi_speakers = {s for s, members in groups.items() if len(members) >= 2}
        multiple_speakers = len(groups) >= 2
        eligible = {
            "positive": set(range(len(pool))),
            "temporal_mismatch": {i for i, u in enumerate(pool)
                                  if temporal_shift_bounds(u)},
            "partial_mismatch": {i for i, u in enumerate(pool)
                                 if u.speaker_id in multi_speakers},
            "complete_mismatch": set(range(len(pool))) if multiple_speakers else set(),
        }
        order = list(rng.permutation(len(pool)))
        assigned = {}
        # Most constrained types first so the positives soak up the rest.
        for sample_type in ("partial_mismatch", "temporal_mismatch",
                            "complete_mismatch", "positive"):
            needed = counts[sample_type]
            chosen = [i for i in order
                      if i not in assigned and i in eligible[sample_type]][:needed]
            if len(chosen) < needed:
                raise DatasetError(
                    f"{split}: mix needs {needed} {sample_type} items but only "
                    f"{len(chosen)} utterances qualify"
                )
            for i in chosen:
                assigned[i] = sample_type

        foreign = {}  # speaker -> indices of other speakers' utterances
        if multiple_speakers and counts["complete_mismatch"]:
            everyone = np.arange(len(pool))
            for speaker, members in groups.items():
                mask = np.ones(len(pool), dtype=bool)
                mask[members] = False
                foreign[speaker] = everyone[mask]

        items = []
        for i, utt in enumerate(pool):
            sample_type = assigned[i]
            if sample_type == "positive":
                item = make_positive(utt)
            elif sample_type == "temporal_mismatch":
                item = make_temporal_mismatch(utt, rng)
            elif sample_type == "partial_mismatch":
                # Uniform over the speaker's other utterances.
                members = groups[utt.speaker_id]
                k = int(rng.integers(len(members) - 1))
                donor_index = members[k] if members[k] != i else members[-1]
                item = _partial_item(utt, pool[donor_index])
            else:
                donors = foreign[utt.speaker_id]
                item = _complete_item(utt, pool[int(donors[rng.integers(len(donors))])])
            validate_item(item)
            items.append(item)

        manifest.items[split] = items
        manifest.stats[split] = {
            **split_speaker_stats(pool),
            "utterances": len(items),
            "sample_types": dict(Counter(i.sample_type for i in items)),
        }
    return manifest


def write_manifest(manifest: DatasetManifest, path):
    """Header line with seed/mix/stats, then one item per line."""
    with Path(path).open("w", encoding="utf-8") as fh:
        fh.write(json.dumps({
            "seed": manifest.seed,
            "mix": manifest.mix,
            "stats": manifest.stats,
        }, ensure_ascii=False) + "\n")
        for split in SPLITS:
            for item in manifest.items.get(split, []):
                fh.write(json.dumps({"split": split, **item.to_dict()},
                                    ensure_ascii=False) + "\n")


def read_manifest(path) -> DatasetManifest:
    with Path(path).open("r", encoding="utf-8") as fh:
        header = json.loads(fh.readline())
        manifest = DatasetManifest(seed=header["seed"], mix=header["mix"],
                                   stats=header["stats"])
        manifest.items = {split: [] for split in SPLITS}
        for line in fh:
            line = line.strip()
            if not line:
                continue
            d = json.loads(line)
            manifest.items.setdefault(d["split"], []).append(DatasetItem.from_dict(d))
    return manifest


_SPLIT_LABELS = {"training": "Training", "validation": "Validation", "test": "Test"}


def format_stats_table(stats: dict) -> str:
    """Aligned per-split speaker/utterance counts with a totals row."""
    header = ("Dataset", "Female", "Male", "Total", "Utterances")
    rows = []
    totals = Counter()
    for split in SPLITS:
        s = stats.get(split)
        if not s:
            continue
        rows.append((
            _SPLIT_LABELS[split],
            s["speakers_female"], s["speakers_male"], s["speakers_total"],
            s["utterances"],
        ))
        totals["f"] += s["speakers_female"]
        totals["m"] += s["speakers_male"]
        totals["t"] += s["speakers_total"]
        totals["u"] += s["utterances"]
    rows.append(("Total", totals["f"], totals["m"], totals["t"], totals["u"]))

    widths = [max(len(str(r[c])) for r in [header] + rows) for c in range(5)]
    lines = []
    for r in [header] + rows:
        cells = [str(r[0]).ljust(widths[0])]
        cells += [str(r[c]).rjust(widths[c]) for c in range(1, 5)]
        lines.append("  ".join(cells).rstrip())
    return "\n".join(lines)
