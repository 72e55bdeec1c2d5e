"""Word-aligned transcription of trimmed clips via a pluggable ASR backend."""

from __future__ import annotations

from annotheia.backends.payloads import write_wav
from annotheia.backends.protocol import ProtocolError
from annotheia.types import Transcription, Word

END_TIME_TOLERANCE = 0.05  # ASR alignments commonly overshoot clip edges


class TranscriptionError(Exception):
    """Transcription failed or came back invalid; carries the violations."""

    def __init__(self, message, violations=None):
        super().__init__(message)
        self.violations = violations or []


def validate_transcription(transcription: Transcription, clip_duration: float,
                           tolerance: float = END_TIME_TOLERANCE):
    """Check every invariant; returns all violations, not just the first."""
    violations = []
    if transcription.text.strip() and not transcription.words:
        violations.append("text without alignment")
    prev_t0 = None
    for i, word in enumerate(transcription.words):
        tag = f"word {i} ({word.word!r})"
        if word.t1 < word.t0:
            violations.append(f"{tag}: t1 {word.t1} < t0 {word.t0}")
        if word.t0 < 0:
            violations.append(f"{tag}: starts before the clip")
        if word.t1 > clip_duration + tolerance:
            violations.append(
                f"{tag}: ends at {word.t1}, past the {clip_duration:.2f} s clip"
            )
        if prev_t0 is not None and word.t0 < prev_t0:
            violations.append(f"{tag}: non-monotone start time")
        prev_t0 = word.t0
    return violations


def transcribe(audio, language, backend, scratch, clip_name="clip") -> Transcription:
    """Transcribe a 16 kHz mono PCM clip.

    With language="auto" the backend's detected code is recorded as
    "auto-detected:<code>"; an explicitly declared language is passed
    through and recorded as-is.
    """
    if len(audio) == 0:
        raise TranscriptionError("empty audio clip")
    clip_duration = len(audio) / 16000.0
    path = scratch.file(f"{clip_name}.wav")
    write_wav(path, audio, 16000)
    result = backend.call("transcribe", {
        "audio_path": str(path),
        "language": language,
    })
    try:
        text = result["text"]
        detected = result.get("language", "unknown")
        words = [Word(w["w"], float(w["t0"]), float(w["t1"]))
                 for w in result.get("words", [])]
    except (KeyError, TypeError) as exc:
        raise ProtocolError(f"malformed transcribe reply: {exc}") from None

    recorded = f"auto-detected:{detected}" if language == "auto" else language
    transcription = Transcription(text=text, language=recorded, words=words)
    violations = validate_transcription(transcription, clip_duration)
    if violations:
        raise TranscriptionError(
            f"invalid transcription: {'; '.join(violations)}", violations
        )
    return transcription
