"""Semi-automatic annotation pipeline for audio-visual speech corpora."""

__version__ = "0.1.0"
