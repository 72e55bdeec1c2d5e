"""MFCC front-end for 16 kHz speech: 13 coefficients per 10 ms hop.

Parameters are fixed: pre-emphasis 0.97, 25 ms Hamming window (400 samples),
10 ms hop (160 samples), 512-point magnitude spectrum, 26 triangular mel
filters spanning 0-8000 Hz, log floored at 1e-10, orthonormal DCT-II keeping
coefficients 0-12.
"""

from __future__ import annotations

import numpy as np
from scipy.fft import dct

SAMPLE_RATE = 16000
WIN_SAMPLES = 400  # 25 ms
HOP_SAMPLES = 160  # 10 ms
NFFT = 512
N_FILTERS = 26
N_COEFFS = 13
PREEMPHASIS = 0.97
LOG_FLOOR = 1e-10
HOP_MS = 10.0


class MfccError(ValueError):
    pass


def frame_count(n_samples: int) -> int:
    """Rows produced for n_samples of 16 kHz audio (needs one full window)."""
    if n_samples < WIN_SAMPLES:
        raise MfccError(f"need at least {WIN_SAMPLES} samples, got {n_samples}")
    return 1 + (n_samples - WIN_SAMPLES) // HOP_SAMPLES


def _hz_to_mel(hz):
    return 2595.0 * np.log10(1.0 + hz / 700.0)


def _mel_to_hz(mel):
    return 700.0 * (10.0 ** (mel / 2595.0) - 1.0)


def mel_filterbank(n_filters=N_FILTERS, nfft=NFFT, sample_rate=SAMPLE_RATE,
                   low_hz=0.0, high_hz=None):
    """Triangular filters on mel-spaced points, weights over rfft bins."""
    high_hz = high_hz or sample_rate / 2.0
    mel_points = np.linspace(_hz_to_mel(low_hz), _hz_to_mel(high_hz), n_filters + 2)
    bins = np.floor((nfft + 1) * _mel_to_hz(mel_points) / sample_rate).astype(int)
    bank = np.zeros((n_filters, nfft // 2 + 1))
    for j in range(n_filters):
        left, center, right = bins[j], bins[j + 1], bins[j + 2]
        for i in range(left, center):
            bank[j, i] = (i - left) / (center - left)
        for i in range(center, right):
            bank[j, i] = (right - i) / (right - center)
    return bank


_FILTERBANK = mel_filterbank()
_WINDOW = np.hamming(WIN_SAMPLES)


def extract_mfcc(samples, sample_rate=SAMPLE_RATE):
    """MFCC matrix (T, 13) for 16 kHz mono PCM.

    Accepts int16 (scaled to [-1, 1)) or float input. Resampling is an
    ingest concern: any other rate is an error here.
    """
    if sample_rate != SAMPLE_RATE:
        raise MfccError(f"expected {SAMPLE_RATE} Hz audio, got {sample_rate}")
    samples = np.asarray(samples)
    if samples.ndim != 1:
        raise MfccError(f"expected mono audio, got shape {samples.shape}")
    if samples.dtype == np.int16:
        signal = samples.astype(np.float64) / 32768.0
    else:
        signal = samples.astype(np.float64)
    n = frame_count(signal.size)  # validates the minimum length

    emphasized = np.empty_like(signal)
    emphasized[0] = signal[0]
    emphasized[1:] = signal[1:] - PREEMPHASIS * signal[:-1]

    frames = np.lib.stride_tricks.sliding_window_view(emphasized, WIN_SAMPLES)[::HOP_SAMPLES]
    assert frames.shape[0] == n
    magnitude = np.abs(np.fft.rfft(frames * _WINDOW, n=NFFT, axis=1))
    energies = magnitude @ _FILTERBANK.T
    log_energies = np.log(np.maximum(energies, LOG_FLOOR))
    coeffs = dct(log_energies, type=2, norm="ortho", axis=1)[:, :N_COEFFS]
    return coeffs


def rows_per_frame(fps: float, hop_ms: float = HOP_MS) -> int:
    """MFCC rows aligned to one video frame: round((1000/fps)/hop_ms)."""
    value = round((1000.0 / fps) / hop_ms)
    if value < 1:
        raise MfccError(f"fps {fps} leaves no audio rows per video frame")
    return value


def fit_rows(mfcc, n_rows: int):
    """Truncate, or pad by edge replication, to exactly n_rows rows."""
    mfcc = np.asarray(mfcc)
    if mfcc.shape[0] >= n_rows:
        return mfcc[:n_rows]
    pad = np.repeat(mfcc[-1:], n_rows - mfcc.shape[0], axis=0)
    return np.concatenate([mfcc, pad], axis=0)
