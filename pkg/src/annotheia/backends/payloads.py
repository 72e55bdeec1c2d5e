"""Scratch-file formats for backend payloads.

Binary payloads never travel inline over the wire:
    crops  raw 8-bit grayscale frames, concatenated (n * size * size bytes)
    mfcc   float32 little-endian, row-major T x 13
    audio  16 kHz mono 16-bit PCM WAV
    images PNG
"""

from __future__ import annotations

import wave

import numpy as np
from PIL import Image

MFCC_COLS = 13


def write_png(path, rgb):
    Image.fromarray(np.ascontiguousarray(rgb), mode="RGB").save(path)


def read_png(path):
    with Image.open(path) as img:
        return np.asarray(img.convert("RGB"))


def write_gray_crops(path, crops):
    crops = np.ascontiguousarray(crops, dtype=np.uint8)
    if crops.ndim != 3:
        raise ValueError(f"crops must be (n, size, size), got shape {crops.shape}")
    with open(path, "wb") as fh:
        fh.write(crops.tobytes())


def read_gray_crops(path, n_frames, size):
    data = np.fromfile(path, dtype=np.uint8)
    expected = n_frames * size * size
    if data.size != expected:
        raise ValueError(f"{path}: expected {expected} bytes, found {data.size}")
    return data.reshape(n_frames, size, size)


def write_mfcc(path, rows):
    rows = np.asarray(rows, dtype=np.float32)
    if rows.ndim != 2 or rows.shape[1] != MFCC_COLS:
        raise ValueError(f"mfcc must be (T, {MFCC_COLS}), got shape {rows.shape}")
    with open(path, "wb") as fh:
        fh.write(rows.astype("<f4").tobytes(order="C"))


def read_mfcc(path, n_rows):
    data = np.fromfile(path, dtype="<f4")
    expected = n_rows * MFCC_COLS
    if data.size != expected:
        raise ValueError(f"{path}: expected {expected} floats, found {data.size}")
    return data.reshape(n_rows, MFCC_COLS).astype(np.float64)


def write_wav(path, samples, sample_rate=16000):
    samples = np.asarray(samples, dtype=np.int16)
    with wave.open(str(path), "wb") as fh:
        fh.setnchannels(1)
        fh.setsampwidth(2)
        fh.setframerate(sample_rate)
        fh.writeframes(samples.tobytes())


def read_wav(path):
    with wave.open(str(path), "rb") as fh:
        if fh.getnchannels() != 1 or fh.getsampwidth() != 2:
            raise ValueError(f"{path}: expected mono 16-bit PCM")
        rate = fh.getframerate()
        samples = np.frombuffer(fh.readframes(fh.getnframes()), dtype=np.int16)
    return samples, rate
