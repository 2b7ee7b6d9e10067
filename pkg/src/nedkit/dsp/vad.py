"""Percentile-relative energy voice activity detection."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .framing import FrameGrid, rms_energy

DB_FLOOR = -200.0


@dataclass(frozen=True)
class VadConfig:
    percentile: float = 30.0
    margin_db: float = 9.0
    min_speech_s: float = 0.100
    bridge_gap_s: float = 0.050


@dataclass(frozen=True)
class VadSegment:
    start_s: float
    end_s: float
    channel: int = 0

    @property
    def duration_s(self) -> float:
        return self.end_s - self.start_s


def rms_db(rms: np.ndarray) -> np.ndarray:
    with np.errstate(divide="ignore"):
        db = 20.0 * np.log10(rms)
    return np.maximum(db, DB_FLOOR)


def energy_threshold_db(frame_db: np.ndarray, config: VadConfig = VadConfig()) -> float:
    if frame_db.size == 0:
        return np.inf
    return float(np.percentile(frame_db, config.percentile) + config.margin_db)


def speech_frames(samples, grid: FrameGrid, config: VadConfig = VadConfig()) -> np.ndarray:
    """Boolean mask of frames whose RMS exceeds the relative threshold."""
    db = rms_db(rms_energy(samples, grid))
    return db > energy_threshold_db(db, config)


def _runs(mask: np.ndarray) -> list[tuple[int, int]]:
    """Inclusive (first, last) index pairs of True runs."""
    if mask.size == 0:
        return []
    padded = np.concatenate([[False], mask, [False]]).astype(np.int8)
    edges = np.flatnonzero(np.diff(padded))
    return [(int(a), int(b) - 1) for a, b in zip(edges[::2], edges[1::2])]


def detect_voice_activity(samples, grid: FrameGrid, channel: int = 0, config: VadConfig = VadConfig()) -> list[VadSegment]:
    """Speech segments in seconds.

    Each speech frame stands for the shift-wide interval around its window
    centre. Runs separated by less than ``bridge_gap_s`` are merged first,
    then segments shorter than ``min_speech_s`` are dropped.
    """
    mask = speech_frames(samples, grid, config)
    half = grid.frame_shift_s / 2.0
    centers = grid.center_times
    spans = [[centers[a] - half, centers[b] + half] for a, b in _runs(mask)]
    merged: list[list[float]] = []
    for span in spans:
        if merged and span[0] - merged[-1][1] < config.bridge_gap_s - 1e-9:
            merged[-1][1] = span[1]
        else:
            merged.append(span)
    return [
        VadSegment(max(0.0, float(s)), float(e), channel)
        for s, e in merged
        if e - s >= config.min_speech_s - 1e-9
    ]
