"""Assembly of the 38-column frame-level feature stream and session normalization."""

from __future__ import annotations

import csv
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from ..schema import FEATURE_COLUMNS, N_FEATURES
from .framing import FrameGrid, delta, frame_signal, rms_energy
from .lpc import lsf_features
from .pitch import PitchConfig, pitch_track
from .spectral import spectral_features
from .vad import VadConfig
from .voice import voice_quality

COL = {name: i for i, name in enumerate(FEATURE_COLUMNS)}
MEAN_DIVIDE_COLUMNS = ("f0", "energy")
STD_FLOOR = 1e-8


class FeatureFormatError(ValueError):
    pass


@dataclass
class FeatureMatrix:
    values: np.ndarray  # (frames, 38)
    voiced: np.ndarray  # (frames,) bool
    times: np.ndarray  # (frames,) frame start times in seconds
    frame_length_s: float = 0.025
    frame_shift_s: float = 0.010
    columns: list[str] = field(default_factory=lambda: list(FEATURE_COLUMNS))

    def __post_init__(self):
        self.values = np.asarray(self.values, dtype=np.float64).reshape(-1, N_FEATURES)
        self.voiced = np.asarray(self.voiced, dtype=bool)
        self.times = np.asarray(self.times, dtype=np.float64)
        if not (self.values.shape[0] == self.voiced.shape[0] == self.times.shape[0]):
            raise FeatureFormatError("values, voiced and times disagree on frame count")

    @property
    def frame_count(self) -> int:
        return self.values.shape[0]

    def column(self, name: str) -> np.ndarray:
        return self.values[:, COL[name]]

    def frames_within(self, start_s: float, end_s: float) -> np.ndarray:
        """Indices of frames whose whole window lies inside [start_s, end_s]."""
        tol = 1e-9
        ends = self.times + self.frame_length_s
        return np.flatnonzero((self.times >= start_s - tol) & (ends <= end_s + tol))


@dataclass
class NormalizationStats:
    mean: np.ndarray
    std: np.ndarray
    f0_voiced_mean: float
    energy_mean: float
    f0_normalized: bool
    modes: list[str]

    def to_dict(self) -> dict:
        return {
            "columns": list(FEATURE_COLUMNS),
            "mean": self.mean.tolist(),
            "std": self.std.tolist(),
            "f0_voiced_mean": self.f0_voiced_mean,
            "energy_mean": self.energy_mean,
            "f0_normalized": self.f0_normalized,
            "modes": self.modes,
        }


def extract_features(audio, channel: int = 0, vad: VadConfig = VadConfig(), pitch: PitchConfig = PitchConfig()) -> FeatureMatrix:
    """Per-frame features for one channel in the frozen 38-column order."""
    grid = frame_signal(audio, channel)
    x = audio.channel(channel)
    return extract_from_samples(x, grid, vad, pitch)


def extract_from_samples(x, grid: FrameGrid, vad: VadConfig = VadConfig(), pitch: PitchConfig = PitchConfig()) -> FeatureMatrix:
    n = grid.frame_count
    f0, voiced = pitch_track(x, grid, pitch, vad)
    energy = rms_energy(x, grid)
    mfcc, mfb = spectral_features(x, grid)
    lsf = lsf_features(x, grid)
    vq = voice_quality(x, grid, f0, voiced)
    values = np.column_stack([f0, energy, delta(f0), delta(energy), mfcc, mfb, lsf, vq]) if n else np.zeros((0, N_FEATURES))
    values = np.nan_to_num(values, nan=0.0, posinf=0.0, neginf=0.0)
    return FeatureMatrix(values, voiced, grid.start_times, grid.frame_length_s, grid.frame_shift_s)


def normalize_session(m: FeatureMatrix) -> tuple[FeatureMatrix, NormalizationStats]:
    """Mean-divide f0 (voiced frames only) and energy; z-score the other 36 columns."""
    if m.frame_count < 2:
        raise ValueError("session normalization needs at least 2 frames")
    v = m.values.copy()
    mean = v.mean(axis=0)
    std = np.maximum(v.std(axis=0), STD_FLOOR)
    modes = ["mean-divide" if c in MEAN_DIVIDE_COLUMNS else "z-score" for c in FEATURE_COLUMNS]
    for j, mode in enumerate(modes):
        if mode == "z-score":
            v[:, j] = (v[:, j] - mean[j]) / std[j]

    f0 = v[:, COL["f0"]]
    f0_mean = float(f0[m.voiced].mean()) if m.voiced.any() else 0.0
    f0_normalized = f0_mean > 0
    if f0_normalized:
        v[m.voiced, COL["f0"]] = f0[m.voiced] / f0_mean
        v[~m.voiced, COL["f0"]] = 0.0

    e_mean = float(mean[COL["energy"]])
    if e_mean > 0:
        v[:, COL["energy"]] = v[:, COL["energy"]] / e_mean

    stats = NormalizationStats(mean, std, f0_mean, e_mean, f0_normalized, modes)
    out = FeatureMatrix(v, m.voiced.copy(), m.times.copy(), m.frame_length_s, m.frame_shift_s)
    return out, stats


def feature_header() -> list[str]:
    return ["time_s", "voiced"] + list(FEATURE_COLUMNS)


def write_feature_csv(path, m: FeatureMatrix) -> None:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w") as fh:
        fh.write(",".join(feature_header()) + "\n")
        for t, vflag, row in zip(m.times, m.voiced, m.values):
            cells = [format(float(t), ".9g"), "1" if vflag else "0"] + [format(float(c), ".9g") for c in row]
            fh.write(",".join(cells) + "\n")


def read_feature_csv(path, frame_length_s: float = 0.025, frame_shift_s: float = 0.010) -> FeatureMatrix:
    path = Path(path)
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header != feature_header():
            raise FeatureFormatError(f"{path}: unexpected feature CSV header")
        times, voiced, rows = [], [], []
        for lineno, row in enumerate(reader, start=2):
            if len(row) != len(header):
                raise FeatureFormatError(f"{path}:{lineno}: expected {len(header)} fields")
            try:
                times.append(float(row[0]))
                voiced.append(row[1] == "1")
                rows.append([float(c) for c in row[2:]])
            except ValueError as exc:
                raise FeatureFormatError(f"{path}:{lineno}: {exc}") from None
    values = np.array(rows).reshape(-1, N_FEATURES)
    return FeatureMatrix(values, np.array(voiced, dtype=bool), np.array(times), frame_length_s, frame_shift_s)
