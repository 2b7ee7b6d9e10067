"""Autocorrelation pitch tracking with median smoothing."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .framing import FrameGrid, rms_energy
from .vad import VadConfig, energy_threshold_db, rms_db


@dataclass(frozen=True)
class PitchConfig:
    f0_min: float = 50.0
    f0_max: float = 600.0
    voicing_threshold: float = 0.45
    # smallest-lag peak within this fraction of the best peak wins (octave guard)
    octave_ratio: float = 0.85
    median_width: int = 5


def _next_pow2(n: int) -> int:
    return 1 << max(0, int(n - 1).bit_length())


def normalized_autocorrelation(frames: np.ndarray) -> np.ndarray:
    """Per-frame normalized autocorrelation for lags 0..L-1.

    Each lag compares the overlapping head and tail of the mean-removed frame:
    r(tau) / sqrt(E_head(tau) * E_tail(tau)).
    """
    x = frames - frames.mean(axis=1, keepdims=True)
    n_frames, L = x.shape
    if n_frames == 0:
        return np.zeros((0, L))
    nfft = _next_pow2(2 * L)
    spec = np.fft.rfft(x, nfft, axis=1)
    r = np.fft.irfft(spec * np.conj(spec), nfft, axis=1)[:, :L]
    cs = np.concatenate([np.zeros((n_frames, 1)), np.cumsum(x * x, axis=1)], axis=1)
    lags = np.arange(L)
    head = cs[:, L - lags]
    tail = cs[:, L][:, None] - cs[:, lags]
    denom = np.sqrt(head * tail)
    with np.errstate(divide="ignore", invalid="ignore"):
        ncc = np.where(denom > 1e-20, r / denom, 0.0)
    return np.clip(ncc, -1.0, 1.0)


def raw_pitch(samples, grid: FrameGrid, config: PitchConfig = PitchConfig(), energy_gate=None):
    """Unsmoothed f0 per frame (0 where unvoiced) and the voicing mask.

    ``energy_gate`` is a boolean per-frame mask; frames outside it are
    unvoiced regardless of periodicity.
    """
    frames = grid.frames(samples)
    n = frames.shape[0]
    f0 = np.zeros(n)
    voiced = np.zeros(n, dtype=bool)
    if n == 0:
        return f0, voiced
    sr = grid.sample_rate
    lag_lo = max(2, int(np.floor(sr / config.f0_max)))
    lag_hi = min(grid.frame_length - 2, int(np.ceil(sr / config.f0_min)))
    if lag_hi <= lag_lo:
        return f0, voiced

    ncc = normalized_autocorrelation(frames)
    seg = ncc[:, lag_lo - 1 : lag_hi + 2]  # one guard lag each side
    mid = seg[:, 1:-1]
    is_peak = (mid >= seg[:, :-2]) & (mid > seg[:, 2:])
    peak_vals = np.where(is_peak, mid, -np.inf)
    best = peak_vals.max(axis=1)
    ok = best >= config.voicing_threshold
    candidate = is_peak & (mid >= config.octave_ratio * best[:, None]) & ok[:, None]
    has = candidate.any(axis=1)
    idx = np.argmax(candidate, axis=1)

    rows = np.flatnonzero(has)
    k = idx[rows] + 1  # position within seg
    y0, y1, y2 = seg[rows, k - 1], seg[rows, k], seg[rows, k + 1]
    denom = y0 - 2.0 * y1 + y2
    with np.errstate(divide="ignore", invalid="ignore"):
        shift = np.where(np.abs(denom) > 1e-12, 0.5 * (y0 - y2) / denom, 0.0)
    shift = np.clip(shift, -0.5, 0.5)
    lag = lag_lo + idx[rows] + shift
    est = sr / lag
    in_band = (est >= config.f0_min) & (est <= config.f0_max)
    rows, est = rows[in_band], est[in_band]
    voiced[rows] = True
    f0[rows] = est
    if energy_gate is not None:
        gate = np.asarray(energy_gate, dtype=bool)
        voiced &= gate
        f0[~voiced] = 0.0
    return f0, voiced


def median_smooth(track, voiced=None, width: int = 5) -> np.ndarray:
    """Centred median filter with shrunken windows at the edges.

    When ``voiced`` is given, only voiced neighbours enter each median and
    unvoiced frames are set to 0 afterwards.
    """
    x = np.asarray(track, dtype=np.float64)
    n = x.shape[0]
    v = np.ones(n, dtype=bool) if voiced is None else np.asarray(voiced, dtype=bool)
    half = width // 2
    out = np.zeros(n)
    for i in np.flatnonzero(v):
        lo, hi = max(0, i - half), min(n, i + half + 1)
        out[i] = np.median(x[lo:hi][v[lo:hi]])
    return out


def pitch_track(samples, grid: FrameGrid, config: PitchConfig = PitchConfig(), vad: VadConfig = VadConfig()):
    """Smoothed f0 per frame and voicing flags.

    A frame is voiced when its normalized autocorrelation peak reaches the
    voicing threshold and its RMS level is above the VAD energy threshold.
    """
    db = rms_db(rms_energy(samples, grid))
    gate = db > energy_threshold_db(db, vad)
    f0, voiced = raw_pitch(samples, grid, config, energy_gate=gate)
    return median_smooth(f0, voiced, config.median_width), voiced
