"""Frame-level jitter and shimmer by period-synchronous peak picking."""

from __future__ import annotations

import numpy as np

from .framing import FrameGrid

ANALYSIS_WINDOW_S = 0.060
SEARCH_SLACK = 0.3  # next peak searched within (1 +- slack) * expected period
MIN_PERIODS = 3


def _refine(x: np.ndarray, i: int) -> tuple[float, float]:
    """Parabolic refinement of a sample peak: (position, amplitude)."""
    if 0 < i < x.shape[0] - 1:
        y0, y1, y2 = x[i - 1], x[i], x[i + 1]
        denom = y0 - 2.0 * y1 + y2
        if denom < 0:
            d = 0.5 * (y0 - y2) / denom
            return i + d, y1 - 0.25 * (y0 - y2) * d
    return float(i), float(x[i])


def pick_periods(x: np.ndarray, period: float) -> tuple[np.ndarray, np.ndarray]:
    """Peak positions (samples) and amplitudes, one per cycle, seeded by ``period``."""
    n = x.shape[0]
    p = int(round(period))
    if p < 2 or n < p:
        return np.zeros(0), np.zeros(0)
    first = int(np.argmax(x[:p]))
    positions, amps = [], []
    pos, amp = _refine(x, first)
    positions.append(pos)
    amps.append(amp)
    cur = first
    while True:
        lo = cur + int(np.floor((1.0 - SEARCH_SLACK) * period))
        hi = cur + int(np.ceil((1.0 + SEARCH_SLACK) * period)) + 1
        if hi > n:
            break
        nxt = lo + int(np.argmax(x[lo:hi]))
        pos, amp = _refine(x, nxt)
        positions.append(pos)
        amps.append(amp)
        cur = nxt
    return np.array(positions), np.array(amps)


def perturbation_measures(positions: np.ndarray, amps: np.ndarray) -> tuple[float, float, float]:
    """(jitter_local, jitter_ddp, shimmer_local); zeros with fewer than 3 periods."""
    periods = np.diff(positions)
    if periods.shape[0] < MIN_PERIODS:
        return 0.0, 0.0, 0.0
    mean_t = periods.mean()
    jitter_local = np.mean(np.abs(np.diff(periods))) / mean_t
    jitter_ddp = np.mean(np.abs(np.diff(periods, n=2))) / mean_t
    a = amps[1:]  # amplitudes of the peaks closing each period
    mean_a = np.mean(np.abs(a))
    shimmer = np.mean(np.abs(np.diff(a))) / mean_a if mean_a > 0 else 0.0
    return float(jitter_local), float(jitter_ddp), float(shimmer)


def voice_quality(samples, grid: FrameGrid, f0, voiced) -> np.ndarray:
    """(frames, 3) array of jitter_local, jitter_ddp, shimmer_local.

    Each voiced frame is analysed over a 60 ms window centred on the frame.
    """
    x = np.asarray(samples, dtype=np.float64)
    f0 = np.asarray(f0, dtype=np.float64)
    voiced = np.asarray(voiced, dtype=bool)
    out = np.zeros((grid.frame_count, 3))
    sr = grid.sample_rate
    half = int(round(ANALYSIS_WINDOW_S * sr / 2))
    for i in np.flatnonzero(voiced[: grid.frame_count]):
        if f0[i] <= 0:
            continue
        centre = i * grid.frame_shift + grid.frame_length // 2
        seg = x[max(0, centre - half) : min(x.shape[0], centre + half)]
        positions, amps = pick_periods(seg, sr / f0[i])
        out[i] = perturbation_measures(positions, amps)
    return out
