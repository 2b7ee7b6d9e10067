from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from numpy.lib.stride_tricks import sliding_window_view

FRAME_LENGTH_S = 0.025
FRAME_SHIFT_S = 0.010


@dataclass(frozen=True)
class FrameGrid:
    """Hamming-windowed framing of one channel at its native sample rate."""

    sample_rate: int
    num_samples: int
    frame_length: int  # samples
    frame_shift: int  # samples

    @property
    def frame_count(self) -> int:
        if self.num_samples < self.frame_length:
            return 0
        return (self.num_samples - self.frame_length) // self.frame_shift + 1

    @property
    def window(self) -> np.ndarray:
        # 0.54 - 0.46 cos(2 pi n / (L - 1))
        return np.hamming(self.frame_length)

    @property
    def start_times(self) -> np.ndarray:
        return np.arange(self.frame_count) * self.frame_shift / self.sample_rate

    @property
    def center_times(self) -> np.ndarray:
        return (np.arange(self.frame_count) * self.frame_shift + self.frame_length / 2) / self.sample_rate

    @property
    def frame_length_s(self) -> float:
        return self.frame_length / self.sample_rate

    @property
    def frame_shift_s(self) -> float:
        return self.frame_shift / self.sample_rate

    def frames(self, samples: np.ndarray) -> np.ndarray:
        """(frame_count, frame_length) view of raw (unwindowed) samples."""
        samples = np.asarray(samples, dtype=np.float64)
        if samples.shape[0] != self.num_samples:
            raise ValueError(f"signal has {samples.shape[0]} samples, grid expects {self.num_samples}")
        if self.frame_count == 0:
            return np.zeros((0, self.frame_length))
        view = sliding_window_view(samples, self.frame_length)[:: self.frame_shift]
        return view[: self.frame_count]

    def windowed(self, samples: np.ndarray) -> np.ndarray:
        return self.frames(samples) * self.window


def make_grid(
    num_samples: int,
    sample_rate: int,
    frame_length_s: float = FRAME_LENGTH_S,
    frame_shift_s: float = FRAME_SHIFT_S,
) -> FrameGrid:
    length = int(round(frame_length_s * sample_rate))
    shift = int(round(frame_shift_s * sample_rate))
    if length < 1 or shift < 1:
        raise ValueError("frame length and shift must be at least one sample")
    return FrameGrid(int(sample_rate), int(num_samples), length, shift)


def frame_signal(audio, channel: int = 0, **kwargs) -> FrameGrid:
    """Frame grid for one channel of an :class:`~nedkit.audio.AudioBuffer`."""
    audio.channel(channel)  # validates the index
    return make_grid(audio.num_samples, audio.sample_rate, **kwargs)


def rms_energy(samples: np.ndarray, grid: FrameGrid) -> np.ndarray:
    """Root mean square of each Hamming-windowed frame."""
    w = grid.windowed(samples)
    return np.sqrt(np.mean(w * w, axis=1))


def delta(series) -> np.ndarray:
    """First differences with a leading zero."""
    x = np.asarray(series, dtype=np.float64)
    out = np.zeros_like(x)
    if x.shape[0] > 1:
        out[1:] = x[1:] - x[:-1]
    return out
