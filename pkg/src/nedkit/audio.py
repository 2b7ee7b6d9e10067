"""16-bit PCM WAV input/output."""

from __future__ import annotations

import wave
from dataclasses import dataclass
from pathlib import Path

import numpy as np

SUPPORTED_RATES = (8000, 16000, 44100, 48000)


class AudioFormatError(ValueError):
    """The file is not a supported RIFF/WAV 16-bit PCM recording."""


@dataclass
class AudioBuffer:
    samples: np.ndarray  # (n_samples, channels), float64 in [-1, 1]
    sample_rate: int

    def __post_init__(self):
        s = np.asarray(self.samples, dtype=np.float64)
        if s.ndim == 1:
            s = s[:, None]
        if s.ndim != 2 or s.shape[1] not in (1, 2):
            raise AudioFormatError(f"expected mono or stereo samples, got shape {s.shape}")
        if not np.all(np.isfinite(s)):
            raise AudioFormatError("samples must be finite")
        if s.size and np.max(np.abs(s)) > 1.0:
            raise AudioFormatError("samples must lie in [-1, 1]")
        if int(self.sample_rate) not in SUPPORTED_RATES:
            raise AudioFormatError(f"sample rate {self.sample_rate} not in {SUPPORTED_RATES}")
        self.samples = s
        self.sample_rate = int(self.sample_rate)

    @property
    def channel_count(self) -> int:
        return self.samples.shape[1]

    @property
    def num_samples(self) -> int:
        return self.samples.shape[0]

    @property
    def duration_s(self) -> float:
        return self.num_samples / self.sample_rate

    def channel(self, index: int) -> np.ndarray:
        if not 0 <= index < self.channel_count:
            raise IndexError(f"channel {index} out of range for {self.channel_count}-channel audio")
        return self.samples[:, index]


def read_wav(path) -> AudioBuffer:
    path = Path(path)
    try:
        with wave.open(str(path), "rb") as wf:
            width = wf.getsampwidth()
            channels = wf.getnchannels()
            rate = wf.getframerate()
            raw = wf.readframes(wf.getnframes())
    except wave.Error as exc:
        raise AudioFormatError(f"{path}: {exc}") from None
    except EOFError:
        raise AudioFormatError(f"{path}: truncated WAV file") from None
    if width != 2:
        raise AudioFormatError(f"{path}: only 16-bit PCM is supported (sample width {8 * width} bits)")
    if channels not in (1, 2):
        raise AudioFormatError(f"{path}: {channels} channels, expected 1 or 2")
    data = np.frombuffer(raw, dtype="<i2")
    if data.size % channels:
        raise AudioFormatError(f"{path}: truncated sample data")
    samples = data.reshape(-1, channels).astype(np.float64) / 32768.0
    return AudioBuffer(samples, rate)


def to_pcm16(samples: np.ndarray) -> np.ndarray:
    return np.clip(np.round(np.asarray(samples) * 32767.0), -32768, 32767).astype("<i2")


def write_wav(path, audio: AudioBuffer) -> None:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with wave.open(str(path), "wb") as wf:
        wf.setnchannels(audio.channel_count)
        wf.setsampwidth(2)
        wf.setframerate(audio.sample_rate)
        wf.writeframes(to_pcm16(audio.samples).tobytes())
