"""Log mel filterbank energies and MFCCs."""

from __future__ import annotations

import numpy as np
from scipy.fft import dct

from .framing import FrameGrid

N_MFB = 8
N_MFCC_BANDS = 26
N_MFCC = 15
F_MIN = 20.0
LOG_FLOOR = 1e-10


def hz_to_mel(f):
    return 2595.0 * np.log10(1.0 + np.asarray(f, dtype=np.float64) / 700.0)


def mel_to_hz(m):
    return 700.0 * (10.0 ** (np.asarray(m, dtype=np.float64) / 2595.0) - 1.0)


def fft_size(frame_length: int) -> int:
    return 1 << int(frame_length - 1).bit_length()


def mel_band_edges(n_bands: int, sample_rate: int, f_min: float = F_MIN) -> np.ndarray:
    """n_bands + 2 edge frequencies (Hz), equally spaced on the mel scale."""
    return mel_to_hz(np.linspace(hz_to_mel(f_min), hz_to_mel(sample_rate / 2.0), n_bands + 2))


def mel_band_centers(n_bands: int, sample_rate: int, f_min: float = F_MIN) -> np.ndarray:
    return mel_band_edges(n_bands, sample_rate, f_min)[1:-1]


def mel_filterbank(n_bands: int, nfft: int, sample_rate: int, f_min: float = F_MIN) -> np.ndarray:
    """(n_bands, nfft//2 + 1) triangular weights, unit peak at each band centre."""
    edges = mel_band_edges(n_bands, sample_rate, f_min)
    freqs = np.arange(nfft // 2 + 1) * sample_rate / nfft
    lo, mid, hi = edges[:-2, None], edges[1:-1, None], edges[2:, None]
    rising = (freqs - lo) / (mid - lo)
    falling = (hi - freqs) / (hi - mid)
    return np.maximum(0.0, np.minimum(rising, falling))


def power_spectrum(samples, grid: FrameGrid) -> np.ndarray:
    nfft = fft_size(grid.frame_length)
    spec = np.fft.rfft(grid.windowed(samples), nfft, axis=1)
    return spec.real**2 + spec.imag**2


def log_mel_energies(power: np.ndarray, n_bands: int, sample_rate: int) -> np.ndarray:
    nfft = 2 * (power.shape[1] - 1)
    fb = mel_filterbank(n_bands, nfft, sample_rate)
    return np.log(np.maximum(power @ fb.T, LOG_FLOOR))


def spectral_features(samples, grid: FrameGrid) -> tuple[np.ndarray, np.ndarray]:
    """(mfcc c1..c15, 8 log mel-band energies) per frame.

    MFCCs come from an orthonormal DCT-II of a separate 26-band log mel
    spectrum; c0 is dropped.
    """
    power = power_spectrum(samples, grid)
    if power.shape[0] == 0:
        return np.zeros((0, N_MFCC)), np.zeros((0, N_MFB))
    mfb = log_mel_energies(power, N_MFB, grid.sample_rate)
    log26 = log_mel_energies(power, N_MFCC_BANDS, grid.sample_rate)
    cep = dct(log26, type=2, norm="ortho", axis=1)
    return cep[:, 1 : N_MFCC + 1], mfb
