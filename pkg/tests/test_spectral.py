import numpy as np
import pytest
from scipy.fft import dct

from conftest import SR, tone
from nedkit.dsp.framing import make_grid
from nedkit.dsp.spectral import (
    LOG_FLOOR,
    hz_to_mel,
    mel_band_centers,
    mel_filterbank,
    mel_to_hz,
    spectral_features,
)


def _feats(x):
    return spectral_features(x, make_grid(x.shape[0], SR))


def test_mel_scale():
    assert hz_to_mel(0.0) == 0.0
    assert hz_to_mel(700.0) == pytest.approx(2595 * np.log10(2))
    f = np.linspace(0, 8000, 50)
    np.testing.assert_allclose(mel_to_hz(hz_to_mel(f)), f, atol=1e-9)


def test_filterbank_shape_and_peaks():
    fb = mel_filterbank(8, 512, SR)
    assert fb.shape == (8, 257)
    assert np.all(fb >= 0) and np.all(fb <= 1)
    assert np.all(fb.max(axis=1) > 0.5)


def test_silence_floor():
    mfcc, mfb = _feats(np.zeros(SR // 2))
    assert mfb.shape[1] == 8 and mfcc.shape[1] == 15
    assert np.all(mfb == np.log(LOG_FLOOR))
    assert np.all(np.abs(mfcc) < 1e-9)


@pytest.mark.parametrize("k", range(8))
def test_tone_at_band_center(k):
    f = mel_band_centers(8, SR)[k]
    _, mfb = _feats(tone(f, 0.3))
    assert np.all(np.argmax(mfb, axis=1) == k)


def test_scaling_shifts_mfb_only():
    x = 0.2 * np.random.default_rng(1).standard_normal(SR // 2)
    mfcc1, mfb1 = _feats(x)
    mfcc2, mfb2 = _feats(2 * x)
    np.testing.assert_allclose(mfb2 - mfb1, np.log(4), atol=1e-9)
    np.testing.assert_allclose(mfcc2, mfcc1, atol=1e-9)


def test_mfcc_against_direct_dct():
    # oracle: textbook pipeline written out longhand
    x = 0.2 * np.random.default_rng(2).standard_normal(SR // 4)
    g = make_grid(x.shape[0], SR)
    frame = x[:400] * (0.54 - 0.46 * np.cos(2 * np.pi * np.arange(400) / 399))
    power = np.abs(np.fft.rfft(frame, 512)) ** 2
    edges_mel = np.linspace(2595 * np.log10(1 + 20 / 700), 2595 * np.log10(1 + 8000 / 700), 28)
    edges = 700 * (10 ** (edges_mel / 2595) - 1)
    freqs = np.arange(257) * SR / 512
    energies = []
    for b in range(26):
        lo, mid, hi = edges[b], edges[b + 1], edges[b + 2]
        w = np.clip(np.minimum((freqs - lo) / (mid - lo), (hi - freqs) / (hi - mid)), 0, None)
        energies.append(np.log(max(power @ w, 1e-10)))
    expect = dct(np.array(energies), type=2, norm="ortho")[1:16]
    mfcc, _ = spectral_features(x, g)
    np.testing.assert_allclose(mfcc[0], expect, atol=1e-9)
