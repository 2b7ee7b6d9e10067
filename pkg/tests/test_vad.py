import numpy as np
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import SR, noise, tone
from nedkit.dsp.framing import make_grid
from nedkit.dsp.vad import VadConfig, detect_voice_activity


def _vad(x, **kw):
    return detect_voice_activity(x, make_grid(x.shape[0], SR), 0, VadConfig(**kw))


def test_digital_silence():
    assert _vad(np.zeros(SR)) == []


def test_padded_tone_boundaries():
    x = np.concatenate([noise(0.5, seed=1), tone(440, 0.5, db=-6), noise(0.5, seed=2)])
    segs = _vad(x)
    assert len(segs) == 1
    assert abs(segs[0].start_s - 0.5) <= 0.02
    assert abs(segs[0].end_s - 1.0) <= 0.02
    assert segs[0].channel == 0


def test_short_gap_bridged():
    x = np.concatenate([noise(0.5, seed=1), tone(300, 0.3), np.zeros(int(0.03 * SR)), tone(300, 0.3), noise(0.5, seed=2)])
    assert len(_vad(x)) == 1


def test_long_gap_splits_and_short_burst_dropped():
    x = np.concatenate([noise(0.5, seed=1), tone(300, 0.3), noise(0.2, seed=3), tone(300, 0.3), noise(0.5, seed=2)])
    assert len(_vad(x)) == 2
    y = np.concatenate([noise(0.5, seed=1), tone(300, 0.05), noise(0.5, seed=2)])
    assert _vad(y) == []


def test_segments_sorted_disjoint():
    rng = np.random.default_rng(4)
    parts = []
    for _ in range(8):
        parts.append(noise(rng.uniform(0.1, 0.4), seed=int(rng.integers(1 << 30))))
        parts.append(tone(rng.uniform(100, 400), rng.uniform(0.05, 0.5)))
    segs = _vad(np.concatenate(parts + [noise(0.3)]))
    for a, b in zip(segs[:-1], segs[1:]):
        assert a.end_s < b.start_s
    assert all(s.end_s > s.start_s for s in segs)


@settings(max_examples=20, deadline=None)
@given(st.integers(0, 10_000))
def test_gain_invariance(seed):
    rng = np.random.default_rng(seed)
    parts = []
    for _ in range(4):
        parts.append(noise(rng.uniform(0.1, 0.5), db=-50, seed=int(rng.integers(1 << 30))))
        parts.append(tone(rng.uniform(100, 400), rng.uniform(0.05, 0.5), db=rng.uniform(-30, -12)))
    x = np.concatenate(parts)
    assert _vad(x) == _vad(2.0 * x)
