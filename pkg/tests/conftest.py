import numpy as np
import pytest

from nedkit.neural import TrainConfig, train
from nedkit.synth import SynthConfig, gen_feature_corpus

SR = 16000


def tone(freq, seconds, sr=SR, db=-6.0, phase=0.0):
    t = np.arange(int(round(seconds * sr))) / sr
    return 10 ** (db / 20) * np.sqrt(2) * np.sin(2 * np.pi * freq * t + phase)


def noise(seconds, db=-60.0, sr=SR, seed=0):
    return 10 ** (db / 20) * np.random.default_rng(seed).standard_normal(int(round(seconds * sr)))


@pytest.fixture(scope="session")
def small_checkpoint():
    """Quick full-width model on a modest coupled corpus."""
    corpus = gen_feature_corpus(SynthConfig(sessions=40, turns_per_session=20, coupling=0.7, seed=101))
    return train(corpus.sessions, TrainConfig(seed=5, max_epochs=15, patience=5))


@pytest.fixture(scope="session")
def checkpoint_lam05():
    """Full-size model trained on a 200-session corpus at coupling 0.5."""
    corpus = gen_feature_corpus(SynthConfig(sessions=200, turns_per_session=40, coupling=0.5, seed=1))
    return train(corpus.sessions, TrainConfig(seed=1))
