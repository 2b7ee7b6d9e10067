"""Seeded synthetic dyadic corpora with controllable cross-turn coupling.

Feature mode follows the generative story x = F(e, q): each turn has an
entrainable latent ``e`` that evolves across turns and a per-speaker trait
``q`` that does not. The latent of turn t+1 is

    e[t+1] = lam * g(e[t]) + sqrt(1 - lam**2) * xi + sigma * eta

with xi, eta ~ N(0, I) and lam the coupling for the direction of that turn
change. The maps g and F are drawn from ``generator_seed`` so that corpora
with different session seeds share the same "acoustics".

Audio mode renders stereo sessions of harmonic tones whose turn-initial pitch
and level are pulled toward the previous speaker's turn-final values.
"""

from __future__ import annotations

import json
from dataclasses import asdict, dataclass
from pathlib import Path

import numpy as np

from .corpus import PAIRS_FILENAME, Session, TurnVectors, fingerprint, write_pairs_csv
from .schema import TURN_VECTOR_DIM

SPEAKERS = ("A", "B")
MANIFEST_FILENAME = "corpus_manifest.json"
GENERATOR_FILENAME = "generator.json"
RATINGS_FILENAME = "ratings.csv"
G_CLIP = 2.0


class SynthConfigError(ValueError):
    pass


@dataclass
class SynthConfig:
    sessions: int = 100
    turns_per_session: int = 40
    coupling: float = 0.5
    noise_scale: float = 0.1
    latent_dim: int = 30
    observed_dim: int = TURN_VECTOR_DIM
    seed: int = 0
    mode: str = "feature"
    asymmetry: float = 0.0
    coupling_jitter: float = 0.0
    generator_seed: int = 0
    trait_dim: int = 8
    trait_scale: float = 0.3
    observation_noise: float = 0.01
    sample_rate: int = 16000
    noise_floor_db: float = -60.0

    def __post_init__(self):
        if self.sessions < 1 or self.turns_per_session < 2:
            raise SynthConfigError("need sessions >= 1 and turns_per_session >= 2")
        if not 0.0 <= self.coupling <= 1.0:
            raise SynthConfigError(f"coupling must be in [0, 1], got {self.coupling}")
        if not self.noise_scale > 0:
            raise SynthConfigError(f"noise_scale must be > 0, got {self.noise_scale}")
        if not -1.0 <= self.asymmetry <= 1.0:
            raise SynthConfigError(f"asymmetry must be in [-1, 1], got {self.asymmetry}")
        if self.coupling_jitter < 0:
            raise SynthConfigError("coupling_jitter must be >= 0")
        if self.mode not in ("feature", "audio"):
            raise SynthConfigError(f"mode must be 'feature' or 'audio', got {self.mode!r}")
        if self.latent_dim < 1 or self.observed_dim < 1 or self.trait_dim < 1:
            raise SynthConfigError("dimensions must be positive")


def directional_couplings(coupling: float, asymmetry: float) -> dict[str, float]:
    """Coupling applied on A->B and on B->A turn changes, clamped to [0, 1]."""
    return {
        "A->B": float(np.clip(coupling * (1.0 + asymmetry), 0.0, 1.0)),
        "B->A": float(np.clip(coupling * (1.0 - asymmetry), 0.0, 1.0)),
    }


@dataclass
class GeneratorParams:
    g_weights: np.ndarray  # (latent, latent)
    f_latent: np.ndarray  # (observed, latent)
    f_trait: np.ndarray  # (observed, trait)
    f_bias: np.ndarray  # (observed,)

    @classmethod
    def draw(cls, latent_dim: int, observed_dim: int, trait_dim: int, seed: int) -> "GeneratorParams":
        rng = np.random.default_rng(seed)
        # near-identity mixing keeps consecutive latents comparable under g
        g = np.eye(latent_dim) + 0.3 * rng.standard_normal((latent_dim, latent_dim)) / np.sqrt(latent_dim)
        f_latent = rng.standard_normal((observed_dim, latent_dim)) / np.sqrt(latent_dim)
        f_trait = rng.standard_normal((observed_dim, trait_dim)) / np.sqrt(trait_dim)
        f_bias = 0.1 * rng.standard_normal(observed_dim)
        return cls(g, f_latent, f_trait, f_bias)

    def g(self, e: np.ndarray) -> np.ndarray:
        # soft-clipped at +-G_CLIP so unit-variance latents keep roughly unit variance
        return G_CLIP * np.tanh(e @ self.g_weights.T / G_CLIP)

    def observe(self, e: np.ndarray, q: np.ndarray) -> np.ndarray:
        return np.tanh(e @ self.f_latent.T + q @ self.f_trait.T + self.f_bias)

    def to_dict(self) -> dict:
        return {k: v.tolist() for k, v in asdict(self).items()}


@dataclass
class FeatureCorpus:
    config: SynthConfig
    params: GeneratorParams
    sessions: list[Session]
    latents: list[np.ndarray]  # per session, (turns, latent_dim)
    session_couplings: list[float]

    def manifest(self) -> dict:
        return {
            "config": asdict(self.config),
            "fingerprint": fingerprint(self.sessions),
            "sessions": [
                {
                    "session_id": s.session_id,
                    "coupling": lam,
                    "directional_coupling": directional_couplings(lam, self.config.asymmetry),
                    "turns": len(s.turns),
                }
                for s, lam in zip(self.sessions, self.session_couplings)
            ],
        }


def session_rng(seed: int, index: int) -> np.random.Generator:
    return np.random.default_rng([seed, index])


def gen_feature_corpus(config: SynthConfig) -> FeatureCorpus:
    params = GeneratorParams.draw(config.latent_dim, config.observed_dim, config.trait_dim, config.generator_seed)
    sessions, latents, couplings = [], [], []
    for i in range(config.sessions):
        rng = session_rng(config.seed, i)
        lam = config.coupling
        if config.coupling_jitter > 0:
            lam = float(np.clip(lam + rng.uniform(-config.coupling_jitter, config.coupling_jitter), 0.0, 1.0))
        lam_dir = directional_couplings(lam, config.asymmetry)
        traits = {spk: config.trait_scale * rng.standard_normal(config.trait_dim) for spk in SPEAKERS}
        n = config.turns_per_session
        e = np.empty((n, config.latent_dim))
        e[0] = rng.standard_normal(config.latent_dim)
        speakers = [SPEAKERS[t % 2] for t in range(n)]
        for t in range(1, n):
            lam_t = lam_dir[f"{speakers[t - 1]}->{speakers[t]}"]
            xi = rng.standard_normal(config.latent_dim)
            eta = rng.standard_normal(config.latent_dim)
            e[t] = lam_t * params.g(e[t - 1]) + np.sqrt(1.0 - lam_t**2) * xi + config.noise_scale * eta
        q = np.stack([traits[s] for s in speakers])
        x = params.observe(e, q) + config.observation_noise * rng.standard_normal((n, config.observed_dim))
        turns = [TurnVectors(speakers[t], x[t], x[t], t) for t in range(n)]
        sessions.append(Session(f"s{i:04d}", turns))
        latents.append(e)
        couplings.append(lam)
    return FeatureCorpus(config, params, sessions, latents, couplings)


def synth_ratings(corpus: FeatureCorpus, noise: float = 0.5, sign: float = 1.0, seed: int = 0) -> dict[str, float]:
    """Session ratings on a 1-10 scale that rise (sign=+1) or fall with coupling."""
    rng = np.random.default_rng([seed, 7])
    out = {}
    for s, lam in zip(corpus.sessions, corpus.session_couplings):
        centre = 1.0 + 9.0 * (lam if sign > 0 else 1.0 - lam)
        out[s.session_id] = float(np.clip(centre + noise * rng.standard_normal(), 1.0, 10.0))
    return out


def write_ratings_csv(path, ratings: dict[str, float]) -> None:
    with open(path, "w") as fh:
        fh.write("session_id,rating\n")
        for sid, r in ratings.items():
            fh.write(f"{sid},{format(r, '.17g')}\n")


def write_feature_corpus(corpus: FeatureCorpus, out_dir, ratings: dict[str, float] | None = None) -> dict:
    """Write ``pairs.csv``, ``generator.json`` and ``corpus_manifest.json``."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    rows = write_pairs_csv(out / PAIRS_FILENAME, corpus.sessions)
    (out / GENERATOR_FILENAME).write_text(json.dumps(corpus.params.to_dict()) + "\n")
    manifest = corpus.manifest()
    manifest["pair_rows"] = rows
    manifest["files"] = [PAIRS_FILENAME, GENERATOR_FILENAME, MANIFEST_FILENAME]
    if ratings is not None:
        write_ratings_csv(out / RATINGS_FILENAME, ratings)
        manifest["files"].append(RATINGS_FILENAME)
    (out / MANIFEST_FILENAME).write_text(json.dumps(manifest, indent=1, sort_keys=True) + "\n")
    return manifest


# ---------------------------------------------------------------- audio mode

AUDIO_F0_RANGE = (120.0, 280.0)
SPEAKER_F0_BASE = {"A": 150.0, "B": 230.0}
SPEAKER_F0_SPREAD = 20.0
IPU_F0_DRIFT = 6.0
LEVEL_DB_BASE = -14.0
LEVEL_DB_SPREAD = 3.0
IPU_DURATION_S = (0.35, 0.6)
PAUSE_S = (0.06, 0.12)
TURN_GAP_S = (0.25, 0.4)
LEAD_SILENCE_S = 0.3
HARMONICS = 6
FADE_S = 0.01


@dataclass
class IpuSpec:
    start_s: float
    end_s: float
    f0: float
    level_db: float


@dataclass
class AudioSession:
    session_id: str
    audio: "AudioBuffer"
    annotations: list
    ipus: list[tuple[str, list[IpuSpec]]]  # per turn: speaker, IPUs

    def ground_truth(self) -> list[dict]:
        return [
            {"speaker": spk, "ipus": [asdict(u) for u in ipus]}
            for spk, ipus in self.ipus
        ]


def harmonic_tone(f0: float, level_db: float, n: int, sample_rate: int, phase: float = 0.0) -> np.ndarray:
    """Harmonic complex with 1/k partials at RMS ``level_db`` dBFS and short fades."""
    t = np.arange(n) / sample_rate
    x = np.zeros(n)
    for k in range(1, HARMONICS + 1):
        if k * f0 >= sample_rate / 2:
            break
        x += np.sin(2 * np.pi * k * f0 * t + k * phase) / k
    x *= 10 ** (level_db / 20) / np.sqrt(np.mean(x**2))
    nf = min(int(FADE_S * sample_rate), n // 2)
    if nf:
        ramp = 0.5 - 0.5 * np.cos(np.pi * np.arange(nf) / nf)
        x[:nf] *= ramp
        x[n - nf :] *= ramp[::-1]
    return x


def gen_audio_session(config: SynthConfig, index: int = 0) -> AudioSession:
    """Stereo session of alternating harmonic-tone turns (A on channel 0, B on 1).

    Each IPU holds a constant f0. A turn's first IPU takes
    lam * (previous turn's final value) + (1 - lam) * (own draw) for both
    f0 and level, with lam the coupling of that turn change.
    """
    from .audio import AudioBuffer
    from .segmentation import Annotation

    rng = session_rng(config.seed, index)
    sr = config.sample_rate
    lam_dir = directional_couplings(config.coupling, config.asymmetry)
    lo, hi = AUDIO_F0_RANGE

    turns: list[tuple[str, list[IpuSpec]]] = []
    cursor = LEAD_SILENCE_S
    prev: IpuSpec | None = None
    for t in range(config.turns_per_session):
        spk = SPEAKERS[t % 2]
        own_f0 = SPEAKER_F0_BASE[spk] + SPEAKER_F0_SPREAD * rng.standard_normal()
        own_db = LEVEL_DB_BASE + LEVEL_DB_SPREAD * rng.standard_normal()
        if prev is None:
            f0, db = own_f0, own_db
        else:
            lam = lam_dir[f"{SPEAKERS[(t - 1) % 2]}->{spk}"]
            f0 = lam * prev.f0 + (1.0 - lam) * own_f0
            db = lam * prev.level_db + (1.0 - lam) * own_db
        n_ipus = int(rng.integers(1, 4))
        ipus = []
        for k in range(n_ipus):
            if k:
                cursor += rng.uniform(*PAUSE_S)
                f0 += IPU_F0_DRIFT * rng.standard_normal()
                db += 1.0 * rng.standard_normal()
            dur = rng.uniform(*IPU_DURATION_S)
            ipus.append(IpuSpec(round(cursor, 4), round(cursor + dur, 4), float(np.clip(f0, lo, hi)), float(min(db, -6.0))))
            cursor = ipus[-1].end_s
        turns.append((spk, ipus))
        prev = ipus[-1]
        cursor += rng.uniform(*TURN_GAP_S)

    n = int(np.ceil((cursor + LEAD_SILENCE_S) * sr))
    floor = 10 ** (config.noise_floor_db / 20)
    samples = floor * rng.standard_normal((n, 2))
    annotations = []
    for spk, ipus in turns:
        ch = SPEAKERS.index(spk)
        for u in ipus:
            a, b = int(round(u.start_s * sr)), int(round(u.end_s * sr))
            samples[a:b, ch] += harmonic_tone(u.f0, u.level_db, b - a, sr, rng.uniform(0, 2 * np.pi))
        pauses = [(x.end_s, y.start_s) for x, y in zip(ipus[:-1], ipus[1:])]
        annotations.append(Annotation(spk, ipus[0].start_s, ipus[-1].end_s, pauses))
    samples = np.clip(samples, -1.0, 1.0 - 1.0 / 32768)
    return AudioSession(f"s{index:04d}", AudioBuffer(samples, sr), annotations, turns)


def write_audio_corpus(config: SynthConfig, out_dir) -> dict:
    """One ``<session>.wav`` plus ``<session>.jsonl`` per session, and a manifest."""
    from .audio import write_wav
    from .segmentation import write_annotations

    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    entries = []
    for i in range(config.sessions):
        s = gen_audio_session(config, i)
        write_wav(out / f"{s.session_id}.wav", s.audio)
        write_annotations(out / f"{s.session_id}.jsonl", s.annotations)
        entries.append({
            "session_id": s.session_id,
            "coupling": config.coupling,
            "directional_coupling": directional_couplings(config.coupling, config.asymmetry),
            "turns": s.ground_truth(),
        })
    manifest = {"config": asdict(config), "sessions": entries}
    (out / MANIFEST_FILENAME).write_text(json.dumps(manifest, indent=1, sort_keys=True) + "\n")
    return manifest
