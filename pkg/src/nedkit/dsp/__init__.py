"""Frame-level acoustic front end: framing, VAD, pitch, spectra, LSFs, voice quality."""

from .features import (
    FeatureMatrix,
    NormalizationStats,
    extract_features,
    extract_from_samples,
    normalize_session,
    read_feature_csv,
    write_feature_csv,
)
from .framing import FrameGrid, delta, frame_signal, make_grid, rms_energy
from .lpc import levinson_durbin, lpc_to_lsf, lsf_features, lsf_to_lpc
from .pitch import PitchConfig, median_smooth, pitch_track
from .spectral import spectral_features
from .vad import VadConfig, VadSegment, detect_voice_activity
from .voice import voice_quality

__all__ = [
    "FeatureMatrix",
    "FrameGrid",
    "NormalizationStats",
    "PitchConfig",
    "VadConfig",
    "VadSegment",
    "delta",
    "detect_voice_activity",
    "extract_features",
    "extract_from_samples",
    "frame_signal",
    "levinson_durbin",
    "lpc_to_lsf",
    "lsf_features",
    "lsf_to_lpc",
    "make_grid",
    "median_smooth",
    "normalize_session",
    "pitch_track",
    "read_feature_csv",
    "rms_energy",
    "spectral_features",
    "voice_quality",
    "write_feature_csv",
]
