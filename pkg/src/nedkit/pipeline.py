"""Audio + turn annotations -> normalized features -> turn-pair session."""

from __future__ import annotations

from dataclasses import dataclass, field

from .audio import AudioBuffer
from .dsp.features import FeatureMatrix, NormalizationStats, extract_features, normalize_session
from .dsp.framing import frame_signal
from .dsp.pitch import PitchConfig
from .dsp.vad import VadConfig, detect_voice_activity
from .segmentation import PAUSE_THRESHOLD_S, Annotation, SegmentationReport, annotations_from_vad, build_session

DEFAULT_CHANNEL_MAP = {"A": 0, "B": 1}


@dataclass
class ExtractedSession:
    session_id: str
    session: object  # Session | None
    report: SegmentationReport
    raw: dict[str, FeatureMatrix]
    normalized: dict[str, FeatureMatrix]
    stats: dict[str, NormalizationStats]
    annotations: list[Annotation] = field(default_factory=list)


def parse_channel_map(text: str) -> dict[str, int]:
    """``"A=0,B=1"`` -> ``{"A": 0, "B": 1}``."""
    out = {}
    for item in text.split(","):
        spk, sep, ch = item.partition("=")
        if not sep or not spk.strip():
            raise ValueError(f"bad channel map entry {item!r}; expected SPEAKER=CHANNEL")
        out[spk.strip()] = int(ch)
    return out


def vad_annotations(audio: AudioBuffer, channel_map: dict[str, int], vad: VadConfig = VadConfig()) -> list[Annotation]:
    """Turn annotations derived from per-channel voice activity."""
    segments = {}
    for spk, ch in channel_map.items():
        grid = frame_signal(audio, ch)
        segments[spk] = detect_voice_activity(audio.channel(ch), grid, ch, vad)
    return annotations_from_vad(segments)


def process_session(
    session_id: str,
    audio: AudioBuffer,
    annotations: list[Annotation] | None = None,
    channel_map: dict[str, int] | None = None,
    vad: VadConfig = VadConfig(),
    pitch: PitchConfig = PitchConfig(),
    pause_threshold_s: float = PAUSE_THRESHOLD_S,
) -> ExtractedSession:
    """Extract and normalize each speaker's channel, then build the turn pairs."""
    channel_map = dict(DEFAULT_CHANNEL_MAP if channel_map is None else channel_map)
    if audio.channel_count == 1:
        channel_map = {spk: 0 for spk in channel_map}
    for spk, ch in channel_map.items():
        if not 0 <= ch < audio.channel_count:
            raise ValueError(f"speaker {spk} mapped to channel {ch}, audio has {audio.channel_count}")
    if annotations is None:
        annotations = vad_annotations(audio, channel_map, vad)
    unknown = {a.speaker for a in annotations} - set(channel_map)
    if unknown:
        raise ValueError(f"annotated speakers {sorted(unknown)} have no channel mapping")

    raw, normed, stats = {}, {}, {}
    for spk, ch in channel_map.items():
        raw[spk] = extract_features(audio, ch, vad, pitch)
        normed[spk], stats[spk] = normalize_session(raw[spk])
    session, report = build_session(session_id, annotations, normed, pause_threshold_s)
    return ExtractedSession(session_id, session, report, raw, normed, stats, list(annotations))
