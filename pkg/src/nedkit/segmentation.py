"""Turns, inter-pausal units and 228-dimensional turn-level vectors."""

from __future__ import annotations

import json
import logging
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .corpus import Session, TurnPair, TurnVectors
from .dsp.features import FeatureMatrix
from .dsp.vad import VadSegment

log = logging.getLogger(__name__)

PAUSE_THRESHOLD_S = 0.050
_TOL = 1e-9


class AnnotationError(ValueError):
    pass


@dataclass
class Annotation:
    speaker: str
    start_s: float
    end_s: float
    pauses: list[tuple[float, float]] = field(default_factory=list)

    def to_json(self) -> str:
        d = {"speaker": self.speaker, "start_s": self.start_s, "end_s": self.end_s}
        if self.pauses:
            d["pauses"] = [list(p) for p in self.pauses]
        return json.dumps(d)


@dataclass
class IPU:
    start_s: float
    end_s: float
    frame_range: tuple[int, int] | None = None  # inclusive frame indices

    @property
    def duration_s(self) -> float:
        return self.end_s - self.start_s


@dataclass
class Turn:
    speaker: str
    start_s: float
    end_s: float
    pauses: list[tuple[float, float]] = field(default_factory=list)
    ipus: list[IPU] = field(default_factory=list)


@dataclass
class SegmentationReport:
    session_id: str
    turns: int = 0
    dropped_turns: int = 0
    ipus: int = 0
    pairs: int = 0
    rejected: bool = False
    reason: str = ""


def parse_annotation(obj: dict, where: str = "") -> Annotation:
    try:
        speaker = str(obj["speaker"])
        start, end = float(obj["start_s"]), float(obj["end_s"])
        pauses = [(float(a), float(b)) for a, b in obj.get("pauses", [])]
    except (KeyError, TypeError, ValueError) as exc:
        raise AnnotationError(f"{where}bad turn annotation {obj!r}: {exc}") from None
    if not end > start:
        raise AnnotationError(f"{where}end_s must exceed start_s in {obj!r}")
    for a, b in pauses:
        if not b > a:
            raise AnnotationError(f"{where}pause end must exceed start in {obj!r}")
    return Annotation(speaker, start, end, pauses)


def read_annotations(path) -> list[Annotation]:
    """JSON Lines: one ``{"speaker", "start_s", "end_s", "pauses"?}`` object per line."""
    path = Path(path)
    out = []
    with open(path) as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.strip()
            if not line:
                continue
            try:
                obj = json.loads(line)
            except json.JSONDecodeError as exc:
                raise AnnotationError(f"{path}:{lineno}: {exc.msg}") from None
            if not isinstance(obj, dict):
                raise AnnotationError(f"{path}:{lineno}: expected a JSON object")
            out.append(parse_annotation(obj, f"{path}:{lineno}: "))
    return out


def write_annotations(path, annotations) -> None:
    with open(path, "w") as fh:
        for a in annotations:
            fh.write(a.to_json() + "\n")


def annotations_from_vad(segments_by_speaker: dict[str, list[VadSegment]]) -> list[Annotation]:
    """One annotation per VAD segment; gaps inside merged turns become pauses."""
    anns = [Annotation(spk, s.start_s, s.end_s) for spk, segs in segments_by_speaker.items() for s in segs]
    return sorted(anns, key=lambda a: (a.start_s, a.end_s, a.speaker))


def build_turns(annotations, features: dict[str, FeatureMatrix] | None = None, pause_threshold_s: float = PAUSE_THRESHOLD_S) -> list[Turn]:
    """Merge runs of same-speaker annotations into alternating turns.

    With ``features`` (speaker -> frame matrix), each turn's IPUs are
    computed against that speaker's frames.
    """
    turns: list[Turn] = []
    for a in sorted(annotations, key=lambda a: (a.start_s, a.end_s)):
        if turns and turns[-1].speaker == a.speaker:
            t = turns[-1]
            if a.start_s > t.end_s:
                t.pauses.append((t.end_s, a.start_s))
            t.pauses.extend(a.pauses)
            t.end_s = max(t.end_s, a.end_s)
        else:
            turns.append(Turn(a.speaker, a.start_s, a.end_s, list(a.pauses)))
    for t in turns:
        fm = None if features is None else features.get(t.speaker)
        t.ipus = split_ipus(t, fm, pause_threshold_s)
    return turns


def split_ipus(turn: Turn, features: FeatureMatrix | None = None, pause_threshold_s: float = PAUSE_THRESHOLD_S) -> list[IPU]:
    """Split a turn at every pause of at least ``pause_threshold_s``.

    When ``features`` is given, IPUs without a complete frame are dropped.
    """
    cuts = []
    for a, b in sorted(turn.pauses):
        a, b = max(a, turn.start_s), min(b, turn.end_s)
        if b - a >= pause_threshold_s - _TOL:
            cuts.append((a, b))
    spans = []
    cursor = turn.start_s
    for a, b in cuts:
        if a > cursor:
            spans.append((cursor, a))
        cursor = max(cursor, b)
    if turn.end_s > cursor:
        spans.append((cursor, turn.end_s))

    ipus = []
    for s, e in spans:
        if features is None:
            ipus.append(IPU(s, e))
            continue
        idx = features.frames_within(s, e)
        if idx.size:
            ipus.append(IPU(s, e, (int(idx[0]), int(idx[-1]))))
    return ipus


def functionals(frames) -> np.ndarray:
    """Mean, median, population std, p1, p99 and p99-p1 of every column.

    Functional-major layout: all 38 means, then all medians, and so on.
    Percentiles interpolate linearly between order statistics at p*(N-1).
    """
    f = np.asarray(frames, dtype=np.float64)
    if f.ndim == 1:
        f = f[:, None]
    if f.shape[0] == 0:
        raise ValueError("functionals need at least one frame")
    p1, p99 = np.percentile(f, [1.0, 99.0], axis=0)
    return np.concatenate([f.mean(axis=0), np.median(f, axis=0), f.std(axis=0), p1, p99, p99 - p1])


def ipu_vector(features: FeatureMatrix, ipu: IPU) -> np.ndarray:
    first, last = ipu.frame_range
    return functionals(features.values[first : last + 1])


def turn_vectors(turns: list[Turn], features: dict[str, FeatureMatrix]) -> tuple[list[TurnVectors], int]:
    """Initial- and final-IPU vectors per turn.

    Turns left without IPUs are dropped; the same-speaker neighbours this
    leaves adjacent are merged so the turn sequence still alternates.
    Returns the vectors and the number of dropped turns.
    """
    kept: list[TurnVectors] = []
    dropped = 0
    for t in turns:
        if not t.ipus:
            dropped += 1
            continue
        fm = features[t.speaker]
        initial = ipu_vector(fm, t.ipus[0])
        final = initial if len(t.ipus) == 1 else ipu_vector(fm, t.ipus[-1])
        if kept and kept[-1].speaker == t.speaker:
            kept[-1].final = final
        else:
            kept.append(TurnVectors(t.speaker, initial, final, len(kept)))
    for i, t in enumerate(kept):
        t.turn_index = i
    return kept, dropped


def build_session(session_id: str, annotations, features: dict[str, FeatureMatrix], pause_threshold_s: float = PAUSE_THRESHOLD_S):
    """Turns -> IPUs -> vectors for one session. Returns ``(Session | None, report)``."""
    report = SegmentationReport(session_id)
    turns = build_turns(annotations, features, pause_threshold_s)
    missing = {t.speaker for t in turns} - set(features)
    if missing:
        raise AnnotationError(f"no features for speakers {sorted(missing)}")
    vecs, dropped = turn_vectors(turns, features)
    report.turns = len(vecs)
    report.dropped_turns = dropped
    report.ipus = sum(len(t.ipus) for t in turns)
    if len(vecs) < 2:
        report.rejected = True
        report.reason = f"fewer than 2 turns ({len(vecs)})"
        log.warning("session %s rejected for pairing: %s", session_id, report.reason)
        return None, report
    session = Session(session_id, vecs)
    report.pairs = len(vecs) - 1
    return session, report


def build_pairs(session: Session) -> list[TurnPair]:
    """One pair per turn change: final IPU of turn t with initial IPU of turn t+1."""
    return session.pairs()
