"""Sessions of turn-level vectors and the pair-cache CSV format.

A session is stored as its turns: each turn carries the turn-level vector of
its initial IPU and of its final IPU. Consecutive-turn pairs are derived on
demand, so shuffled (fake) sessions can be rebuilt from the same turns.
"""

from __future__ import annotations

import csv
import hashlib
from dataclasses import dataclass
from pathlib import Path

import numpy as np

PAIRS_FILENAME = "pairs.csv"


class CorpusFormatError(ValueError):
    """Malformed pair cache or inconsistent session data."""


@dataclass
class TurnVectors:
    speaker: str
    initial: np.ndarray
    final: np.ndarray
    turn_index: int = 0


@dataclass
class TurnPair:
    session_id: str
    pair_index: int
    source: str  # speaker of turn t
    target: str  # speaker of turn t+1
    x1: np.ndarray  # final IPU of turn t
    x2: np.ndarray  # initial IPU of turn t+1

    @property
    def direction(self) -> str:
        return format_direction(self.source, self.target)


def format_direction(source: str, target: str) -> str:
    return f"{source}->{target}"


def parse_direction(text: str) -> tuple[str, str]:
    parts = text.split("->")
    if len(parts) != 2 or not parts[0] or not parts[1]:
        raise CorpusFormatError(f"bad direction {text!r}, expected 'A->B'")
    return parts[0], parts[1]


@dataclass
class Session:
    session_id: str
    turns: list[TurnVectors]

    @property
    def dim(self) -> int:
        return int(self.turns[0].final.shape[0])

    def pairs(self, order=None) -> list[TurnPair]:
        """Consecutive-turn pairs, optionally under a permutation of the turns."""
        turns = self.turns if order is None else [self.turns[i] for i in order]
        return [
            TurnPair(self.session_id, k, a.speaker, b.speaker, a.final, b.initial)
            for k, (a, b) in enumerate(zip(turns[:-1], turns[1:]))
        ]

    def pair_arrays(self) -> tuple[np.ndarray, np.ndarray]:
        """``(X1, X2)`` stacked over the session's pairs."""
        if len(self.turns) < 2:
            d = self.dim if self.turns else 0
            return np.zeros((0, d)), np.zeros((0, d))
        x1 = np.stack([t.final for t in self.turns[:-1]])
        x2 = np.stack([t.initial for t in self.turns[1:]])
        return x1, x2

    def speakers(self) -> list[str]:
        return [t.speaker for t in self.turns]


def stack_pairs(sessions) -> tuple[np.ndarray, np.ndarray]:
    xs1, xs2 = [], []
    for s in sessions:
        x1, x2 = s.pair_arrays()
        xs1.append(x1)
        xs2.append(x2)
    if not xs1:
        return np.zeros((0, 0)), np.zeros((0, 0))
    return np.concatenate(xs1), np.concatenate(xs2)


def fingerprint(sessions) -> str:
    """SHA-256 over session ids, speakers and turn vectors."""
    h = hashlib.sha256()
    for s in sessions:
        h.update(s.session_id.encode())
        for t in s.turns:
            h.update(t.speaker.encode())
            h.update(np.ascontiguousarray(t.initial, dtype="<f8").tobytes())
            h.update(np.ascontiguousarray(t.final, dtype="<f8").tobytes())
    return h.hexdigest()


def pair_header(dim: int) -> list[str]:
    return (
        ["session_id", "direction"]
        + [f"x1_{i}" for i in range(dim)]
        + [f"x2_{i}" for i in range(dim)]
    )


def write_pairs_csv(path, sessions) -> int:
    """Write every consecutive pair of every session; returns the row count.

    Values are written with 17 significant digits so the cache round-trips
    float64 exactly.
    """
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    sessions = list(sessions)
    dim = next((s.dim for s in sessions if s.turns), 0)
    rows = 0
    with open(path, "w", newline="") as fh:
        fh.write(",".join(pair_header(dim)) + "\n")
        for s in sessions:
            for p in s.pairs():
                vals = ",".join(format(float(v), ".17g") for v in np.concatenate([p.x1, p.x2]))
                fh.write(f"{s.session_id},{p.direction},{vals}\n")
                rows += 1
    return rows


def read_pairs_csv(path) -> list[Session]:
    """Rebuild sessions from a pair cache.

    Interior turns are recovered exactly (initial IPU from the preceding pair,
    final IPU from the following pair). The first turn's initial vector and
    the last turn's final vector are not stored; each is filled with the
    turn's other vector.
    """
    path = Path(path)
    if not path.exists():
        raise FileNotFoundError(f"pair cache not found: {path}")
    by_session: dict[str, list[tuple[str, str, np.ndarray, np.ndarray]]] = {}
    order: list[str] = []
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise CorpusFormatError(f"{path}: empty pair cache") from None
        if len(header) < 4 or header[:2] != ["session_id", "direction"] or (len(header) - 2) % 2:
            raise CorpusFormatError(f"{path}: bad pair-cache header")
        dim = (len(header) - 2) // 2
        if header[2:] != pair_header(dim)[2:]:
            raise CorpusFormatError(f"{path}: bad pair-cache header")
        for lineno, row in enumerate(reader, start=2):
            if not row:
                continue
            if len(row) != len(header):
                raise CorpusFormatError(f"{path}:{lineno}: expected {len(header)} fields, got {len(row)}")
            sid = row[0]
            src, dst = parse_direction(row[1])
            try:
                vals = np.array([float(v) for v in row[2:]])
            except ValueError as exc:
                raise CorpusFormatError(f"{path}:{lineno}: {exc}") from None
            if not np.all(np.isfinite(vals)):
                raise CorpusFormatError(f"{path}:{lineno}: non-finite value")
            if sid not in by_session:
                by_session[sid] = []
                order.append(sid)
            by_session[sid].append((src, dst, vals[:dim], vals[dim:]))

    sessions = []
    for sid in order:
        rows = by_session[sid]
        for (_, dst, _, _), (src, _, _, _) in zip(rows[:-1], rows[1:]):
            if dst != src:
                raise CorpusFormatError(f"{path}: session {sid} pairs do not chain ({dst} then {src})")
        turns = [TurnVectors(rows[0][0], rows[0][2].copy(), rows[0][2].copy(), 0)]
        for k, (_, dst, _, x2) in enumerate(rows):
            final = rows[k + 1][2] if k + 1 < len(rows) else x2
            turns.append(TurnVectors(dst, x2, final, k + 1))
        sessions.append(Session(sid, turns))
    return sessions


def resolve_pairs_path(path) -> Path:
    """Accept either a corpus directory or a pair-cache file."""
    path = Path(path)
    if path.is_dir():
        path = path / PAIRS_FILENAME
    return path
