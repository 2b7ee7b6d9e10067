"""Real-vs-fake session classification and correlation with session ratings."""

from __future__ import annotations

import csv
import logging
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .corpus import Session, format_direction
from .ned import PcaModel, cosine_rows, encode, ned_from_embeddings, pca_fit
from .neural.checkpoint import Checkpoint
from .neural.network import smooth_l1_elementwise
from .stats import CorrelationResult, DegenerateInputError, pearson

log = logging.getLogger(__name__)

MEASURES = ("ned", "baseline1", "baseline2")
SIMILARITY_MEASURES = frozenset({"baseline2"})
MAX_FAKE_TRIES = 10


@dataclass
class SessionScore:
    session_id: str
    direction: str
    pair_scores: np.ndarray

    @property
    def mean(self) -> float:
        return float(np.mean(self.pair_scores))

    @property
    def n_pairs(self) -> int:
        return int(self.pair_scores.shape[0])


class _TurnTable:
    """Per-turn representations of one session for one measure."""

    def __init__(self, session: Session, initial: np.ndarray, final: np.ndarray, kind: str):
        self.session = session
        self.initial = initial
        self.final = final
        self.kind = kind
        self.speakers = session.speakers()

    def pair_scores(self, order=None) -> np.ndarray:
        o = np.arange(len(self.speakers)) if order is None else np.asarray(order)
        a = self.final[o[:-1]]
        b = self.initial[o[1:]]
        if self.kind == "similarity":
            return cosine_rows(a, b)
        return np.sum(smooth_l1_elementwise(a - b), axis=1)

    def directions(self, order=None) -> list[str]:
        o = range(len(self.speakers)) if order is None else order
        spk = [self.speakers[i] for i in o]
        return [format_direction(a, b) for a, b in zip(spk[:-1], spk[1:])]


def _turn_matrices(session: Session) -> tuple[np.ndarray, np.ndarray]:
    return np.stack([t.initial for t in session.turns]), np.stack([t.final for t in session.turns])


def turn_tables(measure: str, sessions, checkpoint: Checkpoint | None = None, pca: PcaModel | None = None) -> list[_TurnTable]:
    out = []
    for s in sessions:
        xi, xf = _turn_matrices(s)
        if measure == "ned":
            if checkpoint is None:
                raise ValueError("the ned measure needs a checkpoint")
            out.append(_TurnTable(s, encode(checkpoint, xi), encode(checkpoint, xf), "distance"))
        elif measure == "baseline1":
            out.append(_TurnTable(s, xi, xf, "distance"))
        elif measure == "baseline2":
            if pca is None:
                raise ValueError("baseline2 needs a fitted PCA model")
            out.append(_TurnTable(s, pca.project(xi), pca.project(xf), "similarity"))
        else:
            raise ValueError(f"unknown measure {measure!r}; choose from {MEASURES}")
    return out


def fit_pca_on_sessions(sessions, k: int = 10) -> PcaModel:
    """PCA over every distinct turn-level vector in the sessions."""
    rows = []
    for s in sessions:
        for t in s.turns:
            rows.append(t.initial)
            if t.final is not t.initial and not np.array_equal(t.final, t.initial):
                rows.append(t.final)
    return pca_fit(np.stack(rows), k)


def session_ned(checkpoint: Checkpoint, session: Session, direction: str = "all") -> SessionScore:
    """Mean NED over the session's consecutive pairs, optionally one direction only."""
    table = turn_tables("ned", [session], checkpoint)[0]
    scores = table.pair_scores()
    if direction != "all":
        keep = np.array([d == direction for d in table.directions()], dtype=bool)
        scores = scores[keep]
    if scores.shape[0] == 0:
        raise DegenerateInputError(f"session {session.session_id} has no {direction} pairs")
    return SessionScore(session.session_id, direction, scores)


def fake_order(speakers: list[str], rng: np.random.Generator, within_speaker: bool = False) -> np.ndarray:
    """Random non-identity turn order (identity resampled, at most 10 draws)."""
    n = len(speakers)
    identity = np.arange(n)
    order = identity
    for _ in range(MAX_FAKE_TRIES):
        if within_speaker:
            order = identity.copy()
            for spk in sorted(set(speakers)):
                slots = np.flatnonzero(np.array(speakers) == spk)
                order[slots] = slots[rng.permutation(slots.shape[0])]
        else:
            order = rng.permutation(n)
        if not np.array_equal(order, identity):
            break
    return order


def make_fake(session: Session, rng: np.random.Generator, within_speaker: bool = False) -> Session:
    """Turn-shuffled copy of ``session``; pairs follow the new adjacency."""
    order = fake_order(session.speakers(), rng, within_speaker)
    return Session(session.session_id + "#fake", [session.turns[i] for i in order])


def classify(real_mean: float, fake_mean: float, higher_is_real: bool = False) -> bool:
    """True when the real session is picked; exact ties count as wrong."""
    return real_mean > fake_mean if higher_is_real else real_mean < fake_mean


@dataclass
class RealFakeResult:
    runs: int
    seed: int
    shuffle: str
    n_sessions: int
    per_run: dict[str, list[float]] = field(default_factory=dict)
    excluded: list[str] = field(default_factory=list)

    def mean(self, measure: str) -> float:
        return float(np.mean(self.per_run[measure]))

    def std(self, measure: str) -> float:
        return float(np.std(self.per_run[measure]))

    def to_dict(self) -> dict:
        return {
            "runs": self.runs,
            "seed": self.seed,
            "shuffle": self.shuffle,
            "n_sessions": self.n_sessions,
            "excluded_sessions": self.excluded,
            "measures": {
                m: {"accuracy_mean": self.mean(m), "accuracy_std": self.std(m), "per_run": list(v)}
                for m, v in self.per_run.items()
            },
        }


def real_vs_fake(
    checkpoint: Checkpoint | None,
    sessions,
    measures=MEASURES,
    runs: int = 30,
    seed: int = 0,
    within_speaker: bool = False,
    pca: PcaModel | None = None,
    pca_k: int = 10,
) -> RealFakeResult:
    """Accuracy of picking each real session over a turn-shuffled copy.

    Run ``r`` draws its fakes from ``default_rng(seed + r)``; all measures
    in a run see the same fake sessions.
    """
    if runs < 1:
        raise ValueError("runs must be >= 1")
    measures = tuple(measures)
    usable = [s for s in sessions if len(s.turns) >= 2]
    excluded = [s.session_id for s in sessions if len(s.turns) < 2]
    for sid in excluded:
        log.warning("session %s excluded from real-vs-fake: fewer than 2 turns", sid)
    if not usable:
        raise DegenerateInputError("no classifiable sessions")
    if "baseline2" in measures and pca is None:
        pca = fit_pca_on_sessions(usable, pca_k)
    tables = {m: turn_tables(m, usable, checkpoint, pca) for m in measures}
    real_means = {m: np.array([t.pair_scores().mean() for t in tables[m]]) for m in measures}

    result = RealFakeResult(runs, seed, "within-speaker" if within_speaker else "global", len(usable), {m: [] for m in measures}, excluded)
    for r in range(runs):
        rng = np.random.default_rng(seed + r)
        orders = [fake_order(s.speakers(), rng, within_speaker) for s in usable]
        for m in measures:
            higher = m in SIMILARITY_MEASURES
            correct = sum(
                classify(real_means[m][k], tables[m][k].pair_scores(o).mean(), higher)
                for k, o in enumerate(orders)
            )
            result.per_run[m].append(correct / len(usable))
    return result


def read_ratings_csv(path) -> dict[str, float]:
    path = Path(path)
    out: dict[str, float] = {}
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header is None or [h.strip() for h in header[:2]] != ["session_id", "rating"]:
            raise ValueError(f"{path}: expected header 'session_id,rating'")
        for lineno, row in enumerate(reader, start=2):
            if not row:
                continue
            if len(row) < 2:
                raise ValueError(f"{path}:{lineno}: expected session_id,rating")
            sid = row[0].strip()
            if sid in out:
                raise ValueError(f"{path}:{lineno}: duplicate rating for session {sid}")
            try:
                out[sid] = float(row[1])
            except ValueError:
                raise ValueError(f"{path}:{lineno}: rating {row[1]!r} is not a number") from None
    return out


def session_means(measure: str, sessions, direction: str = "all", checkpoint=None, pca=None) -> dict[str, float]:
    """Per-session mean of a measure over the (direction-filtered) pairs.

    Sessions without a surviving pair are left out.
    """
    out = {}
    for table in turn_tables(measure, sessions, checkpoint, pca):
        scores = table.pair_scores()
        if direction != "all":
            keep = np.array([d == direction for d in table.directions()], dtype=bool)
            scores = scores[keep]
        if scores.shape[0]:
            out[table.session.session_id] = float(scores.mean())
    return out


@dataclass
class CorrelationReport:
    direction: str
    results: dict[str, CorrelationResult]
    excluded: dict[str, str]

    def to_dict(self) -> dict:
        return {
            "direction": self.direction,
            "correlations": {m: r.to_dict() for m, r in self.results.items()},
            "excluded_sessions": self.excluded,
        }


def correlate_with_ratings(
    checkpoint: Checkpoint,
    sessions,
    ratings: dict[str, float],
    direction: str = "all",
    measures=MEASURES,
    pca: PcaModel | None = None,
    pca_k: int = 10,
) -> CorrelationReport:
    """Pearson correlation of per-session mean scores with session ratings."""
    sessions = list(sessions)
    excluded: dict[str, str] = {}
    for s in sessions:
        if s.session_id not in ratings:
            excluded[s.session_id] = "no rating"
    rated = [s for s in sessions if s.session_id in ratings]
    if "baseline2" in measures and pca is None:
        pca = fit_pca_on_sessions(sessions, pca_k)
    results = {}
    for m in measures:
        means = session_means(m, rated, direction, checkpoint, pca)
        for s in rated:
            if s.session_id not in means:
                excluded.setdefault(s.session_id, f"no {direction} pairs")
        ids = [s.session_id for s in rated if s.session_id in means]
        results[m] = pearson([means[i] for i in ids], [ratings[i] for i in ids], measure=m, direction=direction)
    for sid, why in excluded.items():
        log.warning("session %s excluded from correlation: %s", sid, why)
    return CorrelationReport(direction, results, excluded)


def score_rows(checkpoint: Checkpoint, sessions, pca: PcaModel | None = None, pca_k: int = 10) -> list[dict]:
    """One row per consecutive pair with NED and both baselines."""
    sessions = list(sessions)
    if pca is None:
        pca = fit_pca_on_sessions(sessions, pca_k)
    tables = {m: turn_tables(m, sessions, checkpoint, pca) for m in MEASURES}
    rows = []
    for k, s in enumerate(sessions):
        dirs = tables["ned"][k].directions()
        cols = {m: tables[m][k].pair_scores() for m in MEASURES}
        for i, d in enumerate(dirs):
            rows.append({"session_id": s.session_id, "pair_index": i, "direction": d, **{m: float(cols[m][i]) for m in MEASURES}})
    return rows


def write_scores_csv(path, rows: list[dict]) -> None:
    with open(path, "w") as fh:
        fh.write("session_id,pair_index,direction,ned,baseline1,baseline2\n")
        for r in rows:
            fh.write(
                f"{r['session_id']},{r['pair_index']},{r['direction']},"
                f"{r['ned']:.17g},{r['baseline1']:.17g},{r['baseline2']:.17g}\n"
            )


def embedding_differences(checkpoint: Checkpoint, sessions, direction: str = "all", ratings: dict[str, float] | None = None) -> list[dict]:
    """z_i - z_j for every (direction-filtered) pair."""
    rows = []
    for table in turn_tables("ned", sessions, checkpoint):
        sid = table.session.session_id
        diffs = table.final[:-1] - table.initial[1:]
        for i, (d, diff) in enumerate(zip(table.directions(), diffs)):
            if direction != "all" and d != direction:
                continue
            rows.append({"session_id": sid, "pair_index": i, "direction": d, "rating": (ratings or {}).get(sid), "diff": diff})
    return rows


def export_embedding_differences(checkpoint: Checkpoint, sessions, path, direction: str = "all", ratings: dict[str, float] | None = None) -> int:
    """Write the embedding-difference CSV; returns the number of rows."""
    rows = embedding_differences(checkpoint, sessions, direction, ratings)
    m = checkpoint.embedding_dim
    with open(path, "w") as fh:
        fh.write(",".join(["session_id", "pair_index", "direction", "rating"] + [f"dz_{k}" for k in range(m)]) + "\n")
        for r in rows:
            rating = "" if r["rating"] is None else format(r["rating"], ".17g")
            vals = ",".join(format(float(v), ".17g") for v in r["diff"])
            fh.write(f"{r['session_id']},{r['pair_index']},{r['direction']},{rating},{vals}\n")
    return len(rows)
