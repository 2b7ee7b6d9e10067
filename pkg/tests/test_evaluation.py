import csv

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.stats import chisquare

from nedkit.corpus import Session, TurnVectors
from nedkit.evaluation import (
    classify,
    correlate_with_ratings,
    export_embedding_differences,
    fake_order,
    make_fake,
    read_ratings_csv,
    real_vs_fake,
    score_rows,
    session_means,
    session_ned,
    write_scores_csv,
)
from nedkit.stats import DegenerateInputError
from nedkit.synth import SynthConfig, gen_feature_corpus, synth_ratings


def _session(n, seed=0, sid="s"):
    rng = np.random.default_rng(seed)
    return Session(sid, [TurnVectors("AB"[i % 2], rng.standard_normal(228), rng.standard_normal(228), i) for i in range(n)])


def test_session_ned_mean(small_checkpoint):
    s = _session(6)
    score = session_ned(small_checkpoint, s)
    assert score.n_pairs == 5
    assert score.mean == pytest.approx(np.mean(score.pair_scores))


def test_identical_turns_zero(small_checkpoint):
    v = np.ones(228)
    s = Session("s", [TurnVectors("AB"[i % 2], v, v, i) for i in range(4)])
    assert session_ned(small_checkpoint, s).mean == 0.0


@pytest.mark.parametrize("n", [2, 3, 6, 7])
def test_direction_filter_counts_and_partition(small_checkpoint, n):
    s = _session(n, seed=n)
    ab = session_ned(small_checkpoint, s, "A->B")
    assert ab.n_pairs == int(np.ceil((n - 1) / 2))
    all_pairs = session_ned(small_checkpoint, s).pair_scores
    if n > 2:
        ba = session_ned(small_checkpoint, s, "B->A")
        assert sorted(np.concatenate([ab.pair_scores, ba.pair_scores])) == sorted(all_pairs)
    else:
        with pytest.raises(DegenerateInputError):
            session_ned(small_checkpoint, s, "B->A")


def test_two_turn_fake_swaps():
    s = _session(2)
    fake = make_fake(s, np.random.default_rng(0))
    assert fake.turns[0] is s.turns[1] and fake.turns[1] is s.turns[0]


def test_fake_seeded():
    s = _session(10)
    a = fake_order(s.speakers(), np.random.default_rng(3))
    b = fake_order(s.speakers(), np.random.default_rng(3))
    assert np.array_equal(a, b)
    assert not np.array_equal(a, np.arange(10))


def test_fake_uniform_over_three_turns():
    rng = np.random.default_rng(12345)
    spk = ["A", "B", "A"]
    counts = {}
    for _ in range(100_000):
        key = tuple(fake_order(spk, rng))
        counts[key] = counts.get(key, 0) + 1
    assert (0, 1, 2) not in counts
    assert len(counts) == 5
    _, p = chisquare(list(counts.values()))
    assert p > 1e-3


def test_within_speaker_shuffle_keeps_alternation():
    s = _session(9)
    rng = np.random.default_rng(1)
    for _ in range(20):
        o = fake_order(s.speakers(), rng, within_speaker=True)
        assert [s.speakers()[i] for i in o] == s.speakers()


def test_tie_is_misclassified():
    assert not classify(1.0, 1.0)
    assert not classify(1.0, 1.0, higher_is_real=True)
    assert classify(1.0, 2.0) and classify(2.0, 1.0, higher_is_real=True)


@given(st.floats(-100, 100), st.floats(-100, 100), st.booleans())
def test_classify_monotone_invariance(a, b, higher):
    for f in (np.exp, lambda v: v**3 + v, lambda v: 2 * v + 7, np.arctan):
        fa, fb = f(a), f(b)
        if (fa == fb) != (a == b):
            continue  # float rounding broke strict monotonicity for this pair
        assert classify(a, b, higher) == classify(fa, fb, higher)


def test_runs_reproducible(small_checkpoint):
    sessions = gen_feature_corpus(SynthConfig(sessions=15, turns_per_session=12, coupling=0.6, seed=8)).sessions
    a = real_vs_fake(small_checkpoint, sessions, runs=1, seed=4)
    b = real_vs_fake(small_checkpoint, sessions, runs=1, seed=4)
    assert a.to_dict() == b.to_dict()
    c = real_vs_fake(small_checkpoint, sessions, runs=3, seed=4)
    assert c.per_run["ned"][0] == a.per_run["ned"][0]
    for m, vals in c.per_run.items():
        assert all(0 <= v <= 1 for v in vals)


def test_short_sessions_excluded(small_checkpoint):
    one = Session("tiny", [TurnVectors("A", np.zeros(228), np.zeros(228), 0)])
    sessions = gen_feature_corpus(SynthConfig(sessions=12, turns_per_session=12, seed=8)).sessions
    r = real_vs_fake(small_checkpoint, sessions + [one], runs=2, seed=0, measures=("ned", "baseline1"))
    assert r.excluded == ["tiny"] and r.n_sessions == 12


def test_rating_correlation_sign(small_checkpoint):
    corpus = gen_feature_corpus(SynthConfig(sessions=40, turns_per_session=30, coupling=0.5, coupling_jitter=0.5, seed=31))
    ratings = synth_ratings(corpus, noise=0.3, sign=-1.0, seed=2)
    report = correlate_with_ratings(small_checkpoint, corpus.sessions, ratings)
    assert report.results["ned"].rho > 0
    assert report.results["ned"].p_value < 0.05
    assert set(report.results) == {"ned", "baseline1", "baseline2"}


def test_missing_and_constant_ratings(small_checkpoint):
    corpus = gen_feature_corpus(SynthConfig(sessions=6, turns_per_session=8, seed=3))
    ids = [s.session_id for s in corpus.sessions]
    ratings = {sid: float(i) for i, sid in enumerate(ids[:-1])}
    report = correlate_with_ratings(small_checkpoint, corpus.sessions, ratings, pca_k=3)
    assert ids[-1] in report.excluded and report.results["ned"].n == 5
    with pytest.raises(DegenerateInputError):
        correlate_with_ratings(small_checkpoint, corpus.sessions, {sid: 5.0 for sid in ids}, pca_k=3)


def test_direction_means_disjoint(small_checkpoint):
    corpus = gen_feature_corpus(SynthConfig(sessions=4, turns_per_session=9, seed=3))
    s = corpus.sessions[0]
    all_scores = session_ned(small_checkpoint, s).pair_scores
    ab = session_means("ned", [s], "A->B", small_checkpoint)[s.session_id]
    ba = session_means("ned", [s], "B->A", small_checkpoint)[s.session_id]
    assert ab == pytest.approx(np.mean(all_scores[0::2]))
    assert ba == pytest.approx(np.mean(all_scores[1::2]))


def test_export_embedding_differences(small_checkpoint, tmp_path):
    corpus = gen_feature_corpus(SynthConfig(sessions=3, turns_per_session=7, seed=3))
    ratings = {corpus.sessions[0].session_id: 4.0}
    p = tmp_path / "emb.csv"
    n = export_embedding_differences(small_checkpoint, corpus.sessions, p, "A->B", ratings)
    rows = list(csv.reader(open(p)))
    assert n == 3 * 3 == len(rows) - 1
    assert len(rows[0]) == 4 + 30
    assert rows[1][3] == "4" and rows[-1][3] == ""
    v = np.ones(228)
    same = Session("z", [TurnVectors("AB"[i % 2], v, v, i) for i in range(3)])
    export_embedding_differences(small_checkpoint, [same], p)
    body = list(csv.reader(open(p)))[1:]
    assert all(float(c) == 0.0 for row in body for c in row[4:])


def test_scores_and_ratings_io(small_checkpoint, tmp_path):
    corpus = gen_feature_corpus(SynthConfig(sessions=12, turns_per_session=5, seed=3))
    rows = score_rows(small_checkpoint, corpus.sessions)
    assert len(rows) == 12 * 4
    p = tmp_path / "scores.csv"
    write_scores_csv(p, rows)
    assert p.read_text().splitlines()[0] == "session_id,pair_index,direction,ned,baseline1,baseline2"
    r = tmp_path / "ratings.csv"
    r.write_text("session_id,rating\na,1.5\nb,2\n")
    assert read_ratings_csv(r) == {"a": 1.5, "b": 2.0}
    r.write_text("session_id,rating\na,1\na,2\n")
    with pytest.raises(ValueError):
        read_ratings_csv(r)
