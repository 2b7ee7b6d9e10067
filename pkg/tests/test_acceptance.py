"""Acceptance suite: one test per criterion, each printing a PASS/FAIL line.

Run alone with ``pytest tests/test_acceptance.py -v`` (or ``python3 tests/test_acceptance.py``).
"""

import hashlib
import math
import sys
import time
from pathlib import Path

import numpy as np
import pytest
from scipy import integrate

from conftest import SR, noise, tone
from nedkit.cli import main as cli_main
from nedkit.dsp.framing import make_grid
from nedkit.dsp.lpc import autocorrelation, levinson_durbin, lpc_to_lsf, lsf_to_lpc, pre_emphasis
from nedkit.dsp.pitch import pitch_track
from nedkit.dsp.vad import detect_voice_activity
from nedkit.evaluation import real_vs_fake, session_means
from nedkit.neural.network import backward, batch_loss, forward, init_network, smooth_l1_elementwise
from nedkit.segmentation import Turn, functionals, split_ipus
from nedkit.stats import pearson, spearman
from nedkit.synth import SynthConfig, gen_feature_corpus

EVAL_SEED = 2  # disjoint from the training corpus seed (1)
RUNS = 30


@pytest.fixture
def report(capsys):
    def emit(number, title, passed, detail, elapsed, budget):
        ok = passed and elapsed < budget
        status = "PASS" if ok else "FAIL"
        with capsys.disabled():
            print(f"\n[{status}] criterion {number}: {title} | {detail} | {elapsed:.1f}s (budget {budget:.0f}s)")
        assert passed, detail
        assert elapsed < budget, f"runtime {elapsed:.1f}s over budget {budget}s"

    return emit


def test_criterion_01_smooth_l1(report):
    t0 = time.perf_counter()
    s = lambda d: float(smooth_l1_elementwise(np.array(d)))
    checks = {
        "s(0)=0": s(0.0) == 0.0,
        "s(0.5)=0.125": s(0.5) == 0.125,
        "s(1)=0.5": s(1.0) == 0.5,
        "s(2)=1.5": s(2.0) == 1.5,
        "continuity": abs(s(1.0 - 1e-13) - s(1.0 + 1e-13)) < 1e-12 and abs(s(-1.0 - 1e-13) - s(-1.0 + 1e-13)) < 1e-12,
    }
    failed = [k for k, v in checks.items() if not v]
    report(1, "smooth-L1 unit values", not failed, f"failed={failed}", time.perf_counter() - t0, 1)


def test_criterion_02_gradient_check(report):
    t0 = time.perf_counter()
    worst = 0.0
    h = 1e-4
    for seed in range(1, 6):
        rng = np.random.default_rng(seed)
        net = init_network((5, 4, 2, 4, 5), rng)
        for k in net.params:
            net.params[k] = net.params[k] + 0.3 * rng.standard_normal(net.params[k].shape)
        x1, x2 = rng.standard_normal((6, 5)), rng.standard_normal((6, 5))
        _, _, cache = forward(net, x1, mode="train")
        _, grads = backward(net, cache, x2)

        def loss():
            return batch_loss(forward(net, x1, mode="train")[1], x2)

        for name, p in net.params.items():
            num = np.zeros_like(p)
            for idx in np.ndindex(p.shape):
                old = p[idx]
                p[idx] = old + h
                up = loss()
                p[idx] = old - h
                down = loss()
                p[idx] = old
                num[idx] = (up - down) / (2 * h)
            scale = max(np.linalg.norm(grads[name]) + np.linalg.norm(num), 1e-6)
            worst = max(worst, np.linalg.norm(grads[name] - num) / scale)
    report(2, "analytic vs finite-difference gradients", worst < 1e-4, f"max relative error {worst:.2e} (< 1e-4)",
           time.perf_counter() - t0, 10)


def test_criterion_03_topology(report, checkpoint_lam05):
    t0 = time.perf_counter()
    widths = list(checkpoint_lam05.network.widths)
    ok = widths == [228, 128, 30, 128, 228] and checkpoint_lam05.embedding_dim == 30
    report(3, "trained topology", ok, f"widths={widths} embedding={checkpoint_lam05.embedding_dim}",
           time.perf_counter() - t0, 1)


def test_criterion_04_dsp_suite(report):
    t0 = time.perf_counter()
    results = {}
    x = np.concatenate([noise(0.3, seed=1), tone(220, 1.0), noise(0.3, seed=2)])
    f0, voiced = pitch_track(x, make_grid(x.shape[0], SR))
    interior = np.flatnonzero(voiced)[2:-2]
    results["pitch 220+-5"] = interior.size > 0 and bool(np.all(np.abs(f0[interior] - 220) <= 5))
    z = np.zeros(SR)
    results["silence VAD empty"] = detect_voice_activity(z, make_grid(SR, SR)) == []
    results["60ms pause -> 2 IPUs"] = len(split_ipus(Turn("A", 0.0, 2.0, [(1.0, 1.06)]))) == 2
    results["40ms pause -> 1 IPU"] = len(split_ipus(Turn("A", 0.0, 2.0, [(1.0, 1.04)]))) == 1
    results["228 functionals"] = functionals(np.random.default_rng(0).standard_normal((17, 38))).shape == (228,)
    rng = np.random.default_rng(3)
    worst = 0.0
    for _ in range(50):
        t = np.arange(400) / SR
        f = rng.uniform(90, 300)
        sig = sum(np.sin(2 * np.pi * k * f * t + rng.uniform(0, 6)) / k for k in range(1, 12)) + 0.05 * rng.standard_normal(400)
        r = autocorrelation((pre_emphasis(sig) * np.hamming(400))[None, :], 8)
        a, _ = levinson_durbin(r)
        lsf, ok = lpc_to_lsf(a[0])
        worst = max(worst, np.max(np.abs(lsf_to_lpc(lsf[0]) - a[0])) if ok[0] else np.inf)
    results["LSF round trip < 1e-4"] = worst < 1e-4
    failed = [k for k, v in results.items() if not v]
    report(4, "DSP oracle suite", not failed, f"failed={failed} lsf_err={worst:.1e}", time.perf_counter() - t0, 30)


def _eval_corpus(coupling, **kw):
    return gen_feature_corpus(SynthConfig(sessions=100, turns_per_session=40, coupling=coupling, noise_scale=0.1,
                                          seed=EVAL_SEED, **kw)).sessions


def test_criterion_05_real_vs_fake_coupled(report, checkpoint_lam05):
    t0 = time.perf_counter()
    r = real_vs_fake(checkpoint_lam05, _eval_corpus(0.9), measures=("ned", "baseline1", "baseline2"), runs=RUNS, seed=11)
    ned, b1, b2 = r.mean("ned"), r.mean("baseline1"), r.mean("baseline2")
    ok = ned >= 0.90 and ned >= b1
    report(5, "real-vs-fake at coupling 0.9", ok,
           f"NED {ned:.4f} ({r.std('ned'):.4f}) baseline1 {b1:.4f} baseline2 {b2:.4f}", time.perf_counter() - t0, 600)


def test_criterion_06_chance(report, checkpoint_lam05):
    t0 = time.perf_counter()
    r = real_vs_fake(checkpoint_lam05, _eval_corpus(0.0), measures=("ned",), runs=RUNS, seed=11)
    acc = r.mean("ned")
    report(6, "chance level at coupling 0", 0.4 <= acc <= 0.6, f"NED accuracy {acc:.4f} in [0.4, 0.6]",
           time.perf_counter() - t0, 300)


def test_criterion_07_monotonicity(report, checkpoint_lam05):
    t0 = time.perf_counter()
    lams = [0.0, 0.25, 0.5, 0.75, 0.9]
    means = [float(np.mean(list(session_means("ned", _eval_corpus(lam), checkpoint=checkpoint_lam05).values())))
             for lam in lams]
    rho = spearman(lams, means).rho
    strictly = all(b < a for a, b in zip(means, means[1:]))
    report(7, "mean NED decreasing in coupling", strictly and rho == -1.0,
           f"means={[round(m, 3) for m in means]} spearman={rho}", time.perf_counter() - t0, 300)


def test_criterion_08_directionality(report, checkpoint_lam05):
    t0 = time.perf_counter()
    sessions = _eval_corpus(0.5, asymmetry=0.8)  # A->B coupling 0.9, B->A coupling 0.1
    ab = session_means("ned", sessions, "A->B", checkpoint_lam05)
    ba = session_means("ned", sessions, "B->A", checkpoint_lam05)
    frac = float(np.mean([ab[k] < ba[k] for k in ab]))
    report(8, "strong direction has lower NED", frac >= 0.8, f"{frac:.2%} of sessions (>= 80%)",
           time.perf_counter() - t0, 300)


def _t_tail(t, df):
    c = math.exp(math.lgamma((df + 1) / 2) - math.lgamma(df / 2)) / math.sqrt(df * math.pi)
    val, _ = integrate.quad(lambda x: c * (1 + x * x / df) ** (-(df + 1) / 2), abs(t), np.inf, epsabs=1e-13, epsrel=1e-12)
    return 2 * val


def test_criterion_09_pearson(report):
    t0 = time.perf_counter()
    rng = np.random.default_rng(909)
    worst_rho = worst_p = 0.0
    for _ in range(50):
        n = int(rng.integers(3, 201))
        xs = rng.standard_normal(n)
        ys = rng.uniform(-1, 1) * xs + rng.uniform(0.1, 2) * rng.standard_normal(n)
        res = pearson(xs, ys)
        dx, dy = xs - xs.mean(), ys - ys.mean()
        rho = float(np.sum(dx * dy) / math.sqrt(np.sum(dx * dx) * np.sum(dy * dy)))
        t = rho * math.sqrt((n - 2) / (1 - rho * rho))
        worst_rho = max(worst_rho, abs(res.rho - rho))
        worst_p = max(worst_p, abs(res.p_value - _t_tail(t, n - 2)))
    x = np.arange(12.0)
    perfect = pearson(x, 3 * x + 1).p_value == 0.0 and pearson(x, -x).p_value == 0.0
    ok = worst_rho < 1e-6 and worst_p < 1e-6 and perfect
    report(9, "Pearson rho/p vs quadrature", ok, f"max |drho| {worst_rho:.1e} max |dp| {worst_p:.1e} perfect->p=0 {perfect}",
           time.perf_counter() - t0, 10)


def _digest(paths):
    h = hashlib.sha256()
    for p in sorted(paths):
        h.update(p.name.encode())
        h.update(p.read_bytes())
    return h.hexdigest()


def _pipeline_hashes(base: Path) -> dict[str, str]:
    """Run every stage inside ``base`` with relative paths; hash each stage's outputs."""
    stages = [
        ("synth-feature", ["synth", "--sessions", "20", "--turns", "20", "--coupling", "0.7", "--seed", "5",
                           "--ratings", "--coupling-jitter", "0.3", "--out", "corpus"], "corpus"),
        ("synth-audio", ["synth", "--mode", "audio", "--sessions", "2", "--turns", "6", "--coupling", "0.6",
                         "--seed", "5", "--out", "audio"], "audio"),
        ("extract", ["extract", "--audio", "audio/s0000.wav", "--turns", "audio/s0000.jsonl", "--out", "extract"], "extract"),
        ("pairs", ["pairs", "--audio-dir", "audio", "--out", "apairs"], "apairs"),
        ("train", ["train", "--pairs", "corpus", "--seed", "5", "--max-epochs", "5", "--out", "model/model.json"], "model"),
        ("score", ["score", "--model", "model/model.json", "--pairs", "corpus", "--out", "score/scores.csv"], "score"),
        ("eval-realfake", ["eval-realfake", "--model", "model/model.json", "--pairs", "corpus", "--runs", "5",
                           "--seed", "9", "--out", "rf/report.json"], "rf"),
        ("eval-corr", ["eval-corr", "--model", "model/model.json", "--pairs", "corpus", "--ratings",
                       "corpus/ratings.csv", "--out", "corr/report.json"], "corr"),
        ("export-emb", ["export-emb", "--model", "model/model.json", "--pairs", "corpus", "--out", "emb/emb.csv"], "emb"),
    ]
    out = {}
    for name, argv, folder in stages:
        rc = cli_main(argv)
        assert rc == 0, f"stage {name} exited {rc}"
        out[name] = _digest([p for p in (base / folder).rglob("*") if p.is_file()])
    return out


def test_criterion_10_determinism(report, tmp_path, monkeypatch, capsys):
    t0 = time.perf_counter()
    runs = []
    for k in range(2):
        d = tmp_path / f"run{k}"
        d.mkdir()
        monkeypatch.chdir(d)
        runs.append(_pipeline_hashes(d))
    capsys.readouterr()
    differing = [s for s in runs[0] if runs[0][s] != runs[1][s]]
    report(10, "byte-identical double run of every stage", not differing,
           f"{len(runs[0])} stages, differing={differing}", time.perf_counter() - t0, 900)


if __name__ == "__main__":
    sys.exit(pytest.main([__file__, "-v"]))
