"""Command-line entry point: ``nedkit <subcommand> ...``.

Exit codes: 0 success, 1 usage error, 2 data error (a one-line JSON object
on stderr). Progress goes to stderr as JSON lines; results go to files or
stdout.
"""

from __future__ import annotations

import argparse
import json
import sys
from dataclasses import asdict
from pathlib import Path

from . import __version__
from .audio import AudioFormatError, read_wav
from .corpus import PAIRS_FILENAME, CorpusFormatError, read_pairs_csv, resolve_pairs_path, write_pairs_csv
from .dsp.features import FeatureFormatError, write_feature_csv
from .dsp.pitch import PitchConfig
from .dsp.vad import VadConfig
from .evaluation import (
    MEASURES,
    correlate_with_ratings,
    export_embedding_differences,
    read_ratings_csv,
    real_vs_fake,
    score_rows,
    write_scores_csv,
)
from .neural.checkpoint import CheckpointError, load_checkpoint, save_checkpoint
from .neural.training import TrainConfig, TrainingError, train
from .pipeline import parse_channel_map, process_session
from .segmentation import PAUSE_THRESHOLD_S, AnnotationError, read_annotations, write_annotations
from .stats import DegenerateInputError
from .synth import (
    SynthConfig,
    SynthConfigError,
    gen_feature_corpus,
    synth_ratings,
    write_audio_corpus,
    write_feature_corpus,
)

DATA_ERRORS = (
    OSError,
    AudioFormatError,
    AnnotationError,
    CheckpointError,
    CorpusFormatError,
    DegenerateInputError,
    FeatureFormatError,
    SynthConfigError,
    TrainingError,
    ValueError,
    FloatingPointError,
)


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(f"{self.prog}: {message}")


def _progress(event: str, **fields) -> None:
    print(json.dumps({"event": event, **fields}), file=sys.stderr, flush=True)


def _emit_json(obj: dict, out: str | None) -> None:
    text = json.dumps(obj, indent=1, sort_keys=True) + "\n"
    if out:
        Path(out).parent.mkdir(parents=True, exist_ok=True)
        Path(out).write_text(text)
    else:
        sys.stdout.write(text)


def _sidecar(path: Path, config: dict) -> None:
    """Config echo next to CSV outputs: ``<file>.config.json``."""
    path.with_name(path.name + ".config.json").write_text(json.dumps(config, indent=1, sort_keys=True) + "\n")


def _echo(args) -> dict:
    return {k: v for k, v in sorted(vars(args).items()) if k != "func"}


def _direction(text: str) -> str:
    t = text.replace("→", "->")
    if t != "all" and "->" not in t:
        raise argparse.ArgumentTypeError(f"direction must be 'all' or 'X->Y', got {text!r}")
    return t


def _fractions(text: str) -> tuple[float, float, float]:
    parts = [float(p) for p in text.split(",")]
    if len(parts) != 3:
        raise argparse.ArgumentTypeError("expected three comma-separated fractions")
    return tuple(parts)


# ------------------------------------------------------------------ options

def _add_dsp_options(p) -> None:
    d, pc = VadConfig(), PitchConfig()
    g = p.add_argument_group("front-end overrides")
    g.add_argument("--vad-percentile", type=float, default=d.percentile, help="VAD noise-floor percentile (default %(default)s)")
    g.add_argument("--vad-margin-db", type=float, default=d.margin_db, help="dB above the percentile that counts as speech (default %(default)s)")
    g.add_argument("--vad-min-speech", type=float, default=d.min_speech_s, help="shortest kept speech run, s (default %(default)s)")
    g.add_argument("--vad-bridge-gap", type=float, default=d.bridge_gap_s, help="longest bridged gap, s (default %(default)s)")
    g.add_argument("--f0-min", type=float, default=pc.f0_min, help="pitch search floor, Hz (default %(default)s)")
    g.add_argument("--f0-max", type=float, default=pc.f0_max, help="pitch search ceiling, Hz (default %(default)s)")
    g.add_argument("--voicing-threshold", type=float, default=pc.voicing_threshold, help="autocorrelation voicing threshold (default %(default)s)")
    g.add_argument("--pitch-median", type=int, default=pc.median_width, help="median filter width, frames (default %(default)s)")
    g.add_argument("--pause-threshold", type=float, default=PAUSE_THRESHOLD_S, help="pause length that splits IPUs, s (default %(default)s)")
    g.add_argument("--channel-map", default="A=0,B=1", help="speaker to channel mapping (default %(default)s)")


def _dsp_configs(args) -> tuple[VadConfig, PitchConfig]:
    vad = VadConfig(args.vad_percentile, args.vad_margin_db, args.vad_min_speech, args.vad_bridge_gap)
    pitch = PitchConfig(f0_min=args.f0_min, f0_max=args.f0_max, voicing_threshold=args.voicing_threshold, median_width=args.pitch_median)
    return vad, pitch


def _add_pca_option(p) -> None:
    p.add_argument("--pca-k", type=int, default=10, help="principal components for baseline2 (default %(default)s)")


# -------------------------------------------------------------- subcommands

def cmd_synth(args) -> int:
    cfg = SynthConfig(
        sessions=args.sessions,
        turns_per_session=args.turns,
        coupling=args.coupling,
        noise_scale=args.noise,
        latent_dim=args.latent_dim,
        observed_dim=args.observed_dim,
        seed=args.seed,
        mode=args.mode,
        asymmetry=args.asymmetry,
        coupling_jitter=args.coupling_jitter,
        generator_seed=args.generator_seed,
        trait_dim=args.trait_dim,
        trait_scale=args.trait_scale,
        observation_noise=args.observation_noise,
        sample_rate=args.sample_rate,
        noise_floor_db=args.noise_floor_db,
    )
    if cfg.mode == "audio":
        manifest = write_audio_corpus(cfg, args.out)
        summary = {"mode": "audio", "sessions": len(manifest["sessions"]), "out": args.out}
    else:
        corpus = gen_feature_corpus(cfg)
        ratings = None
        if args.ratings:
            ratings = synth_ratings(corpus, args.rating_noise, args.rating_sign, args.seed)
        manifest = write_feature_corpus(corpus, args.out, ratings)
        summary = {"mode": "feature", "sessions": len(corpus.sessions), "pair_rows": manifest["pair_rows"],
                   "fingerprint": manifest["fingerprint"], "out": args.out}
    _emit_json({"command": "synth", "config": _echo(args), **summary}, None)
    return 0


def _extract_one(session_id, wav, turns_path, args):
    vad, pitch = _dsp_configs(args)
    audio = read_wav(wav)
    annotations = read_annotations(turns_path) if turns_path else None
    return process_session(session_id, audio, annotations, parse_channel_map(args.channel_map), vad, pitch, args.pause_threshold)


def cmd_extract(args) -> int:
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    sid = args.session_id or Path(args.audio).stem
    ex = _extract_one(sid, args.audio, args.turns, args)
    channel_map = parse_channel_map(args.channel_map)
    for spk, m in ex.normalized.items():
        write_feature_csv(out / f"features_{spk}_ch{channel_map[spk]}.csv", m)
    write_annotations(out / "turns.jsonl", ex.annotations)
    sessions = [ex.session] if ex.session is not None else []
    rows = write_pairs_csv(out / PAIRS_FILENAME, sessions)
    report = {
        "command": "extract",
        "config": _echo(args),
        "session_id": sid,
        "turns_source": "annotations" if args.turns else "vad",
        "segmentation": asdict(ex.report),
        "pair_rows": rows,
        "normalization": {spk: st.to_dict() for spk, st in ex.stats.items()},
    }
    _emit_json(report, str(out / "extract_report.json"))
    _progress("extract", session_id=sid, pairs=rows, rejected=ex.report.rejected)
    return 0


def cmd_pairs(args) -> int:
    src = Path(args.audio_dir)
    if not src.is_dir():
        raise FileNotFoundError(f"audio directory not found: {src}")
    wavs = sorted(src.glob("*.wav"))
    if not wavs:
        raise FileNotFoundError(f"no .wav files in {src}")
    sessions, reports = [], []
    for wav in wavs:
        turns = wav.with_suffix(".jsonl")
        ex = _extract_one(wav.stem, wav, turns if turns.exists() else None, args)
        reports.append({**asdict(ex.report), "turns_source": "annotations" if turns.exists() else "vad"})
        if ex.session is not None:
            sessions.append(ex.session)
        _progress("pairs", session_id=wav.stem, pairs=ex.report.pairs, rejected=ex.report.rejected)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    rows = write_pairs_csv(out / PAIRS_FILENAME, sessions)
    _emit_json({"command": "pairs", "config": _echo(args), "pair_rows": rows, "sessions": reports},
               str(out / "pairs_manifest.json"))
    return 0


def _load_sessions(path):
    return read_pairs_csv(resolve_pairs_path(path))


def cmd_train(args) -> int:
    cfg = TrainConfig(
        batch_size=args.batch_size,
        max_epochs=args.max_epochs,
        patience=args.patience,
        learning_rate=args.lr,
        beta1=args.beta1,
        beta2=args.beta2,
        adam_eps=args.adam_eps,
        split=args.split,
        seed=args.seed,
    )
    sessions = _load_sessions(args.pairs)

    def progress(epoch, train_loss, val_loss):
        _progress("epoch", epoch=epoch, train_loss=train_loss, val_loss=val_loss)

    ckpt = train(sessions, cfg, progress)
    save_checkpoint(ckpt, args.out)
    _emit_json({"command": "train", "config": _echo(args), "best_epoch": ckpt.best_epoch,
                "best_val_loss": ckpt.best_val_loss, "initial_val_loss": ckpt.history[0]["val_loss"],
                "epochs_run": len(ckpt.history) - 1, "out": args.out}, None)
    return 0


def cmd_score(args) -> int:
    ckpt = load_checkpoint(args.model)
    sessions = _load_sessions(args.pairs)
    rows = score_rows(ckpt, sessions, pca_k=args.pca_k)
    out = Path(args.out)
    out.parent.mkdir(parents=True, exist_ok=True)
    write_scores_csv(out, rows)
    _sidecar(out, {"command": "score", "config": _echo(args), "rows": len(rows)})
    return 0


def cmd_eval_realfake(args) -> int:
    ckpt = load_checkpoint(args.model)
    sessions = _load_sessions(args.pairs)
    measures = tuple(m.strip() for m in args.measures.split(","))
    bad = set(measures) - set(MEASURES)
    if bad:
        raise UsageError(f"unknown measures {sorted(bad)}; choose from {list(MEASURES)}")
    result = real_vs_fake(ckpt, sessions, measures, args.runs, args.seed, args.shuffle == "within-speaker", pca_k=args.pca_k)
    _emit_json({"command": "eval-realfake", "config": _echo(args), **result.to_dict()}, args.out)
    return 0


def cmd_eval_corr(args) -> int:
    ckpt = load_checkpoint(args.model)
    sessions = _load_sessions(args.pairs)
    ratings = read_ratings_csv(args.ratings)
    report = correlate_with_ratings(ckpt, sessions, ratings, args.direction, pca_k=args.pca_k)
    _emit_json({"command": "eval-corr", "config": _echo(args), **report.to_dict()}, args.out)
    return 0


def cmd_export_emb(args) -> int:
    ckpt = load_checkpoint(args.model)
    sessions = _load_sessions(args.pairs)
    ratings = read_ratings_csv(args.ratings) if args.ratings else None
    out = Path(args.out)
    out.parent.mkdir(parents=True, exist_ok=True)
    n = export_embedding_differences(ckpt, sessions, out, args.direction, ratings)
    _sidecar(out, {"command": "export-emb", "config": _echo(args), "rows": n})
    return 0


# ------------------------------------------------------------------- parser

def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="nedkit", description="Neural entrainment distance toolkit.")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", metavar="COMMAND", parser_class=_Parser)
    sub.required = True

    d = SynthConfig()
    p = sub.add_parser("synth", help="generate a seeded synthetic corpus")
    p.add_argument("--mode", choices=("feature", "audio"), default=d.mode)
    p.add_argument("--sessions", type=int, default=d.sessions)
    p.add_argument("--turns", type=int, default=d.turns_per_session, help="turns per session")
    p.add_argument("--coupling", type=float, default=d.coupling, help="cross-turn coupling in [0, 1]")
    p.add_argument("--noise", type=float, default=d.noise_scale, help="latent noise scale (> 0)")
    p.add_argument("--asymmetry", type=float, default=d.asymmetry, help="directional coupling difference in [-1, 1]")
    p.add_argument("--coupling-jitter", type=float, default=d.coupling_jitter, help="per-session uniform coupling jitter")
    p.add_argument("--latent-dim", type=int, default=d.latent_dim)
    p.add_argument("--observed-dim", type=int, default=d.observed_dim)
    p.add_argument("--trait-dim", type=int, default=d.trait_dim)
    p.add_argument("--trait-scale", type=float, default=d.trait_scale)
    p.add_argument("--observation-noise", type=float, default=d.observation_noise)
    p.add_argument("--generator-seed", type=int, default=d.generator_seed, help="seed of the fixed maps g and F")
    p.add_argument("--sample-rate", type=int, default=d.sample_rate, help="audio mode only")
    p.add_argument("--noise-floor-db", type=float, default=d.noise_floor_db, help="audio mode only")
    p.add_argument("--ratings", action="store_true", help="also write ratings.csv (feature mode)")
    p.add_argument("--rating-noise", type=float, default=0.5)
    p.add_argument("--rating-sign", type=float, default=1.0, help="+1: rating rises with coupling, -1: falls")
    p.add_argument("--seed", type=int, required=True)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_synth)

    p = sub.add_parser("extract", help="frame features and turn pairs for one stereo session")
    p.add_argument("--audio", required=True)
    p.add_argument("--turns", help="turn annotations (JSON Lines); derived from VAD when omitted")
    p.add_argument("--session-id")
    p.add_argument("--out", required=True)
    _add_dsp_options(p)
    p.set_defaults(func=cmd_extract)

    p = sub.add_parser("pairs", help="pair cache for a directory of <session>.wav + <session>.jsonl")
    p.add_argument("--audio-dir", required=True)
    p.add_argument("--out", required=True)
    _add_dsp_options(p)
    p.set_defaults(func=cmd_pairs)

    t = TrainConfig()
    p = sub.add_parser("train", help="train the encoder-decoder on a pair cache")
    p.add_argument("--pairs", required=True, help="corpus directory or pairs.csv")
    p.add_argument("--seed", type=int, required=True)
    p.add_argument("--out", required=True, help="checkpoint JSON path")
    p.add_argument("--batch-size", type=int, default=t.batch_size)
    p.add_argument("--max-epochs", type=int, default=t.max_epochs)
    p.add_argument("--patience", type=int, default=t.patience)
    p.add_argument("--lr", type=float, default=t.learning_rate)
    p.add_argument("--beta1", type=float, default=t.beta1)
    p.add_argument("--beta2", type=float, default=t.beta2)
    p.add_argument("--adam-eps", type=float, default=t.adam_eps)
    p.add_argument("--split", type=_fractions, default=t.split, help="train,validation,test session fractions")
    p.set_defaults(func=cmd_train)

    p = sub.add_parser("score", help="per-pair NED and baselines as CSV")
    p.add_argument("--model", required=True)
    p.add_argument("--pairs", required=True)
    p.add_argument("--out", required=True)
    _add_pca_option(p)
    p.set_defaults(func=cmd_score)

    p = sub.add_parser("eval-realfake", help="real-vs-fake session classification")
    p.add_argument("--model", required=True)
    p.add_argument("--pairs", required=True)
    p.add_argument("--runs", type=int, default=30)
    p.add_argument("--seed", type=int, required=True)
    p.add_argument("--measures", default=",".join(MEASURES))
    p.add_argument("--shuffle", choices=("global", "within-speaker"), default="global")
    p.add_argument("--out", help="report path (stdout when omitted)")
    _add_pca_option(p)
    p.set_defaults(func=cmd_eval_realfake)

    p = sub.add_parser("eval-corr", help="Pearson correlation of session scores with ratings")
    p.add_argument("--model", required=True)
    p.add_argument("--pairs", required=True)
    p.add_argument("--ratings", required=True, help="CSV session_id,rating")
    p.add_argument("--direction", type=_direction, default="all", help="all, A->B or B->A")
    p.add_argument("--out", help="report path (stdout when omitted)")
    _add_pca_option(p)
    p.set_defaults(func=cmd_eval_corr)

    p = sub.add_parser("export-emb", help="embedding differences z_i - z_j as CSV")
    p.add_argument("--model", required=True)
    p.add_argument("--pairs", required=True)
    p.add_argument("--ratings")
    p.add_argument("--direction", type=_direction, default="all")
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_export_emb)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        return args.func(args)
    except UsageError as exc:
        print(str(exc), file=sys.stderr)
        return 1
    except DATA_ERRORS as exc:
        print(json.dumps({"error": type(exc).__name__, "message": str(exc)}), file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
