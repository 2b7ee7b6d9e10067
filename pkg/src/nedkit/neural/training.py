"""Unsupervised x1 -> x2 training loop with session-level splits."""

from __future__ import annotations

import logging
from dataclasses import asdict, dataclass, field

import numpy as np

from ..corpus import Session, fingerprint, stack_pairs
from ..schema import FEATURE_COLUMNS, FUNCTIONALS
from .checkpoint import Checkpoint
from .network import DEFAULT_WIDTHS, Network, backward, batch_loss, forward, init_network, update_running_stats
from .optim import AdamState, adam_step

log = logging.getLogger(__name__)


class TrainingError(ValueError):
    pass


@dataclass
class TrainConfig:
    batch_size: int = 128
    max_epochs: int = 100
    patience: int = 10
    learning_rate: float = 1e-3
    beta1: float = 0.9
    beta2: float = 0.999
    adam_eps: float = 1e-8
    split: tuple[float, float, float] = (0.8, 0.1, 0.1)
    seed: int = 0
    widths: tuple[int, ...] = field(default=DEFAULT_WIDTHS)

    def __post_init__(self):
        self.split = tuple(float(f) for f in self.split)
        self.widths = tuple(int(w) for w in self.widths)
        if len(self.split) != 3 or min(self.split) < 0 or abs(sum(self.split) - 1.0) > 1e-9:
            raise TrainingError(f"split fractions must be three nonnegative numbers summing to 1, got {self.split}")
        if self.batch_size < 1:
            raise TrainingError("batch_size must be >= 1")
        if self.max_epochs < 0 or self.patience < 1:
            raise TrainingError("max_epochs must be >= 0 and patience >= 1")

    def to_dict(self) -> dict:
        d = asdict(self)
        d["split"] = list(self.split)
        d["widths"] = list(self.widths)
        return d

    @classmethod
    def from_dict(cls, d: dict) -> "TrainConfig":
        known = set(cls.__dataclass_fields__)
        unknown = set(d) - known
        if unknown:
            raise TrainingError(f"unknown train config keys: {sorted(unknown)}")
        return cls(**d)


def split_sessions(session_ids, fractions, seed) -> tuple[list[str], list[str], list[str]]:
    """Seeded shuffle of sessions into train/validation/test groups.

    With three or more sessions every group gets at least one session.
    """
    ids = list(session_ids)
    n = len(ids)
    if n < 3:
        raise TrainingError(f"need at least 3 sessions to split, got {n}")
    perm = np.random.default_rng(seed).permutation(n)
    n_val = max(1, int(round(fractions[1] * n)))
    n_test = max(1, int(round(fractions[2] * n)))
    n_train = n - n_val - n_test
    if n_train < 1:
        raise TrainingError(f"split {fractions} leaves no training sessions out of {n}")
    shuffled = [ids[i] for i in perm]
    return shuffled[:n_train], shuffled[n_train:n_train + n_val], shuffled[n_train + n_val:]


def evaluate_loss(net: Network, x1: np.ndarray, x2: np.ndarray, chunk: int = 4096) -> float:
    """Mean per-pair loss with inference-mode batch norm."""
    if x1.shape[0] == 0:
        return float("nan")
    total = 0.0
    for start in range(0, x1.shape[0], chunk):
        _, x_hat, _ = forward(net, x1[start:start + chunk], mode="infer")
        total += batch_loss(x_hat, x2[start:start + chunk]) * x_hat.shape[0]
    return total / x1.shape[0]


def _check_finite(net: Network, epoch: int) -> None:
    for name, arr in net.params.items():
        if not np.all(np.isfinite(arr)):
            raise FloatingPointError(f"non-finite parameter {name} after epoch {epoch}")


def run_epoch(net: Network, opt: AdamState, x1, x2, batch_size: int, rng: np.random.Generator) -> list[float]:
    """One pass over shuffled training pairs; returns per-minibatch losses."""
    n = x1.shape[0]
    order = rng.permutation(n)
    losses = []
    for start in range(0, n, batch_size):
        idx = order[start:start + batch_size]
        if idx.shape[0] < 2:
            continue
        _, _, cache = forward(net, x1[idx], mode="train")
        loss, grads = backward(net, cache, x2[idx])
        update_running_stats(net, cache)
        adam_step(net.params, grads, opt)
        losses.append(loss)
    return losses


def train(sessions: list[Session], config: TrainConfig | None = None, progress=None) -> Checkpoint:
    """Train the encoder-decoder on all consecutive-turn pairs of the training split.

    The parameters with the lowest validation loss (epoch 0 being the
    untrained network) are kept. Training stops after ``patience`` epochs
    without improvement or at ``max_epochs``.
    """
    config = config or TrainConfig()
    by_id = {s.session_id: s for s in sessions}
    if len(by_id) != len(sessions):
        raise TrainingError("duplicate session ids")
    train_ids, val_ids, test_ids = split_sessions([s.session_id for s in sessions], config.split, config.seed)
    x1_tr, x2_tr = stack_pairs(by_id[i] for i in train_ids)
    x1_va, x2_va = stack_pairs(by_id[i] for i in val_ids)
    if x1_tr.shape[0] < 2:
        raise TrainingError("training split has fewer than 2 pairs")
    if x1_tr.shape[1] != config.widths[0]:
        raise TrainingError(f"pair dimension {x1_tr.shape[1]} != network input {config.widths[0]}")

    rng = np.random.default_rng(config.seed)
    net = init_network(config.widths, rng)
    opt = AdamState(lr=config.learning_rate, beta1=config.beta1, beta2=config.beta2, eps=config.adam_eps)

    initial_val = evaluate_loss(net, x1_va, x2_va)
    best_val, best_epoch, best_net = initial_val, 0, net.copy()
    history = [{"epoch": 0, "train_loss": None, "val_loss": initial_val}]
    stale = 0
    for epoch in range(1, config.max_epochs + 1):
        losses = run_epoch(net, opt, x1_tr, x2_tr, config.batch_size, rng)
        _check_finite(net, epoch)
        val = evaluate_loss(net, x1_va, x2_va)
        train_loss = float(np.mean(losses)) if losses else None
        history.append({"epoch": epoch, "train_loss": train_loss, "val_loss": val})
        if progress is not None:
            progress(epoch, train_loss, val)
        log.debug("epoch %d train %.6f val %.6f", epoch, train_loss or float("nan"), val)
        if val < best_val:
            best_val, best_epoch, best_net = val, epoch, net.copy()
            stale = 0
        else:
            stale += 1
            if stale >= config.patience:
                break

    return Checkpoint(
        network=best_net,
        feature_order=list(FEATURE_COLUMNS),
        functional_order=list(FUNCTIONALS),
        train_config=config.to_dict(),
        best_val_loss=best_val,
        best_epoch=best_epoch,
        corpus_fingerprint=fingerprint(sessions),
        history=history,
        split={"train": train_ids, "validation": val_ids, "test": test_ids},
    )
