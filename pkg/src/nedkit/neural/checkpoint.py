"""JSON checkpoints for trained networks."""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .network import BN_EPS, BN_LAYERS, BN_MOMENTUM, DENSE_LAYERS, Network, bn_sizes, layer_shapes

FORMAT_VERSION = 1


class CheckpointError(ValueError):
    """Checkpoint file is unreadable, truncated or inconsistent."""


@dataclass
class Checkpoint:
    network: Network
    feature_order: list[str]
    functional_order: list[str]
    train_config: dict
    best_val_loss: float
    best_epoch: int
    corpus_fingerprint: str
    history: list[dict] = field(default_factory=list)
    split: dict[str, list[str]] = field(default_factory=dict)

    @property
    def embedding_dim(self) -> int:
        return self.network.embedding_dim

    @property
    def input_dim(self) -> int:
        return self.network.input_dim


def checkpoint_to_dict(c: Checkpoint) -> dict:
    net = c.network
    weights = {}
    for name in DENSE_LAYERS:
        weights[name] = {"W": net.params[f"{name}.W"].tolist(), "b": net.params[f"{name}.b"].tolist()}
    for name in BN_LAYERS:
        weights[name] = {"gamma": net.params[f"{name}.gamma"].tolist(), "beta": net.params[f"{name}.beta"].tolist()}
    bn_stats = {
        name: {"running_mean": net.running[name]["mean"].tolist(), "running_var": net.running[name]["var"].tolist()}
        for name in BN_LAYERS
    }
    return {
        "format_version": FORMAT_VERSION,
        "topology": {
            "widths": list(net.widths),
            "embedding_dim": net.embedding_dim,
            "bn_momentum": net.momentum,
            "bn_eps": net.eps,
        },
        "weights": weights,
        "bn_stats": bn_stats,
        "feature_order": list(c.feature_order),
        "functional_order": list(c.functional_order),
        "train_config": c.train_config,
        "best_val_loss": c.best_val_loss,
        "best_epoch": c.best_epoch,
        "corpus_fingerprint": c.corpus_fingerprint,
        "history": c.history,
        "split": c.split,
    }


def save_checkpoint(c: Checkpoint, path) -> None:
    """Write ``c`` as JSON. Python's float repr round-trips float64 exactly."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    text = json.dumps(checkpoint_to_dict(c), indent=1, allow_nan=False)
    path.write_text(text + "\n")


def _array(obj, shape, what):
    try:
        arr = np.array(obj, dtype=np.float64)
    except (TypeError, ValueError) as exc:
        raise CheckpointError(f"{what}: {exc}") from None
    if arr.shape != tuple(shape):
        raise CheckpointError(f"{what}: shape {arr.shape} != expected {tuple(shape)}")
    if not np.all(np.isfinite(arr)):
        raise CheckpointError(f"{what}: non-finite values")
    return arr


def checkpoint_from_dict(d: dict) -> Checkpoint:
    try:
        version = d["format_version"]
        if version != FORMAT_VERSION:
            raise CheckpointError(f"unsupported checkpoint format_version {version!r}")
        topo = d["topology"]
        widths = tuple(int(w) for w in topo["widths"])
        try:
            shapes = layer_shapes(widths)
        except ValueError as exc:
            raise CheckpointError(str(exc)) from None
        if int(topo.get("embedding_dim", widths[2])) != widths[2]:
            raise CheckpointError("embedding_dim disagrees with topology widths")
        params = {}
        for name, (n_out, n_in) in shapes.items():
            params[f"{name}.W"] = _array(d["weights"][name]["W"], (n_out, n_in), f"{name}.W")
            params[f"{name}.b"] = _array(d["weights"][name]["b"], (n_out,), f"{name}.b")
        running = {}
        for name, n in bn_sizes(widths).items():
            params[f"{name}.gamma"] = _array(d["weights"][name]["gamma"], (n,), f"{name}.gamma")
            params[f"{name}.beta"] = _array(d["weights"][name]["beta"], (n,), f"{name}.beta")
            st = d["bn_stats"][name]
            running[name] = {
                "mean": _array(st["running_mean"], (n,), f"{name}.running_mean"),
                "var": _array(st["running_var"], (n,), f"{name}.running_var"),
            }
            if np.any(running[name]["var"] < 0):
                raise CheckpointError(f"{name}: negative running variance")
        net = Network(
            widths=widths,
            params=params,
            running=running,
            momentum=float(topo.get("bn_momentum", BN_MOMENTUM)),
            eps=float(topo.get("bn_eps", BN_EPS)),
        )
        return Checkpoint(
            network=net,
            feature_order=list(d["feature_order"]),
            functional_order=list(d["functional_order"]),
            train_config=dict(d["train_config"]),
            best_val_loss=float(d["best_val_loss"]),
            best_epoch=int(d["best_epoch"]),
            corpus_fingerprint=str(d["corpus_fingerprint"]),
            history=list(d.get("history", [])),
            split=dict(d.get("split", {})),
        )
    except KeyError as exc:
        raise CheckpointError(f"missing checkpoint field {exc}") from None
    except (TypeError, AttributeError) as exc:
        raise CheckpointError(f"malformed checkpoint: {exc}") from None


def load_checkpoint(path) -> Checkpoint:
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as exc:
        raise CheckpointError(f"cannot read checkpoint {path}: {exc}") from None
    try:
        d = json.loads(text)
    except json.JSONDecodeError as exc:
        raise CheckpointError(f"{path}: not valid JSON ({exc.msg} at line {exc.lineno})") from None
    if not isinstance(d, dict):
        raise CheckpointError(f"{path}: checkpoint must be a JSON object")
    return checkpoint_from_dict(d)
