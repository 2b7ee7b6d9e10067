"""Encoder-decoder network with batch normalization, written directly in numpy.

Topology for widths ``(d, h, m, h, d)``::

    encoder: Dense(d->h) -> BN(h) -> ReLU -> Dense(h->m)            => z
    decoder: BN(m) -> ReLU -> Dense(m->h) -> BN(h) -> ReLU -> Dense(h->d) => x_hat

The embedding ``z`` is the raw output of the last encoder Dense layer; the
batch norm and ReLU that follow it belong to the decoder.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

DEFAULT_WIDTHS = (228, 128, 30, 128, 228)
BN_MOMENTUM = 0.1
BN_EPS = 1e-5

DENSE_LAYERS = ("enc1", "enc2", "dec1", "dec2")
BN_LAYERS = ("enc_bn1", "dec_bn0", "dec_bn1")


def smooth_l1(a, b) -> float:
    """Sum over components of the smooth L1 penalty of ``a - b``."""
    a = np.asarray(a, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)
    if a.shape != b.shape:
        raise ValueError(f"length mismatch: {a.shape} vs {b.shape}")
    return float(np.sum(smooth_l1_elementwise(a - b)))


def smooth_l1_elementwise(d: np.ndarray) -> np.ndarray:
    ad = np.abs(d)
    return np.where(ad <= 1.0, 0.5 * d * d, ad - 0.5)


def smooth_l1_derivative(d: np.ndarray) -> np.ndarray:
    # quadratic branch owns the kink, so s'(+-1) = +-1 from both sides
    return np.clip(d, -1.0, 1.0)


def _check_widths(widths) -> tuple[int, ...]:
    widths = tuple(int(w) for w in widths)
    if len(widths) != 5 or widths[0] != widths[4] or widths[1] != widths[3]:
        raise ValueError(f"widths must look like (d, h, m, h, d), got {widths}")
    if min(widths) < 1:
        raise ValueError(f"widths must be positive, got {widths}")
    if not widths[2] < widths[0]:
        raise ValueError("embedding must be undercomplete (m < d)")
    return widths


def layer_shapes(widths) -> dict[str, tuple[int, int]]:
    d, h, m, _, _ = _check_widths(widths)
    return {"enc1": (h, d), "enc2": (m, h), "dec1": (h, m), "dec2": (d, h)}


def bn_sizes(widths) -> dict[str, int]:
    d, h, m, _, _ = _check_widths(widths)
    return {"enc_bn1": h, "dec_bn0": m, "dec_bn1": h}


@dataclass
class Network:
    """Parameters plus batch-norm running statistics.

    ``params`` maps names like ``"enc1.W"``, ``"enc1.b"``, ``"enc_bn1.gamma"``
    to float64 arrays. ``running`` maps batch-norm layer names to
    ``{"mean": ..., "var": ...}``.
    """

    widths: tuple[int, ...]
    params: dict[str, np.ndarray]
    running: dict[str, dict[str, np.ndarray]] = field(default_factory=dict)
    momentum: float = BN_MOMENTUM
    eps: float = BN_EPS

    @property
    def input_dim(self) -> int:
        return self.widths[0]

    @property
    def embedding_dim(self) -> int:
        return self.widths[2]

    def copy(self) -> "Network":
        return Network(
            widths=self.widths,
            params={k: v.copy() for k, v in self.params.items()},
            running={k: {s: a.copy() for s, a in v.items()} for k, v in self.running.items()},
            momentum=self.momentum,
            eps=self.eps,
        )


def init_network(widths=DEFAULT_WIDTHS, rng: np.random.Generator | None = None) -> Network:
    """He-uniform weights, zero biases, unit gamma, zero beta."""
    widths = _check_widths(widths)
    rng = np.random.default_rng(0) if rng is None else rng
    params: dict[str, np.ndarray] = {}
    for name, (n_out, n_in) in layer_shapes(widths).items():
        limit = np.sqrt(6.0 / n_in)
        params[f"{name}.W"] = rng.uniform(-limit, limit, size=(n_out, n_in))
        params[f"{name}.b"] = np.zeros(n_out)
    running = {}
    for name, n in bn_sizes(widths).items():
        params[f"{name}.gamma"] = np.ones(n)
        params[f"{name}.beta"] = np.zeros(n)
        running[name] = {"mean": np.zeros(n), "var": np.ones(n)}
    return Network(widths=widths, params=params, running=running)


def _dense(x, W, b):
    return x @ W.T + b


def _bn_train(h, gamma, beta, eps):
    mu = h.mean(axis=0)
    var = h.var(axis=0)
    inv_std = 1.0 / np.sqrt(var + eps)
    h_norm = (h - mu) * inv_std
    return gamma * h_norm + beta, h_norm, inv_std, mu, var


def _bn_infer(h, gamma, beta, mean, var, eps):
    return gamma * (h - mean) / np.sqrt(var + eps) + beta


def forward(net: Network, x, mode: str = "infer"):
    """Run the network on a batch.

    Returns ``(z, x_hat, cache)``. In ``"train"`` mode batch statistics are
    used and ``cache`` holds what :func:`backward` needs, including the batch
    means/variances for :func:`update_running_stats`. ``forward`` itself never
    mutates ``net``.
    """
    x = np.asarray(x, dtype=np.float64)
    if x.ndim == 1:
        x = x[None, :]
    if x.ndim != 2 or x.shape[0] == 0:
        raise ValueError("expected a nonempty 2-D batch")
    if x.shape[1] != net.input_dim:
        raise ValueError(f"input dimension {x.shape[1]} != network input {net.input_dim}")
    if mode not in ("train", "infer"):
        raise ValueError(f"unknown mode {mode!r}")
    train = mode == "train"
    if train and x.shape[0] < 2:
        raise ValueError("train mode needs a batch of at least 2 (batch statistics)")

    p = net.params
    cache: dict = {"x": x}

    def bn(name, h):
        gamma, beta = p[f"{name}.gamma"], p[f"{name}.beta"]
        if train:
            out, h_norm, inv_std, mu, var = _bn_train(h, gamma, beta, net.eps)
            cache[name] = (h_norm, inv_std, mu, var)
            return out
        st = net.running[name]
        return _bn_infer(h, gamma, beta, st["mean"], st["var"], net.eps)

    a1 = _dense(x, p["enc1.W"], p["enc1.b"])
    r1 = np.maximum(bn("enc_bn1", a1), 0.0)
    z = _dense(r1, p["enc2.W"], p["enc2.b"])
    r2 = np.maximum(bn("dec_bn0", z), 0.0)
    a3 = _dense(r2, p["dec1.W"], p["dec1.b"])
    r3 = np.maximum(bn("dec_bn1", a3), 0.0)
    x_hat = _dense(r3, p["dec2.W"], p["dec2.b"])

    cache.update(r1=r1, z=z, r2=r2, r3=r3, x_hat=x_hat)
    return z, x_hat, cache


def encode(net: Network, x) -> np.ndarray:
    """Infer-mode encoder only; returns a (batch, m) array."""
    x = np.asarray(x, dtype=np.float64)
    single = x.ndim == 1
    if single:
        x = x[None, :]
    if x.shape[1] != net.input_dim:
        raise ValueError(f"input dimension {x.shape[1]} != network input {net.input_dim}")
    p = net.params
    st = net.running["enc_bn1"]
    a1 = _dense(x, p["enc1.W"], p["enc1.b"])
    r1 = np.maximum(_bn_infer(a1, p["enc_bn1.gamma"], p["enc_bn1.beta"], st["mean"], st["var"], net.eps), 0.0)
    z = _dense(r1, p["enc2.W"], p["enc2.b"])
    return z[0] if single else z


def batch_loss(x_hat, x2) -> float:
    """Mean over the batch of per-pair smooth-L1 sums."""
    x_hat = np.asarray(x_hat, dtype=np.float64)
    x2 = np.asarray(x2, dtype=np.float64)
    if x_hat.shape != x2.shape:
        raise ValueError(f"shape mismatch: {x_hat.shape} vs {x2.shape}")
    return float(np.sum(smooth_l1_elementwise(x2 - x_hat)) / x2.shape[0])


def _bn_backward(dy, h_norm, inv_std, gamma):
    n = dy.shape[0]
    dgamma = np.sum(dy * h_norm, axis=0)
    dbeta = np.sum(dy, axis=0)
    dxn = dy * gamma
    dh = (inv_std / n) * (n * dxn - np.sum(dxn, axis=0) - h_norm * np.sum(dxn * h_norm, axis=0))
    return dh, dgamma, dbeta


def backward(net: Network, cache: dict, x2) -> tuple[float, dict[str, np.ndarray]]:
    """Loss and exact gradients for every parameter, given a train-mode cache."""
    if "enc_bn1" not in cache:
        raise ValueError("backward needs a cache produced by forward(..., mode='train')")
    p = net.params
    x2 = np.asarray(x2, dtype=np.float64)
    x_hat = cache["x_hat"]
    n = x2.shape[0]
    loss = batch_loss(x_hat, x2)
    g: dict[str, np.ndarray] = {}

    d_out = -smooth_l1_derivative(x2 - x_hat) / n

    g["dec2.W"] = d_out.T @ cache["r3"]
    g["dec2.b"] = d_out.sum(axis=0)
    d_r3 = d_out @ p["dec2.W"]
    d_bn = d_r3 * (cache["r3"] > 0)
    h_norm, inv_std, _, _ = cache["dec_bn1"]
    d_a3, g["dec_bn1.gamma"], g["dec_bn1.beta"] = _bn_backward(d_bn, h_norm, inv_std, p["dec_bn1.gamma"])

    g["dec1.W"] = d_a3.T @ cache["r2"]
    g["dec1.b"] = d_a3.sum(axis=0)
    d_r2 = d_a3 @ p["dec1.W"]
    d_bn = d_r2 * (cache["r2"] > 0)
    h_norm, inv_std, _, _ = cache["dec_bn0"]
    d_z, g["dec_bn0.gamma"], g["dec_bn0.beta"] = _bn_backward(d_bn, h_norm, inv_std, p["dec_bn0.gamma"])

    g["enc2.W"] = d_z.T @ cache["r1"]
    g["enc2.b"] = d_z.sum(axis=0)
    d_r1 = d_z @ p["enc2.W"]
    d_bn = d_r1 * (cache["r1"] > 0)
    h_norm, inv_std, _, _ = cache["enc_bn1"]
    d_a1, g["enc_bn1.gamma"], g["enc_bn1.beta"] = _bn_backward(d_bn, h_norm, inv_std, p["enc_bn1.gamma"])

    g["enc1.W"] = d_a1.T @ cache["x"]
    g["enc1.b"] = d_a1.sum(axis=0)
    return loss, g


def update_running_stats(net: Network, cache: dict) -> None:
    """Fold the batch statistics of a train-mode pass into the running ones."""
    mom = net.momentum
    for name in BN_LAYERS:
        _, _, mu, var = cache[name]
        n = cache["x"].shape[0]
        unbiased = var * n / (n - 1)
        st = net.running[name]
        st["mean"] = (1.0 - mom) * st["mean"] + mom * mu
        st["var"] = (1.0 - mom) * st["var"] + mom * unbiased
