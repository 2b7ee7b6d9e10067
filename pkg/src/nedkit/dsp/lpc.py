"""Linear prediction and line spectral frequencies.

LPC polynomial convention: A(z) = 1 + a1 z^-1 + ... + ap z^-p.
"""

from __future__ import annotations

import numpy as np

from .framing import FrameGrid

LPC_ORDER = 8
PRE_EMPHASIS = 0.97
GRID_DIVISIONS = 512
FINE_GRID_DIVISIONS = 4096
BISECTION_TOL = 1e-6


def pre_emphasis(x, coeff: float = PRE_EMPHASIS) -> np.ndarray:
    x = np.asarray(x, dtype=np.float64)
    if x.size == 0:
        return x.copy()
    return np.concatenate([x[:1], x[1:] - coeff * x[:-1]])


def autocorrelation(frames: np.ndarray, order: int) -> np.ndarray:
    """r[0..order] for every row."""
    n, L = frames.shape
    r = np.zeros((n, order + 1))
    for k in range(min(order, L - 1) + 1):
        r[:, k] = np.sum(frames[:, : L - k] * frames[:, k:], axis=1)
    return r


def levinson_durbin(r: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Solve the normal equations for each row of autocorrelations.

    Returns ``(a, ok)`` where ``a`` has a leading 1 and ``ok`` flags rows whose
    recursion stayed strictly inside the stability region (|k| < 1, positive
    prediction error). Rows with ``ok`` False hold partial results.
    """
    r = np.atleast_2d(np.asarray(r, dtype=np.float64))
    n, p1 = r.shape
    order = p1 - 1
    a = np.zeros((n, p1))
    a[:, 0] = 1.0
    err = r[:, 0].copy()
    ok = err > 0
    safe_err = np.where(ok, err, 1.0)
    for i in range(1, order + 1):
        acc = r[:, i] + np.sum(a[:, 1:i] * r[:, i - 1 : 0 : -1], axis=1) if i > 1 else r[:, i].copy()
        k = -acc / safe_err
        prev = a.copy()
        a[:, i] = k
        a[:, 1:i] = prev[:, 1:i] + k[:, None] * prev[:, i - 1 : 0 : -1]
        err = err * (1.0 - k * k)
        ok &= (np.abs(k) < 1.0) & (err > 0)
        safe_err = np.where(ok, err, 1.0)
    return a, ok


def symmetric_sum_polynomials(a: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Deflated P and Q coefficient rows (each of degree p, symmetric).

    P(z) = A(z) + z^-(p+1) A(1/z) has a root at z = -1 and Q(z) = A(z) - z^-(p+1) A(1/z)
    a root at z = +1 for even p; both trivial roots are divided out.
    """
    n, p1 = a.shape
    ext = np.concatenate([a, np.zeros((n, 1))], axis=1)
    rev = ext[:, ::-1]
    P = ext + rev
    Q = ext - rev
    Pd = np.zeros((n, p1))
    Qd = np.zeros((n, p1))
    Pd[:, 0] = P[:, 0]
    Qd[:, 0] = Q[:, 0]
    for k in range(1, p1):
        Pd[:, k] = P[:, k] - Pd[:, k - 1]
        Qd[:, k] = Q[:, k] + Qd[:, k - 1]
    return Pd, Qd


def _real_form(coeffs: np.ndarray, omegas: np.ndarray) -> np.ndarray:
    """Evaluate C(w) = c_h + 2 sum_{k<h} c_k cos((h-k) w) for symmetric rows on a shared grid."""
    h = (coeffs.shape[1] - 1) // 2
    m = np.arange(h, 0, -1)
    cos = np.cos(m[:, None] * np.asarray(omegas, dtype=np.float64)[None, :])
    return coeffs[:, h][:, None] + 2.0 * coeffs[:, :h] @ cos


def _real_form_rowwise(coeffs: np.ndarray, w: np.ndarray) -> np.ndarray:
    h = (coeffs.shape[1] - 1) // 2
    m = np.arange(h, 0, -1)
    return coeffs[:, h] + 2.0 * np.sum(coeffs[:, :h] * np.cos(w[:, None] * m[None, :]), axis=1)


def _roots_on_grid(coeffs: np.ndarray, divisions: int) -> list[np.ndarray]:
    """Roots in (0, pi) of each row's real form via sign changes plus bisection."""
    grid = np.linspace(0.0, np.pi, divisions + 1)
    vals = _real_form(coeffs, grid)
    sign = np.sign(vals)
    lo_rows, lo_idx = np.nonzero(sign[:, :-1] * sign[:, 1:] < 0)
    zero_rows, zero_idx = np.nonzero(sign[:, 1:-1] == 0)

    lo = grid[lo_idx]
    hi = grid[lo_idx + 1]
    c = coeffs[lo_rows]
    f_lo = _real_form_rowwise(c, lo)
    while lo.size and np.max(hi - lo) > BISECTION_TOL:
        mid = 0.5 * (lo + hi)
        f_mid = _real_form_rowwise(c, mid)
        left = np.sign(f_mid) == np.sign(f_lo)
        lo = np.where(left, mid, lo)
        f_lo = np.where(left, f_mid, f_lo)
        hi = np.where(left, hi, mid)
    roots = 0.5 * (lo + hi)

    out = [[] for _ in range(coeffs.shape[0])]
    for r, w in zip(lo_rows, roots):
        out[r].append(w)
    for r, i in zip(zero_rows, zero_idx):
        out[r].append(grid[i + 1])
    return [np.sort(np.array(v)) for v in out]


def uniform_lsf(order: int = LPC_ORDER) -> np.ndarray:
    return np.arange(1, order + 1) * np.pi / (order + 1)


def lpc_to_lsf(a: np.ndarray, divisions: int = GRID_DIVISIONS) -> tuple[np.ndarray, np.ndarray]:
    """LSFs (radians, ascending) for each row of LPC coefficients.

    Returns ``(lsf, ok)``; rows where the roots could not be isolated as a
    strictly increasing interleaved set get ``ok`` False and the uniform grid.
    Rows that fail at ``divisions`` are retried on a finer grid first.
    """
    a = np.atleast_2d(np.asarray(a, dtype=np.float64))
    n, p1 = a.shape
    order = p1 - 1
    if order % 2:
        raise ValueError("only even LPC orders are supported")
    out = np.tile(uniform_lsf(order), (n, 1))
    ok = np.zeros(n, dtype=bool)
    if n == 0:
        return out, ok
    Pd, Qd = symmetric_sum_polynomials(a)
    pending = np.arange(n)
    for div in (divisions, FINE_GRID_DIVISIONS):
        if pending.size == 0:
            break
        p_roots = _roots_on_grid(Pd[pending], div)
        q_roots = _roots_on_grid(Qd[pending], div)
        still = []
        for j, row in enumerate(pending):
            pr, qr = p_roots[j], q_roots[j]
            if pr.size == order // 2 and qr.size == order // 2:
                merged = np.empty(order)
                merged[0::2] = pr
                merged[1::2] = qr
                if np.all(np.diff(merged) > 0) and merged[0] > 0 and merged[-1] < np.pi:
                    out[row] = merged
                    ok[row] = True
                    continue
            still.append(row)
        pending = np.array(still, dtype=int)
    return out, ok


def lsf_to_lpc(lsf) -> np.ndarray:
    """Rebuild A(z) coefficients (leading 1) from an ascending LSF vector."""
    w = np.asarray(lsf, dtype=np.float64)
    order = w.shape[0]
    P = np.array([1.0])
    Q = np.array([1.0])
    for wi in w[0::2]:
        P = np.convolve(P, [1.0, -2.0 * np.cos(wi), 1.0])
    for wi in w[1::2]:
        Q = np.convolve(Q, [1.0, -2.0 * np.cos(wi), 1.0])
    P = np.convolve(P, [1.0, 1.0])
    Q = np.convolve(Q, [1.0, -1.0])
    return (0.5 * (P + Q))[: order + 1]


def lsf_features(samples, grid: FrameGrid, order: int = LPC_ORDER) -> np.ndarray:
    """Order-8 LSFs per frame from pre-emphasized, Hamming-windowed frames."""
    emphasized = pre_emphasis(samples)
    frames = grid.windowed(emphasized)
    if frames.shape[0] == 0:
        return np.zeros((0, order))
    r = autocorrelation(frames, order)
    a, stable = levinson_durbin(r)
    out = np.tile(uniform_lsf(order), (frames.shape[0], 1))
    rows = np.flatnonzero(stable)
    if rows.size:
        lsf, ok = lpc_to_lsf(a[rows])
        out[rows[ok]] = lsf[ok]
    return out
