"""NumPy fallback for the knapsack-counting inner loop.

Computes the normalized table G(r, s) = F(r, s) / prod_{i<=r}(1 + w_i), where
F(r, s) sums prod_{i in S} w_i over subsets S of the first r items whose level
sum is at most s. Normalizing per row keeps every entry in [0, 1], so the
recurrence never overflows regardless of k.

The arithmetic here must stay operation-for-operation identical to the
compiled kernel: per row, each cell is g[s]*c plus (w*c)*g[s-a], with w*c
rounded once per row. The parity test asserts bit-equality between backends.
"""

from __future__ import annotations

import numpy as np

BACKEND = "numpy"


def _advance_row(g: np.ndarray, a: int, w: float) -> np.ndarray:
    c = 1.0 / (1.0 + w)
    out = g * c
    if a <= 0:
        out += (w * c) * g
        return out
    length = g.size - a
    if length > 0:
        out[a:] += (w * c) * g[:length]
    return out


def knapsack_pair(levels, capacity: int, w_minus, w_plus):
    """Final normalized sums G_minus(k, B), G_plus(k, B) for two weight vectors."""
    levels = np.asarray(levels, dtype=np.int64)
    w_minus = np.asarray(w_minus, dtype=np.float64)
    w_plus = np.asarray(w_plus, dtype=np.float64)
    gm = np.ones(capacity + 1)
    gp = np.ones(capacity + 1)
    for a, wm, wp in zip(levels, w_minus, w_plus):
        gm = _advance_row(gm, int(a), float(wm))
        gp = _advance_row(gp, int(a), float(wp))
    return float(gm[capacity]), float(gp[capacity])


def knapsack_single(levels, capacity: int, weights) -> float:
    """Final normalized sum G(k, B) for one weight vector."""
    levels = np.asarray(levels, dtype=np.int64)
    weights = np.asarray(weights, dtype=np.float64)
    g = np.ones(capacity + 1)
    for a, w in zip(levels, weights):
        g = _advance_row(g, int(a), float(w))
    return float(g[capacity])
