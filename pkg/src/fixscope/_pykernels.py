"""Pure numpy implementations of the hot kernels (fallback backend)."""
from __future__ import annotations

import numpy as np


def interior_bounds(shape, offsets):
    """Per-axis [lo, hi) range of voxels whose every offset neighbour is in the volume."""
    offsets = np.asarray(offsets, dtype=np.int64).reshape(-1, 3)
    lo = np.maximum(0, -offsets.min(axis=0))
    hi = np.asarray(shape) - np.maximum(0, offsets.max(axis=0))
    return tuple(int(v) for v in lo), tuple(int(v) for v in hi)


def neighbor_sum(vol: np.ndarray, offsets: np.ndarray) -> np.ndarray:
    """Sum of the offset neighbours for every interior voxel of a (K, M, N) volume."""
    (k0, m0, n0), (k1, m1, n1) = interior_bounds(vol.shape, offsets)
    out = np.zeros((max(k1 - k0, 0), max(m1 - m0, 0), max(n1 - n0, 0)), dtype=np.int64)
    if out.size == 0:
        return out
    for dk, dm, dn in np.asarray(offsets, dtype=np.int64).reshape(-1, 3):
        out += vol[k0 + dk:k1 + dk, m0 + dm:m1 + dm, n0 + dn:n1 + dn]
    return out


def neighbor_joint_table(vol: np.ndarray, offsets: np.ndarray, max_symbol: int) -> np.ndarray:
    """Dense count table ``[x, z]`` of (centre value, neighbour sum) over interior voxels."""
    (k0, m0, n0), (k1, m1, n1) = interior_bounds(vol.shape, offsets)
    zdim = len(offsets) * max_symbol + 1
    z = neighbor_sum(vol, offsets)
    x = vol[k0:k1, m0:m1, n0:n1].astype(np.int64)
    table = np.bincount((x * zdim + z).ravel(), minlength=(max_symbol + 1) * zdim)
    return table.reshape(max_symbol + 1, zdim)


def _row_sum_clogc(keys: np.ndarray) -> np.ndarray:
    """Per row of a (G, S) int array: sum over distinct values of c*log2(c)."""
    G, S = keys.shape
    if G == 0 or S == 0:
        return np.zeros(G)
    s = np.sort(keys, axis=1)
    start = np.ones((G, S), dtype=bool)
    start[:, 1:] = s[:, 1:] != s[:, :-1]
    pos = np.flatnonzero(start)
    counts = np.diff(np.append(pos, G * S))
    rows = pos // S
    return np.bincount(rows, weights=counts * np.log2(counts), minlength=G)


def grouped_entropies(x: np.ndarray, y: np.ndarray):
    """Row-wise plug-in entropies H(X), H(Y), H(X,Y) for (G, S) sample arrays."""
    x = np.asarray(x, dtype=np.int64)
    y = np.asarray(y, dtype=np.int64)
    G, S = x.shape
    if S == 0:
        raise ValueError("groups must be non-empty")
    ydim = int(y.max()) + 1 if y.size else 1
    base = np.log2(S)
    hx = base - _row_sum_clogc(x) / S
    hy = base - _row_sum_clogc(y) / S
    hxy = base - _row_sum_clogc(x * ydim + y) / S
    return np.maximum(hx, 0.0), np.maximum(hy, 0.0), np.maximum(hxy, 0.0)
