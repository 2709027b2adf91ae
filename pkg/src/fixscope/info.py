"""Plug-in (maximum-likelihood) entropy and mutual information over integer symbols.

All quantities are in bits. No bias correction is applied.
"""
from __future__ import annotations

import math
from collections import Counter
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np


class EmptySampleError(ValueError):
    pass


@dataclass(frozen=True, eq=False)
class Pmf:
    support: np.ndarray  # sorted int64 symbols, zero-mass symbols omitted
    probs: np.ndarray

    def __post_init__(self):
        if self.support.shape != self.probs.shape or self.support.ndim != 1:
            raise ValueError("support and probs must be matching 1-d arrays")
        if np.any(self.probs <= 0) or abs(self.probs.sum() - 1.0) > 1e-12:
            raise ValueError("probabilities must be positive and sum to 1")

    def as_dict(self) -> dict[int, float]:
        return dict(zip(self.support.tolist(), self.probs.tolist()))


@dataclass(frozen=True, eq=False)
class JointPmf:
    support: np.ndarray  # (n, 2) int64 pairs, lexicographically sorted
    probs: np.ndarray

    def __post_init__(self):
        if self.support.ndim != 2 or self.support.shape != (self.probs.size, 2):
            raise ValueError("support must be an (n, 2) array matching probs")
        if np.any(self.probs <= 0) or abs(self.probs.sum() - 1.0) > 1e-12:
            raise ValueError("probabilities must be positive and sum to 1")

    @classmethod
    def from_dict(cls, table: dict[tuple[int, int], float]) -> "JointPmf":
        items = sorted((k, v) for k, v in table.items() if v > 0)
        support = np.array([k for k, _ in items], dtype=np.int64).reshape(-1, 2)
        return cls(support, np.array([v for _, v in items], dtype=float))

    def as_dict(self) -> dict[tuple[int, int], float]:
        return {(int(a), int(b)): float(p) for (a, b), p in zip(self.support, self.probs)}

    def _marginal(self, axis: int) -> Pmf:
        symbols, inverse = np.unique(self.support[:, axis], return_inverse=True)
        return Pmf(symbols, np.bincount(inverse, weights=self.probs))

    def marginal_x(self) -> Pmf:
        return self._marginal(0)

    def marginal_y(self) -> Pmf:
        return self._marginal(1)

    def swapped(self) -> "JointPmf":
        support = self.support[:, ::-1]
        order = np.lexsort((support[:, 1], support[:, 0]))
        return JointPmf(np.ascontiguousarray(support[order]), self.probs[order])


class JointCounts:
    """Integer joint histogram of (x, y) pairs; partial histograms merge associatively."""

    def __init__(self, counts: Counter | None = None):
        self.counts: Counter = Counter() if counts is None else counts

    @classmethod
    def from_pairs(cls, pairs: Iterable[tuple[int, int]]) -> "JointCounts":
        return cls(Counter((int(a), int(b)) for a, b in pairs))

    @classmethod
    def from_arrays(cls, x: np.ndarray, y: np.ndarray) -> "JointCounts":
        pairs, counts = np.unique(np.stack([np.asarray(x, np.int64), np.asarray(y, np.int64)], axis=1),
                                  axis=0, return_counts=True)
        return cls(Counter({(int(a), int(b)): int(c) for (a, b), c in zip(pairs, counts)}))

    def merge(self, other: "JointCounts") -> "JointCounts":
        return JointCounts(self.counts + other.counts)

    @property
    def total(self) -> int:
        return sum(self.counts.values())

    def to_pmf(self) -> JointPmf:
        n = self.total
        if n == 0:
            raise EmptySampleError("empty histogram")
        keys = sorted(self.counts)
        support = np.array(keys, dtype=np.int64).reshape(-1, 2)
        counts = np.array([self.counts[k] for k in keys], dtype=np.int64)
        return JointPmf(support, counts / n)


def estimate_pmf(symbols: Sequence[int]) -> Pmf:
    symbols = np.asarray(symbols, dtype=np.int64)
    if symbols.size == 0:
        raise EmptySampleError("cannot estimate a pmf from an empty sequence")
    support, counts = np.unique(symbols, return_counts=True)
    return Pmf(support, counts / symbols.size)


def joint_from_pairs(pairs: Sequence[tuple[int, int]]) -> JointPmf:
    if len(pairs) == 0:
        raise EmptySampleError("cannot estimate a joint pmf from an empty sequence")
    return JointCounts.from_pairs(pairs).to_pmf()


# The Pmf-level sums use math.fsum: correctly rounded, hence independent of
# term order, which makes I(X;Y) and I(Y;X) bit-identical.

def entropy(p: Pmf) -> float:
    return max(0.0, -math.fsum(p.probs * np.log2(p.probs)))


def conditional_entropy(j: JointPmf) -> float:
    """H(X|Z) = sum p(x, z) log2(p(z) / p(x, z)) for a joint over (x, z)."""
    symbols, inverse = np.unique(j.support[:, 1], return_inverse=True)
    pz = np.bincount(inverse, weights=j.probs)[inverse]
    return max(0.0, math.fsum(j.probs * np.log2(pz / j.probs)))


def mutual_information(j: JointPmf) -> float:
    """I(X;Y) = sum p(x, y) log2(p(x, y) / (p(x) p(y)))."""
    _, ix = np.unique(j.support[:, 0], return_inverse=True)
    _, iy = np.unique(j.support[:, 1], return_inverse=True)
    px = np.bincount(ix, weights=j.probs)[ix]
    py = np.bincount(iy, weights=j.probs)[iy]
    return math.fsum(j.probs * np.log2(j.probs / (px * py)))


# Count-level estimators: integer counts in, one float log-sum out.

def entropy_from_counts(counts) -> float:
    """Entropy in bits of the empirical distribution with the given integer counts."""
    c = np.asarray(counts, dtype=np.int64)
    c = c[c > 0]
    n = int(c.sum())
    if n == 0:
        raise EmptySampleError("empty histogram")
    return float(max(0.0, np.log2(n) - np.dot(c, np.log2(c)) / n))


@dataclass(frozen=True)
class JointStats:
    h_x: float
    h_y: float
    h_xy: float

    @property
    def mi(self) -> float:
        return self.h_x + self.h_y - self.h_xy

    @property
    def h_x_given_y(self) -> float:
        return self.h_xy - self.h_y


def joint_stats_from_table(table: np.ndarray) -> JointStats:
    """Entropies of a dense 2-d count table indexed ``[x, y]``."""
    table = np.asarray(table, dtype=np.int64)
    return JointStats(entropy_from_counts(table.sum(axis=1)),
                      entropy_from_counts(table.sum(axis=0)),
                      entropy_from_counts(table.ravel()))
