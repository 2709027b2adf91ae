"""All-neighbour conditional entropy, per-location spatial MI and temporal MI curves.

Neighbour aggregates are encoded as the integer *sum* of the neighbour
counts. The arithmetic mean is ``sum / len(offsets)``, an injective relabeling,
and entropy, conditional entropy and mutual information are all invariant
under injective relabeling, so the results equal those of the mean while the
alphabet stays integral.

Voxels whose neighbourhood leaves the volume are excluded, never zero padded.
"""
from __future__ import annotations

import itertools
import json
import math
from dataclasses import asdict, dataclass
from typing import Sequence

import numpy as np

from . import kernels
from .fixmap import FixationMap, FixMapError, ScaleSpec, rescale
from .info import JointStats, joint_stats_from_table
from .rng import SplitMix64, derive_seed

REPORT_FORMAT = "fixscope-report/1"
DEFAULT_DISTANCES = tuple(range(1, 16))
DEFAULT_WINDOWS = tuple(range(1, 13))
DEFAULT_SCALE = ScaleSpec(40, 40)
MAX_DENSE_TABLE = 1 << 24


class AnalysisError(ValueError):
    pass


@dataclass(frozen=True)
class NeighborhoodSpec:
    name: str
    offsets: tuple[tuple[int, int, int], ...]  # (dm, dn, dk)

    def __post_init__(self):
        if not self.offsets:
            raise ValueError("neighbourhood must contain at least one offset")
        for off in self.offsets:
            if len(off) != 3 or any(c not in (-1, 0, 1) for c in off) or off == (0, 0, 0):
                raise ValueError(f"invalid offset {off}")
        if len(set(self.offsets)) != len(self.offsets):
            raise ValueError("duplicate offsets")

    def kernel_offsets(self) -> np.ndarray:
        """Offsets reordered to volume axis order (dk, dm, dn)."""
        return np.array([(dk, dm, dn) for dm, dn, dk in self.offsets], dtype=np.int64)


def _spatial8():
    return tuple((dm, dn, 0) for dm, dn in itertools.product((-1, 0, 1), repeat=2) if (dm, dn) != (0, 0))


SPATIAL8 = NeighborhoodSpec("SPATIAL8", _spatial8())
TEMPORAL2 = NeighborhoodSpec("TEMPORAL2", ((0, 0, -1), (0, 0, 1)))
# Ordering: 8 spatial, then the 2 pure temporal, then the 16 remaining.
ALL26 = NeighborhoodSpec("ALL26", SPATIAL8.offsets + TEMPORAL2.offsets + tuple(
    (dm, dn, dk) for dk in (-1, 1) for dm, dn, _ in SPATIAL8.offsets))
PRESETS = {s.name: s for s in (ALL26, SPATIAL8, TEMPORAL2)}


@dataclass(frozen=True)
class AllNeighborsResult:
    h_x: float
    h_x_given_z: float
    h_x_given_u: float
    n_samples: int
    neighborhood: str = "ALL26"
    seed: int = 0

    @property
    def reduction(self) -> float:
        return self.h_x - self.h_x_given_z

    @property
    def baseline_reduction(self) -> float:
        return self.h_x - self.h_x_given_u


@dataclass(frozen=True, eq=False)
class SpatialMiMap:
    values: np.ndarray  # (M, N) bits, NaN on border locations

    def argmax(self) -> tuple[int, int]:
        m, n = np.unravel_index(np.nanargmax(self.values), self.values.shape)
        return int(m), int(n)

    def to_rows(self) -> list[list[float | None]]:
        return [[None if math.isnan(v) else float(v) for v in row] for row in self.values.tolist()]

    @classmethod
    def from_rows(cls, rows) -> "SpatialMiMap":
        return cls(np.array([[np.nan if v is None else v for v in row] for row in rows], dtype=float))

    def __eq__(self, other) -> bool:
        if not isinstance(other, SpatialMiMap):
            return NotImplemented
        return np.array_equal(self.values, other.values, equal_nan=True)


@dataclass(frozen=True)
class TemporalMiCurve:
    mode: str  # "pair" (distance D) or "window" (window size N)
    distances: tuple[int, ...]
    mi: tuple[float, ...]
    aggregation: str = "video"

    def __post_init__(self):
        if self.mode not in ("pair", "window"):
            raise ValueError(f"unknown curve mode {self.mode!r}")
        if len(self.distances) != len(self.mi):
            raise ValueError("distances and mi differ in length")
        if any(b <= a for a, b in zip(self.distances, self.distances[1:])):
            raise ValueError("distances must be strictly increasing")

    def as_dict(self) -> dict[int, float]:
        return dict(zip(self.distances, self.mi))


def _joint_entropies_1d(x: np.ndarray, y: np.ndarray) -> JointStats:
    hx, hy, hxy = kernels.grouped_entropies(x.reshape(1, -1), y.reshape(1, -1))
    return JointStats(float(hx[0]), float(hy[0]), float(hxy[0]))


def all_neighbors_entropy(fmap: FixationMap, spec: NeighborhoodSpec = ALL26,
                          seed: int = 0) -> AllNeighborsResult:
    """Entropy of interior pixels, conditioned on the neighbour sum and on a uniform baseline.

    The baseline pairs every interior pixel with an independent draw from
    ``0..L`` (``L`` the map's largest count) using SplitMix64 seeded by ``seed``.
    """
    vol = fmap.dense()
    offsets = spec.kernel_offsets()
    lo, hi = kernels.interior_bounds(vol.shape, offsets)
    n = int(np.prod([max(h - l, 0) for l, h in zip(lo, hi)]))
    if n == 0:
        raise AnalysisError(f"map {fmap.shape} too small for a complete {spec.name} neighbourhood")
    L = fmap.max_symbol
    x = vol[lo[0]:hi[0], lo[1]:hi[1], lo[2]:hi[2]].astype(np.int64).ravel()

    if (L + 1) * (len(offsets) * L + 1) <= MAX_DENSE_TABLE:
        stats = joint_stats_from_table(kernels.neighbor_joint_table(vol, offsets, L))
    else:
        stats = _joint_entropies_1d(x, kernels.neighbor_sum(vol, offsets).ravel())

    u = SplitMix64(seed).below(L + 1, n)
    base = _joint_entropies_1d(x, u)
    return AllNeighborsResult(
        h_x=stats.h_x,
        h_x_given_z=max(0.0, stats.h_x_given_y),
        h_x_given_u=max(0.0, base.h_x_given_y),
        n_samples=n,
        neighborhood=spec.name,
        seed=seed,
    )


def spatial_mi_map(fmap: FixationMap) -> SpatialMiMap:
    """I(X[m,n]; Q[m,n]) over frames, Q the sum of the 8 spatial neighbours."""
    K, M, N = fmap.shape
    if M < 3 or N < 3 or K < 2:
        raise AnalysisError(f"spatial MI needs M, N >= 3 and K >= 2, got M={M} N={N} K={K}")
    vol = fmap.dense()
    q = kernels.neighbor_sum(vol, SPATIAL8.kernel_offsets())  # (K, M-2, N-2)
    x = vol[:, 1:-1, 1:-1].astype(np.int64)
    G = (M - 2) * (N - 2)
    hx, hy, hxy = kernels.grouped_entropies(x.reshape(K, G).T, q.reshape(K, G).T)
    out = np.full((M, N), np.nan)
    out[1:-1, 1:-1] = np.maximum(hx + hy - hxy, 0.0).reshape(M - 2, N - 2)
    return SpatialMiMap(out)


def _check_lags(values: Sequence[int], K: int, what: str) -> tuple[int, ...]:
    values = tuple(int(v) for v in values)
    if not values:
        raise AnalysisError(f"no {what} requested")
    if any(v < 1 for v in values):
        raise AnalysisError(f"{what} must be >= 1")
    if any(b <= a for a, b in zip(values, values[1:])):
        raise AnalysisError(f"{what} must be strictly increasing")
    bad = [v for v in values if K <= 2 * v]
    if bad:
        raise AnalysisError(f"{what} {bad} too large for K={K} frames (each must satisfy K > 2 * value)")
    return values


def _frame_mi(x: np.ndarray, w: np.ndarray) -> float:
    """Mean over frames of I(X_k; W_k), pixels of each frame being the samples."""
    G = x.shape[0]
    hx, hy, hxy = kernels.grouped_entropies(x.reshape(G, -1), w.reshape(G, -1))
    return float(np.mean(np.maximum(hx + hy - hxy, 0.0)))


def temporal_mi_pair(fmap: FixationMap, distances: Sequence[int]) -> TemporalMiCurve:
    """For each D, mean over frames k of I(F(k); F(k-D) + F(k+D))."""
    K = fmap.depth
    distances = _check_lags(distances, K, "distances")
    vol = fmap.dense().astype(np.int64)
    mi = [_frame_mi(vol[D:K - D], vol[:K - 2 * D] + vol[2 * D:]) for D in distances]
    return TemporalMiCurve("pair", distances, tuple(mi))


def temporal_mi_window(fmap: FixationMap, window_sizes: Sequence[int]) -> TemporalMiCurve:
    """For each N, mean over frames k of I(F(k); sum of F(k+d) for 1 <= |d| <= N)."""
    K = fmap.depth
    window_sizes = _check_lags(window_sizes, K, "window sizes")
    vol = fmap.dense().astype(np.int64)
    prefix = np.zeros((K + 1,) + vol.shape[1:], dtype=np.int64)
    np.cumsum(vol, axis=0, out=prefix[1:])
    mi = []
    for N in window_sizes:
        w = (prefix[2 * N + 1:] - prefix[N + 1:K - N + 1]) + (prefix[N:K - N] - prefix[:K - 2 * N])
        mi.append(_frame_mi(vol[N:K - N], w))
    return TemporalMiCurve("window", window_sizes, tuple(mi))


def category_mean(curves: Sequence[TemporalMiCurve], category: str) -> TemporalMiCurve:
    """Unweighted mean of per-video curves sharing the same lags."""
    if not curves:
        raise AnalysisError("no curves to aggregate")
    first = curves[0]
    for c in curves[1:]:
        if c.mode != first.mode or c.distances != first.distances:
            raise AnalysisError("curves to aggregate must share mode and lags")
    mi = np.mean(np.array([c.mi for c in curves], dtype=float), axis=0)
    return TemporalMiCurve(first.mode, first.distances, tuple(float(v) for v in mi),
                           aggregation=f"category:{category}")


def feasible(lags: Sequence[int], K: int) -> tuple[int, ...]:
    return tuple(v for v in lags if K > 2 * v)


@dataclass(frozen=True)
class AnalysisConfig:
    scale: ScaleSpec | None = DEFAULT_SCALE
    distances: tuple[int, ...] | None = None  # None: defaults clipped to K
    windows: tuple[int, ...] | None = None
    neighborhoods: tuple[str, ...] = ("ALL26",)
    seed: int = 0
    name: str = ""
    category: str = ""


@dataclass
class AnalysisReport:
    name: str
    category: str
    source_shape: dict
    analyzed_shape: dict
    scale: str | None
    max_symbol: int
    total_count: int
    seed: int
    all_neighbors: dict
    spatial_mi: list
    temporal_pair: dict
    temporal_window: dict
    version: str = ""
    format: str = REPORT_FORMAT

    def to_json(self) -> str:
        data = {"format": self.format, "version": self.version}
        data.update({k: v for k, v in asdict(self).items() if k not in ("format", "version")})
        return json.dumps(data, indent=1, allow_nan=False) + "\n"

    @classmethod
    def from_json(cls, text: str) -> "AnalysisReport":
        data = json.loads(text)
        if data.get("format") != REPORT_FORMAT:
            raise ValueError(f"not a {REPORT_FORMAT} document")
        return cls(**data)

    def all_neighbors_result(self, name: str = "ALL26") -> AllNeighborsResult:
        return AllNeighborsResult(**self.all_neighbors[name])

    def spatial_map(self) -> SpatialMiMap:
        return SpatialMiMap.from_rows(self.spatial_mi)

    def curve(self, mode: str) -> TemporalMiCurve:
        d = self.temporal_pair if mode == "pair" else self.temporal_window
        return TemporalMiCurve(mode, tuple(d["distances"]), tuple(d["mi_bits"]))


def _shape_dict(fmap: FixationMap) -> dict:
    return {"height": fmap.height, "width": fmap.width, "depth": fmap.depth}


def _curve_dict(curve: TemporalMiCurve | None) -> dict:
    if curve is None:
        return {"distances": [], "mi_bits": []}
    return {"distances": list(curve.distances), "mi_bits": list(curve.mi)}


def run_report(fmap: FixationMap, config: AnalysisConfig = AnalysisConfig()) -> AnalysisReport:
    """Run every study on one map and bundle the results.

    The map is block-summed with ``config.scale`` first, unless the window
    does not fit inside a frame (the map is then taken as already reduced).
    Unset lag lists default to 1..15 (pair) and 1..12 (window), clipped to
    what the map depth supports.
    """
    from . import __version__

    source = fmap
    scale = config.scale
    if scale is not None and (scale.height > fmap.height or scale.width > fmap.width):
        scale = None
    if scale is not None:
        fmap = rescale(fmap, scale)

    K = fmap.depth
    distances = feasible(DEFAULT_DISTANCES, K) if config.distances is None else tuple(config.distances)
    windows = feasible(DEFAULT_WINDOWS, K) if config.windows is None else tuple(config.windows)

    all_nb = {}
    for i, name in enumerate(config.neighborhoods):
        if name not in PRESETS:
            raise AnalysisError(f"unknown neighbourhood {name!r}")
        res = all_neighbors_entropy(fmap, PRESETS[name], seed=derive_seed(config.seed, i))
        all_nb[name] = asdict(res)

    try:
        spatial = spatial_mi_map(fmap).to_rows()
    except AnalysisError:
        spatial = []

    return AnalysisReport(
        name=config.name,
        category=config.category,
        source_shape=_shape_dict(source),
        analyzed_shape=_shape_dict(fmap),
        scale=None if scale is None else str(scale),
        max_symbol=fmap.max_symbol,
        total_count=fmap.total(),
        seed=config.seed,
        all_neighbors=all_nb,
        spatial_mi=spatial,
        temporal_pair=_curve_dict(temporal_mi_pair(fmap, distances) if distances else None),
        temporal_window=_curve_dict(temporal_mi_window(fmap, windows) if windows else None),
        version=__version__,
    )


__all__ = [
    "ALL26", "SPATIAL8", "TEMPORAL2", "PRESETS", "NeighborhoodSpec", "AllNeighborsResult",
    "SpatialMiMap", "TemporalMiCurve", "AnalysisConfig", "AnalysisReport", "AnalysisError",
    "all_neighbors_entropy", "spatial_mi_map", "temporal_mi_pair", "temporal_mi_window",
    "category_mean", "run_report", "FixMapError",
]
