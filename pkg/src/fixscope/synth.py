"""Seeded synthetic scenarios and brute-force reference estimators.

Scenario geometry is computed in Q8 fixed point (1/256 grid cell) from
SplitMix64 integer draws, so a given (scenario, seed) yields the same map on
every platform. Gaze jitter uses the Irwin-Hall normal approximation of
:meth:`SplitMix64.normal_q16`; jittered positions that fall off the grid are
discarded.
"""
from __future__ import annotations

import enum
import math
from collections import Counter
from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

import numpy as np

from .correlation import NeighborhoodSpec
from .fixmap import FixationMap
from .gaze import GazeSample, Label, RecordingMeta
from .rng import SplitMix64

Q = 256  # fixed-point units per grid cell
ORACLE_MAX_DIM = 64


class SynthError(ValueError):
    pass


class Kind(enum.Enum):
    CENTER_BIAS = "center-bias"
    SMOOTH_PURSUIT = "smooth-pursuit"
    STATIC_DOT_JUMPS = "static-dot-jumps"
    UNIFORM_NOISE = "uniform-noise"
    IID_FRAMES = "iid-frames"
    IDENTICAL_FRAMES = "identical-frames"

    @classmethod
    def parse(cls, name: str) -> "Kind":
        key = name.strip().lower().replace("_", "-")
        for kind in cls:
            if key in (kind.value, kind.value.replace("-", "")):
                return kind
        raise SynthError(f"unknown scenario {name!r}; choose from {', '.join(k.value for k in cls)}")


DEFAULT_DISPERSION = {
    Kind.CENTER_BIAS: 2.0,
    Kind.SMOOTH_PURSUIT: 1.0,
    Kind.STATIC_DOT_JUMPS: 1.0,
}


DEFAULT_SPAN = {Kind.STATIC_DOT_JUMPS: 15}


@dataclass(frozen=True)
class Scenario:
    """Parameters of one synthetic recording.

    ``dispersion`` is the standard deviation, in grid cells, of gaze around
    the scene's anchor. For CENTER_BIAS it splits into a slowly re-drawn
    attention target around the frame centre (variance 15/16) and per-sample
    jitter around that target (variance 1/16). ``span`` is how many frames a
    CENTER_BIAS target or a STATIC_DOT_JUMPS dot holds still.
    """

    kind: Kind
    height: int = 12
    width: int = 16
    depth: int = 60
    subjects: int = 8
    samples_per_frame: int = 8  # per subject; 240 Hz tracker / 30 fps video
    dispersion: float | None = None
    seed: int = 0
    speed: int = 1  # SMOOTH_PURSUIT cells per frame along each axis
    span: int | None = None

    def __post_init__(self):
        if isinstance(self.kind, str):
            object.__setattr__(self, "kind", Kind.parse(self.kind))
        if min(self.height, self.width, self.depth) <= 0:
            raise SynthError("scenario dimensions must be positive")
        if self.span is None:
            object.__setattr__(self, "span", DEFAULT_SPAN.get(self.kind, 1))
        if self.subjects <= 0 or self.samples_per_frame <= 0 or self.span <= 0:
            raise SynthError("subjects, samples_per_frame and span must be positive")
        if self.dispersion is None:
            object.__setattr__(self, "dispersion", DEFAULT_DISPERSION.get(self.kind, 0.0))
        if self.dispersion < 0:
            raise SynthError("dispersion must be >= 0")

    @property
    def meta(self) -> RecordingMeta:
        return RecordingMeta(self.width, self.height, Fraction(30), Fraction(30 * self.samples_per_frame))


@dataclass(frozen=True)
class SynthResult:
    map: FixationMap
    samples: list[GazeSample]
    meta: RecordingMeta


def _jitter(rng: SplitMix64, count: int, std: float) -> np.ndarray:
    """Q8 offsets with standard deviation ``std`` cells."""
    std_q = int(round(std * Q))
    if std_q == 0:
        rng.u64(12 * count)  # keep stream positions independent of dispersion
        return np.zeros(count, dtype=np.int64)
    return (rng.normal_q16(count) * std_q) >> 16


def _reflect(pos: np.ndarray, extent: int) -> np.ndarray:
    """Fold Q8 positions into [0, extent*Q) by mirror reflection at the edges."""
    top = extent * Q - 1
    if top == 0:
        return np.zeros_like(pos)
    period = 2 * top
    p = np.mod(pos, period)
    return np.where(p > top, period - p, p)


def _targets(sc: Scenario, rng: SplitMix64) -> tuple[np.ndarray, np.ndarray, float]:
    """Per-frame anchor (row, col) in Q8 plus the per-sample jitter std."""
    K, M, N = sc.depth, sc.height, sc.width
    cm, cn = (M // 2) * Q + Q // 2, (N // 2) * Q + Q // 2
    k = np.arange(K)
    if sc.kind is Kind.CENTER_BIAS:
        epochs = (K + sc.span - 1) // sc.span
        target_std = sc.dispersion * math.sqrt(15 / 16)
        tm = np.repeat(cm + _jitter(rng, epochs, target_std), sc.span)[:K]
        tn = np.repeat(cn + _jitter(rng, epochs, target_std), sc.span)[:K]
        return tm, tn, sc.dispersion / 4
    if sc.kind is Kind.SMOOTH_PURSUIT:
        start_m = rng.below(M * Q, 1)[0]
        start_n = rng.below(N * Q, 1)[0]
        step = sc.speed * Q
        return _reflect(start_m + step * k, M), _reflect(start_n + step * k, N), sc.dispersion
    if sc.kind is Kind.STATIC_DOT_JUMPS:
        epochs = (K + sc.span - 1) // sc.span
        tm = np.repeat(rng.below(M, epochs) * Q + Q // 2, sc.span)[:K]
        tn = np.repeat(rng.below(N, epochs) * Q + Q // 2, sc.span)[:K]
        return tm, tn, sc.dispersion
    raise AssertionError(sc.kind)


def _cells(sc: Scenario) -> tuple[np.ndarray, np.ndarray, np.ndarray, np.ndarray, np.ndarray]:
    """Sample frame, subject, within-frame index, row and column for every generated sample."""
    K, M, N, S, P = sc.depth, sc.height, sc.width, sc.subjects, sc.samples_per_frame
    rng = SplitMix64(sc.seed)
    if sc.kind is Kind.IID_FRAMES:
        on = rng.below(4, K * M * N).reshape(K, M, N) == 0
        k, m, n = np.nonzero(on)
        zeros = np.zeros_like(k)
        return k, zeros, zeros, m, n

    per_frame = S * P
    k = np.repeat(np.arange(K), per_frame)
    subj = np.tile(np.repeat(np.arange(S), P), K)
    j = np.tile(np.arange(P), K * S)
    if sc.kind is Kind.UNIFORM_NOISE:
        return k, subj, j, rng.below(M, K * per_frame), rng.below(N, K * per_frame)
    if sc.kind is Kind.IDENTICAL_FRAMES:
        m0, n0 = rng.below(M, per_frame), rng.below(N, per_frame)
        return k, subj, j, np.tile(m0, K), np.tile(n0, K)

    tm, tn, std = _targets(sc, rng)
    total = K * per_frame
    pm = np.repeat(tm, per_frame) + _jitter(rng, total, std)
    pn = np.repeat(tn, per_frame) + _jitter(rng, total, std)
    m, n = pm >> 8, pn >> 8
    keep = (m >= 0) & (m < M) & (n >= 0) & (n < N)
    return k[keep], subj[keep], j[keep], m[keep], n[keep]


def generate_with_gaze(sc: Scenario) -> SynthResult:
    """Generate the scenario's map together with an equivalent merged gaze stream."""
    k, subj, j, m, n = _cells(sc)
    K, M, N = sc.depth, sc.height, sc.width
    lin = (k * M + m) * N + n
    idx, counts = np.unique(lin, return_counts=True)
    fmap = FixationMap.from_coo((K, M, N), idx, counts)

    t = k * sc.samples_per_frame + j
    order = np.lexsort((subj, t))
    label = Label.SMOOTH_PURSUIT if sc.kind is Kind.SMOOTH_PURSUIT else Label.FIXATION
    samples = [GazeSample(int(t[i]), int(n[i]), int(m[i]), label) for i in order]
    return SynthResult(fmap, samples, sc.meta)


def generate(sc: Scenario) -> FixationMap:
    return generate_with_gaze(sc).map


def random_map(seed: int, max_dims: tuple[int, int, int] = (16, 16, 32), alphabet: int = 4,
               min_dims: tuple[int, int, int] = (3, 3, 3)) -> FixationMap:
    """Map with random dims in [min_dims, max_dims] (M, N, K) and i.i.d. values in 0..alphabet-1.

    Values are skewed toward zero (half the voxels are 0) to mimic sparse maps.
    """
    rng = SplitMix64(seed)
    M, N, K = (lo + int(rng.below(hi - lo + 1, 1)[0]) for lo, hi in zip(min_dims, max_dims))
    size = K * M * N
    zero = rng.below(2, size) == 0
    vals = np.where(zero, 0, rng.below(alphabet, size))
    return FixationMap.from_dense(vals.reshape(K, M, N).astype(np.uint16))


# Brute-force references: nested loops and dictionaries only, no shared code
# with the estimators in ``info`` or ``correlation``.

def _guard(fmap: FixationMap) -> None:
    if max(fmap.shape) > ORACLE_MAX_DIM:
        raise SynthError(f"oracle limited to {ORACLE_MAX_DIM}^3 maps, got {fmap.shape}")


def oracle_entropy(xs: Sequence[int]) -> float:
    counts = Counter(xs)
    n = len(xs)
    h = 0.0
    for c in counts.values():
        p = c / n
        h -= p * math.log2(p)
    return h


def oracle_mutual_information(xs: Sequence[int], ys: Sequence[int]) -> float:
    if len(xs) != len(ys) or not xs:
        raise SynthError("streams must be non-empty and of equal length")
    n = len(xs)
    pxy, px, py = Counter(), Counter(), Counter()
    for a, b in zip(xs, ys):
        pxy[a, b] += 1
        px[a] += 1
        py[b] += 1
    total = 0.0
    for (a, b), c in pxy.items():
        p = c / n
        total += p * math.log2(p / ((px[a] / n) * (py[b] / n)))
    return total


def oracle_conditional_from_streams(xs: Sequence[int], zs: Sequence[int]) -> float:
    n = len(xs)
    pxz, pz = Counter(), Counter()
    for a, b in zip(xs, zs):
        pxz[a, b] += 1
        pz[b] += 1
    total = 0.0
    for (a, b), c in pxz.items():
        total += (c / n) * math.log2((pz[b] / n) / (c / n))
    return total


def _neighbor_streams(fmap: FixationMap, spec: NeighborhoodSpec):
    _guard(fmap)
    vol = fmap.dense().tolist()
    K, M, N = fmap.shape
    xs, zs = [], []
    for k in range(K):
        for m in range(M):
            for n in range(N):
                z = 0
                complete = True
                for dm, dn, dk in spec.offsets:
                    kk, mm, nn = k + dk, m + dm, n + dn
                    if not (0 <= kk < K and 0 <= mm < M and 0 <= nn < N):
                        complete = False
                        break
                    z += vol[kk][mm][nn]
                if complete:
                    xs.append(vol[k][m][n])
                    zs.append(z)
    if not xs:
        raise SynthError("map has no voxel with a complete neighbourhood")
    return xs, zs


def oracle_conditional_entropy(fmap: FixationMap, spec: NeighborhoodSpec) -> float:
    xs, zs = _neighbor_streams(fmap, spec)
    return oracle_conditional_from_streams(xs, zs)


def oracle_all_neighbors(fmap: FixationMap, spec: NeighborhoodSpec, mean_encoding: bool = False):
    """(H(X), H(X|Z)); with ``mean_encoding`` Z is the neighbour mean as an exact rational."""
    xs, zs = _neighbor_streams(fmap, spec)
    if mean_encoding:
        zs = [Fraction(z, len(spec.offsets)) for z in zs]
    return oracle_entropy(xs), oracle_conditional_from_streams(xs, zs)


def oracle_spatial_mi_map(fmap: FixationMap, mean_encoding: bool = False) -> list[list[float | None]]:
    _guard(fmap)
    vol = fmap.dense().tolist()
    K, M, N = fmap.shape
    out: list[list[float | None]] = [[None] * N for _ in range(M)]
    for m in range(1, M - 1):
        for n in range(1, N - 1):
            xs, qs = [], []
            for k in range(K):
                q = 0
                for dm in (-1, 0, 1):
                    for dn in (-1, 0, 1):
                        if dm or dn:
                            q += vol[k][m + dm][n + dn]
                xs.append(vol[k][m][n])
                qs.append(Fraction(q, 8) if mean_encoding else q)
            out[m][n] = oracle_mutual_information(xs, qs)
    return out


def _oracle_temporal(fmap: FixationMap, lags: Sequence[int], window: bool, mean_encoding: bool) -> list[float]:
    _guard(fmap)
    vol = fmap.dense().tolist()
    K, M, N = fmap.shape
    curve = []
    for D in lags:
        ds = range(1, D + 1) if window else (D,)
        per_frame = []
        for k in range(D, K - D):
            xs, ws = [], []
            for m in range(M):
                for n in range(N):
                    w = 0
                    for d in ds:
                        w += vol[k - d][m][n] + vol[k + d][m][n]
                    xs.append(vol[k][m][n])
                    ws.append(Fraction(w, 2 * len(ds)) if mean_encoding else w)
            per_frame.append(oracle_mutual_information(xs, ws))
        curve.append(sum(per_frame) / len(per_frame))
    return curve


def oracle_temporal_mi_pair(fmap: FixationMap, distances: Sequence[int], mean_encoding: bool = False):
    return _oracle_temporal(fmap, distances, False, mean_encoding)


def oracle_temporal_mi_window(fmap: FixationMap, windows: Sequence[int], mean_encoding: bool = False):
    return _oracle_temporal(fmap, windows, True, mean_encoding)


__all__ = [
    "Kind", "Scenario", "SynthResult", "SynthError", "generate", "generate_with_gaze", "random_map",
    "oracle_entropy", "oracle_mutual_information", "oracle_conditional_entropy", "oracle_all_neighbors",
    "oracle_spatial_mi_map", "oracle_temporal_mi_pair", "oracle_temporal_mi_window",
]
