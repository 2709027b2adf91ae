"""Eye-fixation count volumes: construction, block rescaling and the FIXMAP file format.

Volumes are indexed ``[k, m, n]`` (frame, row, column) everywhere, matching the
frame-major/row-major order of the on-disk payload.
"""
from __future__ import annotations

import logging
import struct
from collections import Counter
from dataclasses import dataclass
from pathlib import Path
from typing import Sequence

import numpy as np

from ._io import atomic_write
from .gaze import GazeSample, RecordingMeta

log = logging.getLogger(__name__)

MAGIC = b"FXM1"
HEADER = struct.Struct("<4sIIII")  # magic, M, N, K, reserved
MAX_COUNT = np.iinfo(np.uint16).max
SPARSE_FRACTION = 0.01
MAX_VOXELS = 1 << 36


class FixMapError(ValueError):
    pass


class FixMapFormatError(FixMapError):
    pass


class CountOverflowError(FixMapError):
    pass


class FixationMap:
    """Immutable M x N x K volume of non-negative u16 counts.

    Backed either by a dense ``(K, M, N)`` array or by a coordinate list of the
    nonzero voxels; :meth:`from_dense` and :meth:`from_coo` pick sparse storage
    automatically when fewer than 1% of voxels are nonzero.
    """

    __slots__ = ("shape", "_dense", "_coords", "_values", "_max")

    def __init__(self, shape, dense=None, coords=None, values=None):
        K, M, N = (int(v) for v in shape)
        if min(K, M, N) <= 0:
            raise FixMapError(f"dimensions must be positive, got K={K} M={M} N={N}")
        self.shape = (K, M, N)
        self._dense = None
        self._coords = None
        self._values = None
        if dense is not None:
            dense = np.ascontiguousarray(dense, dtype=np.uint16)
            if dense.shape != self.shape:
                raise FixMapError(f"array shape {dense.shape} != {self.shape}")
            dense.flags.writeable = False
            self._dense = dense
            self._max = int(dense.max())
        else:
            coords = np.asarray(coords, dtype=np.int64)
            values = np.asarray(values, dtype=np.uint16)
            coords.flags.writeable = False
            values.flags.writeable = False
            self._coords, self._values = coords, values
            self._max = int(values.max()) if values.size else 0

    @classmethod
    def from_dense(cls, array, storage: str = "auto") -> "FixationMap":
        array = np.asarray(array)
        if array.ndim != 3:
            raise FixMapError("expected a (K, M, N) array")
        if array.size and (array.min() < 0 or array.max() > MAX_COUNT):
            raise CountOverflowError("counts must lie in 0..65535")
        if storage == "auto":
            storage = "sparse" if np.count_nonzero(array) < SPARSE_FRACTION * array.size else "dense"
        if storage == "dense":
            return cls(array.shape, dense=array)
        idx = np.flatnonzero(array)
        return cls(array.shape, coords=idx, values=array.reshape(-1)[idx])

    @classmethod
    def from_coo(cls, shape, linear_index, values, storage: str = "auto") -> "FixationMap":
        """Build from sorted, unique linear voxel indices ``(k*M + m)*N + n``."""
        linear_index = np.asarray(linear_index, dtype=np.int64)
        values = np.asarray(values)
        if values.size and values.max() > MAX_COUNT:
            raise CountOverflowError(f"count {int(values.max())} exceeds u16 ceiling {MAX_COUNT}")
        keep = values != 0
        linear_index, values = linear_index[keep], values[keep]
        size = int(np.prod(shape))
        if storage == "auto":
            storage = "sparse" if linear_index.size < SPARSE_FRACTION * size else "dense"
        if storage == "sparse":
            return cls(shape, coords=linear_index, values=values)
        dense = np.zeros(size, dtype=np.uint16)
        dense[linear_index] = values
        return cls(shape, dense=dense.reshape(shape))

    @classmethod
    def zeros(cls, height: int, width: int, depth: int) -> "FixationMap":
        return cls((depth, height, width), coords=np.empty(0, np.int64), values=np.empty(0, np.uint16))

    @property
    def depth(self) -> int:
        return self.shape[0]

    @property
    def height(self) -> int:
        return self.shape[1]

    @property
    def width(self) -> int:
        return self.shape[2]

    @property
    def max_symbol(self) -> int:
        return self._max

    @property
    def is_sparse(self) -> bool:
        return self._dense is None

    @property
    def nnz(self) -> int:
        if self._dense is not None:
            return int(np.count_nonzero(self._dense))
        return int(self._values.size)

    def dense(self) -> np.ndarray:
        """Read-only ``(K, M, N)`` uint16 array."""
        if self._dense is not None:
            return self._dense
        out = np.zeros(int(np.prod(self.shape)), dtype=np.uint16)
        out[self._coords] = self._values
        out = out.reshape(self.shape)
        out.flags.writeable = False
        return out

    def coo(self) -> tuple[np.ndarray, np.ndarray]:
        """Sorted linear indices and values of the nonzero voxels."""
        if self._dense is None:
            return self._coords, self._values
        flat = self._dense.reshape(-1)
        idx = np.flatnonzero(flat)
        return idx, flat[idx]

    def frame(self, k: int) -> np.ndarray:
        if self._dense is not None:
            return self._dense[k]
        M, N = self.shape[1:]
        lo, hi = np.searchsorted(self._coords, [k * M * N, (k + 1) * M * N])
        out = np.zeros(M * N, dtype=np.uint16)
        out[self._coords[lo:hi] - k * M * N] = self._values[lo:hi]
        return out.reshape(M, N)

    def total(self) -> int:
        _, values = self.coo()
        return int(values.sum(dtype=np.int64))

    def frame_sums(self) -> np.ndarray:
        idx, values = self.coo()
        K, M, N = self.shape
        return np.bincount(idx // (M * N), weights=values, minlength=K).astype(np.int64)

    def __eq__(self, other) -> bool:
        if not isinstance(other, FixationMap):
            return NotImplemented
        if self.shape != other.shape:
            return False
        a_idx, a_val = self.coo()
        b_idx, b_val = other.coo()
        return np.array_equal(a_idx, b_idx) and np.array_equal(a_val, b_val)

    def __repr__(self) -> str:
        K, M, N = self.shape
        kind = "sparse" if self.is_sparse else "dense"
        return f"FixationMap(M={M}, N={N}, K={K}, L={self._max}, {kind}, nnz={self.nnz})"


@dataclass(frozen=True)
class ScaleSpec:
    height: int
    width: int

    def __post_init__(self):
        if self.height <= 0 or self.width <= 0:
            raise FixMapError("window dimensions must be positive")

    @classmethod
    def parse(cls, text: str) -> "ScaleSpec":
        try:
            h, w = text.lower().split("x")
            return cls(int(h), int(w))
        except ValueError:
            raise FixMapError(f"bad window {text!r}, expected HxW") from None

    def __str__(self) -> str:
        return f"{self.height}x{self.width}"


def build_map(samples: Sequence[GazeSample], meta: RecordingMeta, num_frames: int, *,
              truncate: bool = False, skip_oob: bool = False,
              dropped: Counter | None = None) -> FixationMap:
    """Accumulate attentive samples into a ``frame_height x frame_width x num_frames`` map.

    Samples must already be filtered to attentive labels. A sample past the
    last frame or outside the frame bounds is an error unless ``truncate`` /
    ``skip_oob`` is set, in which case it is dropped and counted in ``dropped``.
    """
    if num_frames < 1:
        raise FixMapError("num_frames must be >= 1")
    if dropped is None:
        dropped = Counter()
    M, N, K = meta.frame_height, meta.frame_width, num_frames
    ratio = meta.frame_rate / meta.sample_rate
    t = np.fromiter((s.t for s in samples), dtype=np.int64, count=len(samples))
    x = np.fromiter((s.x for s in samples), dtype=np.int64, count=len(samples))
    y = np.fromiter((s.y for s in samples), dtype=np.int64, count=len(samples))
    k = (t * ratio.numerator) // ratio.denominator

    oob = (x < 0) | (x >= N) | (y < 0) | (y >= M)
    if oob.any():
        if not skip_oob:
            i = int(np.argmax(oob))
            raise FixMapError(f"sample t={t[i]} at ({x[i]}, {y[i]}) outside {N}x{M} frame")
        dropped["out_of_bounds"] += int(oob.sum())
    late = (k >= K) & ~oob
    if late.any():
        if not truncate:
            i = int(np.argmax(late))
            raise FixMapError(f"sample t={t[i]} maps to frame {k[i]} >= {K}")
        dropped["past_last_frame"] += int(late.sum())
    keep = ~(oob | late)
    lin = (k[keep] * M + y[keep]) * N + x[keep]
    idx, counts = np.unique(lin, return_counts=True)
    if counts.size and counts.max() > MAX_COUNT:
        raise CountOverflowError(f"pixel count {int(counts.max())} exceeds u16 ceiling")
    return FixationMap.from_coo((K, M, N), idx, counts)


def rescale(fmap: FixationMap, spec: ScaleSpec) -> FixationMap:
    """Block-sum every frame over non-overlapping ``spec`` windows.

    Trailing rows/columns that do not fill a whole window are dropped (logged).
    """
    K, M, N = fmap.shape
    wh, ww = spec.height, spec.width
    if wh > M or ww > N:
        raise FixMapError(f"window {spec} larger than {M}x{N} frame")
    Mo, No = M // wh, N // ww
    if Mo * wh != M or No * ww != N:
        log.warning("window %s does not tile %dx%d; dropping %d trailing rows, %d columns",
                    spec, M, N, M - Mo * wh, N - No * ww)

    idx, values = fmap.coo()
    k, rem = np.divmod(idx, M * N)
    m, n = np.divmod(rem, N)
    keep = (m < Mo * wh) & (n < No * ww)
    if not keep.all():
        log.warning("dropped %d counts in partial windows", int(values[~keep].sum(dtype=np.int64)))
    out_lin = (k[keep] * Mo + m[keep] // wh) * No + n[keep] // ww
    out_idx, inverse = np.unique(out_lin, return_inverse=True)
    sums = np.bincount(inverse, weights=values[keep], minlength=out_idx.size).astype(np.int64)
    return FixationMap.from_coo((K, Mo, No), out_idx, sums)


def write_map(fmap: FixationMap, path) -> None:
    K, M, N = fmap.shape
    with atomic_write(path, "wb") as fh:
        fh.write(HEADER.pack(MAGIC, M, N, K, 0))
        for k in range(K):
            fh.write(fmap.frame(k).astype("<u2", copy=False).tobytes())


def read_map(path) -> FixationMap:
    data = Path(path).read_bytes()
    return loads_map(data)


def dumps_map(fmap: FixationMap) -> bytes:
    K, M, N = fmap.shape
    return HEADER.pack(MAGIC, M, N, K, 0) + fmap.dense().astype("<u2", copy=False).tobytes()


def loads_map(data: bytes) -> FixationMap:
    if len(data) < HEADER.size:
        raise FixMapFormatError(f"truncated header ({len(data)} bytes)")
    magic, M, N, K, reserved = HEADER.unpack_from(data)
    if magic != MAGIC:
        raise FixMapFormatError(f"bad magic {magic!r}")
    if reserved != 0:
        raise FixMapFormatError(f"reserved header field is {reserved}, expected 0")
    if min(M, N, K) == 0:
        raise FixMapFormatError(f"zero dimension M={M} N={N} K={K}")
    voxels = M * N * K
    if voxels > MAX_VOXELS:
        raise FixMapFormatError(f"dimension overflow: {voxels} voxels")
    expected = HEADER.size + 2 * voxels
    if len(data) != expected:
        kind = "truncated" if len(data) < expected else "oversized"
        raise FixMapFormatError(f"{kind} payload: {len(data)} bytes, expected {expected}")
    arr = np.frombuffer(data, dtype="<u2", offset=HEADER.size).astype(np.uint16).reshape(K, M, N)
    return FixationMap.from_dense(arr)
