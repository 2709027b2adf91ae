"""CSV and PGM exports for curves, heatmaps and entropy tables."""
from __future__ import annotations

import math
from typing import Iterable, Sequence

import numpy as np

from ._io import atomic_write
from .correlation import SpatialMiMap, TemporalMiCurve


def _num(v: float | None) -> str:
    if v is None or (isinstance(v, float) and math.isnan(v)):
        return ""
    return repr(float(v))


def curve_csv(curve: TemporalMiCurve) -> str:
    lag = "D" if curve.mode == "pair" else "N"
    rows = [f"{lag},mi_bits"] + [f"{d},{_num(v)}" for d, v in zip(curve.distances, curve.mi)]
    return "\n".join(rows) + "\n"


def heatmap_csv(smap: SpatialMiMap) -> str:
    rows = ["m,n,mi_bits"]
    M, N = smap.values.shape
    for m in range(M):
        for n in range(N):
            rows.append(f"{m},{n},{_num(smap.values[m, n])}")
    return "\n".join(rows) + "\n"


def heatmap_pgm(smap: SpatialMiMap) -> str:
    """Plain (P2) 8-bit PGM scaled so the largest value maps to 255; missing cells are 0."""
    values = smap.values
    M, N = values.shape
    peak = float(np.nanmax(values)) if np.isfinite(values).any() else 0.0
    if peak > 0:
        scaled = np.rint(np.nan_to_num(values, nan=0.0) / peak * 255).astype(int)
    else:
        scaled = np.zeros((M, N), dtype=int)
    lines = ["P2", f"# max_mi_bits={peak!r}", f"{N} {M}", "255"]
    lines += [" ".join(str(v) for v in row) for row in scaled.tolist()]
    return "\n".join(lines) + "\n"


def table_csv(header: Sequence[str], rows: Iterable[Sequence]) -> str:
    out = [",".join(header)]
    for row in rows:
        out.append(",".join(_num(v) if isinstance(v, float) else str(v) for v in row))
    return "\n".join(out) + "\n"


def write_text(path, text: str) -> None:
    with atomic_write(path) as fh:
        fh.write(text)
