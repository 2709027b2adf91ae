"""Time the compiled and numpy kernel backends on the same inputs.

    python benchmarks/bench_kernels.py [--frames 300] [--repeat 3]

Volumes are synthetic centre-bias maps at full 480x640 resolution (the
neighbour kernels) and at the 40x40-reduced 12x16 size (grouped entropies,
which dominate the spatial and temporal studies).
"""
import argparse
import time

import numpy as np

from fixscope import kernels
from fixscope.correlation import ALL26, SPATIAL8
from fixscope.synth import Kind, Scenario, generate


def best_of(fn, repeat):
    times = []
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn()
        times.append(time.perf_counter() - t0)
    return min(times)


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--frames", type=int, default=60)
    ap.add_argument("--repeat", type=int, default=3)
    args = ap.parse_args()

    backends = [("python", kernels.python_backend)]
    if kernels.compiled_backend is not None:
        backends.append(("cython", kernels.compiled_backend))
    else:
        print("compiled extension not built; timing numpy backend only")

    full = generate(Scenario(Kind.CENTER_BIAS, height=480, width=640, depth=args.frames,
                             dispersion=40.0, seed=0)).dense()
    small = generate(Scenario(Kind.SMOOTH_PURSUIT, height=48, width=64, depth=args.frames * 5, seed=0))
    vol = small.dense().astype(np.int64)
    L = int(full.max())
    cases = {
        f"neighbor_joint_table ALL26 480x640x{args.frames}":
            lambda b: b.neighbor_joint_table(full, ALL26.kernel_offsets(), L),
        f"neighbor_sum SPATIAL8 480x640x{args.frames}":
            lambda b: b.neighbor_sum(full, SPATIAL8.kernel_offsets()),
        f"grouped_entropies {vol.shape[0] - 2} frames x {vol[0].size} px":
            lambda b: b.grouped_entropies(vol[1:-1].reshape(vol.shape[0] - 2, -1),
                                          (vol[:-2] + vol[2:]).reshape(vol.shape[0] - 2, -1)),
    }
    print(f"{'kernel':<48}" + "".join(f"{name:>12}" for name, _ in backends) + "     speedup")
    for label, fn in cases.items():
        t = [best_of(lambda: fn(b), args.repeat) for _, b in backends]
        speed = f"{t[0] / t[1]:9.1f}x" if len(t) > 1 else ""
        print(f"{label:<48}" + "".join(f"{v:11.3f}s" for v in t) + f"  {speed}")


if __name__ == "__main__":
    main()
