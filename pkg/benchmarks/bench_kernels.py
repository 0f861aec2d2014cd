#!/usr/bin/env python3
"""Benchmark the compiled kernel core against the pure numpy fallback.

Micro-benchmarks time each hot kernel on 512x512 inputs; the end-to-end
row runs the full single-frame pipeline in a subprocess per backend
(the backend is fixed at import time via ANGIOSEG_KERNELS).

Usage: python benchmarks/bench_kernels.py [--quick]
"""

import argparse
import math
import os
import subprocess
import sys
import time

import numpy as np

from angioseg import _kernels_py
from angioseg._backend import disk_half_widths

try:
    from angioseg import _kernels as compiled
except ImportError:
    compiled = None


def _time(fn, repeats):
    best = math.inf
    for _ in range(repeats):
        t0 = time.perf_counter()
        fn()
        best = min(best, time.perf_counter() - t0)
    return best


def micro(repeats):
    rng = np.random.default_rng(0)
    img = rng.random((512, 512))
    k = 2000
    s = math.sqrt(img.size / k)
    centers = np.column_stack([rng.random(k), rng.uniform(0, 511, k),
                               rng.uniform(0, 511, k)])
    weight = (0.1 / s) ** 2
    hw9 = disk_half_widths(9)
    hw19 = disk_half_widths(19)
    pts = np.column_stack([rng.integers(16, 496, 2000),
                           rng.integers(16, 496, 2000)]).astype(np.int64)
    d = 25
    offs = np.zeros((180, d, 2))
    ts = np.arange(d) - (d - 1) / 2.0
    for i in range(180):
        th = math.radians(i + 1)
        offs[i, :, 0] = ts * math.cos(th)
        offs[i, :, 1] = ts * math.sin(th)

    cases = [
        ("slic_assign (k=2000)", lambda m: m.slic_assign(img, centers, s, weight)),
        ("disk_erode (r=9)", lambda m: m.disk_filter(img, hw9, True)),
        ("disk_dilate (r=19)", lambda m: m.disk_filter(img, hw19, False)),
        ("box_sum (r=8)", lambda m: m.box_sum(img, 8)),
        ("profile_angle (2000 pts)", lambda m: m.best_profile_angle(img, pts, offs)),
    ]
    print(f"{'kernel':28s} {'pure':>10s} {'compiled':>10s} {'speedup':>8s}")
    for name, fn in cases:
        t_pure = _time(lambda: fn(_kernels_py), repeats)
        if compiled is None:
            print(f"{name:28s} {t_pure * 1e3:9.1f}ms {'n/a':>10s} {'n/a':>8s}")
        else:
            t_comp = _time(lambda: fn(compiled), repeats)
            print(f"{name:28s} {t_pure * 1e3:9.1f}ms {t_comp * 1e3:9.1f}ms "
                  f"{t_pure / t_comp:7.1f}x")


_E2E_SNIPPET = """
import time
import numpy as np
from angioseg import phantom, pipeline, _backend
from angioseg.config import PipelineConfig
(img, _), = phantom.generate(phantom.standard_suite_spec(99), 1)
t0 = time.time()
pipeline.process_frames([img], PipelineConfig(), catheter_enabled=False)
print(f"{_backend.BACKEND}: {time.time() - t0:.1f}s")
"""


def end_to_end():
    print("\nfull 512x512 single-frame pipeline:")
    for backend in ("pure", "compiled") if compiled is not None else ("pure",):
        env = dict(os.environ, ANGIOSEG_KERNELS=backend)
        out = subprocess.run([sys.executable, "-c", _E2E_SNIPPET], env=env,
                             capture_output=True, text=True)
        print(" ", out.stdout.strip() or out.stderr.strip())


def main():
    parser = argparse.ArgumentParser()
    parser.add_argument("--quick", action="store_true",
                        help="single repetition, skip the end-to-end run")
    args = parser.parse_args()
    if compiled is None:
        print("note: compiled core not built, timing the fallback only\n")
    micro(repeats=1 if args.quick else 3)
    if not args.quick:
        end_to_end()


if __name__ == "__main__":
    main()
