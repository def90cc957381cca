#!/usr/bin/env python3
"""Benchmark the numba kernels against the pure-numpy fallback.

Times the dominant workloads: the phase-estimation power loop of a closeness
instance and of a k-wise instance, plus the raw kernel primitives.  Run:

    python benchmarks/bench_kernels.py
"""
from __future__ import annotations

import math
import time

import numpy as np

from qdtest import amplitude as ae
from qdtest import backend
from qdtest import oracles as orc
from qdtest import reference as ref
from qdtest import statevec as sv


def time_call(fn, repeats=3) -> float:
    best = math.inf
    for _ in range(repeats):
        start = time.perf_counter()
        fn()
        best = min(best, time.perf_counter() - start)
    return best


def closeness_build():
    p, q = ref.gen_l2_pair(8, 0.3)
    op = orc.make_purified_oracle(p, label="p")
    oq = orc.make_purified_oracle(q, label="q")
    layout, unitary, proj = orc.closeness_instance(op, oq)
    return lambda: ae.phase_distribution(unitary, layout, proj, 629)


def kwise_build():
    spike = ref.gen_fourier_spike(4, ref.mask_from_coords(4, (1, 2)), 0.6)
    oracle = orc.make_purified_oracle(spike, label="p")
    layout, unitary, proj = orc.kwise_instance(oracle, 2)
    return lambda: ae.phase_distribution(unitary, layout, proj, 1024)


def raw_matrix():
    rng = np.random.default_rng(0)
    layout = sv.RegisterLayout([("A", 16), ("B", 16), ("C", 16)])
    op = sv.MatrixOp(("A", "B"), orc.haar_unitary(256, rng))
    state = sv.new_basis_state(layout)

    def run():
        for _ in range(200):
            sv.apply(op, state)
    return run


def main() -> None:
    rows = []
    cases = [("closeness power loop (dim 1024, M 1024)", closeness_build),
             ("k-wise power loop (dim 4096, M 1024)", kwise_build),
             ("dense 256x256 op on dim-4096 state, 200 applications", raw_matrix)]
    for name, build in cases:
        timings = {}
        for which in ("numpy", "numba") if backend.HAVE_NUMBA else ("numpy",):
            backend.set_backend(which)
            backend.warmup()
            fn = build()
            fn()  # populate plan caches outside the timed region
            timings[which] = time_call(fn)
        rows.append((name, timings))

    width = max(len(name) for name, _ in rows)
    print(f"{'case':<{width}}  {'numpy':>9}  {'numba':>9}  speedup")
    for name, timings in rows:
        np_t = timings["numpy"]
        if "numba" in timings:
            nb_t = timings["numba"]
            print(f"{name:<{width}}  {np_t:>8.3f}s  {nb_t:>8.3f}s  {np_t / nb_t:>6.2f}x")
        else:
            print(f"{name:<{width}}  {np_t:>8.3f}s  {'n/a':>9}")
    backend.set_backend(backend._default_backend())


if __name__ == "__main__":
    main()
