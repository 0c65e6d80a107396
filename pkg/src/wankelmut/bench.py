"""Benchmark the compiled episode kernels against the pure-Python backend.

Usage: python -m wankelmut.bench [episodes]

Runs identical episode batches through both backends, checks the traces
agree bitwise, and reports controller steps per second plus the speedup.
"""

from __future__ import annotations

import sys
import time

import numpy as np

from . import _backend
from .controllers import AnnController, CtrnnController, center_crossing_theta
from .fitness import run_episode
from .world import make_environment


def _time_backend(controller, env, T, start, episodes, compiled: bool):
    prev = _backend.use_compiled
    _backend.use_compiled = compiled and _backend.HAVE_COMPILED
    try:
        t0 = time.perf_counter()
        trace = None
        for _ in range(episodes):
            trace = run_episode(controller, env, T, start)
        elapsed = time.perf_counter() - t0
    finally:
        _backend.use_compiled = prev
    return elapsed, trace


def _report(name, controller, env, T, start, episodes):
    t_pure, tr_pure = _time_backend(controller, env, T, start, episodes, compiled=False)
    steps = episodes * T
    print(f"{name}: pure      {steps / t_pure:12.0f} steps/s  ({t_pure:.3f} s)")
    if not _backend.HAVE_COMPILED:
        print(f"{name}: compiled  (extension not built)")
        return
    t_comp, tr_comp = _time_backend(controller, env, T, start, episodes, compiled=True)
    same = (
        np.array_equal(tr_pure.positions, tr_comp.positions)
        and tr_pure.r_cum == tr_comp.r_cum
        and tr_pure.r_ins == tr_comp.r_ins
    )
    print(
        f"{name}: compiled  {steps / t_comp:12.0f} steps/s  ({t_comp:.3f} s)"
        f"  speedup x{t_pure / t_comp:.1f}  traces identical: {same}"
    )


def main(argv=None) -> int:
    argv = sys.argv[1:] if argv is None else argv
    episodes = int(argv[0]) if argv else 200
    env = make_environment(40)
    T, start = 250, 20
    rng = np.random.default_rng(12345)

    ann = AnnController(rng.uniform(-0.5, 0.5, 41))
    _report("ann  ", ann, env, T, start, episodes)

    w = rng.uniform(-0.5, 0.5, (11, 11))
    genome = np.concatenate(
        [w.ravel(), center_crossing_theta(w), rng.uniform(0.9, 5.9, 11)]
    )
    ctrnn = CtrnnController(genome)
    _report("ctrnn", ctrnn, env, T, start, max(1, episodes // 5))
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
