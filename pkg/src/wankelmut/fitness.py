"""Episode execution and reward accounting.

An episode loops ``sense -> act -> move -> judge`` for T steps and records
the full trajectory.  Three reward components are tracked:

* ``r_switch`` -- number of correct judge switches,
* ``r_cum``    -- sum over t = 0..T of quality[P(t)] * mode(t), the
  mode-signed quality of the occupied cell (mode taken after the arrival
  update, so a switch earns its new sign immediately),
* ``r_ins``    -- the same signed quality at the final position only.

A fitness value is a weighted sum of the three; the four named regimes
weight them (1,0,0), (0,1,0), (100,0,0.01) and (100,0.01,0).

Evaluation schemes score a controller either on the normal gradient alone
or on both gradient orientations (controller reset in between, start cell
mirrored with the world so the two runs are geometrically equivalent),
aggregated by minimum or arithmetic mean.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum

import numpy as np

from . import _backend, _pure
from .controllers import Controller, MoveMode, REST_BAND
from .world import (
    Environment,
    Orientation,
    Profile,
    THETA_MAX_DEFAULT,
    THETA_MIN_DEFAULT,
    default_start,
    make_environment,
    sense,
)

# Score assigned to an episode whose controller emitted a non-finite
# output; keeps selection arithmetic finite while losing to any real run.
FAILURE_SCORE = -1e18


@dataclass(frozen=True)
class FitnessWeights:
    w_switch: float
    w_cum: float
    w_ins: float


class Regime(str, Enum):
    SWITCH = "switch"
    CUMULATIVE = "cumulative"
    INSTANT_SWITCH = "instant_switch"
    CUMULATIVE_SWITCH = "cumulative_switch"


REGIME_WEIGHTS = {
    Regime.SWITCH: FitnessWeights(1.0, 0.0, 0.0),
    Regime.CUMULATIVE: FitnessWeights(0.0, 1.0, 0.0),
    Regime.INSTANT_SWITCH: FitnessWeights(100.0, 0.0, 0.01),
    Regime.CUMULATIVE_SWITCH: FitnessWeights(100.0, 0.01, 0.0),
}


class Scheme(str, Enum):
    SINGLE_NORMAL = "single_normal"
    DOUBLE_MIN = "double_min"
    DOUBLE_MEAN = "double_mean"


@dataclass
class EpisodeTrace:
    """Complete record of one episode."""

    positions: np.ndarray  # int32, length T+1 (truncated on failure)
    modes: np.ndarray  # int8, judge mode after each arrival update
    deltas: np.ndarray  # int8, controller-attempted step per time step
    switch_times: list[int]
    r_switch: int
    r_cum: float
    r_ins: float
    env: Environment
    T: int
    start: int
    failed: bool = False
    fail_step: int = -1

    def to_csv(self, path) -> None:
        """Rows (t, P, s_l, s_r, mode, switched), sensors re-read from the
        environment; a leading comment line carries the world parameters so
        the SVG renderer can restore the quality background."""
        d = self.env.describe()
        lines = [
            "# env "
            + " ".join(f"{k}={v}" for k, v in sorted(d.items())),
            "t,P,s_l,s_r,mode,switched",
        ]
        switch_set = set(self.switch_times)
        for t, (p, m) in enumerate(zip(self.positions, self.modes)):
            s_l, s_r = sense(self.env, int(p))
            lines.append(
                f"{t},{int(p)},{s_l!r},{s_r!r},{int(m)},{int(t in switch_set)}"
            )
        with open(path, "w", encoding="utf-8") as fh:
            fh.write("\n".join(lines) + "\n")

    def to_svg(self, path, max_steps: int | None = None) -> None:
        """Trajectory rendering: cells across, time downward, gray-scale
        quality background."""
        from .render import render_trajectory

        render_trajectory(self, path, max_steps)


def run_episode(
    controller: Controller,
    env: Environment,
    T: int,
    start: int,
    move_mode: MoveMode = MoveMode.ALWAYS_MOVE,
    theta_max: float = THETA_MAX_DEFAULT,
    theta_min: float = THETA_MIN_DEFAULT,
) -> EpisodeTrace:
    """Run one episode from a freshly reset controller.

    A non-finite controller output truncates the trace at that step and
    marks it failed (scored at ``FAILURE_SCORE``) rather than aborting.
    """
    if not 0 <= start < env.num_cells:
        raise ValueError(f"start {start} outside world of {env.num_cells} cells")
    if T < 0:
        raise ValueError("episode length must be >= 0")
    controller.reset()

    always = move_mode is MoveMode.ALWAYS_MOVE
    kind = getattr(controller, "kernel_kind", None)
    if T > 0 and kind is not None and _backend.compiled_enabled():
        return _run_compiled(controller, kind, env, T, start, always, theta_max, theta_min)

    quality = env.quality.tolist()
    positions, modes, deltas, switch_times, r_cum, r_ins, fail_step = (
        _pure.run_episode_loop(
            controller.act, quality, T, start, always, REST_BAND, theta_max, theta_min
        )
    )
    return EpisodeTrace(
        positions=np.array(positions, dtype=np.int32),
        modes=np.array(modes, dtype=np.int8),
        deltas=np.array(deltas, dtype=np.int8),
        switch_times=switch_times,
        r_switch=len(switch_times),
        r_cum=r_cum,
        r_ins=r_ins,
        env=env,
        T=T,
        start=start,
        failed=fail_step >= 0,
        fail_step=fail_step,
    )


def _run_compiled(controller, kind, env, T, start, always, theta_max, theta_min):
    from . import _speedups

    positions = np.empty(T + 1, dtype=np.int32)
    modes = np.empty(T + 1, dtype=np.int8)
    deltas = np.empty(T, dtype=np.int8)
    switch_buf = np.empty(T, dtype=np.int32)

    if kind == "ann":
        w, b, acts = controller.kernel_state()
        n_switch, r_cum, r_ins, fail_step = _speedups.ann_episode(
            w, b, acts, env.quality, T, start, always, REST_BAND,
            theta_max, theta_min, positions, modes, deltas, switch_buf,
        )
        controller.kernel_writeback(acts)
    elif kind == "ctrnn":
        weights, theta, tau, gain, y = controller.kernel_state()
        sig = np.empty_like(y)
        n_switch, r_cum, r_ins, fail_step = _speedups.ctrnn_episode(
            weights, theta, tau, gain, y, sig, controller.h, controller.inner_steps,
            env.quality, T, start, always, REST_BAND,
            theta_max, theta_min, positions, modes, deltas, switch_buf,
        )
        controller.kernel_writeback(y)
    else:
        raise ValueError(f"no compiled kernel for controller kind {kind!r}")

    failed = fail_step >= 0
    steps_done = fail_step if failed else T
    return EpisodeTrace(
        positions=positions[: steps_done + 1].copy(),
        modes=modes[: steps_done + 1].copy(),
        deltas=deltas[:steps_done].copy(),
        switch_times=switch_buf[:n_switch].tolist(),
        r_switch=int(n_switch),
        r_cum=float(r_cum),
        r_ins=float(r_ins),
        env=env,
        T=T,
        start=start,
        failed=failed,
        fail_step=fail_step,
    )


def episode_fitness(trace: EpisodeTrace, weights: FitnessWeights) -> float:
    """Weighted reward sum; failed episodes score the failure sentinel."""
    if trace.failed:
        return FAILURE_SCORE
    return (
        weights.w_switch * trace.r_switch
        + weights.w_cum * trace.r_cum
        + weights.w_ins * trace.r_ins
    )


@dataclass(frozen=True)
class EvaluationSetup:
    """Everything needed to score a genome, built once per experiment."""

    env_normal: Environment
    env_flipped: Environment
    scheme: Scheme
    weights: FitnessWeights
    T: int
    start: int
    move_mode: MoveMode = MoveMode.ALWAYS_MOVE
    theta_max: float = THETA_MAX_DEFAULT
    theta_min: float = THETA_MIN_DEFAULT

    @property
    def start_flipped(self) -> int:
        # Mirrored start: the two runs of a double scheme are geometric
        # mirrors of each other, not merely reversed gradients.
        return self.env_normal.num_cells - 1 - self.start


def make_setup(
    scheme: Scheme,
    weights: FitnessWeights,
    T: int,
    num_cells: int = 40,
    start: int | None = None,
    move_mode: MoveMode = MoveMode.ALWAYS_MOVE,
    steepness: float = 4.0,
    theta_max: float = THETA_MAX_DEFAULT,
    theta_min: float = THETA_MIN_DEFAULT,
) -> EvaluationSetup:
    env_n = make_environment(num_cells, Profile.ERF, Orientation.NORMAL, steepness)
    env_f = make_environment(num_cells, Profile.ERF, Orientation.FLIPPED, steepness)
    if start is None:
        start = default_start(env_n)
    return EvaluationSetup(
        env_n, env_f, scheme, weights, T, start, move_mode, theta_max, theta_min
    )


def evaluate(
    controller: Controller, setup: EvaluationSetup
) -> tuple[float, tuple[EpisodeTrace, ...]]:
    """Score a controller under the setup's scheme.

    SINGLE_NORMAL runs one episode on the normal gradient; the double
    schemes run both orientations (reset in between) and aggregate the two
    fitness values by min or mean.  Evaluation consumes no randomness.
    """
    ep_n = run_episode(
        controller,
        setup.env_normal,
        setup.T,
        setup.start,
        setup.move_mode,
        setup.theta_max,
        setup.theta_min,
    )
    f_n = episode_fitness(ep_n, setup.weights)
    if setup.scheme is Scheme.SINGLE_NORMAL:
        return f_n, (ep_n,)

    ep_f = run_episode(
        controller,
        setup.env_flipped,
        setup.T,
        setup.start_flipped,
        setup.move_mode,
        setup.theta_max,
        setup.theta_min,
    )
    f_f = episode_fitness(ep_f, setup.weights)
    if setup.scheme is Scheme.DOUBLE_MIN:
        return min(f_n, f_f), (ep_n, ep_f)
    if setup.scheme is Scheme.DOUBLE_MEAN:
        return 0.5 * (f_n + f_f), (ep_n, ep_f)
    raise ValueError(f"unknown scheme {setup.scheme!r}")
