"""Post-hoc reactivity testing and solution classification.

A controller that merely replays a stored trajectory can look perfect in
the world it evolved in, so every candidate is re-run in perturbed worlds
it has never seen:

* the mirrored gradient (from the center),
* a bell-shaped world entered from each end, where a reactive agent must
  oscillate inside its starting half,
* rescaled gradients (24 and 80 cells).

Each test passes on at least two correct switches (one closed behavioral
cycle); the bell tests additionally require the agent to stay within two
cells of its starting half.  Classification:

* REACTIVE        -- all four tests pass;
* PRE_PROGRAMMED  -- the attempted step sequence is identical in the
  normal and mirrored home worlds (sensor-independence witness) while the
  home run still solves the task (>= 2 switches): a replayed trajectory;
* PARTIAL         -- some but not all tests pass;
* FAILED          -- anything else.

Also here: the reference maximum (the hand-coded policy pushed through a
scenario's exact evaluation scheme) and the threshold-parking trajectory
that beats it under purely cumulative reward.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from enum import Enum
from typing import Callable

import numpy as np

from .controllers import (
    Controller,
    HandCodedController,
    MoveMode,
    ScriptedController,
)
from .fitness import (
    EpisodeTrace,
    FitnessWeights,
    Scheme,
    evaluate,
    make_setup,
    run_episode,
)
from .world import (
    Environment,
    Orientation,
    Profile,
    THETA_MAX_DEFAULT,
    THETA_MIN_DEFAULT,
    default_start,
    make_environment,
)

# Bell steepness for the post-hoc world.  Gentler than the ramp default so
# the peak stays resolvable by neighbor sensors down to 24 cells: the
# reference policy flips on the neighbor mean, which on a 24-cell bell at
# steepness 4 never reaches the flip threshold anywhere.
GAUSSIAN_TEST_STEEPNESS = 3.5

RESCALE_SIZES = (24, 80)
MIN_SWITCHES = 2
HALF_SLACK_CELLS = 2.0


class Classification(str, Enum):
    REACTIVE = "reactive"
    PARTIAL = "partial"
    PRE_PROGRAMMED = "pre_programmed"
    FAILED = "failed"


@dataclass
class ReactivityReport:
    flipped_pass: bool
    gaussian_left_pass: bool
    gaussian_right_pass: bool
    rescaled_pass: bool
    classification: Classification
    traces: dict[str, EpisodeTrace]
    details: dict[str, dict]

    def to_json_dict(self) -> dict:
        return {
            "flipped_pass": self.flipped_pass,
            "gaussian_left_pass": self.gaussian_left_pass,
            "gaussian_right_pass": self.gaussian_right_pass,
            "rescaled_pass": self.rescaled_pass,
            "classification": self.classification.value,
            "tests": self.details,
        }

    def to_json(self, path) -> None:
        with open(path, "w", encoding="utf-8") as fh:
            json.dump(self.to_json_dict(), fh, indent=2, sort_keys=True)
            fh.write("\n")


def _test_detail(trace: EpisodeTrace) -> dict:
    return {
        "switches": trace.r_switch,
        "min_cell": int(trace.positions.min()),
        "max_cell": int(trace.positions.max()),
        "failed": trace.failed,
    }


def posthoc_suite(
    make_controller: Callable[[], Controller],
    num_cells: int = 40,
    T: int = 250,
    move_mode: MoveMode = MoveMode.ALWAYS_MOVE,
    steepness: float = 4.0,
    gaussian_steepness: float = GAUSSIAN_TEST_STEEPNESS,
    rescale_sizes: tuple[int, int] = RESCALE_SIZES,
    theta_max: float = THETA_MAX_DEFAULT,
    theta_min: float = THETA_MIN_DEFAULT,
) -> ReactivityReport:
    """Run the full perturbation battery on a controller.

    ``make_controller`` must return a fresh (or resettable) instance; the
    controller is reset before every test episode.
    """
    ctrl = make_controller()
    center = num_cells // 2

    def run(env, start):
        return run_episode(ctrl, env, T, start, move_mode, theta_max, theta_min)

    env_normal = make_environment(num_cells, Profile.ERF, Orientation.NORMAL, steepness)
    env_flipped = make_environment(num_cells, Profile.ERF, Orientation.FLIPPED, steepness)
    env_bell = make_environment(
        num_cells, Profile.GAUSSIAN, Orientation.NORMAL, gaussian_steepness
    )

    traces = {
        "home_normal": run(env_normal, center),
        "flipped": run(env_flipped, center),
        "gaussian_left": run(env_bell, 0),
        "gaussian_right": run(env_bell, num_cells - 1),
    }
    for size in rescale_sizes:
        env_r = make_environment(size, Profile.ERF, Orientation.NORMAL, steepness)
        traces[f"rescaled_{size}"] = run(env_r, default_start(env_r))

    mid = (num_cells - 1) / 2
    gl = traces["gaussian_left"]
    gr = traces["gaussian_right"]
    flipped_pass = traces["flipped"].r_switch >= MIN_SWITCHES
    gaussian_left_pass = bool(
        gl.r_switch >= MIN_SWITCHES
        and gl.positions.max() <= mid + HALF_SLACK_CELLS
    )
    gaussian_right_pass = bool(
        gr.r_switch >= MIN_SWITCHES
        and gr.positions.min() >= mid - HALF_SLACK_CELLS
    )
    rescaled_pass = all(
        traces[f"rescaled_{size}"].r_switch >= MIN_SWITCHES for size in rescale_sizes
    )

    home = traces["home_normal"]
    mirrored = traces["flipped"]
    replay_witness = (
        not home.failed
        and not mirrored.failed
        and len(home.deltas) == len(mirrored.deltas)
        and bool(np.array_equal(home.deltas, mirrored.deltas))
    )

    if flipped_pass and gaussian_left_pass and gaussian_right_pass and rescaled_pass:
        classification = Classification.REACTIVE
    elif replay_witness and home.r_switch >= MIN_SWITCHES:
        classification = Classification.PRE_PROGRAMMED
    elif any((flipped_pass, gaussian_left_pass, gaussian_right_pass, rescaled_pass)):
        classification = Classification.PARTIAL
    else:
        classification = Classification.FAILED

    details = {name: _test_detail(tr) for name, tr in traces.items()}
    details["home_normal"]["replay_witness"] = replay_witness
    return ReactivityReport(
        flipped_pass=flipped_pass,
        gaussian_left_pass=gaussian_left_pass,
        gaussian_right_pass=gaussian_right_pass,
        rescaled_pass=rescaled_pass,
        classification=classification,
        traces=traces,
        details=details,
    )


def posthoc_suite_for_genome(kind: str, genome, num_cells: int = 40, **kwargs):
    from .controllers import decode

    return posthoc_suite(lambda: decode(kind, genome), num_cells=num_cells, **kwargs)


def reference_max_fitness(
    scheme: Scheme,
    weights: FitnessWeights,
    T: int,
    num_cells: int = 40,
    start: int | None = None,
    move_mode: MoveMode = MoveMode.ALWAYS_MOVE,
    steepness: float = 4.0,
    theta: float = THETA_MAX_DEFAULT,
) -> float:
    """Score of the hand-coded policy under a scenario's exact evaluation
    scheme -- the reference line evolved controllers are measured against."""
    setup = make_setup(scheme, weights, T, num_cells, start, move_mode, steepness)
    score, _ = evaluate(HandCodedController(theta), setup)
    return score


def parking_target(env: Environment, theta_max: float = THETA_MAX_DEFAULT) -> int:
    """Highest-quality cell strictly below the switch threshold."""
    q = env.quality
    candidates = [i for i in range(env.num_cells) if q[i] < theta_max]
    if not candidates:
        raise ValueError("no cell below the switch threshold")
    return max(candidates, key=lambda i: q[i])


def make_parking_controller(
    env: Environment, start: int, theta_max: float = THETA_MAX_DEFAULT
) -> ScriptedController:
    """Walk to the best sub-threshold cell of ``env`` and stay (needs
    WITH_REST movement).  Maximizes cumulative reward with zero switches."""
    target = parking_target(env, theta_max)
    step = 1 if target >= start else -1
    return ScriptedController(prefix=[step] * abs(target - start), cycle=[0])


def parking_oracle(
    env: Environment,
    T: int,
    start: int | None = None,
    theta_max: float = THETA_MAX_DEFAULT,
    theta_min: float = THETA_MIN_DEFAULT,
) -> EpisodeTrace:
    """Trace of the threshold-parking trajectory in ``env``."""
    if start is None:
        start = default_start(env)
    ctrl = make_parking_controller(env, start, theta_max)
    return run_episode(ctrl, env, T, start, MoveMode.WITH_REST, theta_max, theta_min)


def make_zigzag_controller(
    env: Environment,
    start: int,
    theta_max: float = THETA_MAX_DEFAULT,
    theta_min: float = THETA_MIN_DEFAULT,
) -> ScriptedController:
    """Sensor-blind oscillator tuned to ``env``'s threshold geometry.

    Replays: walk to the nearest top-threshold cell, then shuttle between
    it and the nearest bottom-threshold cell forever.  Scores full marks
    in the world it was tuned to and nothing in the mirrored one (there it
    stops one cell short of both thresholds).
    """
    q = env.quality
    up_cells = [i for i in range(env.num_cells) if q[i] >= theta_max]
    down_cells = [i for i in range(env.num_cells) if q[i] <= theta_min]
    if not up_cells or not down_cells:
        raise ValueError("environment has no reachable threshold cells")
    up = min(up_cells, key=lambda i: abs(i - start))
    down = min(down_cells, key=lambda i: abs(i - up))
    step_up = 1 if up >= start else -1
    step_cycle = 1 if down >= up else -1
    half = abs(down - up)
    prefix = [step_up] * abs(up - start)
    cycle = [step_cycle] * half + [-step_cycle] * half
    return ScriptedController(prefix=prefix, cycle=cycle)


def cumulative_advantage(
    T: int = 250,
    num_cells: int = 40,
    start: int | None = None,
    steepness: float = 4.0,
) -> tuple[float, float]:
    """(parking r_cum, hand-coded r_cum) on the normal gradient -- the
    deterministic inequality behind the cheap-trick finding."""
    env = make_environment(num_cells, Profile.ERF, Orientation.NORMAL, steepness)
    if start is None:
        start = default_start(env)
    park = parking_oracle(env, T, start)
    hand = run_episode(HandCodedController(), env, T, start)
    return park.r_cum, hand.r_cum
