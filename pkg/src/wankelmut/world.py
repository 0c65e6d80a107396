"""The 1D cellular world: quality gradients, lateral sensing, bounded motion,
and the judge automaton that counts correct behavioral switches.

The world is a row of ``N`` cells, each carrying a scalar quality in
[-1, 1].  An agent occupies one cell, reads the quality of its two
neighbors, and moves at most one cell per time step.  A task-side judge
(invisible to the controller) starts in uphill mode and flips mode each
time the agent's cell quality crosses ``theta_max`` (uphill -> downhill)
or ``theta_min`` (downhill -> uphill); each flip is one correct switch.

Everything here is an immutable value object or a pure function, so
instances can be shared freely across threads and processes.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from enum import Enum

import numpy as np

UPHILL = 1
DOWNHILL = -1

THETA_MAX_DEFAULT = 0.95
THETA_MIN_DEFAULT = -0.95

_TWO_OVER_SQRT_PI = 2.0 / math.sqrt(math.pi)


def erf(x: float) -> float:
    """Gauss error function, accurate to well below 1e-7 on [-6, 6].

    Computed on ``|x|`` and negated for negative arguments, so odd
    symmetry holds exactly as implemented.  Uses the Maclaurin series on
    the small-argument range and a continued fraction for the
    complementary function beyond it.
    """
    if math.isnan(x):
        return x
    ax = abs(x)
    if ax >= 6.0:
        r = 1.0  # erfc(6) ~ 2e-17, below double resolution of 1 - x
    elif ax <= 3.2:
        r = _erf_series(ax)
    else:
        r = 1.0 - _erfc_cfrac(ax)
    return -r if x < 0 else r


def _erf_series(ax: float) -> float:
    # sum_n (-1)^n ax^(2n+1) / (n! (2n+1)); fine up to ax ~ 3.2 where the
    # largest term is small enough that cancellation stays near 1e-13.
    x2 = ax * ax
    term = ax  # (-1)^n ax^(2n+1) / n!
    total = ax
    for n in range(1, 200):
        term *= -x2 / n
        contrib = term / (2 * n + 1)
        total += contrib
        if abs(contrib) < 1e-17:
            break
    return _TWO_OVER_SQRT_PI * total


def _erfc_cfrac(ax: float) -> float:
    # Laplace continued fraction: erfc(x) = exp(-x^2)/sqrt(pi) *
    # 1/(x + (1/2)/(x + 1/(x + (3/2)/(x + ...)))), evaluated backward.
    v = 0.0
    for k in range(60, 0, -1):
        v = (0.5 * k) / (ax + v)
    return math.exp(-ax * ax) / math.sqrt(math.pi) / (ax + v)


class Profile(str, Enum):
    ERF = "erf"
    GAUSSIAN = "gaussian"
    LINEAR = "linear"


class Orientation(str, Enum):
    NORMAL = "normal"
    FLIPPED = "flipped"


@dataclass(frozen=True)
class Environment:
    """Immutable quality field over ``num_cells`` cells.

    ``quality`` is a read-only float64 vector; orientation FLIPPED is the
    exact reversal of the NORMAL vector for the same parameters.
    """

    num_cells: int
    profile: Profile
    orientation: Orientation
    steepness: float
    quality: np.ndarray = field(repr=False)

    def __post_init__(self):
        self.quality.setflags(write=False)

    def describe(self) -> dict:
        return {
            "num_cells": self.num_cells,
            "profile": self.profile.value,
            "orientation": self.orientation.value,
            "steepness": self.steepness,
        }

    def flipped(self) -> "Environment":
        """The same gradient pointing the other way."""
        other = (
            Orientation.FLIPPED
            if self.orientation is Orientation.NORMAL
            else Orientation.NORMAL
        )
        return replace(self, orientation=other, quality=self.quality[::-1].copy())


def make_environment(
    num_cells: int,
    profile: Profile = Profile.ERF,
    orientation: Orientation = Orientation.NORMAL,
    steepness: float = 4.0,
) -> Environment:
    """Build a quality field.

    ERF: quality[i] = erf(steepness * (i - N/2) / N), a sigmoid ramp.
    GAUSSIAN: a bell centered between the end cells, min-max normalized so
    both ends sit exactly at -1 and the peak cell(s) at +1, giving a
    middle maximum with two end minima.
    LINEAR: a straight ramp from -1 to +1.

    FLIPPED reverses the vector exactly.
    """
    if num_cells < 4:
        raise ValueError(f"num_cells must be >= 4, got {num_cells}")
    if not steepness > 0:
        raise ValueError(f"steepness must be positive, got {steepness}")

    n = num_cells
    if profile is Profile.ERF:
        q = [erf(steepness * (i - n / 2) / n) for i in range(n)]
    elif profile is Profile.GAUSSIAN:
        center = (n - 1) / 2
        raw = [math.exp(-((steepness * (i - center) / n) ** 2)) for i in range(n)]
        lo, hi = min(raw), max(raw)
        q = [2.0 * (r - lo) / (hi - lo) - 1.0 for r in raw]
    elif profile is Profile.LINEAR:
        q = [2.0 * i / (n - 1) - 1.0 for i in range(n)]
    else:
        raise ValueError(f"unknown profile {profile!r}")

    if orientation is Orientation.FLIPPED:
        q = q[::-1]
    return Environment(n, profile, orientation, float(steepness), np.array(q))


def sense(env: Environment, position: int) -> tuple[float, float]:
    """Lateral sensor pair (s_l, s_r).

    Each sensor reads the neighbor cell's quality; at a world boundary the
    missing neighbor is replaced by the agent's own cell.
    """
    q = env.quality
    n = env.num_cells
    if not 0 <= position < n:
        raise ValueError(f"position {position} outside [0, {n - 1}]")
    s_l = q[position - 1] if position > 0 else q[position]
    s_r = q[position + 1] if position < n - 1 else q[position]
    return float(s_l), float(s_r)


def step_position(env: Environment, position: int, delta: int) -> int:
    """Move by delta in {-1, 0, +1}, clamped to the world boundaries."""
    if delta not in (-1, 0, 1):
        raise ValueError(f"delta must be -1, 0 or +1, got {delta}")
    return min(env.num_cells - 1, max(0, position + delta))


@dataclass(frozen=True)
class JudgeState:
    """Task-side mode automaton.

    Starts uphill; flips to downhill when the agent's cell quality reaches
    ``theta_max`` and back to uphill when it reaches ``theta_min``.  Each
    flip increments ``switch_count`` by exactly one, so the count is even
    iff the mode is uphill.
    """

    mode: int = UPHILL
    theta_max: float = THETA_MAX_DEFAULT
    theta_min: float = THETA_MIN_DEFAULT
    switch_count: int = 0

    def __post_init__(self):
        if not self.theta_min < self.theta_max:
            raise ValueError("theta_min must be below theta_max")
        if self.mode not in (UPHILL, DOWNHILL):
            raise ValueError(f"mode must be +1 or -1, got {self.mode}")


def judge_update(judge: JudgeState, quality: float) -> tuple[JudgeState, bool]:
    """Advance the judge on the quality of the agent's (new) cell.

    Threshold crossing is inclusive: uphill switches on q >= theta_max,
    downhill on q <= theta_min.  Returns the new state and whether a
    switch happened.
    """
    if judge.mode == UPHILL and quality >= judge.theta_max:
        return (
            replace(judge, mode=DOWNHILL, switch_count=judge.switch_count + 1),
            True,
        )
    if judge.mode == DOWNHILL and quality <= judge.theta_min:
        return (
            replace(judge, mode=UPHILL, switch_count=judge.switch_count + 1),
            True,
        )
    return judge, False


def default_start(env: Environment) -> int:
    """Center cell, the default drop-in point for episodes."""
    return env.num_cells // 2


def environment_to_csv(env: Environment, path) -> None:
    """One row per cell (index, quality at 9 significant digits)."""
    lines = ["index,quality"]
    for i, q in enumerate(env.quality):
        lines.append(f"{i},{q:.9g}")
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("\n".join(lines) + "\n")
