"""Pure-Python simulation kernels.

These are the reference numerics: the compiled backend in ``_speedups``
reimplements the exact same operations in the exact same order, and the
two must agree bitwise.  Keep any change here mirrored there.

Activation guards clamp the exponent at +/-709 so both backends saturate
identically instead of one overflowing where the other does not.
"""

from __future__ import annotations

import math


def steep_sigmoid(x: float) -> float:
    """ANN activation 1/(1+exp(-20x)) - 0.5, range (-0.5, 0.5)."""
    z = 20.0 * x
    if z <= -709.0:
        return -0.5
    if z >= 709.0:
        return 0.5
    return 1.0 / (1.0 + math.exp(-z)) - 0.5


def logistic(x: float) -> float:
    """Standard logistic 1/(1+exp(-x))."""
    if x <= -709.0:
        return 0.0
    if x >= 709.0:
        return 1.0
    return 1.0 / (1.0 + math.exp(-x))


def ann_act(w, b, acts, s_l: float, s_r: float) -> float:
    """One step of the 11-neuron layered recurrent net.

    ``acts`` is the 11-slot activation list from the previous step and is
    updated in place.  Inter-layer links read this step's values; the
    second hidden layer's self-loops and neighbor links read the previous
    step's.  Weight layout (30 entries):

      0..5    in -> hidden1, destination-major (in_l, in_r per node)
      6..14   hidden1 -> hidden2, destination-major
      15..17  hidden2 self-loops
      18..21  hidden2 neighbor links: 1->0, 0->1, 2->1, 1->2
      22..27  hidden2 -> hidden3, destination-major
      28..29  hidden3 -> output
    """
    p5, p6, p7 = acts[5], acts[6], acts[7]

    h1_0 = steep_sigmoid(w[0] * s_l + w[1] * s_r + b[2])
    h1_1 = steep_sigmoid(w[2] * s_l + w[3] * s_r + b[3])
    h1_2 = steep_sigmoid(w[4] * s_l + w[5] * s_r + b[4])

    h2_0 = steep_sigmoid(
        w[6] * h1_0 + w[7] * h1_1 + w[8] * h1_2 + w[15] * p5 + w[18] * p6 + b[5]
    )
    h2_1 = steep_sigmoid(
        w[9] * h1_0
        + w[10] * h1_1
        + w[11] * h1_2
        + w[16] * p6
        + w[19] * p5
        + w[20] * p7
        + b[6]
    )
    h2_2 = steep_sigmoid(
        w[12] * h1_0 + w[13] * h1_1 + w[14] * h1_2 + w[17] * p7 + w[21] * p6 + b[7]
    )

    h3_0 = steep_sigmoid(w[22] * h2_0 + w[23] * h2_1 + w[24] * h2_2 + b[8])
    h3_1 = steep_sigmoid(w[25] * h2_0 + w[26] * h2_1 + w[27] * h2_2 + b[9])

    out = steep_sigmoid(w[28] * h3_0 + w[29] * h3_1 + b[10])

    acts[0] = s_l
    acts[1] = s_r
    acts[2] = h1_0
    acts[3] = h1_1
    acts[4] = h1_2
    acts[5] = h2_0
    acts[6] = h2_1
    acts[7] = h2_2
    acts[8] = h3_0
    acts[9] = h3_1
    acts[10] = out
    return out


def ctrnn_act(
    weights,  # n x n nested list, weights[j][i] = link from node j to node i
    theta,
    tau,
    gain,
    y,  # node state list, updated in place
    h: float,
    inner_steps: int,
    s_l: float,
    s_r: float,
) -> float:
    """Forward-Euler integration of the leaky node dynamics.

    Runs ``inner_steps`` Euler steps of size ``h`` per world step with the
    sensors injected as external input at nodes 0 and 1.  The motor value
    is the last node's squashed state mapped to (-1, 1).
    """
    n = len(y)
    sig = [0.0] * n
    for _ in range(inner_steps):
        for j in range(n):
            sig[j] = logistic(gain[j] * (y[j] + theta[j]))
        for i in range(n):
            s = 0.0
            for j in range(n):
                s += weights[j][i] * sig[j]
            if i == 0:
                s += s_l
            elif i == 1:
                s += s_r
            y[i] = y[i] + (h / tau[i]) * (-y[i] + s)
    last = n - 1
    return 2.0 * logistic(gain[last] * (y[last] + theta[last])) - 1.0


def run_episode_loop(
    act,
    quality,  # list of cell qualities
    T: int,
    start: int,
    always_move: bool,
    rest_band: float,
    theta_max: float,
    theta_min: float,
):
    """Generic episode driver: sense -> act -> move -> judge, T times.

    Returns (positions, modes, deltas, switch_times, r_cum, r_ins,
    fail_step) where fail_step is -1 for a clean run and the index of the
    first non-finite controller output otherwise (the trace is truncated
    there).  Reward accumulation includes the t=0 term for the start cell
    and uses the judge mode after the arrival update at each step.
    """
    n = len(quality)
    p = start
    mode = 1
    positions = [p]
    modes = [mode]
    deltas = []
    switch_times = []
    r_cum = quality[p] * mode
    for t in range(T):
        s_l = quality[p - 1] if p > 0 else quality[p]
        s_r = quality[p + 1] if p < n - 1 else quality[p]
        out = act(s_l, s_r)
        if not math.isfinite(out):
            return positions, modes, deltas, switch_times, r_cum, quality[p] * mode, t
        if always_move:
            delta = -1 if out > 0.0 else 1
        else:
            delta = -1 if out > rest_band else (1 if out < -rest_band else 0)
        deltas.append(delta)
        p = min(n - 1, max(0, p + delta))
        if mode == 1 and quality[p] >= theta_max:
            mode = -1
            switch_times.append(t + 1)
        elif mode == -1 and quality[p] <= theta_min:
            mode = 1
            switch_times.append(t + 1)
        positions.append(p)
        modes.append(mode)
        r_cum += quality[p] * mode
    return positions, modes, deltas, switch_times, r_cum, quality[p] * mode, -1
