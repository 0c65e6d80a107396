"""Controller substrates behind one act-per-timestep interface.

Three families live here:

* ``HandCodedController`` -- the two-line reference policy: walk toward
  whichever neighbor is better for the current goal (higher while seeking
  the top, lower while seeking the bottom) and flip the goal once the
  local neighborhood mean crosses the threshold.  The goal flip is applied
  before the move decision of the same step, which is what makes the
  policy optimal on the discrete grid: the turn happens on the arrival
  step instead of one cell past it.
* ``AnnController`` -- a fixed-topology recurrent perceptron
  (2-3-3-2-1 layers, self-loops and neighbor links on the middle hidden
  layer), decoded from a 41-gene vector.
* ``CtrnnController`` -- leaky integrator nodes with full recurrent
  connectivity, decoded from a 143-gene vector (121 weights + biases +
  time constants), integrated by forward Euler.

Output sign convention throughout: positive output drives the agent left,
negative drives it right.
"""

from __future__ import annotations

from enum import Enum
from typing import Protocol

import numpy as np

from . import _pure

ANN_GENES = 41
ANN_WEIGHTS = 30
ANN_NEURONS = 11

CTRNN_NODES = 11
CTRNN_GENES = CTRNN_NODES * CTRNN_NODES + 2 * CTRNN_NODES  # 143

GENOME_KIND_GENES = {"ann": ANN_GENES, "ctrnn": CTRNN_GENES}


class MoveMode(str, Enum):
    ALWAYS_MOVE = "always_move"
    WITH_REST = "with_rest"


REST_BAND = 0.1


class Controller(Protocol):
    def reset(self) -> None: ...

    def act(self, s_l: float, s_r: float) -> float: ...


def output_to_delta(output: float, move_mode: MoveMode = MoveMode.ALWAYS_MOVE) -> int:
    """Map a motor value to a cell step.

    ALWAYS_MOVE: left (-1) on positive output, right (+1) otherwise; an
    exact zero breaks toward the right.  WITH_REST adds a +/-0.1 dead zone
    that maps to staying put.
    """
    if move_mode is MoveMode.ALWAYS_MOVE:
        return -1 if output > 0.0 else 1
    if output > REST_BAND:
        return -1
    if output < -REST_BAND:
        return 1
    return 0


class HandCodedController:
    """Reference policy with a single +/-1 goal bit.

    Goal +1 seeks high quality, -1 seeks low quality.  Each step: flip the
    goal if the sensor mean, signed by the goal, exceeds ``theta``; then
    emit ``goal`` if the left sensor is higher, else ``-goal`` (positive
    output = move left), which walks toward the currently wanted extreme
    in either gradient direction.
    """

    kernel_kind = None

    def __init__(self, theta: float = 0.95):
        self.theta = theta
        self.state = 1.0

    def reset(self) -> None:
        self.state = 1.0

    def act(self, s_l: float, s_r: float) -> float:
        if 0.5 * (s_l + s_r) * self.state > self.theta:
            self.state = -self.state
        return self.state if s_l > s_r else -self.state


class AnnController:
    """11-neuron layered recurrent net decoded from 41 genes.

    Layers 2-3-3-2-1 with strictly feed-forward links (23 weights) plus,
    on the second hidden layer, three self-loops and four neighbor links
    (30 connection weights total) and one bias per neuron.  Input neurons
    pass the raw sensors through; every other neuron applies
    1/(1+exp(-20x)) - 0.5.  Recurrent links read the previous step's
    activations, feed-forward links the current step's.
    """

    kernel_kind = "ann"

    def __init__(self, genome):
        g = np.asarray(genome, dtype=np.float64)
        if g.shape != (ANN_GENES,):
            raise ValueError(
                f"ANN genome must have {ANN_GENES} genes, got {g.size}"
            )
        if not np.all(np.isfinite(g)):
            raise ValueError("ANN genome contains non-finite genes")
        self.genome = g.copy()
        self.weights = self.genome[:ANN_WEIGHTS]
        self.biases = self.genome[ANN_WEIGHTS:]
        self._w = self.weights.tolist()
        self._b = self.biases.tolist()
        self.activations = [0.0] * ANN_NEURONS

    def reset(self) -> None:
        self.activations = [0.0] * ANN_NEURONS

    def act(self, s_l: float, s_r: float) -> float:
        return _pure.ann_act(self._w, self._b, self.activations, s_l, s_r)

    def kernel_state(self):
        acts = np.array(self.activations, dtype=np.float64)
        return self.genome[:ANN_WEIGHTS], self.genome[ANN_WEIGHTS:], acts

    def kernel_writeback(self, acts) -> None:
        self.activations = acts.tolist()


class CtrnnController:
    """Leaky-integrator network integrated by forward Euler.

    Node i follows tau_i dy_i/dt = -y_i + sum_j w_ji sigma(g_j (y_j +
    theta_j)) + I_i with sigma the standard logistic.  Sensors enter as
    external input at nodes 0 and 1; the motor value is the last node's
    squashed state mapped to (-1, 1).  Each world step advances the
    network ``inner_steps`` Euler steps of size ``h``.
    """

    kernel_kind = "ctrnn"

    def __init__(
        self,
        genome=None,
        *,
        weights=None,
        theta=None,
        tau=None,
        gain=None,
        h: float = 0.2,
        inner_steps: int = 5,
    ):
        if genome is not None:
            g = np.asarray(genome, dtype=np.float64)
            if g.shape != (CTRNN_GENES,):
                raise ValueError(
                    f"CTRNN genome must have {CTRNN_GENES} genes, got {g.size}"
                )
            n = CTRNN_NODES
            weights = g[: n * n].reshape(n, n)
            theta = g[n * n : n * n + n]
            tau = g[n * n + n :]
            self.genome = g.copy()
        else:
            weights = np.asarray(weights, dtype=np.float64)
            n = weights.shape[0]
            theta = np.asarray(theta, dtype=np.float64)
            tau = np.asarray(tau, dtype=np.float64)
            self.genome = None
        if weights.shape != (n, n) or theta.shape != (n,) or tau.shape != (n,):
            raise ValueError("inconsistent CTRNN parameter shapes")
        if np.any(tau <= 0):
            raise ValueError("all time constants must be positive")
        if not h > 0:
            raise ValueError("integration step h must be positive")
        if inner_steps < 1:
            raise ValueError("inner_steps must be >= 1")

        self.n = n
        self.weights = np.ascontiguousarray(weights, dtype=np.float64)
        self.theta = np.ascontiguousarray(theta, dtype=np.float64)
        self.tau = np.ascontiguousarray(tau, dtype=np.float64)
        self.gain = (
            np.ones(n) if gain is None else np.ascontiguousarray(gain, dtype=np.float64)
        )
        self.h = float(h)
        self.inner_steps = int(inner_steps)
        self._w_list = self.weights.tolist()
        self._theta_list = self.theta.tolist()
        self._tau_list = self.tau.tolist()
        self._gain_list = self.gain.tolist()
        self.y = [0.0] * n

    def reset(self) -> None:
        self.y = [0.0] * self.n

    def act(self, s_l: float, s_r: float) -> float:
        return _pure.ctrnn_act(
            self._w_list,
            self._theta_list,
            self._tau_list,
            self._gain_list,
            self.y,
            self.h,
            self.inner_steps,
            s_l,
            s_r,
        )

    def kernel_state(self):
        y = np.array(self.y, dtype=np.float64)
        return self.weights, self.theta, self.tau, self.gain, y

    def kernel_writeback(self, y) -> None:
        self.y = y.tolist()


def center_crossing_theta(weights) -> np.ndarray:
    """Biases placing every node's operating point at its sigmoid
    inflection: theta_i = -(sum_j w_ji) / 2 over incoming links."""
    w = np.asarray(weights, dtype=np.float64)
    return -0.5 * w.sum(axis=0)


class ScriptedController:
    """Sensor-blind playback of a fixed step plan.

    Emits outputs that map to the planned deltas (+1 output -> left, -1 ->
    right, 0 -> rest; rests require WITH_REST movement).  ``prefix`` plays
    once, then ``cycle`` repeats forever.  Used to build the pre-programmed
    and parking archetypes that the reactivity classifier must detect.
    """

    kernel_kind = None

    _OUTPUT = {-1: 1.0, 0: 0.0, 1: -1.0}

    def __init__(self, prefix, cycle):
        if not cycle:
            raise ValueError("cycle must be non-empty")
        self.prefix = [int(d) for d in prefix]
        self.cycle = [int(d) for d in cycle]
        self._t = 0

    def reset(self) -> None:
        self._t = 0

    def act(self, s_l: float, s_r: float) -> float:
        t = self._t
        self._t += 1
        if t < len(self.prefix):
            delta = self.prefix[t]
        else:
            delta = self.cycle[(t - len(self.prefix)) % len(self.cycle)]
        return self._OUTPUT[delta]


# ---------------------------------------------------------------------------
# Genome files: one header line ("ann 41" / "ctrnn 143"), one gene per line.
# ---------------------------------------------------------------------------


def save_genome(path, genome, kind: str) -> None:
    g = np.asarray(genome, dtype=np.float64)
    expected = GENOME_KIND_GENES.get(kind)
    if expected is None:
        raise ValueError(f"unknown genome kind {kind!r}")
    if g.size != expected:
        raise ValueError(f"'{kind}' genome needs {expected} genes, got {g.size}")
    lines = [f"{kind} {g.size}"]
    lines.extend(repr(float(v)) for v in g)
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("\n".join(lines) + "\n")


def load_genome(path) -> tuple[str, np.ndarray]:
    with open(path, "r", encoding="utf-8") as fh:
        raw = [ln.strip() for ln in fh if ln.strip()]
    if not raw:
        raise ValueError(f"{path}: empty genome file")
    head = raw[0].split()
    if len(head) != 2 or head[0] not in GENOME_KIND_GENES:
        raise ValueError(f"{path}: bad header {raw[0]!r}; expected 'ann 41' or 'ctrnn 143'")
    kind = head[0]
    declared = int(head[1])
    expected = GENOME_KIND_GENES[kind]
    genes = np.array([float(v) for v in raw[1:]])
    if declared != expected or genes.size != expected:
        raise ValueError(
            f"{path}: '{kind}' genome expects {expected} genes, "
            f"header declares {declared}, file has {genes.size}"
        )
    if not np.all(np.isfinite(genes)):
        raise ValueError(f"{path}: genome contains non-finite genes")
    return kind, genes


def decode(kind: str, genome, h: float = 0.2, inner_steps: int = 5):
    """Instantiate the controller a genome encodes."""
    if kind == "ann":
        return AnnController(genome)
    if kind == "ctrnn":
        return CtrnnController(genome, h=h, inner_steps=inner_steps)
    raise ValueError(f"unknown genome kind {kind!r}")


def reference_ann_genome() -> np.ndarray:
    """Hand-designed weight set reproducing the reference policy on the
    evolvable topology.

    Structure: hidden layer 1 holds two saturating threshold detectors on
    the sensor sum (top of the gradient / bottom of the gradient) and a
    left-minus-right difference sign unit.  One hidden-2 neuron is a
    set-reset latch over its own self-loop (the 1-bit goal memory, biased
    to power on in the seek-high state); a second hidden-2 neuron relays
    the difference sign.  Hidden layer 3 computes the two AND arms of an
    XOR between memory and difference, and the output neuron ORs them,
    yielding: move toward the higher neighbor while seeking high, toward
    the lower neighbor while seeking low.

    The detector gain/bias pair places the effective flip threshold at a
    neighbor-mean of about 0.9466, between the largest pre-threshold and
    the smallest at-threshold neighbor means over world sizes 24-80, so
    the latch flips exactly on the arrival step in all of them.
    """
    w = np.zeros(ANN_WEIGHTS)
    b = np.zeros(ANN_NEURONS)

    k, bias = 40.0, 75.728  # sensor-sum detectors: fire beyond mean 0.9466
    w[0], w[1] = k, k  # top detector
    w[2], w[3] = -k, -k  # bottom detector
    w[4], w[5] = 5.0, -5.0  # left-minus-right sign
    b[2], b[3] = -bias, -bias

    w[6], w[7] = -2.0, 2.0  # detectors set/reset the latch
    w[15] = 1.0  # latch self-loop
    b[5] = 0.1  # power-on toward seek-high
    w[11] = 2.0  # difference relay (h1_2 -> h2_1)

    w[22], w[23] = 2.0, 2.0  # XOR arm: both high
    b[8] = -1.0
    w[25], w[26] = -2.0, -2.0  # XOR arm: both low
    b[9] = -1.0
    w[28], w[29] = 1.0, 1.0  # OR stage
    b[10] = 0.5

    return np.concatenate([w, b])
