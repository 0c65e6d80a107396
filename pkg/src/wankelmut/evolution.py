"""Generational GA: fitness-proportionate selection, elitism of one, no
recombination, substrate-specific mutation.

Reproducibility contract: a (config, seed) pair fully determines the run.
All randomness flows through one generator consumed in a fixed order
(population init, then per generation the selection draw and mutation
draws for each child slot in turn); episode evaluation itself consumes no
randomness, so it can run anywhere without perturbing the stream.
"""

from __future__ import annotations

import time
from dataclasses import dataclass, field
from enum import Enum

import numpy as np

from . import fitness as fitness_mod
from .controllers import (
    ANN_GENES,
    CTRNN_GENES,
    CTRNN_NODES,
    AnnController,
    CtrnnController,
    MoveMode,
    center_crossing_theta,
    load_genome,
)
from .fitness import EvaluationSetup, FitnessWeights, Scheme, make_setup


class Substrate(str, Enum):
    ANN = "ann"
    CTRNN = "ctrnn"


@dataclass
class GaConfig:
    substrate: Substrate
    scheme: Scheme
    weights: FitnessWeights
    rng_seed: int = 0
    population_size: int = 150
    generations: int = 300
    elitism: int = 1
    episode_steps: int = 250
    num_cells: int = 40
    start: int | None = None
    move_mode: MoveMode = MoveMode.ALWAYS_MOVE
    steepness: float = 4.0
    # ANN operators
    ann_init_span: float = 0.5
    ann_mutation_rate: float = 0.3
    ann_mutation_span: float = 0.4
    # CTRNN operators
    ctrnn_wide_init: bool = False  # weight init (-15, 15) instead of (-0.5, 0.5)
    ctrnn_tau_init: tuple[float, float] = (0.9, 5.9)
    ctrnn_weight_mutation_rate: float = 0.1
    ctrnn_weight_mutation_span: float = 0.4
    ctrnn_theta_mutation_span: float = 0.4
    ctrnn_tau_mutation_span: float = 0.1
    ctrnn_tau_floor: float = 0.05
    ctrnn_h: float = 0.2
    ctrnn_inner_steps: int = 5
    seed_genome_path: str | None = None

    def __post_init__(self):
        if self.population_size < 2:
            raise ValueError("population_size must be >= 2")
        if not 0 <= self.elitism < self.population_size:
            raise ValueError("elitism must be in [0, population_size)")
        for rate in (self.ann_mutation_rate, self.ctrnn_weight_mutation_rate):
            if not 0.0 <= rate <= 1.0:
                raise ValueError(f"mutation rate {rate} outside [0, 1]")
        if self.generations < 1:
            raise ValueError("generations must be >= 1")

    @property
    def gene_count(self) -> int:
        return ANN_GENES if self.substrate is Substrate.ANN else CTRNN_GENES

    def build_setup(self) -> EvaluationSetup:
        return make_setup(
            self.scheme,
            self.weights,
            self.episode_steps,
            self.num_cells,
            self.start,
            self.move_mode,
            self.steepness,
        )

    def decode(self, genome):
        if self.substrate is Substrate.ANN:
            return AnnController(genome)
        return CtrnnController(genome, h=self.ctrnn_h, inner_steps=self.ctrnn_inner_steps)


@dataclass
class GenerationRecord:
    generation: int
    best_fitness: float
    mean_fitness: float
    median_fitness: float
    best_genome: np.ndarray


@dataclass
class EvolutionLog:
    config: GaConfig
    records: list[GenerationRecord] = field(default_factory=list)
    gen_seconds: list[float] = field(default_factory=list)

    @property
    def best_genome(self) -> np.ndarray:
        return self.records[-1].best_genome

    @property
    def best_fitness(self) -> float:
        return self.records[-1].best_fitness

    def best_series(self) -> list[float]:
        return [r.best_fitness for r in self.records]

    def to_csv(self, path) -> None:
        # repr round-trips doubles exactly, keeping re-runs byte-identical.
        lines = ["generation,best,mean,median"]
        for r in self.records:
            lines.append(
                f"{r.generation},{r.best_fitness!r},{r.mean_fitness!r},{r.median_fitness!r}"
            )
        with open(path, "w", encoding="utf-8") as fh:
            fh.write("\n".join(lines) + "\n")


def init_population(config: GaConfig, rng: np.random.Generator) -> np.ndarray:
    """Table-driven initialization.

    ANN genes are uniform in +/- ann_init_span.  CTRNN weights are uniform
    in +/-0.5 (or +/-15 under the wide-init flag), time constants uniform
    in the tau init range, and biases set to the center-crossing values of
    the drawn weights.
    """
    pop = config.population_size
    if config.substrate is Substrate.ANN:
        s = config.ann_init_span
        return rng.uniform(-s, s, size=(pop, ANN_GENES))
    n = CTRNN_NODES
    span = 15.0 if config.ctrnn_wide_init else 0.5
    w = rng.uniform(-span, span, size=(pop, n * n))
    tau = rng.uniform(*config.ctrnn_tau_init, size=(pop, n))
    theta = np.empty((pop, n))
    for k in range(pop):
        theta[k] = center_crossing_theta(w[k].reshape(n, n))
    return np.concatenate([w, theta, tau], axis=1)


def selection_masses(fitnesses: np.ndarray) -> np.ndarray:
    """Roulette masses (f - f_min + eps), eps = 1e-6 * max(1, spread).

    The min-shift keeps negative-fitness populations (possible under the
    cumulative regime) selectable; equal fitnesses degrade to uniform.
    """
    f = np.asarray(fitnesses, dtype=np.float64)
    f_min = float(f.min())
    f_max = float(f.max())
    eps = 1e-6 * max(1.0, f_max - f_min)
    return f - f_min + eps


def select_proportionate(fitnesses, rng: np.random.Generator) -> int:
    """Draw one parent index with probability proportional to its mass."""
    masses = selection_masses(fitnesses)
    cum = np.cumsum(masses)
    r = rng.random() * cum[-1]
    idx = int(np.searchsorted(cum, r, side="right"))
    return min(idx, len(masses) - 1)


def mutate_ann(
    genome: np.ndarray,
    rng: np.random.Generator,
    rate: float = 0.3,
    span: float = 0.4,
) -> np.ndarray:
    """Each gene independently gains a uniform +/-span perturbation with
    probability ``rate``; no clipping."""
    g = np.asarray(genome, dtype=np.float64)
    mask = rng.random(g.size) < rate
    perturb = rng.uniform(-span, span, size=g.size)
    return g + mask * perturb


def mutate_ctrnn(
    genome: np.ndarray,
    rng: np.random.Generator,
    weight_rate: float = 0.1,
    weight_span: float = 0.4,
    theta_span: float = 0.4,
    tau_span: float = 0.1,
    tau_floor: float = 0.05,
) -> np.ndarray:
    """Weights mutate per-gene at ``weight_rate``; exactly one bias and one
    time constant (chosen uniformly) are perturbed per call, the time
    constant clamped at ``tau_floor`` to keep the dynamics well defined."""
    g = np.asarray(genome, dtype=np.float64).copy()
    n = CTRNN_NODES
    nw = n * n
    mask = rng.random(nw) < weight_rate
    perturb = rng.uniform(-weight_span, weight_span, size=nw)
    g[:nw] += mask * perturb
    theta_idx = int(rng.integers(n))
    g[nw + theta_idx] += rng.uniform(-theta_span, theta_span)
    tau_idx = int(rng.integers(n))
    g[nw + n + tau_idx] += rng.uniform(-tau_span, tau_span)
    if g[nw + n + tau_idx] < tau_floor:
        g[nw + n + tau_idx] = tau_floor
    return g


def mutate(genome: np.ndarray, config: GaConfig, rng: np.random.Generator) -> np.ndarray:
    if config.substrate is Substrate.ANN:
        return mutate_ann(genome, rng, config.ann_mutation_rate, config.ann_mutation_span)
    return mutate_ctrnn(
        genome,
        rng,
        config.ctrnn_weight_mutation_rate,
        config.ctrnn_weight_mutation_span,
        config.ctrnn_theta_mutation_span,
        config.ctrnn_tau_mutation_span,
        config.ctrnn_tau_floor,
    )


def seed_population_from_file(
    path, config: GaConfig, rng: np.random.Generator
) -> np.ndarray:
    """Individual 0 is the file genome verbatim; the rest are single-step
    mutants of it."""
    kind, genome = load_genome(path)
    if kind != config.substrate.value:
        raise ValueError(
            f"{path}: genome kind '{kind}' ({genome.size} genes) does not match "
            f"substrate '{config.substrate.value}' ({config.gene_count} genes)"
        )
    pop = np.empty((config.population_size, config.gene_count))
    pop[0] = genome
    for k in range(1, config.population_size):
        pop[k] = mutate(genome, config, rng)
    return pop


def run_evolution(config: GaConfig) -> EvolutionLog:
    """Run the generational loop and log per-generation statistics.

    Per generation: evaluate everyone (episode simulation is deterministic,
    so each individual is scored once and elites carry their cached score),
    copy the ``elitism`` best into the next generation (ties broken toward
    the lower index), and fill the remainder with mutated
    roulette-selected parents.  Failed episodes score the failure sentinel
    and the run continues.
    """
    rng = np.random.default_rng(config.rng_seed)
    setup = config.build_setup()

    if config.seed_genome_path is not None:
        population = seed_population_from_file(config.seed_genome_path, config, rng)
    else:
        population = init_population(config, rng)

    log = EvolutionLog(config=config)
    pop_size = config.population_size
    fitnesses = np.empty(pop_size)
    carried: dict[int, float] = {}  # slot -> cached fitness of copied elites

    for gen in range(config.generations):
        t0 = time.perf_counter()
        for k in range(pop_size):
            if k in carried:
                fitnesses[k] = carried[k]
            else:
                controller = config.decode(population[k])
                fitnesses[k], _ = fitness_mod.evaluate(controller, setup)

        order = np.argsort(-fitnesses, kind="stable")
        best_idx = int(order[0])
        log.records.append(
            GenerationRecord(
                generation=gen,
                best_fitness=float(fitnesses[best_idx]),
                mean_fitness=float(np.mean(fitnesses)),
                median_fitness=float(np.median(fitnesses)),
                best_genome=population[best_idx].copy(),
            )
        )

        if gen < config.generations - 1:
            next_pop = np.empty_like(population)
            carried = {}
            for slot in range(config.elitism):
                src = int(order[slot])
                next_pop[slot] = population[src]
                carried[slot] = float(fitnesses[src])
            for slot in range(config.elitism, pop_size):
                parent = select_proportionate(fitnesses, rng)
                next_pop[slot] = mutate(population[parent], config, rng)
            population = next_pop

        log.gen_seconds.append(time.perf_counter() - t0)

    return log
