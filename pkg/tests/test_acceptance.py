"""Acceptance gate: one test per criterion, each printing a PASS/FAIL line.

Run with ``pytest tests/test_acceptance.py -s`` to see the lines as they
happen; on failures pytest shows the captured output either way.

Criterion 5's median clause is asserted exactly as specified and is
expected to fail on this implementation: the single-environment bootstrap
chasm (28 unrewarded cells after the first switch) is crossed in only
~16% of runs (8/50 measured) at the pinned GA parameters, so the median over the default
seed block sits at 1.0.  The full analysis lives in the project notes;
the criterion is kept honest rather than tuned to pass.
"""

import json
import math
import statistics
import time
from multiprocessing import Pool
from pathlib import Path

import numpy as np
import pytest

from oracles import (
    erf_oracle,
    max_switches_dp,
    ode_step_response,
    reference_agent_act,
    reference_agent_init,
)
from wankelmut import (
    AnnController,
    Classification,
    CtrnnController,
    GaConfig,
    HandCodedController,
    MoveMode,
    Regime,
    REGIME_WEIGHTS,
    Scheme,
    Substrate,
    erf,
    evaluate,
    init_population,
    make_environment,
    make_setup,
    mutate_ann,
    mutate_ctrnn,
    posthoc_suite,
    reference_max_fitness,
    run_episode,
    run_evolution,
)
from wankelmut.analysis import make_parking_controller, make_zigzag_controller, parking_oracle
from wankelmut.cli import SCENARIOS, apply_overrides, run_scenario
from wankelmut.controllers import ANN_GENES, CTRNN_NODES


def report(num, name, ok, detail=""):
    status = "PASS" if ok else "FAIL"
    print(f"ACCEPTANCE {num:02d} [{name}] {status}  {detail}")
    return ok


# -- workers for the evolution criteria (top level for pickling) -------------


def _single_env_run(seed):
    cfg = GaConfig(
        substrate=Substrate.ANN,
        scheme=Scheme.SINGLE_NORMAL,
        weights=REGIME_WEIGHTS[Regime.SWITCH],
        rng_seed=seed,
    )
    log = run_evolution(cfg)
    best = log.best_genome
    rep = posthoc_suite(lambda: AnnController(best))
    return seed, log.best_fitness, rep.classification.value, rep.flipped_pass


def _seeded_run(seed):
    import wankelmut

    seed_file = str(Path(wankelmut.__file__).parent / "data" / "handcoded_ann.txt")
    cfg = GaConfig(
        substrate=Substrate.ANN,
        scheme=Scheme.DOUBLE_MIN,
        weights=REGIME_WEIGHTS[Regime.SWITCH],
        rng_seed=seed,
        seed_genome_path=seed_file,
    )
    log = run_evolution(cfg)
    reference = reference_max_fitness(
        Scheme.DOUBLE_MIN, REGIME_WEIGHTS[Regime.SWITCH], 250, 40, 20
    )
    reached = [g for g, b in enumerate(log.best_series()) if b >= reference]
    return seed, log.best_fitness, (reached[0] if reached else -1)


def test_criterion_01_erf_accuracy():
    xs = np.linspace(-6.0, 6.0, 1000)
    oracle = [erf_oracle(float(x)) for x in xs]
    t0 = time.perf_counter()
    worst = max(abs(erf(float(x)) - o) for x, o in zip(xs, oracle))
    elapsed = time.perf_counter() - t0
    ok = worst <= 1e-7 and elapsed < 1.0
    assert report(1, "erf-accuracy", ok, f"worst |err| {worst:.2e}, {elapsed * 1e3:.0f} ms")


def test_criterion_02_handcoded_oracle_equivalence():
    rng = np.random.default_rng(424242)
    ctrl = HandCodedController()
    mem = reference_agent_init()
    mismatches = 0
    for _ in range(10_000):
        s_l, s_r = rng.uniform(-1, 1, 2)
        if ctrl.act(s_l, s_r) != reference_agent_act(mem, s_l, s_r):
            mismatches += 1
        if int(ctrl.state) != mem["state"]:
            mismatches += 1
    ok = mismatches == 0
    assert report(2, "handcoded-equivalence", ok, f"{mismatches} mismatches over 1e4 steps")


def test_criterion_03_reference_maximum():
    t0 = time.perf_counter()
    env = make_environment(40)
    s_star = max_switches_dp(env.quality.tolist(), 250, 20)
    got = reference_max_fitness(
        Scheme.DOUBLE_MIN, REGIME_WEIGHTS[Regime.SWITCH], 250, 40, 20
    )
    setup = make_setup(Scheme.DOUBLE_MIN, REGIME_WEIGHTS[Regime.SWITCH], 250)
    _, (tr_n, tr_f) = evaluate(HandCodedController(), setup)
    mirrored = bool(np.all(tr_n.positions + tr_f.positions == 39))
    elapsed = time.perf_counter() - t0
    ok = got == float(s_star) and mirrored and elapsed < 1.0
    assert report(
        3, "reference-maximum", ok,
        f"reference {got:g} vs S* {s_star}, mirrored {mirrored}, {elapsed * 1e3:.0f} ms",
    )


def test_criterion_04_cheap_trick_inequality():
    t0 = time.perf_counter()
    env = make_environment(40)
    park = parking_oracle(env, 250, 20)
    hand = run_episode(HandCodedController(), env, 250, 20)
    elapsed = time.perf_counter() - t0
    ok = park.r_cum > hand.r_cum and elapsed < 1.0
    assert report(
        4, "cheap-trick", ok,
        f"parking r_cum {park.r_cum:.2f} > hand-coded {hand.r_cum:.2f}",
    )


def test_criterion_05_single_env_evolution():
    seeds = list(range(1000, 1010))  # the catalog's default seed block
    with Pool(min(10, len(seeds))) as pool:
        results = pool.map(_single_env_run, seeds)
    finals = [b for _, b, _, _ in results]
    med = statistics.median(finals)
    s_star = 9.0
    non_reactive = sum(1 for _, _, c, _ in results if c != "reactive")
    flipped_failed = sum(1 for _, _, _, fp in results if not fp)
    print(f"  runs (seed: best): {[(s, b) for s, b, _, _ in results]}")
    print(
        f"  reported: {non_reactive}/10 best genomes non-reactive, "
        f"{flipped_failed}/10 fail the flipped test"
    )
    ok = med >= 0.5 * s_star
    report(5, "single-env-evolution", ok, f"median best {med:g} (needs >= {0.5 * s_star:g})")
    assert ok, (
        f"median best fitness {med:g} < {0.5 * s_star:g} over seeds {seeds}; "
        "see notes: the pinned GA crosses the single-environment bootstrap "
        "chasm in ~16% of runs (8/50 measured), so the spec's median expectation is not met"
    )


def test_criterion_06_seeded_recovery():
    seeds = list(range(1000, 1005))
    with Pool(len(seeds)) as pool:
        results = pool.map(_seeded_run, seeds)
    reached = [(s, gen) for s, _, gen in results if gen >= 0]
    print(f"  per-seed (seed, best, first-gen-at-reference): {results}")
    ok = len(reached) >= 1
    assert report(
        6, "seeded-recovery", ok,
        f"{len(reached)}/5 runs reach the reference maximum within 300 generations",
    )


def test_criterion_07_determinism(tmp_path):
    spec = apply_overrides(
        SCENARIOS["switch-single-ann"],
        {"runs": 2, "population_size": 12, "generations": 4, "T": 56},
    )
    out1 = run_scenario(spec, tmp_path / "a", workers=1, echo=lambda *a, **k: None)
    out2 = run_scenario(spec, tmp_path / "b", workers=2, echo=lambda *a, **k: None)
    rel1 = sorted(p.relative_to(out1) for p in out1.rglob("*") if p.is_file())
    rel2 = sorted(p.relative_to(out2) for p in out2.rglob("*") if p.is_file())
    identical = rel1 == rel2 and all(
        (out1 / r).read_bytes() == (out2 / r).read_bytes() for r in rel1
    )
    assert report(
        7, "determinism", identical,
        f"{len(rel1)} artifacts byte-identical across worker counts 1 and 2",
    )


def test_criterion_08_mutation_statistics():
    rng = np.random.default_rng(20250808)
    genome = np.zeros(ANN_GENES)
    trials = 10_000
    changed = 0
    bounded = True
    for _ in range(trials):
        child = mutate_ann(genome, rng)
        changed += int(np.count_nonzero(child))
        bounded &= bool(np.abs(child).max() <= 0.4)
    expected = trials * ANN_GENES * 0.3
    sigma = math.sqrt(trials * ANN_GENES * 0.3 * 0.7)
    mean_ok = abs(changed - expected) < 4.5 * sigma

    n = CTRNN_NODES
    base = np.concatenate([np.zeros(n * n + n), np.full(n, 3.0)])
    one_each = True
    ranges_ok = True
    for _ in range(trials):
        child = mutate_ctrnn(base, rng)
        one_each &= int(np.count_nonzero(child[n * n : n * n + n])) == 1
        one_each &= int(np.count_nonzero(child[n * n + n :] != 3.0)) == 1
        ranges_ok &= bool(np.abs(child[: n * n]).max() <= 0.4)
        ranges_ok &= bool(np.abs(child[n * n : n * n + n]).max() <= 0.4)
        ranges_ok &= bool(np.abs(child[n * n + n :] - 3.0).max() <= 0.1)

    ok = mean_ok and bounded and one_each and ranges_ok
    assert report(
        8, "mutation-statistics", ok,
        f"ANN mean genes/genome {changed / trials:.2f} (expect 12.30), "
        f"bounds {bounded}, one-theta-one-tau {one_each}",
    )


def test_criterion_09_classifier_archetypes():
    outcomes = {}
    ok = True
    for n in (24, 40, 80):
        env = make_environment(n)
        hand = posthoc_suite(HandCodedController, num_cells=n).classification
        zig = posthoc_suite(
            lambda: make_zigzag_controller(env, n // 2), num_cells=n
        ).classification
        park = posthoc_suite(
            lambda: make_parking_controller(env, n // 2),
            num_cells=n,
            move_mode=MoveMode.WITH_REST,
        ).classification
        outcomes[n] = (hand.value, zig.value, park.value)
        ok &= hand is Classification.REACTIVE
        ok &= zig is Classification.PRE_PROGRAMMED
        ok &= park is Classification.FAILED
    assert report(9, "classifier-archetypes", ok, f"{outcomes}")


def test_criterion_10_ctrnn_numerics():
    rng = np.random.default_rng(7)
    identity_ok = True
    for wide in (False, True):
        cfg = GaConfig(
            substrate=Substrate.CTRNN,
            scheme=Scheme.SINGLE_NORMAL,
            weights=REGIME_WEIGHTS[Regime.SWITCH],
            population_size=150,
            ctrnn_wide_init=wide,
        )
        pop = init_population(cfg, rng)
        n = CTRNN_NODES
        for genome in pop:
            w = genome[: n * n].reshape(n, n)
            theta = genome[n * n : n * n + n]
            identity_ok &= bool(np.all(w.sum(axis=0) + 2.0 * theta == 0.0))

    tau, h, inner, c = 2.0, 0.2, 5, 1.0
    ctrl = CtrnnController(
        weights=np.zeros((1, 1)), theta=np.zeros(1), tau=np.array([tau]),
        h=h, inner_steps=inner,
    )
    worst = 0.0
    for t in range(1, 11):
        ctrl.act(c, 0.0)
        worst = max(worst, abs(ctrl.y[0] - ode_step_response(c, tau, t)))
    response_ok = worst <= 0.02 * abs(c)

    ok = identity_ok and response_ok
    assert report(
        10, "ctrnn-numerics", ok,
        f"center-crossing exact {identity_ok}, step-response err {worst:.4f} (<= 0.02)",
    )
