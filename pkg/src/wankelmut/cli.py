"""Scenario runner and artifact emitter.

Every named scenario is one experimental setting (substrate x fitness
regime x evaluation scheme x episode length), batched over seeded
independent runs.  Each run writes its per-generation log, best genome,
trajectory renders in both gradient orientations and a reactivity report;
the scenario directory adds pooled quartile statistics (boxplot data), a
reactivity summary and a manifest with the reference maximum.

Commands::

    wankelmut run <scenario> [--out DIR] [--seed S] [--runs K] [--workers W]
                  [--config overrides.json]
    wankelmut list [--json]
    wankelmut posthoc <genome-file> [--cells N] [--steps T] [--out FILE]
    wankelmut render <trace.csv> [--out FILE] [--max-steps K]

``WANKELMUT_OUT`` sets the default output root (default ./wankelmut-out).
"""

from __future__ import annotations

import argparse
import json
import multiprocessing
import os
import sys
from dataclasses import dataclass, replace
from pathlib import Path

import numpy as np

from . import __version__, _backend
from .analysis import posthoc_suite_for_genome, reference_max_fitness
from .controllers import MoveMode, load_genome, save_genome
from .evolution import GaConfig, Substrate, run_evolution
from .fitness import REGIME_WEIGHTS, Regime, Scheme, run_episode
from .render import render_trace_csv, render_trajectory
from .world import Orientation, Profile, make_environment

TRAJECTORY_WINDOW = 56  # rendered prefix of each trajectory, in steps
DEFAULT_RUNS = 30
DEFAULT_BASE_SEED = 1000


def _data_file(name: str) -> str:
    return str(Path(__file__).parent / "data" / name)


@dataclass(frozen=True)
class ScenarioSpec:
    name: str
    substrate: Substrate
    regime: Regime
    scheme: Scheme
    T: int = 250
    runs: int = DEFAULT_RUNS
    base_seed: int = DEFAULT_BASE_SEED
    num_cells: int = 40
    start: int | None = None
    move_mode: MoveMode = MoveMode.ALWAYS_MOVE
    seed_file: str | None = None
    population_size: int = 150
    generations: int = 300
    description: str = ""

    def ga_config(self, seed: int) -> GaConfig:
        return GaConfig(
            substrate=self.substrate,
            scheme=self.scheme,
            weights=REGIME_WEIGHTS[self.regime],
            rng_seed=seed,
            population_size=self.population_size,
            generations=self.generations,
            episode_steps=self.T,
            num_cells=self.num_cells,
            start=self.start,
            move_mode=self.move_mode,
            seed_genome_path=self.seed_file,
        )

    def describe(self) -> dict:
        d = {
            "name": self.name,
            "substrate": self.substrate.value,
            "regime": self.regime.value,
            "scheme": self.scheme.value,
            "episode_steps": self.T,
            "runs": self.runs,
            "base_seed": self.base_seed,
            "num_cells": self.num_cells,
            "start": self.start if self.start is not None else self.num_cells // 2,
            "move_mode": self.move_mode.value,
            "population_size": self.population_size,
            "generations": self.generations,
            "description": self.description,
        }
        if self.seed_file:
            d["seed_file"] = self.seed_file
        return d


def _catalog() -> dict[str, ScenarioSpec]:
    specs: list[ScenarioSpec] = []
    for sub in (Substrate.ANN, Substrate.CTRNN):
        specs.append(
            ScenarioSpec(
                name=f"switch-single-{sub.value}",
                substrate=sub,
                regime=Regime.SWITCH,
                scheme=Scheme.SINGLE_NORMAL,
                description="switch reward, fixed single environment",
            )
        )
        specs.append(
            ScenarioSpec(
                name=f"switch-mean-{sub.value}",
                substrate=sub,
                regime=Regime.SWITCH,
                scheme=Scheme.DOUBLE_MEAN,
                description="switch reward, both orientations, mean of both",
            )
        )
        specs.append(
            ScenarioSpec(
                name=f"switch-min-{sub.value}",
                substrate=sub,
                regime=Regime.SWITCH,
                scheme=Scheme.DOUBLE_MIN,
                description="switch reward, both orientations, minimum of both",
            )
        )
        specs.append(
            ScenarioSpec(
                name=f"cum-min-{sub.value}",
                substrate=sub,
                regime=Regime.CUMULATIVE,
                scheme=Scheme.DOUBLE_MIN,
                description="cumulative position reward (cheap-trick prone)",
            )
        )
        specs.append(
            ScenarioSpec(
                name=f"instswitch-min-{sub.value}",
                substrate=sub,
                regime=Regime.INSTANT_SWITCH,
                scheme=Scheme.DOUBLE_MIN,
                description="switch reward plus final-position reward",
            )
        )
        specs.append(
            ScenarioSpec(
                name=f"cumswitch-min-{sub.value}",
                substrate=sub,
                regime=Regime.CUMULATIVE_SWITCH,
                scheme=Scheme.DOUBLE_MIN,
                description="switch reward plus cumulative position reward",
            )
        )
        specs.append(
            ScenarioSpec(
                name=f"cumswitch-min-{sub.value}-56",
                substrate=sub,
                regime=Regime.CUMULATIVE_SWITCH,
                scheme=Scheme.DOUBLE_MIN,
                T=56,
                description="short 56-step evaluation window",
            )
        )
    specs.append(
        ScenarioSpec(
            name="seeded-handcoded-switch",
            substrate=Substrate.ANN,
            regime=Regime.SWITCH,
            scheme=Scheme.DOUBLE_MIN,
            seed_file=_data_file("handcoded_ann.txt"),
            description="evolution seeded from the hand-designed ANN weights",
        )
    )
    return {s.name: s for s in specs}


SCENARIOS = _catalog()


def apply_overrides(spec: ScenarioSpec, overrides: dict) -> ScenarioSpec:
    """Merge a JSON override mapping into a spec (same field names)."""
    valid = set(ScenarioSpec.__dataclass_fields__)
    kwargs = {}
    converters = {
        "substrate": Substrate,
        "regime": Regime,
        "scheme": Scheme,
        "move_mode": MoveMode,
    }
    for key, value in overrides.items():
        if key == "episode_steps":
            key = "T"
        if key not in valid:
            raise ValueError(
                f"unknown scenario field {key!r}; valid fields: {sorted(valid)}"
            )
        if key in converters and value is not None:
            value = converters[key](value)
        kwargs[key] = value
    return replace(spec, **kwargs)


def _reference_for(spec: ScenarioSpec) -> float:
    return reference_max_fitness(
        spec.scheme,
        REGIME_WEIGHTS[spec.regime],
        spec.T,
        spec.num_cells,
        spec.start,
        spec.move_mode,
    )


def _execute_run_guarded(args) -> dict:
    """Worker wrapper: turn a run failure into a result record so the
    remaining runs of a parallel batch keep going."""
    try:
        return _execute_run(args)
    except Exception as exc:
        return {"error": str(exc), "seed": args[1]}


def _execute_run(args) -> dict:
    """One seeded evolution plus its artifacts (top-level for pickling)."""
    spec, seed, run_dir = args
    run_dir = Path(run_dir)
    run_dir.mkdir(parents=True, exist_ok=True)
    config = spec.ga_config(seed)
    log = run_evolution(config)

    log.to_csv(run_dir / "log.csv")
    best = log.best_genome
    save_genome(run_dir / "best_genome.txt", best, spec.substrate.value)

    controller = config.decode(best)
    start = spec.start if spec.start is not None else spec.num_cells // 2
    env_n = make_environment(spec.num_cells, Profile.ERF, Orientation.NORMAL)
    env_f = make_environment(spec.num_cells, Profile.ERF, Orientation.FLIPPED)
    tr_n = run_episode(controller, env_n, spec.T, start, spec.move_mode)
    tr_f = run_episode(
        controller, env_f, spec.T, spec.num_cells - 1 - start, spec.move_mode
    )
    render_trajectory(tr_n, run_dir / "trajectory_normal.svg", TRAJECTORY_WINDOW)
    render_trajectory(tr_f, run_dir / "trajectory_flipped.svg", TRAJECTORY_WINDOW)

    report = posthoc_suite_for_genome(
        spec.substrate.value,
        best,
        num_cells=spec.num_cells,
        T=spec.T,
        move_mode=spec.move_mode,
    )
    report.to_json(run_dir / "posthoc.json")

    return {
        "seed": seed,
        "best_fitness": log.best_fitness,
        "best_series": log.best_series(),
        "classification": report.classification.value,
        "flipped_pass": report.flipped_pass,
        "gaussian_left_pass": report.gaussian_left_pass,
        "gaussian_right_pass": report.gaussian_right_pass,
        "rescaled_pass": report.rescaled_pass,
    }


def _quartile_rows(series_by_run: list[list[float]]) -> list[str]:
    rows = ["generation,min,q1,median,q3,max,whisker_low,whisker_high"]
    gens = min(len(s) for s in series_by_run)
    data = np.array([s[:gens] for s in series_by_run])
    for g in range(gens):
        col = np.sort(data[:, g])
        q1, med, q3 = np.percentile(col, [25, 50, 75])
        iqr = q3 - q1
        lo_fence, hi_fence = q1 - 1.5 * iqr, q3 + 1.5 * iqr
        wlo = float(col[col >= lo_fence][0]) if np.any(col >= lo_fence) else float(col[0])
        whi = float(col[col <= hi_fence][-1]) if np.any(col <= hi_fence) else float(col[-1])
        rows.append(
            f"{g},{float(col[0])!r},{float(q1)!r},{float(med)!r},"
            f"{float(q3)!r},{float(col[-1])!r},{wlo!r},{whi!r}"
        )
    return rows


def run_scenario(
    spec: ScenarioSpec, out_root, workers: int = 1, echo=print
) -> Path:
    """Execute all seeded runs of a scenario and write the artifact tree."""
    out_dir = Path(out_root) / spec.name
    out_dir.mkdir(parents=True, exist_ok=True)

    reference = _reference_for(spec)
    jobs = [
        (spec, spec.base_seed + k, str(out_dir / f"run_{k:03d}"))
        for k in range(spec.runs)
    ]

    results: list[dict | None] = [None] * spec.runs
    failures: list[dict] = []
    if workers > 1:
        with multiprocessing.Pool(workers) as pool:
            raw = pool.map(_execute_run_guarded, jobs)
    else:
        raw = [_execute_run_guarded(job) for job in jobs]
    for k, res in enumerate(raw):
        if "error" in res:  # keep remaining runs going
            failures.append({"run": k, "seed": res["seed"], "error": res["error"]})
            echo(f"run {k} failed: {res['error']}", file=sys.stderr)
        else:
            results[k] = res

    done = [r for r in results if r is not None]
    if done:
        rows = _quartile_rows([r["best_series"] for r in done])
        (out_dir / "pooled_quartiles.csv").write_text("\n".join(rows) + "\n")

        summary = [
            "run,seed,best_fitness,classification,flipped_pass,"
            "gaussian_left_pass,gaussian_right_pass,rescaled_pass"
        ]
        for k, r in enumerate(results):
            if r is None:
                continue
            summary.append(
                f"run_{k:03d},{r['seed']},{r['best_fitness']!r},{r['classification']},"
                f"{int(r['flipped_pass'])},{int(r['gaussian_left_pass'])},"
                f"{int(r['gaussian_right_pass'])},{int(r['rescaled_pass'])}"
            )
        (out_dir / "posthoc_summary.csv").write_text("\n".join(summary) + "\n")

    manifest = {
        "scenario": spec.describe(),
        "reference_max_fitness": reference,
        "version": __version__,
        "backend": _backend.backend_name(),
        "completed_runs": len(done),
        "failures": failures,
    }
    with open(out_dir / "manifest.json", "w", encoding="utf-8") as fh:
        json.dump(manifest, fh, indent=2, sort_keys=True)
        fh.write("\n")

    echo(
        f"{spec.name}: {len(done)}/{spec.runs} runs complete, "
        f"reference max {reference:g}, output {out_dir}"
    )
    return out_dir


def list_scenarios(as_json: bool = False, echo=print) -> None:
    if as_json:
        echo(json.dumps([s.describe() for s in SCENARIOS.values()], indent=2))
        return
    for spec in SCENARIOS.values():
        d = spec.describe()
        echo(
            f"{d['name']:28s} {d['substrate']:5s} regime={d['regime']:17s} "
            f"scheme={d['scheme']:13s} T={d['episode_steps']:<3d} "
            f"pop={d['population_size']} gens={d['generations']} runs={d['runs']}"
        )


def _default_out_root() -> str:
    return os.environ.get("WANKELMUT_OUT", "wankelmut-out")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="wankelmut", description="gradient-cycling benchmark runner"
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_run = sub.add_parser("run", help="run a named scenario")
    p_run.add_argument("scenario", help="scenario name (see 'list')")
    p_run.add_argument("--out", default=None, help="output root directory")
    p_run.add_argument("--seed", type=int, default=None, help="base seed override")
    p_run.add_argument("--runs", type=int, default=None, help="number of runs")
    p_run.add_argument("--workers", type=int, default=1, help="parallel run workers")
    p_run.add_argument(
        "--config", default=None, help="JSON file with scenario field overrides"
    )

    p_list = sub.add_parser("list", help="list scenarios")
    p_list.add_argument("--json", action="store_true", help="machine-readable catalog")

    p_post = sub.add_parser("posthoc", help="reactivity suite for a genome file")
    p_post.add_argument("genome", help="genome file (ann/ctrnn format)")
    p_post.add_argument("--cells", type=int, default=40)
    p_post.add_argument("--steps", type=int, default=250)
    p_post.add_argument("--out", default=None, help="write JSON here instead of stdout")

    p_render = sub.add_parser("render", help="render a trace CSV to SVG")
    p_render.add_argument("trace", help="trace CSV file")
    p_render.add_argument("--out", default=None, help="SVG path (default: trace.svg)")
    p_render.add_argument("--max-steps", type=int, default=None)

    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)

    if args.command == "list":
        list_scenarios(as_json=args.json)
        return 0

    if args.command == "run":
        if args.scenario not in SCENARIOS:
            print(
                f"unknown scenario {args.scenario!r}; run 'wankelmut list'",
                file=sys.stderr,
            )
            return 2
        spec = SCENARIOS[args.scenario]
        if args.config:
            with open(args.config, "r", encoding="utf-8") as fh:
                spec = apply_overrides(spec, json.load(fh))
        if args.seed is not None:
            spec = replace(spec, base_seed=args.seed)
        if args.runs is not None:
            spec = replace(spec, runs=args.runs)
        out_root = args.out if args.out is not None else _default_out_root()
        run_scenario(spec, out_root, workers=max(1, args.workers))
        return 0

    if args.command == "posthoc":
        kind, genome = load_genome(args.genome)
        report = posthoc_suite_for_genome(
            kind, genome, num_cells=args.cells, T=args.steps
        )
        payload = json.dumps(report.to_json_dict(), indent=2, sort_keys=True)
        if args.out:
            Path(args.out).write_text(payload + "\n")
        else:
            print(payload)
        return 0

    if args.command == "render":
        out = args.out or (os.path.splitext(args.trace)[0] + ".svg")
        render_trace_csv(args.trace, out, args.max_steps)
        print(out)
        return 0

    return 2


if __name__ == "__main__":
    raise SystemExit(main())
