"""Wankelmut: a 1D gradient world in which an agent must alternately seek
the high- and the low-quality end, plus everything needed to try to evolve
controllers for it -- ANN/CTRNN substrates, a generational GA, four
fitness regimes, and post-hoc reactivity analysis."""

__version__ = "0.1.0"

from ._backend import backend_name
from .analysis import (
    Classification,
    ReactivityReport,
    parking_oracle,
    posthoc_suite,
    posthoc_suite_for_genome,
    reference_max_fitness,
)
from .controllers import (
    AnnController,
    CtrnnController,
    HandCodedController,
    MoveMode,
    ScriptedController,
    center_crossing_theta,
    load_genome,
    output_to_delta,
    reference_ann_genome,
    save_genome,
)
from .evolution import (
    EvolutionLog,
    GaConfig,
    Substrate,
    init_population,
    mutate_ann,
    mutate_ctrnn,
    run_evolution,
    seed_population_from_file,
    select_proportionate,
)
from .fitness import (
    REGIME_WEIGHTS,
    EpisodeTrace,
    FitnessWeights,
    Regime,
    Scheme,
    episode_fitness,
    evaluate,
    make_setup,
    run_episode,
)
from .render import render_trajectory
from .world import (
    DOWNHILL,
    UPHILL,
    Environment,
    JudgeState,
    Orientation,
    Profile,
    erf,
    judge_update,
    make_environment,
    sense,
    step_position,
)
