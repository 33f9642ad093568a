"""Offline replay evaluation for continuous-armed bandit policies."""

from .config import ExperimentConfig, PolicySpec, make_policy, parse_config
from .harness import (
    derive_rng,
    run_experiment,
    run_ingest,
    run_offline,
    run_online,
    simulate_online,
)
from .metrics import (
    RankTable,
    RunAggregate,
    aggregate_runs,
    cumulative_regret,
    cumulative_reward,
    rank_at,
)
from .policies import (
    ConstantPolicy,
    EpsilonFirstPolicy,
    LockInFeedbackPolicy,
    Policy,
    QuadraticCoefficients,
    ThompsonQuadraticPolicy,
    UniformRandomPolicy,
    argmax_quadratic,
    least_squares_quadratic,
    sample_mvn,
)
from .replay import (
    LoggedEvent,
    LoggedStream,
    ReplayConfig,
    Trace,
    acceptance_probability,
    generate_logged_stream,
    load_stream,
    replay_cab,
    replay_discrete,
    required_log_length,
    save_stream,
)
from .rewards import (
    ActionRange,
    BimodalQuarticModel,
    ParabolaModel,
    make_bimodal,
    make_bimodal_from_heights,
    make_model,
    make_parabola,
)

__version__ = "0.1.0"
