"""Noise-augmentation wrappers and a benchmark harness for small RL envs."""
from .core import (
    ActionOutOfSpaceError,
    Continuous,
    Discrete,
    Environment,
    EpisodeFinishedError,
    InvalidConfigError,
    ObservationSpace,
    StepResult,
    episodic_return,
)
from .envs import (
    ENVS,
    Chain,
    GridWorld,
    PointMass,
    UnknownEnvError,
    greedy_policy,
    gridworld_optimal_return,
    make_env,
    value_iteration,
)
from .wrappers import (
    PRESETS,
    WRAPPER_KINDS,
    DropoutObservation,
    EarlyTermination,
    MixupObservation,
    NoiseWrapper,
    NormalNoisyObservation,
    NormalNoisyReward,
    PerturbationLog,
    UniformNoisyObservation,
    UniformNoisyReward,
    UniformScaleObservation,
    UniformScaleReward,
    WrapperConfig,
    config_from_dict,
    gate_fires,
    kind_params,
    perturbation_totals,
    preset,
    wrap,
    wrapper_depth,
)
from .agents import (
    AGENTS,
    IncompatibleSpaceError,
    LinearGaussianPolicy,
    LinearGaussianPolicyConfig,
    RandomPolicyConfig,
    TabularQConfig,
    UnknownAgentError,
    discretize,
    q_learning_train,
    q_update,
    random_agent_train,
    reinforce_train,
    train_agent,
)
from .records import EvalPoint, RunRecord
from .harness import (
    DEFAULT_NOISE_RATES,
    ConsistencyRow,
    DegenerateBaselineError,
    EmptyInputError,
    ExperimentConfig,
    SummaryRow,
    SummaryTable,
    UnknownAxisError,
    fingerprint,
    load_config,
    pct_improvement,
    report,
    run_experiment,
    summarize,
    sweep,
)

__version__ = "0.1.0"
