"""iesguard: robust scheduling of an integrated electricity, gas and heat system.

iesguard simulates one district energy hub (wind, electric boiler,
power-to-gas, micro gas turbine, electric and heat storage, a heated
building and price-responsive loads) as a 24-step reinforcement-learning
environment, and trains a soft actor-critic scheduler whose policy is
regularized with certified output bounds so that falsified measurements
move its actions as little as possible.

Key Features:
    - Device, comfort and demand-response models with balance accounting
    - Indoor-temperature deception attack and a residual-test detector
    - IBP, CROWN and mixed CROWN-IBP bounds with exact regularizer gradients
    - SAC / SA-SAC trainer on plain numpy networks
    - Mode x scenario experiment matrix with CSV and JSON reports

Example:
    >>> from iesguard import generate_profiles, IesEnv, TrainerConfig, train
    >>> profiles = generate_profiles(days=3, seed=0)
    >>> cfg = TrainerConfig(episodes=20, learning_starts=48, batch_size=32, hidden=[16, 16])
    >>> result = train(lambda: IesEnv(profiles), cfg, seed=0)
    >>> result.curves.columns
    ['episode', 'reward', 'profit', 'c1', 'c2', 'alpha', 'eps', 'beta']

Modules:
    devices: Building, comfort, storage, converter and flexible-load models
    pricing: TOU benchmarks and dynamic price bands
    attack: Deception attack, detector and observation adversaries
    environment: State, dispatch and the episode engine (plus a gymnasium Env)
    nn: Numpy MLPs, tanh-Gaussian policy, Adam and checkpoints
    bounds: Certified output bounds and the robustness regularizer
    sac: Replay buffer, agent, schedule and trainer
    harness: Profiles, run configs, experiment matrix, reports and CLI
"""

from .exceptions import (
    IesGuardError,
    ValidationError,
    ContractViolationError,
    PricingError,
    DimensionMismatchError,
    StaleCacheError,
    EpisodeDoneError,
    EmptyBufferError,
    NonFiniteLossError,
    ProfileError,
    CheckpointError,
    MissingCheckpointError,
    ReportError,
)
from .params import ParamSet
from .devices import (
    BuildingParams,
    ComfortParams,
    StorageParams,
    ConverterParams,
    FlexLoadParams,
    FlexLoadLedger,
    building_heat_demand,
    indoor_temp_from_heat,
    pmv,
    pmv_band,
    storage_step,
    converters,
    clamp_ramp,
    flex_shift,
)
from .pricing import TouSchedule, PricingParams, benchmarks, price_bands, realtime_prices
from .attack import (
    ItdsaSpec,
    DetectorSpec,
    AdversaryBudget,
    Adversary,
    itdsa_temperature,
    residual_check,
    detect,
    perturb_observation,
)
from .environment import (
    SystemParams,
    DayProfile,
    EnvState,
    Action,
    DispatchResult,
    ObservationScaler,
    IesEnv,
    reset,
    step,
    observe,
)
from .nn import MlpParams, forward, backward, soft_update, Checkpoint, save_checkpoint, load_checkpoint
from .bounds import BoxBound, LinearBound, MixSchedule, ibp, crown, crown_ibp, sa_regularizer
from .sac import SacAgent, ReplayBuffer, TrainerConfig, train, evaluate
from .harness import RunConfig, Report, generate_profiles, load_profiles, run_matrix, emit
from .logging import logger

__version__ = "0.3.0"

__all__ = [
    'IesGuardError', 'ValidationError', 'ContractViolationError', 'PricingError', 'DimensionMismatchError',
    'StaleCacheError', 'EpisodeDoneError', 'EmptyBufferError', 'NonFiniteLossError', 'ProfileError',
    'CheckpointError', 'MissingCheckpointError', 'ReportError',
    'ParamSet',
    'BuildingParams', 'ComfortParams', 'StorageParams', 'ConverterParams', 'FlexLoadParams', 'FlexLoadLedger',
    'building_heat_demand', 'indoor_temp_from_heat', 'pmv', 'pmv_band', 'storage_step', 'converters',
    'clamp_ramp', 'flex_shift',
    'TouSchedule', 'PricingParams', 'benchmarks', 'price_bands', 'realtime_prices',
    'ItdsaSpec', 'DetectorSpec', 'AdversaryBudget', 'Adversary', 'itdsa_temperature', 'residual_check',
    'detect', 'perturb_observation',
    'SystemParams', 'DayProfile', 'EnvState', 'Action', 'DispatchResult', 'ObservationScaler', 'IesEnv',
    'reset', 'step', 'observe',
    'MlpParams', 'forward', 'backward', 'soft_update', 'Checkpoint', 'save_checkpoint', 'load_checkpoint',
    'BoxBound', 'LinearBound', 'MixSchedule', 'ibp', 'crown', 'crown_ibp', 'sa_regularizer',
    'SacAgent', 'ReplayBuffer', 'TrainerConfig', 'train', 'evaluate',
    'RunConfig', 'Report', 'generate_profiles', 'load_profiles', 'run_matrix', 'emit',
    'logger',
]
