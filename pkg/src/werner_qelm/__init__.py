"""Quantum extreme learning machine for estimating the Werner-state parameter."""

from .experiment import (
    ConfigError,
    ExperimentConfig,
    derive_substream,
    generate_dataset,
    run_generalization,
    run_realization,
    run_sweep,
)
from .readout import CalibrationPoint, dress_predictions, fit_readout, mean_squared_error, predict
from .reservoir import (
    CorrelationOrder,
    FeatureSpec,
    ReservoirSpec,
    ShotPlan,
    build_hamiltonian,
    estimate_features_from_shots,
    evolve,
    measure_features_exact,
    sample_bitstrings,
)
from .states import apply_input_noise, compose_initial, make_werner, random_density

__version__ = "0.1.0"
