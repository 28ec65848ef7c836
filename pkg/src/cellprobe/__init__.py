"""Response characterization of LSTM cells.

Trains small LSTM networks, isolates single cells as scalar-state
subsystems, probes them with step and sine inputs, and checks how the
resulting metrics line up with cell ablation and network capacity.
"""

from .dynamics import LstmParams, LstmState, Model, lstm_rollout, lstm_step, network_predict, rnn_step
from .isolation import CellSubsystem, ResponseTrace, extract_cell_subsystem, subsystem_rollout
from .signals import Signal, make_sine, make_step
from .metrics import (
    CellCharacterization,
    ProbeConfig,
    SineMetrics,
    StepMetrics,
    characterize_network,
    correlation,
    dominant_frequency,
    periodogram,
    rank_cells,
    sine_metrics,
    step_metrics,
    summarize,
)
from .ablation import AblationRecord, ablate_cell, ablation_sweep, evaluate, impact_metric_correlation
from .training import TrainConfig, bptt_gradients, init_model, train
from .estimators import LSTMClassifier, LSTMRegressor, ResponseCharacterizer

__version__ = "0.1.0"

__all__ = [
    "AblationRecord",
    "CellCharacterization",
    "CellSubsystem",
    "LSTMClassifier",
    "LSTMRegressor",
    "LstmParams",
    "LstmState",
    "Model",
    "ProbeConfig",
    "ResponseCharacterizer",
    "ResponseTrace",
    "Signal",
    "SineMetrics",
    "StepMetrics",
    "TrainConfig",
    "ablate_cell",
    "ablation_sweep",
    "bptt_gradients",
    "characterize_network",
    "correlation",
    "dominant_frequency",
    "evaluate",
    "extract_cell_subsystem",
    "impact_metric_correlation",
    "init_model",
    "lstm_rollout",
    "lstm_step",
    "make_sine",
    "make_step",
    "network_predict",
    "periodogram",
    "rank_cells",
    "rnn_step",
    "sine_metrics",
    "step_metrics",
    "subsystem_rollout",
    "summarize",
    "train",
]
