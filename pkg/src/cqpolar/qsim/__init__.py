"""Density-matrix simulation of the receiver's qubit circuits."""
from .density import (
    CH,
    CNOT,
    PAULI_MODELS,
    DensityMatrix,
    KrausChannel,
    apply_channel,
    apply_unitary,
    pauli_channel,
    pauli_probabilities,
    project,
    transducer_channel,
)
from .circuits import (
    ERROR,
    DecisionTree,
    NoiseConfig,
    TimeBinEncoding,
    compression_circuit,
    decision_tree_decode,
    leaf_distribution_to_messages,
    load_encoding,
    load_tree,
    noisy_pipeline_channel,
    receiver_effects,
    simulate_message,
)

__all__ = [
    "CH",
    "CNOT",
    "PAULI_MODELS",
    "DensityMatrix",
    "KrausChannel",
    "apply_channel",
    "apply_unitary",
    "pauli_channel",
    "pauli_probabilities",
    "project",
    "transducer_channel",
    "ERROR",
    "DecisionTree",
    "NoiseConfig",
    "TimeBinEncoding",
    "compression_circuit",
    "decision_tree_decode",
    "leaf_distribution_to_messages",
    "load_encoding",
    "load_tree",
    "noisy_pipeline_channel",
    "receiver_effects",
    "simulate_message",
]
