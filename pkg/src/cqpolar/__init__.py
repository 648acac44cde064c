"""Quantum successive-cancellation receiver for short classical-quantum polar codes."""
from .hilbert import (
    Codeword,
    TruncatedPhotonicState,
    bpsk_codeword_state,
    residual_multiphoton_probability,
    two_photon_codeword_state,
)
from .polar import Codebook, PolarCode, build_codebook, default_code, polar_transform
from .rates import (
    InputDistribution,
    RatePoint,
    blahut_arimoto,
    dolinar_pie,
    holevo_pie,
    mutual_information,
    optimize_alpha,
    optimize_input,
    pie,
    rate_point,
)
from .scdecoder import Povm, TransitionMatrix, build_sc_povm, effective_channel, transition_matrix

__version__ = "0.1.0"
