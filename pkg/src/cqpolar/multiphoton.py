"""Two-photon receiver extension.

A cavity-coupled spin acts as a switch that reflects a photon when the spin
is coupled and transmits it otherwise, so arrivals can be routed to two
single-photon modules. The first module records the arrival bin of the
first photon, the second module that of the second photon; both use the
single-photon binary time-bin encoding.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

from .hilbert import photonic_basis, residual_multiphoton_probability, two_photon_codeword_state
from .polar import PolarCode, build_codebook
from .qsim.circuits import TimeBinEncoding, load_encoding
from .scdecoder import (
    Povm,
    TransitionMatrix,
    blend_uniform,
    build_sc_povm,
    transition_matrix,
)

__all__ = [
    "SwitchParams",
    "switch_reflectivity",
    "two_photon_encoding",
    "two_photon_povm",
    "two_photon_channel",
    "TWO_PHOTON_LENGTHS",
]

TWO_PHOTON_LENGTHS = (4, 8)


@dataclass(frozen=True)
class SwitchParams:
    """Atom-cavity switch with cooperativity C = g^2 / (kappa gamma)."""

    cooperativity: float

    def __post_init__(self):
        if not self.cooperativity >= 0.0:
            raise ValueError(f"cooperativity must be non-negative, got {self.cooperativity}")


def switch_reflectivity(params: SwitchParams | float) -> tuple[float, float]:
    """Reflection probabilities (coupled, uncoupled) on resonance."""
    if not isinstance(params, SwitchParams):
        params = SwitchParams(float(params))
    c4 = 4.0 * params.cooperativity
    if c4 > 1e150:
        return 1.0, 0.0
    # one rounding, so rational cases such as C=1 come out exact
    return c4 * c4 / ((1.0 + c4) * (1.0 + c4)), 0.0


def two_photon_encoding(n_bins: int) -> TimeBinEncoding:
    """Register strings for vacuum, single photons and distinct-bin pairs.

    Uses 2 * ceil(log2(N+1)) qubits: the first half holds the first photon's
    bin, the second half the second photon's bin (all zeros if absent).
    """
    if n_bins not in TWO_PHOTON_LENGTHS:
        raise ValueError(f"two-photon encoding supports N in {TWO_PHOTON_LENGTHS}, got {n_bins}")
    single = load_encoding(n_bins)
    half = math.ceil(math.log2(n_bins + 1))
    if single.n_qubits != half:
        raise ValueError("single-photon encoding has an unexpected register size")
    blank = "0" * half
    patterns = []
    for pattern in photonic_basis(n_bins, 2):
        if not pattern:
            bits = blank + blank
        elif len(pattern) == 1:
            bits = single[pattern] + blank
        else:
            i, j = pattern
            bits = single[(i,)] + single[(j,)]
        patterns.append((pattern, bits))
    return TimeBinEncoding(n_bins, 2 * half, tuple(patterns))


def two_photon_povm(code: PolarCode, alpha: float, tol: float | None = None) -> Povm:
    """SC POVM on the vacuum + singles + distinct-pairs space."""
    return build_sc_povm(code, alpha, tol, state_fn=two_photon_codeword_state)


def two_photon_channel(
    code: PolarCode,
    alpha: float,
    povm: Povm | None = None,
    multiphoton_policy: str = "uniform",
    tol: float | None = None,
) -> TransitionMatrix:
    """Transition matrix of the two-photon receiver.

    Same-bin doubles and three or more photons form the residual mass, which
    is handled as in the single-photon channel.
    """
    if povm is None:
        povm = two_photon_povm(code, alpha, tol)
    tm = transition_matrix(povm, build_codebook(code), alpha, two_photon_codeword_state)
    if multiphoton_policy == "ignore":
        return tm
    if multiphoton_policy != "uniform":
        raise ValueError(f"unknown multiphoton policy {multiphoton_policy!r}")
    return blend_uniform(tm, residual_multiphoton_probability(code.n_bins, alpha, 2))
