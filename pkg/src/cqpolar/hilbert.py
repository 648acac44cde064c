"""Truncated photonic Hilbert spaces and BPSK coherent-state codewords.

A codeword of length N is sent as N time bins, each holding the coherent
state |+alpha> (bit 0) or |-alpha> (bit 1). The receiver only handles the
low-photon-number part of the product state, so states here live on a
truncated Fock space spanned by occupation patterns:

* ``max_photons=1``: vacuum plus the N single-photon bins (dimension N+1)
* ``max_photons=2``: additionally every pair of *distinct* bins
  (dimension 1 + N + N(N-1)/2)

Basis order is vacuum, singles by bin index, then pairs in lexicographic
order. Bins are 1-based in the basis labels.
"""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

__all__ = [
    "Codeword",
    "TruncatedPhotonicState",
    "photonic_basis",
    "coherent_truncated",
    "bpsk_codeword_state",
    "two_photon_codeword_state",
    "truncated_norm_squared",
    "residual_multiphoton_probability",
    "complement",
]

Pattern = tuple  # tuple of occupied 1-based bin indices; () is vacuum


def _as_bits(c: Sequence[int] | str) -> tuple[int, ...]:
    if isinstance(c, str):
        bits = tuple(int(ch) for ch in c)
    else:
        bits = tuple(int(b) for b in c)
    if any(b not in (0, 1) for b in bits):
        raise ValueError(f"codeword entries must be 0 or 1, got {c!r}")
    return bits


@dataclass(frozen=True)
class Codeword:
    bits: tuple[int, ...]

    def __post_init__(self):
        object.__setattr__(self, "bits", _as_bits(self.bits))

    @classmethod
    def from_str(cls, s: str) -> "Codeword":
        return cls(_as_bits(s))

    def __len__(self) -> int:
        return len(self.bits)

    def __str__(self) -> str:
        return "".join(map(str, self.bits))


def complement(c: Codeword) -> Codeword:
    return Codeword(tuple(1 - b for b in c.bits))


def photonic_basis(n_bins: int, max_photons: int) -> list[Pattern]:
    """Occupation patterns spanning the truncated space, in canonical order."""
    if n_bins < 1:
        raise ValueError("n_bins must be positive")
    if max_photons not in (1, 2):
        raise ValueError("max_photons must be 1 or 2")
    basis: list[Pattern] = [()]
    basis += [(i,) for i in range(1, n_bins + 1)]
    if max_photons == 2:
        basis += list(itertools.combinations(range(1, n_bins + 1), 2))
    return basis


@dataclass(frozen=True)
class TruncatedPhotonicState:
    """Amplitude vector over a truncated multi-bin Fock basis."""

    amplitudes: np.ndarray
    basis: tuple[Pattern, ...]
    n_bins: int
    max_photons: int

    def __post_init__(self):
        amps = np.asarray(self.amplitudes, dtype=complex)
        amps.setflags(write=False)
        object.__setattr__(self, "amplitudes", amps)
        if len(amps) != len(self.basis):
            raise ValueError("amplitude/basis length mismatch")

    @property
    def dim(self) -> int:
        return len(self.basis)

    def norm_squared(self) -> float:
        return float(np.vdot(self.amplitudes, self.amplitudes).real)

    def density(self) -> np.ndarray:
        return np.outer(self.amplitudes, self.amplitudes.conj())


def coherent_truncated(alpha: float, max_photons: int) -> np.ndarray:
    """Fock amplitudes of |alpha> up to ``max_photons``, not renormalized."""
    if alpha < 0:
        raise ValueError(f"alpha must be non-negative, got {alpha}")
    if max_photons < 1:
        raise ValueError("max_photons must be >= 1")
    j = np.arange(max_photons + 1)
    fact = np.array([math.factorial(int(k)) for k in j], dtype=float)
    amps = math.exp(-0.5 * alpha**2) * alpha**j / np.sqrt(fact)
    return amps.astype(complex)


def _signed_amplitudes(bits: tuple[int, ...], alpha: float, basis: list[Pattern]) -> np.ndarray:
    # amplitude of pattern S is prod_{i in S} (-1)^{c_i} alpha
    amps = np.empty(len(basis), dtype=complex)
    for k, pattern in enumerate(basis):
        sign = (-1) ** sum(bits[i - 1] for i in pattern)
        amps[k] = sign * alpha ** len(pattern)
    return amps


def bpsk_codeword_state(c: Codeword | str, alpha: float) -> TruncatedPhotonicState:
    """Normalized vacuum + single-photon projection of the BPSK product state."""
    if alpha < 0:
        raise ValueError(f"alpha must be non-negative, got {alpha}")
    bits = c.bits if isinstance(c, Codeword) else _as_bits(c)
    n = len(bits)
    basis = photonic_basis(n, 1)
    amps = _signed_amplitudes(bits, alpha, basis)
    amps /= math.sqrt(1.0 + n * alpha**2)
    return TruncatedPhotonicState(amps, tuple(basis), n, 1)


def two_photon_codeword_state(c: Codeword | str, alpha: float) -> TruncatedPhotonicState:
    """Normalized projection onto vacuum, singles and distinct-bin pairs.

    Same-bin double occupations are left out; the receiver cannot map them.
    """
    if alpha < 0:
        raise ValueError(f"alpha must be non-negative, got {alpha}")
    bits = c.bits if isinstance(c, Codeword) else _as_bits(c)
    n = len(bits)
    if n < 2:
        raise ValueError("two-photon states need at least two time bins")
    basis = photonic_basis(n, 2)
    amps = _signed_amplitudes(bits, alpha, basis)
    amps /= math.sqrt(1.0 + n * alpha**2 + math.comb(n, 2) * alpha**4)
    return TruncatedPhotonicState(amps, tuple(basis), n, 2)


def truncated_norm_squared(n_bins: int, alpha: float, max_photons: int) -> float:
    """Squared norm of the unnormalized truncated product state.

    Does not depend on the codeword, since every bin has |alpha|^2 photons
    on average regardless of its phase.
    """
    if alpha < 0:
        raise ValueError(f"alpha must be non-negative, got {alpha}")
    a2 = alpha**2
    kept = 1.0 + n_bins * a2
    if max_photons >= 2:
        kept += math.comb(n_bins, 2) * a2**2
    if max_photons > 2:
        raise ValueError("max_photons must be 1 or 2")
    return math.exp(-n_bins * a2) * kept


def residual_multiphoton_probability(c: Codeword | str | int, alpha: float, max_photons: int = 1) -> float:
    """Probability mass outside the truncated space.

    ``c`` may be a codeword or just the number of bins.
    """
    if isinstance(c, int):
        n = c
    else:
        n = len(c.bits if isinstance(c, Codeword) else _as_bits(c))
    if alpha < 0:
        raise ValueError(f"alpha must be non-negative, got {alpha}")
    if max_photons not in (1, 2):
        raise ValueError("max_photons must be 1 or 2")
    x = n * alpha**2
    if x < 0.5:
        # Poisson tail as a series, free of cancellation for small x
        term, series, k = x * x / 2.0, 0.0, 2
        while term > 1e-18 * max(series, 1e-300):
            series += term
            k += 1
            term *= x / k
        if max_photons == 2:
            # x^2/2 - C(N,2) alpha^4 = N alpha^4 / 2 (same-bin doubles)
            series += n * alpha**4 / 2.0 - x * x / 2.0
        return float(math.exp(-x) * series)
    tail = -math.expm1(-x) - x * math.exp(-x)
    if max_photons == 2:
        tail -= math.exp(-x) * math.comb(n, 2) * alpha**4
    return float(tail)
