"""Classical polar encoding and codebooks for N in {2, 4, 8}.

The transform is x = u F^{(x)n} over GF(2) with F = [[1, 0], [1, 1]] and no
bit-reversal, which gives for N=4

    x1 = u1+u2+u3+u4,  x2 = u2+u4,  x3 = u3+u4,  x4 = u4   (mod 2).
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np

from .hilbert import Codeword

__all__ = [
    "PolarCode",
    "Codebook",
    "polar_transform",
    "generator_matrix",
    "build_codebook",
    "default_code",
    "SUPPORTED_LENGTHS",
]

SUPPORTED_LENGTHS = (2, 4, 8)

# 1-based frozen positions used throughout; the N=8 set is the one implied
# by the printed N=8 decoding table (information bits at 4, 6, 7, 8).
DEFAULT_FROZEN = {2: (1,), 4: (1, 2), 8: (1, 2, 3, 5)}


def _bits(u: Sequence[int] | str) -> np.ndarray:
    if isinstance(u, str):
        u = [int(ch) for ch in u]
    arr = np.asarray(u, dtype=np.uint8)
    if arr.ndim != 1 or np.any(arr > 1):
        raise ValueError(f"expected a binary vector, got {u!r}")
    return arr


def generator_matrix(n_bins: int) -> np.ndarray:
    if n_bins < 2 or n_bins & (n_bins - 1):
        raise ValueError(f"block length must be a power of two >= 2, got {n_bins}")
    F = np.array([[1, 0], [1, 1]], dtype=np.uint8)
    G = np.ones((1, 1), dtype=np.uint8)
    while G.shape[0] < n_bins:
        G = np.kron(G, F)
    return G


def polar_transform(u: Sequence[int] | str) -> Codeword:
    """Encode message bits with the recursive butterfly."""
    x = _bits(u).copy()
    n = len(x)
    if n not in SUPPORTED_LENGTHS:
        raise ValueError(f"length must be one of {SUPPORTED_LENGTHS}, got {n}")
    # butterfly on F^{(x)n}: x_left ^= x_right within each block
    half = n // 2
    while half >= 1:
        for start in range(0, n, 2 * half):
            x[start:start + half] ^= x[start + half:start + 2 * half]
        half //= 2
    return Codeword(tuple(int(b) for b in x))


@dataclass(frozen=True)
class PolarCode:
    n_bins: int
    k_info: int
    frozen_positions: frozenset = field(default_factory=frozenset)

    def __post_init__(self):
        object.__setattr__(self, "frozen_positions", frozenset(int(i) for i in self.frozen_positions))
        if self.n_bins not in SUPPORTED_LENGTHS:
            raise ValueError(f"n_bins must be one of {SUPPORTED_LENGTHS}, got {self.n_bins}")
        if not 0 <= self.k_info <= self.n_bins:
            raise ValueError("k_info must lie in [0, n_bins]")
        if len(self.frozen_positions) != self.n_bins - self.k_info:
            raise ValueError(
                f"need {self.n_bins - self.k_info} frozen positions, got {sorted(self.frozen_positions)}"
            )
        if any(not 1 <= i <= self.n_bins for i in self.frozen_positions):
            raise ValueError("frozen positions are 1-based indices in [1, N]")

    @property
    def info_positions(self) -> tuple[int, ...]:
        return tuple(i for i in range(1, self.n_bins + 1) if i not in self.frozen_positions)

    @property
    def rate(self) -> float:
        return self.k_info / self.n_bins

    def messages(self) -> list[tuple[int, ...]]:
        """All 2^K full-length inputs with frozen bits at zero, lexicographic."""
        info = self.info_positions
        out = []
        for vals in itertools.product((0, 1), repeat=self.k_info):
            u = [0] * self.n_bins
            for pos, v in zip(info, vals):
                u[pos - 1] = v
            out.append(tuple(u))
        return out

    def respects_frozen(self, prefix: Iterable[int]) -> bool:
        return all(b == 0 for i, b in enumerate(prefix, start=1) if i in self.frozen_positions)


def default_code(n_bins: int) -> PolarCode:
    """Rate-1/2 code with the frozen set used for the receiver studies."""
    frozen = DEFAULT_FROZEN[n_bins]
    return PolarCode(n_bins, n_bins - len(frozen), frozenset(frozen))


@dataclass(frozen=True)
class Codebook:
    entries: tuple[tuple[tuple[int, ...], Codeword], ...]

    def __len__(self) -> int:
        return len(self.entries)

    @property
    def messages(self) -> list[str]:
        return ["".join(map(str, u)) for u, _ in self.entries]

    @property
    def codewords(self) -> list[Codeword]:
        return [x for _, x in self.entries]

    def is_degenerate(self) -> bool:
        xs = self.codewords
        return len(set(xs)) != len(xs)


def build_codebook(code: PolarCode) -> Codebook:
    return Codebook(tuple((u, polar_transform(u)) for u in code.messages()))
