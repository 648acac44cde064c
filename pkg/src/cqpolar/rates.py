"""Mutual information, capacity-achieving inputs and photon efficiency.

Entropies are in bits. The channel is a ``TransitionMatrix`` with messages
as rows. PIE (photon information efficiency) is bits per received photon,
I / (N * nbar), with nbar = alpha^2 the mean photon number per time bin.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from .scdecoder import TransitionMatrix

__all__ = [
    "InputDistribution",
    "RatePoint",
    "BlahutArimotoResult",
    "binary_entropy",
    "entropy",
    "mutual_information",
    "blahut_arimoto",
    "optimize_input",
    "canonicalize_degenerate",
    "pie",
    "dolinar_capacity",
    "holevo_capacity",
    "dolinar_pie",
    "holevo_pie",
    "rate_point",
    "optimize_alpha",
]

GOLDEN = (math.sqrt(5.0) - 1.0) / 2.0


@dataclass(frozen=True)
class InputDistribution:
    probabilities: np.ndarray
    messages: tuple = ()

    def __post_init__(self):
        p = np.asarray(self.probabilities, dtype=float)
        if np.any(p < -1e-15) or abs(p.sum() - 1.0) > 1e-10:
            raise ValueError("input distribution must be non-negative and sum to 1")
        object.__setattr__(self, "probabilities", np.clip(p, 0.0, None))
        object.__setattr__(self, "messages", tuple(self.messages))

    @classmethod
    def uniform(cls, n: int, messages: Sequence[str] = ()) -> "InputDistribution":
        return cls(np.full(n, 1.0 / n), tuple(messages))

    def as_dict(self) -> dict[str, float]:
        return dict(zip(self.messages, map(float, self.probabilities)))


@dataclass(frozen=True)
class RatePoint:
    nbar: float
    alpha: float
    pie: float
    mutual_information_bits: float
    optimal_input: InputDistribution
    n_bins: int
    error_config: dict = field(default_factory=dict)


def binary_entropy(x: float) -> float:
    if not 0.0 <= x <= 1.0:
        raise ValueError(f"probability must lie in [0, 1], got {x}")
    if x == 0.0 or x == 1.0:
        return 0.0
    return float(-x * math.log2(x) - (1.0 - x) * math.log2(1.0 - x))


def entropy(p: np.ndarray) -> float:
    p = np.asarray(p, dtype=float)
    nz = p[p > 0]
    return float(-np.sum(nz * np.log2(nz)))


def _matrix(P) -> np.ndarray:
    return P.probabilities if isinstance(P, TransitionMatrix) else np.asarray(P, dtype=float)


def _row_divergences(P: np.ndarray, q: np.ndarray) -> np.ndarray:
    # D(P(.|x) || q) in bits for every row x, with 0 log 0 = 0
    with np.errstate(divide="ignore", invalid="ignore"):
        ratio = np.where(P > 0, P / q[None, :], 1.0)
        terms = np.where(P > 0, P * np.log2(ratio), 0.0)
    return terms.sum(axis=1)


def mutual_information(P, p) -> float:
    """I(U;Y) = H(Y) - H(Y|U) for input distribution ``p``."""
    P = _matrix(P)
    p = p.probabilities if isinstance(p, InputDistribution) else np.asarray(p, dtype=float)
    if P.shape[0] != p.shape[0]:
        raise ValueError("input distribution length does not match channel rows")
    q = p @ P
    return float(max(0.0, p @ _row_divergences(P, q)))


@dataclass
class BlahutArimotoResult:
    capacity: float
    distribution: np.ndarray
    iterations: int
    history: list
    upper_bound: float


def blahut_arimoto(P, tol: float = 1e-10, max_iter: int = 200_000) -> BlahutArimotoResult:
    """Capacity of a discrete memoryless channel by alternating maximization.

    Stops once the lower estimate I(p) and the upper bound max_x D(P(.|x)||q)
    agree within ``tol`` bits, which also bounds the change between
    successive estimates. ``history`` holds I(p) at every iteration; it is
    non-decreasing.

    Nearly uninformative channels (weak signals) make the plain update
    crawl, so each iteration also tries the over-relaxed step
    p * 2^(gamma D) and keeps whichever of the two scores higher. The plain
    step never lowers I(p), so neither does the combination. ``gamma``
    grows while the relaxed step wins and shrinks otherwise.
    """
    P = _matrix(P)
    if P.ndim != 2 or np.any(P < -1e-12) or np.max(np.abs(P.sum(axis=1) - 1.0)) > 1e-9:
        raise ValueError("channel matrix must be row-stochastic")
    P = np.clip(P, 0.0, None)
    m = P.shape[0]
    p = np.full(m, 1.0 / m)
    # D_x = sum_y P log P - sum_y P log q; the first sum is fixed
    with np.errstate(divide="ignore"):
        neg_cond_entropy = np.where(P > 0, P * np.log2(np.where(P > 0, P, 1.0)), 0.0).sum(axis=1)

    def divergences(p):
        q = p @ P
        with np.errstate(divide="ignore"):
            logq = np.where(q > 0, np.log2(np.where(q > 0, q, 1.0)), 0.0)
        return neg_cond_entropy - P @ logq

    def step(p, D, gamma):
        w = p * np.exp2(gamma * (D - D.max()))
        w = w / w.sum()
        Dw = divergences(w)
        return w, Dw, float(w @ Dw)

    history: list[float] = []
    D = divergences(p)
    gamma = 1.0
    for it in range(1, max_iter + 1):
        cap = float(p @ D)
        history.append(cap)
        if D.max() - cap < tol:
            break
        p1, D1, I1 = step(p, D, 1.0)
        if gamma > 1.0:
            pg, Dg, Ig = step(p, D, gamma)
            if Ig > I1:
                p, D = pg, Dg
                gamma *= 2.0
                continue
            gamma = max(1.0, gamma / 4.0)
        else:
            gamma = 2.0
        p, D = p1, D1
    return BlahutArimotoResult(max(history[-1], 0.0), p, it, history, float(D.max()))


def canonicalize_degenerate(P, p: np.ndarray, atol: float = 1e-12) -> np.ndarray:
    """Move each group's mass onto its first member.

    Messages whose channel rows coincide are indistinguishable, so only the
    group total matters; putting it on the lexicographically first message
    makes the optimum unique.
    """
    P = _matrix(P)
    p = np.array(p, dtype=float)
    seen = np.zeros(len(p), dtype=bool)
    for i in range(len(p)):
        if seen[i]:
            continue
        group = [j for j in range(i, len(p)) if not seen[j] and np.allclose(P[j], P[i], rtol=0, atol=atol)]
        total = p[group].sum()
        p[group] = 0.0
        p[i] = total
        seen[group] = True
    return p


def optimize_input(P, tol: float = 1e-10, canonicalize: bool = True) -> tuple[InputDistribution, float]:
    """Capacity-achieving input distribution and the capacity in bits."""
    res = blahut_arimoto(P, tol=tol)
    p = canonicalize_degenerate(P, res.distribution) if canonicalize else res.distribution
    p = p / p.sum()
    messages = P.messages if isinstance(P, TransitionMatrix) else ()
    return InputDistribution(p, messages), mutual_information(P, p)


def pie(info_bits: float, n_bins: int, nbar: float) -> float:
    if nbar <= 0:
        raise ValueError(f"nbar must be positive, got {nbar}")
    return info_bits / (n_bins * nbar)


def _check_nbar(nbar: float) -> None:
    if nbar <= 0:
        raise ValueError(f"nbar must be positive, got {nbar}")


def dolinar_capacity(nbar: float, verbatim: bool = False) -> float:
    """Best symbol-by-symbol BPSK capacity (Helstrom error probability).

    ``verbatim=True`` evaluates the form 1 - h2((1 - sqrt(e^{-4 nbar}))/2),
    which tends to 1 bit as nbar -> 0 and is kept only for comparison.
    """
    _check_nbar(nbar)
    overlap = math.exp(-4.0 * nbar)
    if verbatim:
        return 1.0 - binary_entropy((1.0 - math.sqrt(overlap)) / 2.0)
    p_err = (1.0 - math.sqrt(-math.expm1(-4.0 * nbar))) / 2.0
    return 1.0 - binary_entropy(p_err)


def holevo_capacity(nbar: float) -> float:
    _check_nbar(nbar)
    return binary_entropy(-math.expm1(-2.0 * nbar) / 2.0)


def dolinar_pie(nbar: float, verbatim: bool = False) -> float:
    return dolinar_capacity(nbar, verbatim) / nbar


def holevo_pie(nbar: float) -> float:
    return holevo_capacity(nbar) / nbar


def rate_point(tm: TransitionMatrix, n_bins: int, alpha: float, error_config: dict | None = None,
               tol: float = 1e-10, nbar: float | None = None) -> RatePoint:
    """Capacity point at amplitude ``alpha``; ``nbar`` defaults to alpha^2."""
    dist, info = optimize_input(tm, tol=tol)
    nbar = alpha**2 if nbar is None else nbar
    return RatePoint(nbar, alpha, pie(info, n_bins, nbar), info, dist, n_bins, dict(error_config or {}))


def optimize_alpha(
    channel_fn: Callable[[float], TransitionMatrix],
    n_bins: int,
    alphas: Sequence[float],
    refine: bool = True,
    refine_tol: float = 1e-3,
    error_config: dict | None = None,
    tol: float = 1e-10,
) -> tuple[float, RatePoint]:
    """Maximize PIE over alpha: grid scan, then golden-section in log(alpha).

    The refinement searches the interval between the grid neighbours of the
    best grid point, so a maximizer at an edge of the grid stays there.
    """
    alphas = np.sort(np.asarray(list(alphas), dtype=float))
    if alphas.size == 0:
        raise ValueError("alpha grid is empty")
    if np.any(alphas <= 0):
        raise ValueError("alpha grid must be positive")

    cache: dict[float, RatePoint] = {}

    def evaluate(a: float) -> RatePoint:
        if a not in cache:
            cache[a] = rate_point(channel_fn(a), n_bins, a, error_config, tol)
        return cache[a]

    pies = [evaluate(float(a)).pie for a in alphas]
    best = int(np.argmax(pies))
    if refine and 0 < best < len(alphas) - 1:
        lo, hi = math.log(alphas[best - 1]), math.log(alphas[best + 1])
        x1 = hi - GOLDEN * (hi - lo)
        x2 = lo + GOLDEN * (hi - lo)
        f1, f2 = evaluate(math.exp(x1)).pie, evaluate(math.exp(x2)).pie
        while hi - lo > refine_tol:
            if f1 >= f2:
                hi, x2, f2 = x2, x1, f1
                x1 = hi - GOLDEN * (hi - lo)
                f1 = evaluate(math.exp(x1)).pie
            else:
                lo, x1, f1 = x1, x2, f2
                x2 = lo + GOLDEN * (hi - lo)
                f2 = evaluate(math.exp(x2)).pie
    a_star, point = max(cache.items(), key=lambda kv: kv[1].pie)
    return a_star, point
