"""Quantum successive-cancellation decoder as a POVM on the truncated space.

For the information bit at position i, conditioned on the earlier decisions
u_1..u_{i-1}, the receiver projects onto the non-negative (bit 0) or
negative (bit 1) eigenspace of

    rho_bar(u_1..u_{i-1}, 0) - rho_bar(u_1..u_{i-1}, 1),

where rho_bar(prefix) is the uniform mixture of codeword states over all
completions of the prefix that keep frozen bits at zero. Running these
binary measurements in sequence gives, for each message y,

    Lambda_y = P_1 P_2 ... P_m ... P_2 P_1

with P_j the projector selected by the j-th information bit of y.
"""
from __future__ import annotations

import json
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

from .hilbert import (
    TruncatedPhotonicState,
    bpsk_codeword_state,
    residual_multiphoton_probability,
)
from .polar import Codebook, PolarCode, build_codebook, polar_transform

__all__ = [
    "TransitionMatrix",
    "Povm",
    "averaged_density",
    "eigenspace_projectors",
    "sc_projectors",
    "build_sc_povm",
    "transition_matrix",
    "effective_channel",
    "povm_to_json",
    "transition_to_json",
    "blend_uniform",
    "ZERO_ALPHA_LIMIT",
]

StateFn = Callable[[object, float], TruncatedPhotonicState]

HERMITIAN_TOL = 1e-12
# at alpha = 0 every difference operator vanishes; projectors are then taken
# as the alpha -> 0+ limit, evaluated at this amplitude
ZERO_ALPHA_LIMIT = 1e-4


def _label(bits: Sequence[int]) -> str:
    return "".join(str(int(b)) for b in bits)


def _check_hermitian(m: np.ndarray, tol: float = HERMITIAN_TOL) -> None:
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        raise ValueError(f"expected a square matrix, got shape {m.shape}")
    scale = max(1.0, float(np.max(np.abs(m)))) if m.size else 1.0
    if np.max(np.abs(m - m.conj().T), initial=0.0) > tol * scale:
        raise ValueError("operator is not Hermitian within tolerance")


@dataclass(frozen=True)
class Povm:
    """Ordered map from outcome label to positive operator."""

    elements: dict

    @property
    def labels(self) -> list[str]:
        return list(self.elements)

    @property
    def dim(self) -> int:
        return next(iter(self.elements.values())).shape[0]

    def __getitem__(self, label: str) -> np.ndarray:
        return self.elements[label]

    def total(self) -> np.ndarray:
        return sum(self.elements.values())

    def completeness_error(self) -> float:
        return float(np.max(np.abs(self.total() - np.eye(self.dim))))

    def min_eigenvalue(self) -> float:
        return min(float(np.linalg.eigvalsh(E).min()) for E in self.elements.values())


@dataclass(frozen=True)
class TransitionMatrix:
    """Row-stochastic P(y|u): rows are messages, columns are outcomes."""

    probabilities: np.ndarray
    messages: tuple
    outcomes: tuple

    def __post_init__(self):
        P = np.asarray(self.probabilities, dtype=float)
        object.__setattr__(self, "probabilities", P)
        object.__setattr__(self, "messages", tuple(self.messages))
        object.__setattr__(self, "outcomes", tuple(self.outcomes))
        if P.shape != (len(self.messages), len(self.outcomes)):
            raise ValueError("probability matrix shape does not match labels")

    def row(self, message: str) -> np.ndarray:
        return self.probabilities[self.messages.index(message)]

    def column(self, outcome: str) -> np.ndarray:
        return self.probabilities[:, self.outcomes.index(outcome)]

    def restrict_outcomes(self, outcomes: Sequence[str]) -> "TransitionMatrix":
        idx = [self.outcomes.index(o) for o in outcomes]
        return TransitionMatrix(self.probabilities[:, idx], self.messages, tuple(outcomes))

    def check(self, tol: float = 1e-9) -> None:
        P = self.probabilities
        if np.any(P < -1e-12) or np.any(P > 1 + 1e-12):
            raise ValueError("transition probabilities outside [0, 1]")
        if np.max(np.abs(P.sum(axis=1) - 1.0)) > tol:
            raise ValueError("transition rows do not sum to one")


def _codeword_state(state_fn: StateFn, u: Sequence[int], alpha: float) -> np.ndarray:
    return state_fn(polar_transform(u), alpha).amplitudes


def averaged_density(
    code: PolarCode,
    prefix: Sequence[int] | str,
    alpha: float,
    state_fn: StateFn = bpsk_codeword_state,
) -> np.ndarray:
    """Uniform mixture of codeword states over the admissible completions of ``prefix``."""
    if isinstance(prefix, str):
        prefix = [int(ch) for ch in prefix]
    prefix = list(prefix)
    n = code.n_bins
    if len(prefix) > n:
        raise ValueError("prefix longer than the block")
    if not code.respects_frozen(prefix):
        raise ValueError(f"prefix {_label(prefix)} sets a frozen bit")
    completions = [m for m in code.messages() if list(m[: len(prefix)]) == prefix]
    rho = None
    for u in completions:
        psi = _codeword_state(state_fn, u, alpha)
        term = np.outer(psi, psi.conj())
        rho = term if rho is None else rho + term
    return rho / len(completions)


def eigenspace_projectors(delta: np.ndarray, tol: float | None = None) -> tuple[np.ndarray, np.ndarray]:
    """Split the space by the sign of ``delta``'s spectrum.

    Eigenvalues >= -tol (including the kernel) go to the first projector.
    The default tolerance is 1e-10 times the spectral norm.
    """
    delta = np.asarray(delta)
    _check_hermitian(delta)
    herm = 0.5 * (delta + delta.conj().T)
    if np.iscomplexobj(herm) and np.max(np.abs(herm.imag), initial=0.0) == 0.0:
        herm = herm.real
    evals, evecs = np.linalg.eigh(herm)
    if tol is None:
        tol = 1e-10 * max(float(np.max(np.abs(evals), initial=0.0)), np.finfo(float).tiny)
    neg = evecs[:, evals < -tol]
    pi_one = neg @ neg.conj().T
    pi_zero = np.eye(delta.shape[0], dtype=pi_one.dtype) - pi_one
    return pi_zero, pi_one


def sc_projectors(
    code: PolarCode,
    alpha: float,
    tol: float | None = None,
    state_fn: StateFn = bpsk_codeword_state,
) -> dict[str, np.ndarray]:
    """Projectors at every information-bit decision, keyed by the full prefix.

    Frozen positions are filled with zeros, so for N=4 the keys are
    ``000``, ``001``, ``0000``, ``0001``, ``0010``, ``0011``.
    At ``alpha == 0`` the limit from positive alpha is returned.
    """
    if alpha < 0:
        raise ValueError(f"alpha must be non-negative, got {alpha}")
    if alpha == 0:
        alpha = ZERO_ALPHA_LIMIT
    projectors: dict[str, np.ndarray] = {}
    info = code.info_positions

    def recurse(prefix: list[int]):
        # advance through frozen bits
        while len(prefix) < code.n_bins and (len(prefix) + 1) in code.frozen_positions:
            prefix = prefix + [0]
        if len(prefix) == code.n_bins:
            return
        rho0 = averaged_density(code, prefix + [0], alpha, state_fn)
        rho1 = averaged_density(code, prefix + [1], alpha, state_fn)
        p0, p1 = eigenspace_projectors(rho0 - rho1, tol)
        projectors[_label(prefix + [0])] = p0
        projectors[_label(prefix + [1])] = p1
        recurse(prefix + [0])
        recurse(prefix + [1])

    if info:
        recurse([])
    return projectors


def build_sc_povm(
    code: PolarCode,
    alpha: float,
    tol: float | None = None,
    state_fn: StateFn = bpsk_codeword_state,
) -> Povm:
    projectors = sc_projectors(code, alpha, tol, state_fn)
    info = code.info_positions
    elements = {}
    for u in code.messages():
        path = [projectors[_label(u[:i])] for i in info]
        M = path[-1]
        for P in reversed(path[:-1]):
            M = P @ M @ P
        elements[_label(u)] = M
    return Povm(elements)


def transition_matrix(
    povm: Povm,
    codebook: Codebook,
    alpha: float,
    state_fn: StateFn = bpsk_codeword_state,
) -> TransitionMatrix:
    """P(y|u) = <psi_x(u)| Lambda_y |psi_x(u)> on the truncated space."""
    rows = []
    for u, x in codebook.entries:
        psi = state_fn(x, alpha).amplitudes
        if psi.shape[0] != povm.dim:
            raise ValueError(f"state dimension {psi.shape[0]} does not match POVM dimension {povm.dim}")
        rows.append([float(np.vdot(psi, E @ psi).real) for E in povm.elements.values()])
    P = np.clip(np.array(rows), 0.0, None)
    return TransitionMatrix(P, tuple(codebook.messages), tuple(povm.labels))


def blend_uniform(tm: TransitionMatrix, eps: float, outcomes: Sequence[str] | None = None) -> TransitionMatrix:
    """(1-eps) * rows + eps * uniform over ``outcomes`` (default: all)."""
    if outcomes is None:
        outcomes = tm.outcomes
    uniform = np.array([1.0 / len(outcomes) if o in outcomes else 0.0 for o in tm.outcomes])
    P = (1.0 - eps) * tm.probabilities + eps * uniform[None, :]
    return TransitionMatrix(P, tm.messages, tm.outcomes)


def effective_channel(
    code: PolarCode,
    alpha: float,
    povm: Povm | None = None,
    multiphoton_policy: str = "uniform",
    max_photons: int = 1,
    state_fn: StateFn = bpsk_codeword_state,
    tol: float | None = None,
) -> TransitionMatrix:
    """Channel used for rates: truncated POVM rows plus untruncated mass.

    With ``multiphoton_policy="uniform"`` the probability of photon-number
    patterns the receiver cannot map is spread evenly over the messages, i.e.
    the receiver guesses. ``"ignore"`` returns the truncated rows unchanged.
    """
    if povm is None:
        povm = build_sc_povm(code, alpha, tol, state_fn)
    tm = transition_matrix(povm, build_codebook(code), alpha, state_fn)
    if multiphoton_policy == "ignore":
        return tm
    if multiphoton_policy != "uniform":
        raise ValueError(f"unknown multiphoton policy {multiphoton_policy!r}")
    eps = residual_multiphoton_probability(code.n_bins, alpha, max_photons)
    return blend_uniform(tm, eps)


def povm_to_json(povm: Povm, projectors: dict | None = None, **meta) -> str:
    def mat(m):
        m = np.asarray(m)
        if np.iscomplexobj(m) and np.max(np.abs(m.imag), initial=0.0) > 0:
            return {"real": m.real.tolist(), "imag": m.imag.tolist()}
        return np.real(m).tolist()

    doc = dict(meta)
    doc["dim"] = povm.dim
    doc["elements"] = {k: mat(v) for k, v in povm.elements.items()}
    if projectors is not None:
        doc["projectors"] = {k: mat(v) for k, v in projectors.items()}
    return json.dumps(doc, indent=2)


def transition_to_json(tm: TransitionMatrix, **meta) -> str:
    doc = dict(meta)
    doc.update(
        messages=list(tm.messages),
        outcomes=list(tm.outcomes),
        probabilities=tm.probabilities.tolist(),
    )
    return json.dumps(doc, indent=2)
