"""Dense density matrices over small composite systems, with Kraus channels.

Subsystems are ordered as tensor factors, the first one most significant.
Qubits have local dimension 2; the photonic "which-bin" register used by
the compression stage is a single qudit of dimension N+1.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass
from functools import reduce
from typing import Sequence

import numpy as np

__all__ = [
    "PAULIS",
    "H",
    "X",
    "Z",
    "CNOT",
    "CH",
    "DensityMatrix",
    "KrausChannel",
    "apply_unitary",
    "apply_channel",
    "project",
    "pauli_channel",
    "pauli_probabilities",
    "transducer_channel",
    "PAULI_MODELS",
]

I2 = np.eye(2, dtype=complex)
X = np.array([[0, 1], [1, 0]], dtype=complex)
Y = np.array([[0, -1j], [1j, 0]], dtype=complex)
Z = np.array([[1, 0], [0, -1]], dtype=complex)
H = np.array([[1, 1], [1, -1]], dtype=complex) / np.sqrt(2)
PAULIS = {"I": I2, "X": X, "Y": Y, "Z": Z}


def _controlled(u: np.ndarray) -> np.ndarray:
    out = np.eye(4, dtype=complex)
    out[2:, 2:] = u
    return out


CNOT = _controlled(X)
CH = _controlled(H)

PAULI_MODELS = ("independent", "uniform", "paired")


@dataclass(frozen=True)
class DensityMatrix:
    """Operator on a product of subsystems with local dimensions ``dims``.

    After a measurement projection the trace drops to the branch
    probability; ``trace`` reports it.
    """

    matrix: np.ndarray
    dims: tuple = ()

    def __post_init__(self):
        m = np.asarray(self.matrix, dtype=complex)
        dims = tuple(self.dims) if self.dims else (2,) * int(round(np.log2(m.shape[0])))
        if m.shape != (int(np.prod(dims)),) * 2:
            raise ValueError(f"matrix shape {m.shape} does not match dims {dims}")
        object.__setattr__(self, "matrix", m)
        object.__setattr__(self, "dims", dims)

    @classmethod
    def from_state(cls, psi, dims: Sequence[int] = ()) -> "DensityMatrix":
        psi = np.asarray(psi, dtype=complex)
        return cls(np.outer(psi, psi.conj()), tuple(dims))

    @classmethod
    def basis(cls, bits: str) -> "DensityMatrix":
        psi = np.zeros(2 ** len(bits), dtype=complex)
        psi[int(bits, 2)] = 1.0
        return cls.from_state(psi)

    @property
    def qubit_count(self) -> int:
        if any(d != 2 for d in self.dims):
            raise ValueError("not a pure qubit register")
        return len(self.dims)

    @property
    def dim(self) -> int:
        return self.matrix.shape[0]

    def trace(self) -> float:
        return float(np.trace(self.matrix).real)

    def normalized(self) -> "DensityMatrix":
        return DensityMatrix(self.matrix / np.trace(self.matrix), self.dims)

    def hermiticity_error(self) -> float:
        return float(np.max(np.abs(self.matrix - self.matrix.conj().T)))

    def min_eigenvalue(self) -> float:
        return float(np.linalg.eigvalsh(0.5 * (self.matrix + self.matrix.conj().T)).min())

    def check(self, trace: float | None = 1.0, atol: float = 1e-9) -> None:
        """Raise if not Hermitian, not PSD, or (optionally) not of the given trace."""
        if self.hermiticity_error() > 1e-12 * max(1.0, np.abs(self.matrix).max()):
            raise ValueError("density matrix is not Hermitian")
        if self.min_eigenvalue() < -atol:
            raise ValueError("density matrix is not positive semidefinite")
        if trace is not None and abs(self.trace() - trace) > 1e-10:
            raise ValueError(f"trace {self.trace()} differs from {trace}")

    def expand(self, dim: int = 2, state: int = 0) -> "DensityMatrix":
        """Append a fresh subsystem prepared in basis state ``state``."""
        ket = np.zeros((dim, dim), dtype=complex)
        ket[state, state] = 1.0
        return DensityMatrix(np.kron(self.matrix, ket), self.dims + (dim,))

    def partial_trace(self, remove: Sequence[int]) -> "DensityMatrix":
        remove = sorted(set(remove))
        n = len(self.dims)
        keep = [k for k in range(n) if k not in remove]
        t = self.matrix.reshape(self.dims + self.dims)
        letters = list("abcdefghijklmnopqrstuvwxyz")
        rows = letters[:n]
        cols = letters[n:2 * n]
        for k in remove:
            cols[k] = rows[k]
        out = "".join(rows[k] for k in keep) + "".join(cols[k] for k in keep)
        t = np.einsum("".join(rows) + "".join(cols) + "->" + out, t)
        kdims = tuple(self.dims[k] for k in keep)
        d = int(np.prod(kdims)) if kdims else 1
        return DensityMatrix(t.reshape(d, d), kdims)

    def probabilities(self) -> np.ndarray:
        return np.real(np.diag(self.matrix)).copy()


def _superop(ops: Sequence[np.ndarray]) -> np.ndarray:
    return sum(np.kron(A, A.conj()) for A in ops)


def _check_targets(dims: tuple, targets: Sequence[int]) -> int:
    n = len(dims)
    if len(set(targets)) != len(targets) or any(not 0 <= t < n for t in targets):
        raise IndexError(f"target subsystems {list(targets)} out of range for {n} subsystems")
    return int(np.prod([dims[t] for t in targets]))


def _apply_superop(rho: DensityMatrix, S: np.ndarray, targets: Sequence[int]) -> DensityMatrix:
    dims = rho.dims
    n = len(dims)
    targets = list(targets)
    local = _check_targets(dims, targets)
    if S.shape != (local * local, local * local):
        raise ValueError("operator size does not match target subsystems")
    axes = targets + [n + t for t in targets]
    front = list(range(len(axes)))
    t = np.moveaxis(rho.matrix.reshape(dims + dims), axes, front)
    shape = t.shape
    t = (S @ t.reshape(local * local, -1)).reshape(shape)
    t = np.moveaxis(t, front, axes)
    return DensityMatrix(t.reshape(rho.matrix.shape), dims)


def _apply_two_sided(rho: DensityMatrix, U: np.ndarray, targets: Sequence[int]) -> DensityMatrix:
    # U rho U^dagger as two local products, cheaper than the superoperator
    dims = rho.dims
    n = len(dims)
    targets = list(targets)
    local = _check_targets(dims, targets)
    if U.shape != (local, local):
        raise ValueError("operator size does not match target subsystems")
    t = rho.matrix.reshape(dims + dims)
    for axes, op in ((targets, U), ([n + k for k in targets], U.conj())):
        front = list(range(len(axes)))
        t = np.moveaxis(t, axes, front)
        shape = t.shape
        t = (op @ t.reshape(local, -1)).reshape(shape)
        t = np.moveaxis(t, front, axes)
    return DensityMatrix(t.reshape(rho.matrix.shape), dims)


@dataclass(frozen=True)
class KrausChannel:
    """Completely positive map rho -> sum_j A_j rho A_j^dagger."""

    operators: tuple
    arity: int = 1
    name: str = ""

    def __post_init__(self):
        ops = tuple(np.asarray(A, dtype=complex) for A in self.operators)
        object.__setattr__(self, "operators", ops)
        if not ops:
            raise ValueError("a channel needs at least one Kraus operator")

    def tp_error(self) -> float:
        d = self.operators[0].shape[0]
        total = sum(A.conj().T @ A for A in self.operators)
        return float(np.max(np.abs(total - np.eye(d))))

    def is_trace_preserving(self, atol: float = 1e-10) -> bool:
        return self.tp_error() <= atol

    @property
    def superoperator(self) -> np.ndarray:
        return _superop(self.operators)


def _is_unitary(U: np.ndarray, atol: float = 1e-10) -> bool:
    return U.shape[0] == U.shape[1] and np.allclose(U.conj().T @ U, np.eye(U.shape[0]), atol=atol)


def apply_unitary(rho: DensityMatrix, U: np.ndarray, targets: Sequence[int]) -> DensityMatrix:
    U = np.asarray(U, dtype=complex)
    if not _is_unitary(U):
        raise ValueError("gate is not unitary")
    return _apply_two_sided(rho, U, targets)


def apply_channel(rho: DensityMatrix, channel: KrausChannel, targets: Sequence[int]) -> DensityMatrix:
    if not channel.is_trace_preserving():
        raise ValueError(f"channel {channel.name or ''} is not trace preserving")
    return _apply_superop(rho, channel.superoperator, targets)


def project(rho: DensityMatrix, target: int, outcome: int) -> DensityMatrix:
    """Unnormalized post-measurement operator for a Z-basis outcome."""
    dims = rho.dims
    n = len(dims)
    _check_targets(dims, [target])
    t = rho.matrix.reshape(dims + dims).copy()
    for axis in (target, n + target):
        mask = [slice(None)] * (2 * n)
        idx = np.arange(dims[target]) != outcome
        mask[axis] = idx
        t[tuple(mask)] = 0.0
    return DensityMatrix(t.reshape(rho.matrix.shape), dims)


def pauli_probabilities(model: str, p: float, arity: int) -> dict[str, float]:
    """Probability of each Pauli string (e.g. ``"IX"``) under a noise model.

    Single qubit: depolarizing, X, Y, Z each with p/3. Two qubits:

    * independent: product of two single-qubit channels
    * paired: identity w.p. 1-p, each of the 9 strings with no identity
      factor w.p. p/9
    * uniform: identity w.p. 1-p, each of the 15 non-identity strings w.p. p/15
    """
    if not 0.0 <= p < 1.0:
        raise ValueError(f"error probability must lie in [0, 1), got {p}")
    if model not in PAULI_MODELS:
        raise ValueError(f"unknown Pauli noise model {model!r}; choose from {PAULI_MODELS}")
    single = {"I": 1.0 - p, "X": p / 3, "Y": p / 3, "Z": p / 3}
    if arity == 1:
        return single
    if arity != 2:
        raise ValueError("arity must be 1 or 2")
    strings = ["".join(s) for s in itertools.product("IXYZ", repeat=2)]
    if model == "independent":
        return {s: single[s[0]] * single[s[1]] for s in strings}
    if model == "paired":
        return {s: (1.0 - p if s == "II" else (p / 9 if "I" not in s else 0.0)) for s in strings}
    return {s: (1.0 - p if s == "II" else p / 15) for s in strings}


def pauli_channel(model: str, p: float, arity: int = 1) -> KrausChannel:
    probs = pauli_probabilities(model, p, arity)
    ops = []
    for s, prob in probs.items():
        if prob > 0:
            P = reduce(np.kron, [PAULIS[ch] for ch in s])
            ops.append(np.sqrt(prob) * P)
    return KrausChannel(tuple(ops), arity, f"{model}-pauli(p={p})")


def transducer_channel(rho: np.ndarray | DensityMatrix, p: float) -> np.ndarray:
    """(1 - p) rho + p Tr(rho) I / d on the truncated photonic space.

    The trace factor keeps the map linear on arbitrary operators; for a
    density matrix it is 1.
    """
    if not 0.0 <= p <= 1.0:
        raise ValueError(f"depolarizing probability must lie in [0, 1], got {p}")
    m = rho.matrix if isinstance(rho, DensityMatrix) else np.asarray(rho, dtype=complex)
    d = m.shape[0]
    return (1.0 - p) * m + p * np.trace(m) * np.eye(d) / d
