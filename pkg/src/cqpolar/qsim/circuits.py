"""Receiver circuits: photon-to-register compression and decision-tree decoding.

Compression writes the arrival bin of a single photon into a register of
ceil(log2(N+1)) qubits. For every time bin a fresh control qubit takes the
bin's photon amplitude, CNOTs copy it onto the register qubits set in that
bin's code string, and the control is read out in the X basis and
discarded. A "-" outcome leaves a sign on the branch where the photon sat
in this bin; it is undone by flipping the phase of exactly that register
string.

The photonic input is kept as one qudit over {vacuum, bin 1, ..., bin N}.
Loading bin i swaps |bin i>|0>_c with |vac>|1>_c, so at most one control
qubit is alive at any time and the largest simulated space is
(N+1) * 2 * 2^q.

Decoding walks a decision tree of gates and Z measurements, branching on
outcomes. Branch operators are carried unnormalized, so a leaf's trace is
its probability.
"""
from __future__ import annotations

import json
from dataclasses import dataclass, field
from functools import lru_cache
from importlib import resources
from typing import Mapping, Sequence

import numpy as np

from ..hilbert import bpsk_codeword_state, photonic_basis, residual_multiphoton_probability
from ..polar import PolarCode, build_codebook, default_code
from ..scdecoder import TransitionMatrix
from .density import (
    CH,
    CNOT,
    PAULI_MODELS,
    DensityMatrix,
    H,
    KrausChannel,
    X,
    Z,
    apply_channel,
    apply_unitary,
    pauli_channel,
    project,
    transducer_channel,
)

__all__ = [
    "GATES",
    "NoiseConfig",
    "TimeBinEncoding",
    "Gate",
    "TreeNode",
    "DecisionTree",
    "load_encoding",
    "load_tree",
    "compression_circuit",
    "decision_tree_decode",
    "leaf_distribution_to_messages",
    "receiver_effects",
    "simulate_message",
    "noisy_pipeline_channel",
    "ERROR",
]

GATES = {"H": H, "X": X, "Z": Z, "CH": CH, "CNOT": CNOT}
ERROR = "error"
DECOUPLING_MODES = ("correct", "postselect")


@dataclass(frozen=True)
class NoiseConfig:
    """Error parameters for one receiver simulation.

    ``gate_p`` is the Pauli error probability after every gate; two-qubit
    gates get the ``model`` two-qubit channel, single-qubit gates a
    single-qubit depolarizing channel. ``transducer_p`` depolarizes the
    photonic input before compression.

    ``decoupling`` picks what happens after the control qubit is measured:
    ``"correct"`` keeps both outcomes and undoes the phase on outcome 1;
    ``"postselect"`` keeps outcome 0 only, rescaled by 2. The control is
    diagonal before its Hadamard under Pauli noise, so outcome 0 has
    probability exactly 1/2 for every input and the rescaling is linear.
    Under post-selection a flipped control is heralded and discarded.
    """

    transducer_p: float = 0.0
    gate_p: float = 0.0
    model: str = "independent"
    compression: bool = True
    decoding: bool = True
    decoupling: str = "correct"

    def __post_init__(self):
        if self.model not in PAULI_MODELS:
            raise ValueError(f"unknown noise model {self.model!r}; choose from {PAULI_MODELS}")
        if self.decoupling not in DECOUPLING_MODES:
            raise ValueError(f"unknown decoupling {self.decoupling!r}; choose from {DECOUPLING_MODES}")
        if not 0.0 <= self.transducer_p <= 1.0:
            raise ValueError("transducer_p must lie in [0, 1]")
        if not 0.0 <= self.gate_p < 1.0:
            raise ValueError("gate_p must lie in [0, 1)")

    @property
    def is_noiseless(self) -> bool:
        return self.transducer_p == 0.0 and self.gate_p == 0.0

    def channel(self, arity: int) -> KrausChannel | None:
        if self.gate_p == 0.0:
            return None
        return _cached_pauli(self.model, self.gate_p, arity)

    def as_dict(self) -> dict:
        return {
            "transducer_p": self.transducer_p,
            "gate_p": self.gate_p,
            "model": self.model,
            "compression": self.compression,
            "decoding": self.decoding,
            "decoupling": self.decoupling,
        }


@lru_cache(maxsize=32)
def _cached_pauli(model: str, p: float, arity: int) -> KrausChannel:
    return pauli_channel(model, p, arity)


NOISELESS = NoiseConfig()


# ---------------------------------------------------------------- encodings


@dataclass(frozen=True)
class TimeBinEncoding:
    """Map from photonic occupation pattern to register basis string.

    Patterns are tuples of 1-based bins, ``()`` for vacuum. Strings list
    qubit 0 first; '1' is spin down.
    """

    n_bins: int
    n_qubits: int
    patterns: tuple

    def __post_init__(self):
        pats = tuple((tuple(k), str(v)) for k, v in self.patterns)
        object.__setattr__(self, "patterns", pats)
        strings = [v for _, v in pats]
        if len(set(strings)) != len(strings):
            raise ValueError("encoding collision: two photonic patterns share a register string")
        if any(len(v) != self.n_qubits or set(v) - {"0", "1"} for v in strings):
            raise ValueError("register strings must be bit strings of length n_qubits")
        if dict(pats).get(()) not in (None, "0" * self.n_qubits):
            raise ValueError("vacuum must map to the all-zero register string")

    @property
    def mapping(self) -> dict:
        return dict(self.patterns)

    def __getitem__(self, pattern) -> str:
        return self.mapping[tuple(pattern)]

    def isometry(self, basis: Sequence[tuple]) -> np.ndarray:
        """Matrix taking the photonic basis to register basis states."""
        V = np.zeros((2**self.n_qubits, len(basis)))
        for k, pattern in enumerate(basis):
            V[int(self[pattern], 2), k] = 1.0
        return V

    def to_dict(self) -> dict:
        def key(p):
            return "vac" if not p else ",".join(map(str, p))

        return {
            "n_bins": self.n_bins,
            "n_qubits": self.n_qubits,
            "patterns": {key(p): v for p, v in self.patterns},
        }

    @classmethod
    def from_dict(cls, doc: Mapping) -> "TimeBinEncoding":
        pats = []
        for k, v in doc["patterns"].items():
            pattern = () if k == "vac" else tuple(int(s) for s in k.split(","))
            pats.append((pattern, v))
        return cls(int(doc["n_bins"]), int(doc["n_qubits"]), tuple(pats))


def _read_data(name: str) -> dict:
    return json.loads(resources.files("cqpolar.qsim").joinpath("data", name).read_text())


@lru_cache(maxsize=None)
def load_encoding(n_bins: int) -> TimeBinEncoding:
    try:
        return TimeBinEncoding.from_dict(_read_data(f"encoding_n{n_bins}.json"))
    except FileNotFoundError:
        raise ValueError(f"no time-bin encoding shipped for N={n_bins}") from None


# ---------------------------------------------------------------- decision trees


@dataclass(frozen=True)
class Gate:
    name: str
    qubits: tuple

    def __post_init__(self):
        if self.name not in GATES:
            raise ValueError(f"unknown gate {self.name!r}")
        object.__setattr__(self, "qubits", tuple(int(q) for q in self.qubits))
        arity = 2 if GATES[self.name].shape[0] == 4 else 1
        if len(self.qubits) != arity:
            raise ValueError(f"{self.name} acts on {arity} qubit(s), got {self.qubits}")

    @property
    def matrix(self) -> np.ndarray:
        return GATES[self.name]


@dataclass(frozen=True)
class TreeNode:
    ops: tuple = ()
    measure: int | None = None
    branches: tuple = ()  # ((outcome, TreeNode), ...)
    leaf: tuple | str | None = None

    @property
    def is_leaf(self) -> bool:
        return self.leaf is not None

    def child(self, outcome: int) -> "TreeNode":
        return dict(self.branches)[outcome]

    @classmethod
    def from_dict(cls, doc: Mapping) -> "TreeNode":
        ops = tuple(Gate(op["gate"], tuple(op["qubits"])) for op in doc.get("ops", ()))
        if "leaf" in doc:
            leaf = doc["leaf"]
            leaf = ERROR if leaf == ERROR else tuple(leaf if isinstance(leaf, list) else [leaf])
            if ops:
                raise ValueError("leaves cannot carry gates")
            return cls(leaf=leaf)
        if "measure" not in doc:
            raise ValueError("a tree node needs either 'measure' or 'leaf'")
        branches = tuple(sorted((int(k), cls.from_dict(v)) for k, v in doc["branches"].items()))
        if [k for k, _ in branches] != [0, 1]:
            raise ValueError("measurement nodes need branches '0' and '1'")
        return cls(ops, int(doc["measure"]), branches)

    def to_dict(self) -> dict:
        if self.is_leaf:
            return {"leaf": self.leaf if self.leaf == ERROR else list(self.leaf)}
        doc: dict = {}
        if self.ops:
            doc["ops"] = [{"gate": g.name, "qubits": list(g.qubits)} for g in self.ops]
        doc["measure"] = self.measure
        doc["branches"] = {str(k): v.to_dict() for k, v in self.branches}
        return doc


def _leaf_key(leaf) -> str:
    return ERROR if leaf == ERROR else "|".join(leaf)


@dataclass(frozen=True)
class DecisionTree:
    n_bins: int
    n_qubits: int
    root: TreeNode

    def __post_init__(self):
        self._validate(self.root, frozenset())

    def _validate(self, node: TreeNode, measured: frozenset):
        if node.is_leaf:
            return
        for g in node.ops:
            if any(not 0 <= q < self.n_qubits for q in g.qubits):
                raise ValueError(f"gate {g} acts outside the {self.n_qubits}-qubit register")
            if measured & set(g.qubits):
                raise ValueError(f"gate {g} acts on an already measured qubit")
        if not 0 <= node.measure < self.n_qubits:
            raise ValueError(f"measured qubit {node.measure} out of range")
        if node.measure in measured:
            raise ValueError(f"qubit {node.measure} measured twice on one path")
        for _, child in node.branches:
            self._validate(child, measured | {node.measure})

    def leaves(self) -> list[str]:
        out: list[str] = []

        def walk(node):
            if node.is_leaf:
                out.append(_leaf_key(node.leaf))
            else:
                for _, child in node.branches:
                    walk(child)

        walk(self.root)
        return out

    @property
    def has_error_leaf(self) -> bool:
        return ERROR in self.leaves()

    def decided_messages(self) -> list[str]:
        return [m for key in self.leaves() if key != ERROR for m in key.split("|")]

    def to_dict(self) -> dict:
        return {"n_bins": self.n_bins, "n_qubits": self.n_qubits, "root": self.root.to_dict()}

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2)

    @classmethod
    def from_dict(cls, doc: Mapping) -> "DecisionTree":
        return cls(int(doc["n_bins"]), int(doc["n_qubits"]), TreeNode.from_dict(doc["root"]))

    @classmethod
    def from_json(cls, text: str) -> "DecisionTree":
        return cls.from_dict(json.loads(text))


@lru_cache(maxsize=None)
def load_tree(n_bins: int) -> DecisionTree:
    try:
        return DecisionTree.from_dict(_read_data(f"tree_n{n_bins}.json"))
    except FileNotFoundError:
        raise ValueError(f"no decision tree shipped for N={n_bins}") from None


# ---------------------------------------------------------------- compression


def _load_gate(n_photonic: int, bin_index: int) -> np.ndarray:
    # swap |bin i>|0>_c <-> |vac>|1>_c, identity elsewhere
    d = 2 * n_photonic
    U = np.eye(d, dtype=complex)
    a, b = 2 * bin_index, 1
    U[[a, b]] = U[[b, a]]
    return U


def _string_phase_flip(bits: str) -> np.ndarray:
    D = np.ones(2 ** len(bits), dtype=complex)
    D[int(bits, 2)] = -1.0
    return np.diag(D)


def _compress(rho: DensityMatrix, encoding: TimeBinEncoding, noise: NoiseConfig) -> DensityMatrix:
    n, q = encoding.n_bins, encoding.n_qubits
    two = noise.channel(2) if noise.compression else None
    one = noise.channel(1) if noise.compression else None
    register = list(range(1, q + 1))
    for i in range(1, n + 1):
        rho = rho.expand(2)
        c = q + 1
        rho = apply_unitary(rho, _load_gate(n + 1, i), [0, c])
        code = encoding[(i,)]
        for k, bit in enumerate(code):
            if bit == "1":
                rho = apply_unitary(rho, CNOT, [c, 1 + k])
                if two is not None:
                    rho = apply_channel(rho, two, [c, 1 + k])
        rho = apply_unitary(rho, H, [c])
        if one is not None:
            rho = apply_channel(rho, one, [c])
        plus = project(rho, c, 0)
        if noise.decoupling == "postselect":
            kept = 2.0 * plus.matrix
        else:
            minus = apply_unitary(project(rho, c, 1), _string_phase_flip(code), register)
            kept = plus.matrix + minus.matrix
        rho = DensityMatrix(kept, rho.dims).partial_trace([c])
    return rho.partial_trace([0])


def compression_circuit(
    photonic_dm,
    encoding: TimeBinEncoding,
    noise: NoiseConfig | None = None,
) -> DensityMatrix:
    """Map a vacuum/single-photon operator onto the qubit register.

    Without noise this is the isometry |bin i> -> |encoding(i)>.
    """
    m = photonic_dm.matrix if isinstance(photonic_dm, DensityMatrix) else np.asarray(photonic_dm, dtype=complex)
    n, q = encoding.n_bins, encoding.n_qubits
    if m.shape != (n + 1, n + 1):
        raise ValueError(f"photonic operator must be {(n + 1, n + 1)}, got {m.shape}")
    zeros = np.zeros((2**q, 2**q), dtype=complex)
    zeros[0, 0] = 1.0
    rho = DensityMatrix(np.kron(m, zeros), (n + 1,) + (2,) * q)
    return _compress(rho, encoding, noise or NOISELESS)


# ---------------------------------------------------------------- decoding


def _decode(rho: DensityMatrix, node: TreeNode, noise: NoiseConfig, out: dict, check_branches: bool):
    if node.is_leaf:
        key = _leaf_key(node.leaf)
        out[key] = out.get(key, 0.0) + np.trace(rho.matrix)
        return
    two = noise.channel(2) if noise.decoding else None
    one = noise.channel(1) if noise.decoding else None
    for g in node.ops:
        rho = apply_unitary(rho, g.matrix, g.qubits)
        ch = two if len(g.qubits) == 2 else one
        if ch is not None:
            rho = apply_channel(rho, ch, g.qubits)
    parts = [project(rho, node.measure, k) for k in (0, 1)]
    if check_branches:
        total = np.trace(rho.matrix)
        if abs(total) > 1e-14:
            probs = [np.trace(p.matrix) / total for p in parts]
            if abs(sum(probs) - 1.0) > 1e-10:
                raise AssertionError("branch probabilities do not sum to one")
    for (outcome, child), part in zip(node.branches, parts):
        _decode(part, child, noise, out, check_branches)


def decision_tree_decode(
    register_dm: DensityMatrix,
    tree: DecisionTree,
    noise: NoiseConfig | None = None,
    check_branches: bool = False,
) -> dict[str, float]:
    """Probability of each leaf, keyed by ``"0000"``, ``"0010|0011"`` or ``"error"``.

    Leaf probabilities are the traces of the unnormalized branch operators,
    which equals chaining normalized post-measurement states with their
    branch probabilities.
    """
    if not isinstance(register_dm, DensityMatrix):
        register_dm = DensityMatrix(register_dm)
    if register_dm.dims != (2,) * tree.n_qubits:
        raise ValueError(f"register has dims {register_dm.dims}, tree expects {tree.n_qubits} qubits")
    out: dict = {}
    _decode(register_dm, tree.root, noise or NOISELESS, out, check_branches)
    return {k: float(np.real(v)) for k, v in out.items()}


def leaf_distribution_to_messages(dist: Mapping[str, float], messages: Sequence[str], keep_error: bool = True) -> dict:
    """Spread each leaf's mass evenly over the messages it cannot tell apart."""
    out = {m: 0.0 for m in messages}
    if keep_error:
        out[ERROR] = 0.0
    for key, prob in dist.items():
        if key == ERROR:
            if keep_error:
                out[ERROR] += prob
            continue
        group = key.split("|")
        for m in group:
            out[m] += prob / len(group)
    return out


# ---------------------------------------------------------------- full pipeline


def _pipeline_leaves(photonic: np.ndarray, encoding, tree, noise: NoiseConfig) -> dict:
    m = transducer_channel(photonic, noise.transducer_p) if noise.transducer_p else photonic
    n, q = encoding.n_bins, encoding.n_qubits
    zeros = np.zeros((2**q, 2**q), dtype=complex)
    zeros[0, 0] = 1.0
    rho = _compress(DensityMatrix(np.kron(m, zeros), (n + 1,) + (2,) * q), encoding, noise)
    out: dict = {}
    _decode(rho, tree.root, noise, out, False)
    return out


@lru_cache(maxsize=128)
def receiver_effects(encoding: TimeBinEncoding, tree: DecisionTree, noise: NoiseConfig) -> dict[str, np.ndarray]:
    """Effective POVM of the whole receiver on the photonic (N+1)-dim space.

    Every stage is linear in the input operator, so pushing the matrix
    units |a><b| through transducer, compression and tree gives
    E_leaf[b, a] = P(leaf | |a><b|). The result does not depend on alpha.
    """
    d = encoding.n_bins + 1
    effects = {key: np.zeros((d, d), dtype=complex) for key in tree.leaves()}
    for a in range(d):
        for b in range(a, d):
            unit = np.zeros((d, d), dtype=complex)
            unit[a, b] = 1.0
            for key, val in _pipeline_leaves(unit, encoding, tree, noise).items():
                effects[key][b, a] = val
                effects[key][a, b] = np.conj(val)
    return effects


def simulate_message(
    code: PolarCode,
    alpha: float,
    message: Sequence[int] | str,
    noise: NoiseConfig | None = None,
    encoding: TimeBinEncoding | None = None,
    tree: DecisionTree | None = None,
) -> dict[str, float]:
    """Leaf distribution for one message by direct density-matrix simulation."""
    from ..polar import polar_transform

    encoding = encoding or load_encoding(code.n_bins)
    tree = tree or load_tree(code.n_bins)
    psi = bpsk_codeword_state(polar_transform(message), alpha).amplitudes
    out = _pipeline_leaves(np.outer(psi, psi.conj()), encoding, tree, noise or NOISELESS)
    return {k: float(np.real(v)) for k, v in out.items()}


def noisy_pipeline_channel(
    code: PolarCode,
    alpha: float,
    noise: NoiseConfig | None = None,
    encoding: TimeBinEncoding | None = None,
    tree: DecisionTree | None = None,
    multiphoton_policy: str = "uniform",
) -> TransitionMatrix:
    """P(y|u) of the simulated receiver: encode, depolarize, compress, decode.

    Outcomes are the messages plus ``"error"`` when the tree can herald one.
    The probability of photon patterns outside the vacuum/single-photon
    space is spread evenly over the messages, as a blind guess.
    """
    noise = noise or NOISELESS
    encoding = encoding or load_encoding(code.n_bins)
    tree = tree or load_tree(code.n_bins)
    if encoding.n_bins != code.n_bins or tree.n_bins != code.n_bins:
        raise ValueError("encoding/tree block length does not match the code")
    if tree.n_qubits != encoding.n_qubits:
        raise ValueError("tree and encoding disagree on the register size")
    codebook = build_codebook(code)
    messages = codebook.messages
    outcomes = list(messages) + ([ERROR] if tree.has_error_leaf else [])
    effects = receiver_effects(encoding, tree, noise)
    rows = []
    for _, x in codebook.entries:
        psi = bpsk_codeword_state(x, alpha).amplitudes
        leaves = {k: float(np.real(np.vdot(psi, E @ psi))) for k, E in effects.items()}
        spread = leaf_distribution_to_messages(leaves, messages, keep_error=tree.has_error_leaf)
        rows.append([spread[o] for o in outcomes])
    P = np.clip(np.array(rows), 0.0, None)
    if multiphoton_policy == "uniform":
        eps = residual_multiphoton_probability(code.n_bins, alpha, 1)
        guess = np.array([1.0 / len(messages) if o != ERROR else 0.0 for o in outcomes])
        P = (1.0 - eps) * P + eps * guess[None, :]
    elif multiphoton_policy != "ignore":
        raise ValueError(f"unknown multiphoton policy {multiphoton_policy!r}")
    return TransitionMatrix(P, tuple(messages), tuple(outcomes))
