"""Dense small-n simulation: unitaries, Pauli coefficient tables, Bell sampling.

Bell sampling applies a unitary to half of the maximally entangled state and
measures in the generalized Bell basis; outcome ``p`` has probability
``|gamma(p)|**2`` with ``gamma(p) = tr(sigma_p U) / 2**n``.  We sample that
distribution directly from the coefficient table instead of simulating the
2n-qubit state.
"""

from __future__ import annotations

import json
from collections import Counter
from dataclasses import dataclass, field
from functools import cached_property
from pathlib import Path

import numpy as np

from .gf2pauli import (
    DimensionError,
    PauliOperator,
    check_dense,
    label_index,
    pauli_from_index,
    to_dense,
)
from .tableau import CliffordCircuit, CliffordTableau, synthesize_circuit

__all__ = [
    "UNITARY_TOL",
    "NotUnitaryError",
    "DenseUnitary",
    "CoefficientTable",
    "gamma_table",
    "bell_state",
    "bell_sample",
    "apply_gate",
    "kron",
    "dagger",
    "named_gate",
    "GATE_LIBRARY",
    "parse_gate_expression",
    "circuit_unitary",
    "tableau_unitary",
    "random_unitary",
    "load_matrix",
    "save_matrix",
    "matrix_to_json",
    "matrix_from_json",
]

UNITARY_TOL = 1e-9

_PAULIS_4 = np.array(
    [
        [[1, 0], [0, 1]],
        [[0, 1], [1, 0]],
        [[0, -1j], [1j, 0]],
        [[1, 0], [0, -1]],
    ],
    dtype=complex,
)


_TRACE_MAP = _PAULIS_4.transpose(0, 2, 1).reshape(4, 4)


class NotUnitaryError(ValueError):
    pass


def _qubits_of(dim: int) -> int:
    n = dim.bit_length() - 1
    if dim < 1 or 1 << n != dim:
        raise DimensionError(f"dimension {dim} is not a power of two")
    return n


@dataclass(frozen=True, eq=False)
class DenseUnitary:
    entries: np.ndarray
    n: int = field(init=False)

    def __post_init__(self):
        m = np.array(self.entries, dtype=complex)
        if m.ndim != 2 or m.shape[0] != m.shape[1]:
            raise DimensionError(f"expected a square matrix, got shape {m.shape}")
        n = _qubits_of(m.shape[0])
        check_dense(n)
        err = np.max(np.abs(m.conj().T @ m - np.eye(m.shape[0])))
        if err > UNITARY_TOL:
            raise NotUnitaryError(f"U^dagger U deviates from identity by {err:.3g}")
        m.setflags(write=False)
        object.__setattr__(self, "entries", m)
        object.__setattr__(self, "n", n)

    @property
    def dim(self) -> int:
        return self.entries.shape[0]

    def __matmul__(self, other: DenseUnitary) -> DenseUnitary:
        return DenseUnitary(self.entries @ other.entries)

    def dagger(self) -> DenseUnitary:
        return DenseUnitary(self.entries.conj().T)

    @cached_property
    def gamma(self) -> CoefficientTable:
        return gamma_table(self)


@dataclass(frozen=True, eq=False)
class CoefficientTable:
    """Pauli-basis coefficients, indexed by ``label_index`` (qubit 0 most significant)."""

    n: int
    gamma: np.ndarray

    def __getitem__(self, p: PauliOperator | str) -> complex:
        if isinstance(p, str):
            from .gf2pauli import parse_pauli

            p = parse_pauli(p if p[0] in "+-" else "+" + p)
        return complex(self.gamma[label_index(p)])

    @cached_property
    def probabilities(self) -> np.ndarray:
        probs = np.abs(self.gamma) ** 2
        return probs / probs.sum()

    @cached_property
    def _cdf(self) -> np.ndarray:
        cdf = np.cumsum(self.probabilities)
        cdf[-1] = 1.0
        return cdf

    def sample(self, rng: np.random.Generator) -> PauliOperator:
        idx = int(np.searchsorted(self._cdf, rng.random(), side="right"))
        return pauli_from_index(self.n, min(idx, self.gamma.size - 1))

    def sample_counts(self, shots: int, rng: np.random.Generator) -> Counter:
        """Outcome histogram of ``shots`` independent Bell rounds."""
        counts = rng.multinomial(shots, self.probabilities)
        return Counter({pauli_from_index(self.n, int(i)): int(counts[i]) for i in np.flatnonzero(counts)})

    def probability(self, p: PauliOperator) -> float:
        return float(self.probabilities[label_index(p)])

    def reconstruct(self) -> np.ndarray:
        out = np.zeros((2**self.n, 2**self.n), dtype=complex)
        for idx in np.flatnonzero(np.abs(self.gamma) > 0):
            out += self.gamma[idx] * to_dense(pauli_from_index(self.n, int(idx)))
        return out


def _as_matrix(u) -> np.ndarray:
    return u.entries if isinstance(u, DenseUnitary) else np.asarray(u, dtype=complex)


def gamma_table(u) -> CoefficientTable:
    """Coefficients ``tr(sigma_p U) / 2**n`` for every sign-free label ``p``."""
    m = _as_matrix(u)
    n = _qubits_of(m.shape[0])
    check_dense(n)
    # pair up (row bit, column bit) per qubit, then apply the 4x4 map
    # (i, j) -> sum_ij sigma_a[j, i] U[i, j] on every qubit axis
    order = [ax for q in range(n) for ax in (q, n + q)]
    t = m.reshape((2,) * (2 * n)).transpose(order).reshape((4,) * n)
    for q in range(n):
        t = np.moveaxis(np.tensordot(_TRACE_MAP, t, axes=([1], [q])), 0, q)
    return CoefficientTable(n, t.reshape(4**n) / 2**n)


def bell_state(n: int) -> np.ndarray:
    check_dense(n)
    d = 2**n
    psi = np.zeros(d * d, dtype=complex)
    psi[np.arange(d) * (d + 1)] = d**-0.5
    return psi


def bell_sample(u, rng: np.random.Generator) -> PauliOperator:
    """One Bell-sampling round of ``u``; outcome ``p`` has probability ``|gamma(p)|^2``."""
    table = u.gamma if isinstance(u, DenseUnitary) else gamma_table(u)
    return table.sample(rng)


def apply_gate(u, state: np.ndarray) -> np.ndarray:
    m = _as_matrix(u)
    state = np.asarray(state, dtype=complex)
    if m.shape[1] != state.shape[0]:
        raise DimensionError(f"operator of size {m.shape[1]} on state of size {state.shape[0]}")
    return m @ state


def kron(*ops) -> np.ndarray:
    out = np.eye(1, dtype=complex)
    for op in ops:
        out = np.kron(out, _as_matrix(op))
    return out


def dagger(u):
    if isinstance(u, DenseUnitary):
        return u.dagger()
    return _as_matrix(u).conj().T


_W = np.exp(1j * np.pi / 4)

GATE_LIBRARY: dict[str, np.ndarray] = {
    "I": np.eye(2, dtype=complex),
    "X": _PAULIS_4[1],
    "Y": _PAULIS_4[2],
    "Z": _PAULIS_4[3],
    "H": np.array([[1, 1], [1, -1]], dtype=complex) / np.sqrt(2),
    "S": np.diag([1, 1j]),
    "SDG": np.diag([1, -1j]),
    "T": np.diag([1, _W]),
    "TDG": np.diag([1, np.conj(_W)]),
    "CNOT": np.array([[1, 0, 0, 0], [0, 1, 0, 0], [0, 0, 0, 1], [0, 0, 1, 0]], dtype=complex),
    "CZ": np.diag([1, 1, 1, -1]).astype(complex),
    "CS": np.diag([1, 1, 1, 1j]),
    "CSDG": np.diag([1, 1, 1, -1j]),
    "SWAP": np.array([[1, 0, 0, 0], [0, 0, 1, 0], [0, 1, 0, 0], [0, 0, 0, 1]], dtype=complex),
    "CCZ": np.diag([1, 1, 1, 1, 1, 1, 1, -1]).astype(complex),
}
for _m in GATE_LIBRARY.values():
    _m.setflags(write=False)


def named_gate(name: str) -> DenseUnitary:
    try:
        return DenseUnitary(GATE_LIBRARY[name.upper()])
    except KeyError:
        raise KeyError(f"unknown gate {name!r}; known: {', '.join(GATE_LIBRARY)}") from None


def parse_gate_expression(expr: str) -> DenseUnitary:
    """``"S*T"`` is a matrix product, ``"T&I"`` a tensor product (``&`` binds tighter)."""
    factors = []
    for term in expr.split("*"):
        parts = [p.strip() for p in term.split("&")]
        if not all(parts):
            raise ValueError(f"malformed gate expression {expr!r}")
        factors.append(kron(*(named_gate(p) for p in parts)))
    out = factors[0]
    for f in factors[1:]:
        if f.shape != out.shape:
            raise DimensionError(f"size mismatch in {expr!r}")
        out = out @ f
    return DenseUnitary(out)


def _apply_local(state: np.ndarray, gate: np.ndarray, qubits: tuple[int, ...], n: int) -> np.ndarray:
    # state has shape (2,)*n + (rest,); gate acts on the listed qubits
    k = len(qubits)
    g = gate.reshape((2,) * (2 * k))
    state = np.tensordot(g, state, axes=(list(range(k, 2 * k)), list(qubits)))
    return np.moveaxis(state, list(range(k)), list(qubits))


def circuit_unitary(circuit: CliffordCircuit) -> DenseUnitary:
    n = circuit.n
    check_dense(n)
    d = 2**n
    state = np.eye(d, dtype=complex).reshape((2,) * n + (d,))
    for gate in circuit.gates:
        state = _apply_local(state, GATE_LIBRARY[gate[0]], tuple(gate[1:]), n)
    return DenseUnitary(state.reshape(d, d))


def tableau_unitary(t: CliffordTableau) -> DenseUnitary:
    """A dense representative of ``t`` (global phase unspecified)."""
    return circuit_unitary(synthesize_circuit(t))


def random_unitary(n: int, rng: np.random.Generator) -> DenseUnitary:
    """Haar-random unitary via QR of a complex Ginibre matrix."""
    d = 2**n
    z = (rng.standard_normal((d, d)) + 1j * rng.standard_normal((d, d))) / np.sqrt(2)
    q, r = np.linalg.qr(z)
    ph = np.diag(r) / np.abs(np.diag(r))
    return DenseUnitary(q * ph)


def matrix_to_json(u) -> list:
    m = _as_matrix(u)
    return [[[float(v.real), float(v.imag)] for v in row] for row in m]


def matrix_from_json(data) -> DenseUnitary:
    arr = np.array(data, dtype=float)
    if arr.ndim != 3 or arr.shape[2] != 2:
        raise ValueError("dense matrix JSON must be rows of [re, im] pairs")
    return DenseUnitary(arr[..., 0] + 1j * arr[..., 1])


def load_matrix(path: str | Path) -> DenseUnitary:
    return matrix_from_json(json.loads(Path(path).read_text()))


def save_matrix(u, path: str | Path) -> None:
    Path(path).write_text(json.dumps(matrix_to_json(u)))
