"""Black-box access to an unknown unitary with exact query accounting.

A handle only answers Bell-sampling requests.  Sandwiching a handle with a
generator yields a child handle for ``U sigma_g U^dagger``; every use of the
child is billed to the root ledger as one query to U and one to U^dagger
(per level of nesting).  Constructions supplied by the learner (corrections)
are free.

Channels are held up to global phase as one of: a sign-free Pauli, a
Clifford tableau, or a dense matrix.
"""

from __future__ import annotations

import json
from collections import Counter
from dataclasses import dataclass
from pathlib import Path
from typing import Union

import numpy as np

from . import metric
from .densesim import (
    DenseUnitary,
    circuit_unitary,
    gamma_table,
    load_matrix,
    matrix_from_json,
    parse_gate_expression,
    tableau_unitary,
)
from .gf2pauli import GeneratorIndex, PauliOperator, check_dense, pauli_mul, to_dense
from .tableau import (
    CliffordCircuit,
    CliffordTableau,
    bell_support,
    circuit_tableau,
    compose,
    conjugate_pauli,
    invert,
    pauli_as_tableau,
    tableau_from_json,
)

__all__ = [
    "QueryLedger",
    "OracleHandle",
    "Correction",
    "tableau_oracle",
    "dense_oracle",
    "pauli_oracle",
    "perturbed_clifford_unitary",
    "make_perturbed_clifford",
    "oracle_from_spec",
    "trusted_unitary",
    "trusted_channel",
]

Channel = Union[PauliOperator, CliffordTableau, np.ndarray]
Correction = Union[PauliOperator, CliffordTableau, CliffordCircuit, DenseUnitary, np.ndarray]


@dataclass
class QueryLedger:
    forward_count: int = 0
    conjugate_count: int = 0

    def charge(self, forward: int, conjugate: int) -> None:
        if forward < 0 or conjugate < 0:
            raise ValueError("ledger counts never decrease")
        self.forward_count += forward
        self.conjugate_count += conjugate

    def snapshot(self) -> tuple[int, int]:
        return self.forward_count, self.conjugate_count

    def to_json(self) -> dict:
        return {"forward": self.forward_count, "conjugate": self.conjugate_count}


def _as_rng(rng) -> np.random.Generator:
    if isinstance(rng, np.random.Generator):
        return rng
    return np.random.default_rng(rng)


def _dense_of(ch: Channel, n: int) -> np.ndarray:
    if isinstance(ch, PauliOperator):
        return to_dense(ch)
    if isinstance(ch, CliffordTableau):
        return tableau_unitary(ch).entries
    return ch


def _sandwich(ch: Channel, g: GeneratorIndex, n: int) -> Channel:
    gp = g.pauli(n)
    if isinstance(ch, PauliOperator):
        return gp
    if isinstance(ch, CliffordTableau):
        return conjugate_pauli(ch, gp).sign_free()
    return ch @ to_dense(gp) @ ch.conj().T


def _left_dagger(corr: Correction, ch: Channel, n: int) -> Channel:
    """The channel ``corr^dagger . ch`` (up to phase)."""
    if isinstance(corr, DenseUnitary):
        corr = corr.entries
    if isinstance(corr, CliffordCircuit):
        if corr.n != n:
            raise ValueError("correction acts on the wrong number of qubits")
        corr = circuit_unitary(corr).entries if isinstance(ch, np.ndarray) else circuit_tableau(corr)
    if isinstance(corr, np.ndarray) or isinstance(ch, np.ndarray):
        return np.asarray(_dense_of(corr, n)).conj().T @ _dense_of(ch, n)
    if isinstance(corr, PauliOperator) and isinstance(ch, PauliOperator):
        return pauli_mul(corr, ch).sign_free()
    corr_t = pauli_as_tableau(corr.sign_free()) if isinstance(corr, PauliOperator) else invert(corr)
    ch_t = pauli_as_tableau(ch) if isinstance(ch, PauliOperator) else ch
    return compose(corr_t, ch_t)


class _Distribution:
    """Bell-sampling distribution of a channel."""

    def __init__(self, ch: Channel, n: int):
        self.n = n
        self.fixed: PauliOperator | None = None
        self.table = None
        self.support = None
        if isinstance(ch, PauliOperator):
            self.fixed = ch.sign_free()
        elif isinstance(ch, CliffordTableau):
            offset, basis = bell_support(ch)
            if not basis:
                self.fixed = self._label(offset)
            else:
                self.support = (offset, basis)
        else:
            check_dense(n)
            self.table = gamma_table(ch)

    def _label(self, v: int) -> PauliOperator:
        mask = (1 << self.n) - 1
        return PauliOperator(self.n, v & mask, v >> self.n)

    def _draw_support(self, rng) -> PauliOperator:
        offset, basis = self.support
        bits = rng.integers(0, 2, len(basis))
        v = offset
        for b, keep in zip(basis, bits):
            if keep:
                v ^= b
        return self._label(v)

    def counts(self, shots: int, rng: np.random.Generator) -> Counter:
        if shots < 1:
            raise ValueError("shots must be positive")
        if self.fixed is not None:
            return Counter({self.fixed: shots})
        if self.table is not None:
            return self.table.sample_counts(shots, rng)
        offset, basis = self.support
        if len(basis) <= 16:
            points = [offset]
            for b in basis:
                points += [p ^ b for p in points]
            hits = rng.multinomial(shots, np.full(len(points), 1 / len(points)))
            return Counter({self._label(points[i]): int(hits[i]) for i in np.flatnonzero(hits)})
        return Counter(self._draw_support(rng) for _ in range(shots))


class OracleHandle:
    """Query access to a hidden unitary (or to a sandwiched channel of one).

    ``cost`` is what one application of this channel costs in queries to the
    root unitary and its conjugate.
    """

    def __init__(self, n: int, channel: Channel, ledger: QueryLedger | None = None,
                 cost: tuple[int, int] = (1, 0)):
        self.n = n
        self._channel = channel
        self.ledger = ledger if ledger is not None else QueryLedger()
        self.cost = cost
        self._dist: _Distribution | None = None
        self._children: dict[GeneratorIndex, OracleHandle] = {}
        self.metadata: dict = {}

    def __repr__(self) -> str:
        return f"OracleHandle(n={self.n}, cost={self.cost}, ledger={self.ledger.snapshot()})"

    def _charge(self, uses: int) -> None:
        self.ledger.charge(self.cost[0] * uses, self.cost[1] * uses)

    def forward_counts(self, shots: int, rng=None) -> Counter:
        """Outcome histogram of ``shots`` Bell rounds of the channel itself."""
        if self._dist is None:
            self._dist = _Distribution(self._channel, self.n)
        out = self._dist.counts(shots, _as_rng(rng))
        self._charge(shots)
        return out

    def forward_sample(self, rng=None) -> PauliOperator:
        (label,) = self.forward_counts(1, rng)
        return label

    def sandwiched(self, g: GeneratorIndex) -> OracleHandle:
        """Handle for ``U sigma_g U^dagger``, sharing this handle's ledger."""
        if g not in self._children:
            f, c = self.cost
            self._children[g] = OracleHandle(
                self.n, _sandwich(self._channel, g, self.n), self.ledger, (f + c, f + c)
            )
        return self._children[g]

    def sandwich_counts(self, g: GeneratorIndex, shots: int, rng=None) -> Counter:
        return self.sandwiched(g).forward_counts(shots, rng)

    def sandwich_sample(self, g: GeneratorIndex, rng=None) -> PauliOperator:
        return self.sandwiched(g).forward_sample(rng)

    def residual_counts(self, correction: Correction, shots: int, rng=None) -> Counter:
        """Bell rounds of ``correction^dagger . U``; only the U use is billed."""
        dist = _Distribution(_left_dagger(correction, self._channel, self.n), self.n)
        out = dist.counts(shots, _as_rng(rng))
        self._charge(shots)
        return out

    def residual_sample(self, correction: Correction, rng=None) -> PauliOperator:
        (label,) = self.residual_counts(correction, 1, rng)
        return label


def trusted_channel(o: OracleHandle) -> Channel:
    """Test/experiment accessor; learners must not call this."""
    return o._channel


def trusted_unitary(o: OracleHandle) -> np.ndarray:
    return _dense_of(o._channel, o.n)


def tableau_oracle(t: CliffordTableau) -> OracleHandle:
    return OracleHandle(t.n, t)


def pauli_oracle(p: PauliOperator) -> OracleHandle:
    return OracleHandle(p.n, p.sign_free())


def dense_oracle(u) -> OracleHandle:
    u = u if isinstance(u, DenseUnitary) else DenseUnitary(u)
    return OracleHandle(u.n, np.array(u.entries))


def _random_traceless_hermitian(d: int, rng: np.random.Generator) -> np.ndarray:
    g = rng.standard_normal((d, d)) + 1j * rng.standard_normal((d, d))
    k = (g + g.conj().T) / 2
    k -= np.trace(k) / d * np.eye(d)
    return k / np.linalg.norm(k, 2)


def perturbed_clifford_unitary(t: CliffordTableau, epsilon_target: float, seed=None,
                               base: np.ndarray | None = None) -> tuple[np.ndarray, float]:
    """``V = exp(i eta K) C`` with eta bisected so that d(V, C) hits the target.

    Returns the matrix and its realized distance to ``C``.
    """
    if not 0.0 <= epsilon_target < 1.0:
        raise ValueError(f"epsilon_target must lie in [0, 1), got {epsilon_target}")
    check_dense(t.n)
    c = tableau_unitary(t).entries if base is None else np.asarray(base, dtype=complex)
    if epsilon_target == 0.0:
        return c.copy(), 0.0
    rng = _as_rng(seed)
    d = c.shape[0]
    for _ in range(100):
        evals, evecs = np.linalg.eigh(_random_traceless_hermitian(d, rng))

        def dist(eta):
            return np.sqrt(max(0.0, 1.0 - abs(np.mean(np.exp(1j * eta * evals))) ** 2))

        hi = 0.05
        while dist(hi) < epsilon_target and hi < 64:
            hi *= 2
        if dist(hi) < epsilon_target:
            continue  # this direction never gets far enough; draw another
        lo = 0.0
        for _ in range(200):
            mid = 0.5 * (lo + hi)
            if dist(mid) < epsilon_target:
                lo = mid
            else:
                hi = mid
            if hi - lo < 1e-15:
                break
        eta = 0.5 * (lo + hi)
        e = (evecs * np.exp(1j * eta * evals)) @ evecs.conj().T
        v = e @ c
        realized = metric.d(v, c)
        if abs(realized - epsilon_target) <= 1e-6:
            return v, realized
    raise RuntimeError("could not realize the requested distance")  # pragma: no cover


def make_perturbed_clifford(t: CliffordTableau, epsilon_target: float, seed=None) -> OracleHandle:
    v, realized = perturbed_clifford_unitary(t, epsilon_target, seed)
    handle = dense_oracle(v)
    handle.metadata.update(
        {"kind": "perturbed", "epsilon_target": epsilon_target, "realized_distance": realized}
    )
    return handle


def _load_json_source(source, base_dir: Path):
    if isinstance(source, str):
        return json.loads((base_dir / source).read_text())
    return source


def oracle_from_spec(spec: dict | str | Path, base_dir: str | Path | None = None) -> OracleHandle:
    """Build a handle from an oracle spec (dict, or path to a JSON file)."""
    if not isinstance(spec, dict):
        path = Path(spec)
        base_dir = path.parent if base_dir is None else base_dir
        spec = json.loads(path.read_text())
    base_dir = Path(base_dir or ".")
    kind = spec.get("kind")
    source = spec.get("source")
    seed = spec.get("seed", 0)
    if kind == "tableau":
        return tableau_oracle(tableau_from_json(_load_json_source(source, base_dir)))
    if kind == "dense":
        if isinstance(source, str) and not source.endswith(".json"):
            return dense_oracle(parse_gate_expression(source))
        if isinstance(source, str):
            return dense_oracle(load_matrix(base_dir / source))
        return dense_oracle(matrix_from_json(source))
    if kind == "perturbed":
        if not isinstance(source, dict) or "tableau" not in source or "epsilon" not in source:
            raise ValueError("perturbed source needs 'tableau' and 'epsilon'")
        t = tableau_from_json(_load_json_source(source["tableau"], base_dir))
        return make_perturbed_clifford(t, float(source["epsilon"]), seed)
    raise ValueError(f"oracle kind must be tableau, dense or perturbed, got {kind!r}")
