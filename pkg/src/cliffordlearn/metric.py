"""Distances between unitaries and executable checks of the conjugation lemmas.

``d_plus`` is the normalized Frobenius distance, ``d`` its global-phase
invariant version sqrt(1 - |tr(U1 U2^dagger)/dim|^2).  ``d_plus`` can reach
sqrt(2) when the real part of the overlap is negative.
"""

from __future__ import annotations

import json
import math
import os
import tempfile
from dataclasses import asdict, dataclass
from functools import lru_cache
from pathlib import Path

import numpy as np

from .densesim import DenseUnitary, circuit_unitary, gamma_table
from .gf2pauli import DimensionError, PauliOperator, generators, label_index, pauli_from_index, to_dense
from .tableau import (
    CliffordTableau,
    clifford_class_count,
    enumerate_symplectic,
    synthesize_circuit,
    tableau_from_json,
    tableau_to_json,
    _tableau_from_matrix,
)

__all__ = [
    "CONSISTENCY_TOL",
    "LEMMA_SLACK",
    "NumericalConsistencyError",
    "LemmaViolation",
    "DistanceReport",
    "ConjugationBounds",
    "NearestPauli",
    "NearestClifford",
    "overlap",
    "d_plus",
    "d",
    "d_tensor",
    "d_plus_norm",
    "distance_report",
    "pauli_distances",
    "nearest_pauli",
    "clifford_classes",
    "clifford_distances",
    "nearest_clifford",
    "pauli_twirl",
    "verify_conjugation_bounds",
]

CONSISTENCY_TOL = 1e-10
LEMMA_SLACK = 1e-9


class NumericalConsistencyError(ArithmeticError):
    """Two algebraically equal formulas disagreed beyond tolerance."""


class LemmaViolation(AssertionError):
    def __init__(self, message: str, report=None):
        super().__init__(message)
        self.report = report


def _mat(u) -> np.ndarray:
    return u.entries if isinstance(u, DenseUnitary) else np.asarray(u, dtype=complex)


def _pair(u1, u2) -> tuple[np.ndarray, np.ndarray]:
    a, b = _mat(u1), _mat(u2)
    if a.shape != b.shape:
        raise DimensionError(f"shapes differ: {a.shape} vs {b.shape}")
    return a, b


def _trace_ratio(a: np.ndarray, b: np.ndarray) -> complex:
    # tr(A B^dagger) / dim without forming the product
    return complex(np.vdot(b, a)) / a.shape[0]


def overlap(u1, u2) -> float:
    a, b = _pair(u1, u2)
    return abs(_trace_ratio(a, b))


def d_plus_norm(u1, u2) -> float:
    a, b = _pair(u1, u2)
    return math.sqrt(np.linalg.norm(a - b) ** 2 / (2 * a.shape[0]))


def d_plus(u1, u2) -> float:
    a, b = _pair(u1, u2)
    sq_norm = np.linalg.norm(a - b) ** 2 / (2 * a.shape[0])
    sq_inner = 1.0 - _trace_ratio(a, b).real
    if abs(sq_norm - sq_inner) > CONSISTENCY_TOL:
        raise NumericalConsistencyError(f"D+ forms disagree: {sq_norm!r} vs {sq_inner!r}")
    return math.sqrt(max(sq_norm, 0.0))


def d(u1, u2) -> float:
    """Phase-invariant distance sqrt(1 - |tr(U1 U2^dagger)/dim|^2).

    Evaluated as sqrt((1 - |t|)(1 + |t|)) with ``1 - |t|`` taken from the
    Frobenius distance after phase alignment, which keeps precision when the
    operators nearly coincide.
    """
    a, b = _pair(u1, u2)
    t = _trace_ratio(a, b)
    mag = abs(t)
    if mag == 0.0:
        return 1.0
    dim = a.shape[0]
    gap = np.linalg.norm(a * (t.conjugate() / mag) - b) ** 2 / (2 * dim)
    sq = gap * (1.0 + mag)
    if abs(sq - (1.0 - mag * mag)) > CONSISTENCY_TOL:
        raise NumericalConsistencyError(f"D forms disagree: {sq!r} vs {1.0 - mag * mag!r}")
    return math.sqrt(min(max(sq, 0.0), 1.0))


def d_tensor(u1, u2) -> float:
    """The literal definition through U (x) U*; only sensible for tiny n."""
    a, b = _pair(u1, u2)
    if a.shape[0] > 4:
        raise DimensionError("tensor-form distance is limited to n <= 2")
    diff = np.kron(a, a.conj()) - np.kron(b, b.conj())
    return math.sqrt(np.linalg.norm(diff) ** 2 / (2 * a.shape[0] ** 2))


@dataclass(frozen=True)
class DistanceReport:
    d_plus: float
    d: float
    overlap: float

    def to_json(self) -> dict:
        return asdict(self)


def distance_report(u1, u2) -> DistanceReport:
    return DistanceReport(d_plus(u1, u2), d(u1, u2), overlap(u1, u2))


# ----------------------------------------------------------------------------
# brute-force nearest elements


@dataclass(frozen=True)
class NearestPauli:
    label: PauliOperator
    distance: float
    unique: bool


def pauli_distances(u) -> np.ndarray:
    """d(u, sigma_p) for every label, indexed like the coefficient table."""
    g = gamma_table(u).gamma
    return np.sqrt(np.clip(1.0 - np.abs(g) ** 2, 0.0, 1.0))


def nearest_pauli(u) -> NearestPauli:
    m = _mat(u)
    n = m.shape[0].bit_length() - 1
    if n > 4:
        raise DimensionError("nearest_pauli enumerates 4^n labels; limited to n <= 4")
    dist = pauli_distances(m)
    idx = int(np.argmin(dist))
    best = float(dist[idx])
    return NearestPauli(pauli_from_index(n, idx), best, best < 1 / math.sqrt(2) - 1e-12)


def _cache_dir() -> Path:
    root = os.environ.get("CLIFFORDLEARN_CACHE_DIR")
    return Path(root) if root else Path.home() / ".cache" / "cliffordlearn"


def _atomic_write(path: Path, data: bytes) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=path.name, suffix=".tmp")
    with os.fdopen(fd, "wb") as fh:
        fh.write(data)
    os.replace(tmp, path)


def _build_classes(n: int) -> tuple[list[CliffordTableau], np.ndarray]:
    tabs: list[CliffordTableau] = []
    mats = []
    paulis = [pauli_from_index(n, i) for i in range(4**n)]
    for rows in enumerate_symplectic(n):
        base = _tableau_from_matrix(n, rows, (1,) * (2 * n))
        base_dense = circuit_unitary(synthesize_circuit(base)).entries
        for q in paulis:
            # base . q flips the signs of generators that anticommute with q
            signs = [-1 if (q.z_bits >> i) & 1 else 1 for i in range(n)]
            signs += [-1 if (q.x_bits >> i) & 1 else 1 for i in range(n)]
            tabs.append(_tableau_from_matrix(n, rows, signs))
            mats.append(base_dense @ to_dense(q))
    return tabs, np.array(mats)


@lru_cache(maxsize=None)
def clifford_classes(n: int) -> tuple[tuple[CliffordTableau, ...], np.ndarray]:
    """All Clifford phase-classes at n <= 2 with one dense representative each.

    The enumeration is cached on disk (tableau JSON records plus a .npy of
    representatives) and read back on later runs.
    """
    if n not in (1, 2):
        raise DimensionError("Clifford enumeration is limited to n in {1, 2}")
    expected = clifford_class_count(n)
    json_path = _cache_dir() / f"clifford_classes_n{n}.json"
    npy_path = json_path.with_suffix(".npy")
    if json_path.exists() and npy_path.exists():
        try:
            tabs = [tableau_from_json(rec) for rec in json.loads(json_path.read_text())]
            mats = np.load(npy_path)
            if len(tabs) == expected == len(mats):
                return tuple(tabs), mats
        except (ValueError, KeyError, OSError):
            pass
    tabs, mats = _build_classes(n)
    if len(set(tabs)) != expected:
        raise AssertionError(f"enumerated {len(set(tabs))} classes, expected {expected}")
    try:
        _atomic_write(json_path, json.dumps([tableau_to_json(t) for t in tabs]).encode())
        with tempfile.TemporaryFile() as fh:
            np.save(fh, mats)
            fh.seek(0)
            _atomic_write(npy_path, fh.read())
    except OSError:
        pass  # read-only home: keep the in-memory copy
    mats.setflags(write=False)
    return tuple(tabs), mats


def clifford_distances(u) -> np.ndarray:
    m = _mat(u)
    n = m.shape[0].bit_length() - 1
    _, mats = clifford_classes(n)
    t = np.abs(np.einsum("kij,ij->k", mats.conj(), m)) / m.shape[0]
    return np.sqrt(np.clip(1.0 - t**2, 0.0, 1.0))


@dataclass(frozen=True)
class NearestClifford:
    tableau: CliffordTableau
    distance: float
    representative: np.ndarray


def nearest_clifford(u) -> NearestClifford:
    m = _mat(u)
    n = m.shape[0].bit_length() - 1
    tabs, mats = clifford_classes(n)
    dist = clifford_distances(m)
    idx = int(np.argmin(dist))
    # recompute the winner with the precise formula
    return NearestClifford(tabs[idx], d(m, mats[idx]), mats[idx])


# ----------------------------------------------------------------------------
# lemma checks


def pauli_twirl(a) -> np.ndarray:
    """(1/4^n) sum_p sigma_p A sigma_p, computed literally."""
    m = np.asarray(_mat(a), dtype=complex)
    n = m.shape[0].bit_length() - 1
    if n > 3:
        raise DimensionError("pauli_twirl is limited to n <= 3")
    out = np.zeros_like(m)
    for i in range(4**n):
        s = to_dense(pauli_from_index(n, i))
        out += s @ m @ s
    return out / 4**n


@dataclass(frozen=True)
class ConjugationBounds:
    distance: float
    max_conjugate_d: float
    max_conjugate_d_plus: float
    max_generator_d_plus: float
    factor_two_ok: bool
    design_converse_ok: bool
    generator_bound_ok: bool

    @property
    def violations(self) -> list[str]:
        names = ("factor_two", "design_converse", "generator_bound")
        flags = (self.factor_two_ok, self.design_converse_ok, self.generator_bound_ok)
        return [name for name, ok in zip(names, flags) if not ok]

    def to_json(self) -> dict:
        return asdict(self)


def verify_conjugation_bounds(u1, u2, *, raise_on_violation: bool = True) -> ConjugationBounds:
    a, b = _pair(u1, u2)
    n = a.shape[0].bit_length() - 1
    if n > 3:
        raise DimensionError("verify_conjugation_bounds enumerates 4^n Paulis; n <= 3")
    delta = d(a, b)
    gen_idx = {label_index(g.pauli(n)) for g in generators(n)}
    max_d = max_dp = max_gen = 0.0
    for i in range(4**n):
        s = to_dense(pauli_from_index(n, i))
        ca = a @ s @ a.conj().T
        cb = b @ s @ b.conj().T
        dp = d_plus(ca, cb)
        max_d = max(max_d, d(ca, cb))
        max_dp = max(max_dp, dp)
        if i in gen_idx:
            max_gen = max(max_gen, dp)
    report = ConjugationBounds(
        distance=delta,
        max_conjugate_d=max_d,
        max_conjugate_d_plus=max_dp,
        max_generator_d_plus=max_gen,
        factor_two_ok=max_d <= 2 * delta + LEMMA_SLACK,
        design_converse_ok=delta <= max_dp + LEMMA_SLACK,
        generator_bound_ok=max_dp <= 2 * n * max_gen + LEMMA_SLACK,
    )
    if raise_on_violation and report.violations:
        raise LemmaViolation(f"lemma bounds violated: {report.violations}", report)
    return report
