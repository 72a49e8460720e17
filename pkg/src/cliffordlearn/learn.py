"""Learners for Pauli, Clifford and C_k unitaries, exact and approximate.

Every learner talks to the hidden unitary only through an ``OracleHandle``;
the handle's ledger records what each run cost.

Query accounting note: learning a level-k element recursively learns the 2n
sandwiched channels ``U sigma_g U^dagger`` at level k-1, and each use of a
sandwiched channel costs one U and one U^dagger.  ``nested_query_count``
gives the totals this honest accounting produces; ``query_budget`` gives the
closed forms T(k), T'(k) quoted for the algorithm.  They coincide for k <= 2
and diverge from k = 3 on.
"""

from __future__ import annotations

import math
import time
from dataclasses import dataclass, field
from typing import Union

import numpy as np

from .densesim import circuit_unitary
from .gf2pauli import (
    GeneratorIndex,
    PauliOperator,
    check_dense,
    commutes,
    format_pauli,
    generators,
    parse_pauli,
    to_dense,
)
from .oracle import OracleHandle, _as_rng
from .tableau import (
    CliffordTableau,
    compose,
    pauli_as_tableau,
    query_lower_bound,
    synthesize_circuit,
    tableau_to_json,
)

__all__ = [
    "OracleNotClifford",
    "NotInHierarchy",
    "PreconditionError",
    "LearningFailed",
    "InconsistentTable",
    "ConjugationTable",
    "LearnReport",
    "VoteResult",
    "learn_pauli",
    "learn_clifford",
    "learn_ck",
    "realize_unitary",
    "query_budget",
    "query_budget_recurrence",
    "nested_query_count",
    "query_lower_bound",
    "epsilon_prime",
    "majority_sample_count",
    "approx_learn_pauli",
    "approx_learn_ck",
    "approx_query_count",
    "run_learner",
]


class NotInHierarchy(ValueError):
    """Query responses are inconsistent with the promised level."""


class OracleNotClifford(NotInHierarchy):
    pass


class PreconditionError(ValueError):
    pass


class LearningFailed(RuntimeError):
    def __init__(self, message: str, flags: list[str] | None = None):
        super().__init__(message)
        self.flags = flags or []


class InconsistentTable(ValueError):
    """No unitary (unique up to phase) satisfies the stored conjugations."""


# ----------------------------------------------------------------------------
# learned descriptions


@dataclass(frozen=True)
class ConjugationTable:
    """Recursive description of a C_k element.

    Level 1 holds a sign-free Pauli.  Level k >= 2 holds, per generator in
    ``generators(n)`` order, a level-(k-1) table of the sandwiched channel
    together with a sign relative to that table's canonical Hermitian
    representative, plus the residual correction Pauli.
    """

    n: int
    level: int
    pauli: PauliOperator | None = None
    children: tuple[ConjugationTable, ...] = ()
    signs: tuple[int, ...] = ()
    correction: PauliOperator | None = None

    def __post_init__(self):
        if self.level < 1:
            raise ValueError("level must be >= 1")
        if self.level == 1:
            if self.pauli is None or self.pauli.n != self.n:
                raise ValueError("a level-1 table needs an n-qubit Pauli")
        else:
            if len(self.children) != 2 * self.n or len(self.signs) != 2 * self.n:
                raise ValueError("a level-k table needs 2n children and 2n signs")
            if any(c.level != self.level - 1 for c in self.children):
                raise ValueError("children must sit exactly one level lower")
            if any(s not in (1, -1) for s in self.signs):
                raise ValueError("signs must be +1 or -1")

    @classmethod
    def from_tableau(cls, t: CliffordTableau, correction: PauliOperator | None = None) -> ConjugationTable:
        kids = tuple(cls(t.n, 1, pauli=img) for img in list(t.x_images) + list(t.z_images))
        return cls(t.n, 2, children=kids, signs=tuple(t.x_signs) + tuple(t.z_signs), correction=correction)

    def to_tableau(self) -> CliffordTableau:
        if self.level != 2:
            raise ValueError(f"only level-2 tables are tableaux (this is level {self.level})")
        imgs = [c.pauli for c in self.children]
        n = self.n
        return CliffordTableau(n, tuple(imgs[:n]), tuple(imgs[n:]), self.signs[:n], self.signs[n:])

    def with_positive_signs(self) -> ConjugationTable:
        return ConjugationTable(self.n, self.level, self.pauli, self.children, (1,) * len(self.signs), None)

    def to_json(self) -> dict:
        if self.level == 1:
            return {"n": self.n, "level": 1, "pauli": format_pauli(self.pauli)}
        out = {
            "n": self.n,
            "level": self.level,
            "children": {str(g): c.to_json() for g, c in zip(generators(self.n), self.children)},
            "signs": list(self.signs),
        }
        if self.correction is not None:
            out["correction"] = format_pauli(self.correction)
        if self.level == 2:
            out["tableau"] = tableau_to_json(self.to_tableau())
        return out

    @classmethod
    def from_json(cls, data: dict) -> ConjugationTable:
        n, level = int(data["n"]), int(data["level"])
        if level == 1:
            return cls(n, 1, pauli=parse_pauli(data["pauli"]))
        kids = tuple(cls.from_json(data["children"][str(g)]) for g in generators(n))
        corr = parse_pauli(data["correction"]) if "correction" in data else None
        return cls(n, level, children=kids, signs=tuple(int(s) for s in data["signs"]), correction=corr)


@dataclass
class LearnReport:
    learned: object
    ledger: tuple[int, int]
    expected_ledger: tuple[int, int] | None
    sample_counts: dict[int, int] = field(default_factory=dict)
    success: bool = True
    flags: list[str] = field(default_factory=list)
    seconds: float = 0.0

    @property
    def ledger_ok(self) -> bool:
        return self.expected_ledger is None or tuple(self.ledger) == tuple(self.expected_ledger)

    def to_json(self, timing: bool = False) -> dict:
        obj = self.learned
        if isinstance(obj, PauliOperator):
            learned = format_pauli(obj)
        elif isinstance(obj, CliffordTableau):
            learned = tableau_to_json(obj)
        elif isinstance(obj, ConjugationTable):
            learned = obj.to_json()
        else:
            learned = None
        out = {
            "learned": learned,
            "ledger": {"forward": self.ledger[0], "conjugate": self.ledger[1]},
            "expected_ledger": None
            if self.expected_ledger is None
            else {"forward": self.expected_ledger[0], "conjugate": self.expected_ledger[1]},
            "ledger_ok": self.ledger_ok,
            "sample_counts": {str(k): v for k, v in sorted(self.sample_counts.items())},
            "success": self.success,
            "flags": list(self.flags),
        }
        if timing:
            out["seconds"] = self.seconds
        return out


def _sign_for(correction: PauliOperator, g: GeneratorIndex, n: int) -> int:
    return 1 if commutes(correction, g.pauli(n)) else -1


# ----------------------------------------------------------------------------
# exact learners


def learn_pauli(o: OracleHandle, rng=None) -> PauliOperator:
    """One Bell round; the outcome is the hidden Pauli's label."""
    return o.forward_sample(rng)


def _clifford_from_images(n: int, images: list[PauliOperator]) -> CliffordTableau:
    t = CliffordTableau(n, tuple(images[:n]), tuple(images[n:]), (1,) * n, (1,) * n)
    if not t.is_symplectic():
        raise OracleNotClifford("measured generator images violate the commutation relations")
    return t


def learn_clifford(o: OracleHandle, rng=None) -> CliffordTableau:
    """2n sandwiched rounds for the sign-free images, one residual round for the signs."""
    rng = _as_rng(rng)
    n = o.n
    images = [o.sandwich_sample(g, rng) for g in generators(n)]
    c_prime = _clifford_from_images(n, images)
    sigma = o.residual_sample(c_prime, rng)
    return compose(c_prime, pauli_as_tableau(sigma))


def learn_ck(o: OracleHandle, k: int, rng=None) -> ConjugationTable:
    if k < 1:
        raise ValueError("k must be >= 1")
    rng = _as_rng(rng)
    n = o.n
    if k == 1:
        return ConjugationTable(n, 1, pauli=learn_pauli(o, rng))
    if k == 2:
        images = [o.sandwich_sample(g, rng) for g in generators(n)]
        try:
            c_prime = _clifford_from_images(n, images)
        except OracleNotClifford as exc:
            raise NotInHierarchy(f"oracle not in C_{k}: {exc}") from None
        sigma = o.residual_sample(c_prime, rng)
        t = compose(c_prime, pauli_as_tableau(sigma))
        return ConjugationTable.from_tableau(t, sigma)
    check_dense(n)
    children = []
    for g in generators(n):
        try:
            children.append(learn_ck(o.sandwiched(g), k - 1, rng))
        except NotInHierarchy as exc:
            raise NotInHierarchy(f"oracle not in C_{k}: {exc}") from None
    positive = ConjugationTable(n, k, children=tuple(children), signs=(1,) * (2 * n))
    try:
        c_prime = realize_unitary(positive)
    except InconsistentTable as exc:
        raise NotInHierarchy(f"oracle not in C_{k}: {exc}") from None
    sigma = o.residual_sample(c_prime, rng)
    signs = tuple(_sign_for(sigma, g, n) for g in generators(n))
    return ConjugationTable(n, k, children=tuple(children), signs=signs, correction=sigma)


# ----------------------------------------------------------------------------
# realization


_NULL_TOL = 1e-8


def _normalize_phase(w: np.ndarray) -> np.ndarray:
    mags = np.abs(w).ravel()
    idx = int(np.flatnonzero(mags >= mags.max() - 1e-9)[0])
    v = w.ravel()[idx]
    return w * (abs(v) / v)


def _hermitian_representative(w: np.ndarray) -> np.ndarray:
    """Rescale a Hermitian-up-to-phase unitary to a canonical Hermitian one."""
    d = w.shape[0]
    c = np.trace(w @ w) / d
    if abs(abs(c) - 1) > 1e-8:
        raise InconsistentTable("conjugation image is not Hermitian up to phase")
    h = w / np.sqrt(c)
    if np.max(np.abs(h - h.conj().T)) > 1e-8:
        raise InconsistentTable("conjugation image is not Hermitian up to phase")
    h = (h + h.conj().T) / 2
    flat = h.ravel()
    mags = np.abs(flat)
    v = flat[int(np.flatnonzero(mags >= mags.max() - 1e-9)[0])]
    lead = v.real if abs(v.real) > 1e-9 else v.imag
    return h if lead > 0 else -h


def _solve_conjugations(n: int, images: list[np.ndarray]) -> np.ndarray:
    """The unitary W (up to phase) with W sigma_g W^dagger = image_g for all generators."""
    d = 2**n
    eye = np.eye(d)
    gram = np.zeros((d * d, d * d), dtype=complex)
    for g, a in zip(generators(n), images):
        # row-major vec: W sigma - A W
        op = np.kron(eye, to_dense(g.pauli(n)).T) - np.kron(a, eye)
        gram += op.conj().T @ op
    evals, evecs = np.linalg.eigh(gram)
    scale = max(1.0, float(evals[-1]))
    if evals[0] > _NULL_TOL * scale:
        raise InconsistentTable(f"no solution (smallest residual {evals[0]:.3g})")
    if d > 1 and evals[1] <= 1e-6 * scale:
        raise InconsistentTable("solution is not unique up to phase")
    w = evecs[:, 0].reshape(d, d)
    w *= math.sqrt(d / np.vdot(w, w).real)
    if np.max(np.abs(w.conj().T @ w - np.eye(d))) > 1e-8:
        raise InconsistentTable("solution is not unitary")
    return w


def _images(table: ConjugationTable) -> list[np.ndarray]:
    out = []
    for child, s in zip(table.children, table.signs):
        if child.level == 1:
            out.append(s * to_dense(child.pauli))
        else:
            out.append(s * _hermitian_representative(realize_unitary(child)))
    return out


def realize_unitary(table: ConjugationTable) -> np.ndarray:
    """Dense unitary described by ``table``; largest-modulus entry made real positive."""
    n = table.n
    check_dense(n)
    if table.level == 1:
        return _normalize_phase(to_dense(table.pauli))
    if table.level == 2:
        t = table.to_tableau()
        if not t.is_symplectic():
            raise InconsistentTable("level-2 table is not a valid tableau")
        return _normalize_phase(circuit_unitary(synthesize_circuit(t)).entries)
    return _normalize_phase(_solve_conjugations(n, _images(table)))


# ----------------------------------------------------------------------------
# budgets


def query_budget(n: int, k: int) -> tuple[int, int]:
    """Closed forms T(k) = ((2n)^k - 1)/(2n - 1), T'(k) = (2n)^(k-1) (0 at k = 1)."""
    if n < 1 or k < 1:
        raise ValueError("n and k must be >= 1")
    m = 2 * n
    return (m**k - 1) // (m - 1), 0 if k == 1 else m ** (k - 1)


def query_budget_recurrence(n: int, k: int) -> tuple[int, int]:
    if n < 1 or k < 1:
        raise ValueError("n and k must be >= 1")
    t, tc = 1, 0
    for level in range(1, k):
        t = 2 * n * t + 1
        tc = 2 * n if level == 1 else 2 * n * tc
    return t, tc


def nested_query_count(n: int, k: int, cost: tuple[int, int] = (1, 0)) -> tuple[int, int]:
    """Exact ledger of ``learn_ck`` when every sandwiched use is billed to U and U^dagger."""
    if k < 1:
        raise ValueError("k must be >= 1")
    if k == 1:
        return cost
    f, c = cost
    cf, cc = nested_query_count(n, k - 1, (f + c, f + c))
    return 2 * n * cf + f, 2 * n * cc + c


# ----------------------------------------------------------------------------
# approximate learning


def epsilon_prime(epsilon: float, k: int) -> float:
    if k < 1:
        raise ValueError("k must be >= 1")
    if epsilon < 0:
        raise ValueError("epsilon must be non-negative")
    scaled = 2 ** (k - 1) * epsilon
    if scaled >= 1:
        raise PreconditionError(f"2^(k-1) * epsilon = {scaled:g} must be < 1")
    value = math.sqrt(2 * (1 - scaled**2)) - 1
    if value <= 0:
        raise PreconditionError(f"epsilon' = {value:g} is not positive for epsilon={epsilon}, k={k}")
    return value


def majority_sample_count(eps_prime: float, delta: float) -> int:
    """m = ceil(2 ln(2/delta) / eps'^2).

    If the top outcome has probability p >= (1 + eps')/2, the vote fails only
    when its empirical frequency drops by at least eps'/2 below p, which
    two-sided Hoeffding bounds by 2 exp(-m eps'^2 / 2) <= delta.  The gap
    holds when |gamma|^2 >= 1 - eps^2 with eps' as in ``epsilon_prime``,
    because 1 - eps^2 >= sqrt((1 - eps^2)/2) whenever that quantity is >= 1/2.
    """
    if eps_prime <= 0:
        raise PreconditionError("eps' must be positive")
    if not 0 < delta < 1:
        raise ValueError("delta must lie in (0, 1)")
    return math.ceil(2 * math.log(2 / delta) / eps_prime**2)


@dataclass(frozen=True)
class VoteResult:
    label: PauliOperator
    samples: int
    top_count: int
    tie: bool
    majority: bool


def _vote(o: OracleHandle, m: int, rng, correction=None) -> VoteResult:
    counts = o.forward_counts(m, rng) if correction is None else o.residual_counts(correction, m, rng)
    ranked = sorted(counts.items(), key=lambda kv: (-kv[1], kv[0].letters()))
    label, top = ranked[0]
    tie = len(ranked) > 1 and ranked[1][1] == top
    return VoteResult(label, m, top, tie, 2 * top > m)


def approx_learn_pauli(o: OracleHandle, eps_prime: float, delta: float, rng=None) -> VoteResult:
    """Majority vote over ``majority_sample_count`` Bell rounds."""
    return _vote(o, majority_sample_count(eps_prime, delta), _as_rng(rng))


@dataclass
class _ApproxState:
    eps_prime: float
    rng: np.random.Generator
    flags: list[str] = field(default_factory=list)
    samples: dict[int, int] = field(default_factory=dict)

    def record(self, level: int, vote: VoteResult, where: str) -> None:
        self.samples[level] = self.samples.get(level, 0) + vote.samples
        if vote.tie:
            self.flags.append(f"tie at level {level} ({where})")
        elif not vote.majority:
            self.flags.append(f"no strict majority at level {level} ({where})")


def _approx_rec(o: OracleHandle, k: int, delta: float, st: _ApproxState, where: str) -> ConjugationTable:
    n = o.n
    if k == 1:
        vote = _vote(o, majority_sample_count(st.eps_prime, delta), st.rng)
        st.record(1, vote, where)
        return ConjugationTable(n, 1, pauli=vote.label)
    part = delta / (2 * n + 1)
    children = tuple(
        _approx_rec(o.sandwiched(g), k - 1, part, st, f"{where}/{g}") for g in generators(n)
    )
    positive = ConjugationTable(n, k, children=children, signs=(1,) * (2 * n))
    try:
        if k == 2:
            correction_op = _clifford_from_images(n, [c.pauli for c in children])
        else:
            correction_op = realize_unitary(positive)
    except (OracleNotClifford, InconsistentTable) as exc:
        st.flags.append(f"invalid table at level {k} ({where}): {exc}")
        raise LearningFailed(str(exc), st.flags) from None
    vote = _vote(o, majority_sample_count(st.eps_prime, part), st.rng, correction=correction_op)
    st.record(k, vote, f"{where}/residual")
    signs = tuple(_sign_for(vote.label, g, n) for g in generators(n))
    return ConjugationTable(n, k, children=children, signs=signs, correction=vote.label)


def approx_learn_ck(o: OracleHandle, k: int, epsilon: float, delta: float, rng=None,
                    flags: list[str] | None = None,
                    samples: dict[int, int] | None = None) -> ConjugationTable:
    """Learn the C_k element within ``epsilon`` of the oracle, failing w.p. <= delta.

    Each recursion level hands its 2n sandwiched channels and its residual
    vote a budget of delta/(2n+1); the sandwiched channels sit at doubled
    distance, so depth j works at 2^j epsilon and every vote uses the same
    eps' = epsilon_prime(epsilon, k).  Flags (ties, weak majorities) are
    appended to ``flags`` and per-level vote sizes summed into ``samples``
    when given.
    """
    if not 0 < delta < 1:
        raise ValueError("delta must lie in (0, 1)")
    if k >= 3:
        check_dense(o.n)
    st = _ApproxState(epsilon_prime(epsilon, k), _as_rng(rng))
    try:
        return _approx_rec(o, k, delta, st, "root")
    finally:
        if flags is not None:
            flags.extend(st.flags)
        if samples is not None:
            for level, m in st.samples.items():
                samples[level] = samples.get(level, 0) + m


def approx_query_count(n: int, k: int, epsilon: float, delta: float,
                       cost: tuple[int, int] = (1, 0)) -> tuple[int, int]:
    """Exact ledger of ``approx_learn_ck`` under the implemented sample counts."""
    ep = epsilon_prime(epsilon, k)

    def rec(level, d, f, c):
        if level == 1:
            m = majority_sample_count(ep, d)
            return m * f, m * c
        part = d / (2 * n + 1)
        cf, cc = rec(level - 1, part, f + c, f + c)
        m = majority_sample_count(ep, part)
        return 2 * n * cf + m * f, 2 * n * cc + m * c

    return rec(k, delta, *cost)


# ----------------------------------------------------------------------------
# report wrapper


LearnedObject = Union[PauliOperator, CliffordTableau, ConjugationTable]


def run_learner(kind: str, o: OracleHandle, rng=None, *, k: int = 2, epsilon: float = 0.0,
                delta: float = 0.1) -> LearnReport:
    """Run one learner and wrap the outcome with its ledger and expected ledger."""
    n = o.n
    before = o.ledger.snapshot()
    start = time.perf_counter()
    flags: list[str] = []
    learned: LearnedObject | None = None
    success = True
    samples: dict[int, int] = {}
    try:
        if kind == "pauli":
            learned, expected = learn_pauli(o, rng), (1, 0)
        elif kind == "clifford":
            learned, expected = learn_clifford(o, rng), query_budget(n, 2)
        elif kind == "ck":
            learned, expected = learn_ck(o, k, rng), query_budget(n, k)
            if k >= 3 and nested_query_count(n, k) != expected:
                flags.append(f"nested accounting gives {nested_query_count(n, k)}")
        elif kind == "approx":
            expected = approx_query_count(n, k, epsilon, delta)
            learned = approx_learn_ck(o, k, epsilon, delta, rng, flags=flags, samples=samples)
        else:
            raise ValueError(f"unknown learner {kind!r}")
    except (NotInHierarchy, LearningFailed) as exc:
        success = False
        flags.append(str(exc))
        expected = None
    after = o.ledger.snapshot()
    ledger = (after[0] - before[0], after[1] - before[1])
    return LearnReport(learned, ledger, expected, samples, success, flags, time.perf_counter() - start)
