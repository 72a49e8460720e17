"""CLOSE/FAR property tester for Clifford unitaries.

The tester learns a candidate Clifford C with the approximate learner (run at
distance 1/3), then estimates for each generator g the magnitude of
tr(U sigma_g U^dagger C sigma_g C^dagger) / 2^n.  That magnitude squared is
the probability of the identity outcome when Bell sampling the channel
(C sigma_g C^dagger)^dagger U sigma_g U^dagger, so each sample is one Bell
round costing one U and one U^dagger.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np

from . import metric
from .gf2pauli import GeneratorIndex, PauliOperator, generators, to_dense
from .learn import LearningFailed, approx_learn_ck, approx_query_count
from .oracle import OracleHandle, _as_rng
from .tableau import CliffordTableau, conjugate_pauli, tableau_to_json

__all__ = [
    "CLOSE",
    "FAR",
    "FAILED_LEARN",
    "LEARN_DISTANCE",
    "TestVerdict",
    "InstanceCertificate",
    "overlap_sample_count",
    "estimate_overlap_magnitude",
    "tester_parameters",
    "tester_query_budget",
    "clifford_test",
    "true_overlaps",
    "certify_instance",
]

CLOSE = "CLOSE"
FAR = "FAR"
FAILED_LEARN = "FAILED-LEARN"
LEARN_DISTANCE = 1 / 3


def overlap_sample_count(eta: float, delta: float) -> int:
    """Rounds so the identity frequency lands within eta^2 w.p. >= 1 - delta (Hoeffding)."""
    if not 0 < eta < 1 or not 0 < delta < 1:
        raise ValueError("eta and delta must lie in (0, 1)")
    return math.ceil(math.log(2 / delta) / (2 * eta**4))


def _target(c: CliffordTableau, g: GeneratorIndex) -> PauliOperator:
    return conjugate_pauli(c, g.pauli(c.n))


def estimate_overlap_magnitude(o: OracleHandle, g: GeneratorIndex, c: CliffordTableau,
                               eta: float, delta: float, rng=None) -> float:
    m = overlap_sample_count(eta, delta)
    counts = o.sandwiched(g).residual_counts(_target(c, g), m, _as_rng(rng))
    hits = counts.get(PauliOperator.identity(o.n), 0)
    return math.sqrt(hits / m)


def tester_parameters(n: int, epsilon: float, delta: float) -> dict:
    eta = epsilon**2 / (16 * n**2)
    return {
        "eta": eta,
        "threshold": 1 - 3 * epsilon**2 / (16 * n**2),
        "learn_delta": delta / 2,
        "estimate_delta": delta / (4 * n),
        "samples_per_estimate": overlap_sample_count(eta, delta / (4 * n)),
    }


def tester_query_budget(n: int, epsilon: float, delta: float) -> tuple[int, int]:
    """Exact ledger of ``clifford_test``: learner stage plus 2n estimates."""
    p = tester_parameters(n, epsilon, delta)
    lf, lc = approx_query_count(n, 2, LEARN_DISTANCE, p["learn_delta"])
    m = p["samples_per_estimate"]
    return lf + 2 * n * m, lc + 2 * n * m


@dataclass
class TestVerdict:
    __test__ = False  # not a pytest class

    verdict: str
    learned_clifford: CliffordTableau | None
    estimates: list[float]
    threshold: float
    eta: float
    samples_per_estimate: int
    ledger: tuple[int, int]
    budget: tuple[int, int]
    flags: list[str] = field(default_factory=list)

    def to_json(self) -> dict:
        return {
            "verdict": self.verdict,
            "learned_clifford": None
            if self.learned_clifford is None
            else tableau_to_json(self.learned_clifford),
            "estimates": list(self.estimates),
            "threshold": self.threshold,
            "eta": self.eta,
            "samples_per_estimate": self.samples_per_estimate,
            "ledger": {"forward": self.ledger[0], "conjugate": self.ledger[1]},
            "budget": {"forward": self.budget[0], "conjugate": self.budget[1]},
            "flags": list(self.flags),
        }


def clifford_test(o: OracleHandle, epsilon: float, delta: float, rng=None) -> TestVerdict:
    if not 0 < epsilon < 1 or not 0 < delta < 1:
        raise ValueError("epsilon and delta must lie in (0, 1)")
    rng = _as_rng(rng)
    n = o.n
    p = tester_parameters(n, epsilon, delta)
    budget = tester_query_budget(n, epsilon, delta)
    start = o.ledger.snapshot()
    flags: list[str] = []

    def spent():
        now = o.ledger.snapshot()
        return now[0] - start[0], now[1] - start[1]

    try:
        table = approx_learn_ck(o, 2, LEARN_DISTANCE, p["learn_delta"], rng, flags=flags)
        c = table.to_tableau()
    except LearningFailed as exc:
        flags.append(str(exc))
        return TestVerdict(FAILED_LEARN, None, [], p["threshold"], p["eta"],
                           p["samples_per_estimate"], spent(), budget, flags)
    estimates = [
        estimate_overlap_magnitude(o, g, c, p["eta"], p["estimate_delta"], rng) for g in generators(n)
    ]
    verdict = CLOSE if all(e >= p["threshold"] for e in estimates) else FAR
    return TestVerdict(verdict, c, estimates, p["threshold"], p["eta"],
                       p["samples_per_estimate"], spent(), budget, flags)


# ----------------------------------------------------------------------------
# dense certificates (trusted inspection, n <= 2)


def true_overlaps(u, c: CliffordTableau) -> list[complex]:
    """tr(U sigma_g U^dagger C sigma_g C^dagger) / 2^n for each generator."""
    m = np.asarray(u, dtype=complex)
    d = m.shape[0]
    out = []
    for g in generators(c.n):
        s = to_dense(g.pauli(c.n))
        out.append(complex(np.trace(m @ s @ m.conj().T @ to_dense(_target(c, g)))) / d)
    return out


@lru_cache(maxsize=None)
def _class_targets(n: int) -> np.ndarray:
    tabs, _ = metric.clifford_classes(n)
    out = np.array([[to_dense(_target(t, g)) for g in generators(n)] for t in tabs])
    out.setflags(write=False)
    return out


def _all_overlaps(u: np.ndarray, n: int) -> np.ndarray:
    # |overlap| for every Clifford class and generator, shape (classes, 2n)
    conj = np.stack([u @ to_dense(g.pauli(n)) @ u.conj().T for g in generators(n)])
    return np.abs(np.einsum("gij,kgji->kg", conj, _class_targets(n))) / u.shape[0]


@dataclass(frozen=True)
class InstanceCertificate:
    kind: str
    n: int
    epsilon: float
    nearest_distance: float
    nearest: CliffordTableau
    promise_holds: bool
    chain_holds: bool
    min_overlap_nearest: float
    traces_positive: bool
    reasons: tuple[str, ...] = ()

    def to_json(self) -> dict:
        return {
            "kind": self.kind,
            "n": self.n,
            "epsilon": self.epsilon,
            "nearest_distance": self.nearest_distance,
            "nearest": tableau_to_json(self.nearest),
            "promise_holds": self.promise_holds,
            "chain_holds": self.chain_holds,
            "min_overlap_nearest": self.min_overlap_nearest,
            "traces_positive": self.traces_positive,
            "reasons": list(self.reasons),
        }


def certify_instance(u, epsilon: float, kind: str) -> InstanceCertificate:
    """Check the CLOSE or FAR promise and the overlap chain by exhaustive enumeration."""
    if kind not in (CLOSE, FAR):
        raise ValueError("kind must be CLOSE or FAR")
    m = np.asarray(u, dtype=complex)
    n = m.shape[0].bit_length() - 1
    near = metric.nearest_clifford(m)
    ov = [abs(v) for v in true_overlaps(m, near.tableau)]
    traces_positive = all(v.real > 0 for v in true_overlaps(m, near.tableau))
    reasons = []
    if kind == CLOSE:
        bound = epsilon / (math.sqrt(32) * n)
        promise = near.distance <= bound + 1e-9
        if not promise:
            reasons.append(f"nearest distance {near.distance:.6g} exceeds {bound:.6g}")
        chain = min(ov) >= 1 - epsilon**2 / (8 * n**2)
        if not chain:
            reasons.append("an overlap with the nearest Clifford is below 1 - eps^2/(8n^2)")
    else:
        promise = epsilon < near.distance <= LEARN_DISTANCE
        if not promise:
            reasons.append(
                f"nearest distance {near.distance:.6g} is outside ({epsilon:g}, {LEARN_DISTANCE:.6g}]"
            )
        # every Clifford must have some generator overlap under the bound
        worst = _all_overlaps(m, n).min(axis=1)
        chain = bool(np.all(worst < 1 - epsilon**2 / (4 * n**2)))
        if not chain:
            reasons.append("some Clifford has every overlap >= 1 - eps^2/(4n^2)")
    return InstanceCertificate(kind, n, epsilon, near.distance, near.tableau, promise, chain,
                               min(ov), traces_positive, tuple(reasons))
