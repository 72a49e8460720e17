import math

import numpy as np
import pytest

from cliffordlearn import cltest
from cliffordlearn.cltest import (
    CLOSE,
    FAILED_LEARN,
    FAR,
    certify_instance,
    clifford_test,
    estimate_overlap_magnitude,
    overlap_sample_count,
    true_overlaps,
)
from cliffordlearn.densesim import named_gate, random_unitary
from cliffordlearn.gf2pauli import GeneratorIndex, generators
from cliffordlearn.oracle import dense_oracle, make_perturbed_clifford, tableau_oracle, trusted_unitary
from cliffordlearn.tableau import identity_tableau, random_clifford

X0 = GeneratorIndex("X", 0)


def test_sample_count_example():
    assert overlap_sample_count(0.05, 0.01) == 423866
    assert overlap_sample_count(0.05, 0.01) == math.ceil(math.log(200) / (2 * 0.05**4))


def test_estimate_exact_clifford(rng):
    c = random_clifford(2, 3)
    o = tableau_oracle(c)
    m = overlap_sample_count(0.1, 0.05)
    for g in generators(2):
        assert estimate_overlap_magnitude(o, g, c, 0.1, 0.05, rng) >= 1 - 0.1
    assert o.ledger.snapshot() == (4 * m, 4 * m)


def test_estimate_t_gate(rng):
    t = named_gate("T").entries
    truth = abs(true_overlaps(t, identity_tableau(1))[0])
    assert truth == pytest.approx(1 / math.sqrt(2))
    est = estimate_overlap_magnitude(dense_oracle(t), X0, identity_tableau(1), 0.05, 0.01, rng)
    assert abs(est - truth) <= 0.05


@pytest.mark.parametrize("eta", [0.1, 0.05])
def test_estimator_calibration(eta):
    rng = np.random.default_rng(int(eta * 1000))
    delta = 0.1
    good = 0
    pairs = 20
    for _ in range(pairs):
        u = random_unitary(1, rng).entries
        c = random_clifford(1, rng)
        truth = abs(true_overlaps(u, c)[0])
        good += abs(estimate_overlap_magnitude(dense_oracle(u), X0, c, eta, delta, rng) - truth) <= eta
    assert good >= pairs * (1 - delta) - 3 * math.sqrt(pairs * delta * (1 - delta))


def test_parameters():
    p = cltest.tester_parameters(2, 0.8, 0.1)
    assert p["eta"] == pytest.approx(0.64 / 64)
    assert p["threshold"] == pytest.approx(1 - 3 * 0.64 / 64)
    assert p["estimate_delta"] == pytest.approx(0.1 / 8)


def test_close_instance_verdict():
    eps = 0.8
    for seed in range(10):
        c = random_clifford(1, seed)
        o = make_perturbed_clifford(c, eps / math.sqrt(32), seed)
        v = clifford_test(o, eps, 0.1, seed)
        assert v.verdict == CLOSE
        assert v.ledger == v.budget == cltest.tester_query_budget(1, eps, 0.1)
        assert (v.verdict == CLOSE) == all(e >= v.threshold for e in v.estimates)


def test_far_instance_verdict():
    eps = 0.3
    for seed in range(10):
        o = make_perturbed_clifford(random_clifford(1, seed), 0.32, seed)
        cert = certify_instance(trusted_unitary(o), eps, FAR)
        if not (cert.promise_holds and cert.chain_holds):
            continue
        v = clifford_test(o, eps, 0.1, seed)
        assert v.verdict == FAR
        assert v.ledger == v.budget


def test_failed_learn():
    o = dense_oracle(random_unitary(3, np.random.default_rng(0)))
    v = clifford_test(o, 0.5, 0.1, 0)
    assert v.verdict == FAILED_LEARN and v.learned_clifford is None and v.flags


def test_certificates():
    eps = 0.8
    for n in (1, 2):
        c = random_clifford(n, 1)
        o = make_perturbed_clifford(c, eps / (math.sqrt(32) * n), 1)
        cert = certify_instance(trusted_unitary(o), eps, CLOSE)
        assert cert.promise_holds and cert.chain_holds and cert.traces_positive
        assert cert.nearest == c
    # no Clifford-promise instance exists for FAR at eps = 0.8
    o = make_perturbed_clifford(random_clifford(1, 2), 0.33, 2)
    cert = certify_instance(trusted_unitary(o), 0.8, FAR)
    assert not cert.promise_holds and cert.reasons


def test_t_gate_violates_far_promise():
    cert = certify_instance(named_gate("T").entries, 0.3, FAR)
    assert cert.nearest_distance == pytest.approx(0.38268, abs=1e-5)
    assert not cert.promise_holds


def test_verdict_json():
    c = random_clifford(1, 0)
    v = clifford_test(tableau_oracle(c), 0.5, 0.1, 0)
    data = v.to_json()
    assert data["verdict"] == CLOSE
    assert data["ledger"]["forward"] == v.ledger[0]
