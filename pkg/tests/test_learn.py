import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from cliffordlearn import learn, metric
from cliffordlearn.densesim import named_gate, parse_gate_expression, random_unitary, tableau_unitary
from cliffordlearn.gf2pauli import PauliOperator, generators, parse_pauli, to_dense
from cliffordlearn.learn import (
    ConjugationTable,
    approx_learn_ck,
    approx_learn_pauli,
    approx_query_count,
    epsilon_prime,
    learn_ck,
    learn_clifford,
    learn_pauli,
    majority_sample_count,
    nested_query_count,
    query_budget,
    query_budget_recurrence,
    realize_unitary,
)
from cliffordlearn.oracle import dense_oracle, make_perturbed_clifford, pauli_oracle, tableau_oracle
from cliffordlearn.tableau import compose, gate_tableau, pauli_as_tableau, random_clifford

seeds = st.integers(0, 2**32)


def test_learn_pauli_examples():
    for label, want in (("+Z", "+Z"), ("-iXY", "+XY"), ("+III", "+III")):
        o = pauli_oracle(parse_pauli(label))
        assert learn_pauli(o) == parse_pauli(want)
        assert o.ledger.snapshot() == (1, 0)


def test_learn_pauli_dense_backend(rng):
    o = dense_oracle(-1j * to_dense(parse_pauli("+XY")))
    assert learn_pauli(o, rng) == parse_pauli("+XY")


def test_learn_clifford_hadamard():
    o = tableau_oracle(gate_tableau("H", 0))
    t = learn_clifford(o)
    assert t.x_images == (parse_pauli("+Z"),) and t.z_images == (parse_pauli("+X"),)
    assert t.x_signs == (1,) and t.z_signs == (1,)
    assert o.ledger.snapshot() == (3, 2)


def test_learn_clifford_n8():
    c = random_clifford(8, 2024)
    o = tableau_oracle(c)
    assert learn_clifford(o) == c
    assert o.ledger.snapshot() == (17, 16)


def test_learn_clifford_dense_backend(rng):
    for n in (1, 2, 3):
        c = random_clifford(n, n)
        o = dense_oracle(tableau_unitary(c))
        assert learn_clifford(o, rng) == c
        assert o.ledger.snapshot() == (2 * n + 1, 2 * n)


def test_sign_flip_from_z():
    c = random_clifford(3, 1)
    z1 = PauliOperator.single(3, 1, "Z")
    a = learn_clifford(tableau_oracle(c))
    b = learn_clifford(tableau_oracle(compose(c, pauli_as_tableau(z1))))
    assert a.x_images == b.x_images and a.z_images == b.z_images
    assert a.z_signs == b.z_signs
    assert [i for i in range(3) if a.x_signs[i] != b.x_signs[i]] == [1]


@settings(max_examples=100)
@given(st.integers(1, 6), seeds, st.data())
def test_phase_correction_identity(n, seed, data):
    c = random_clifford(n, seed)
    sigma = PauliOperator(n, data.draw(st.integers(0, 2**n - 1)), data.draw(st.integers(0, 2**n - 1)),
                          data.draw(st.sampled_from([0, 2])))
    expected = compose(c, pauli_as_tableau(sigma))
    assert learn_clifford(tableau_oracle(expected)) == expected


def test_not_clifford_detected():
    o = dense_oracle(random_unitary(3, np.random.default_rng(0)))
    with pytest.raises(learn.OracleNotClifford):
        learn_clifford(o, 0)


def test_learn_ck_level_one():
    o = pauli_oracle(parse_pauli("+YZ"))
    table = learn_ck(o, 1)
    assert table.pauli == parse_pauli("+YZ") and o.ledger.snapshot() == (1, 0) == query_budget(2, 1)


@given(st.integers(1, 5), seeds)
def test_collapse_to_clifford(n, seed):
    c = random_clifford(n, seed)
    a, b = tableau_oracle(c), tableau_oracle(c)
    assert learn_ck(a, 2, seed).to_tableau() == learn_clifford(b, seed) == c
    assert a.ledger.snapshot() == b.ledger.snapshot() == query_budget(n, 2)


def test_ck_level_three_t_gate(rng):
    o = dense_oracle(named_gate("T"))
    table = learn_ck(o, 3, rng)
    assert metric.d(realize_unitary(table), named_gate("T")) <= 1e-8
    # every use of a sandwiched channel is billed to both U and U^dagger
    assert o.ledger.snapshot() == nested_query_count(1, 3) == (11, 10)
    assert query_budget(1, 3) == (7, 4)


@pytest.mark.parametrize("expr", ["S*T", "T*H", "CS", "CSDG", "CZ*CS", "CS*S&I"])
def test_ck_level_three_realization(expr, rng):
    u = parse_gate_expression(expr)
    table = learn_ck(dense_oracle(u), 3, rng)
    w = realize_unitary(table)
    assert metric.d(w, u) <= 1e-8
    # stored images match generator conjugations of the realization
    n = table.n
    for g, child, s in zip(generators(n), table.children, table.signs):
        image = s * learn._hermitian_representative(realize_unitary(child))
        assert np.max(np.abs(w @ to_dense(g.pauli(n)) @ w.conj().T - image)) < 1e-8


def test_ck_level_three_ccz(rng):
    u = named_gate("CCZ")
    table = learn_ck(dense_oracle(u), 3, rng)
    assert metric.d(realize_unitary(table), u) <= 1e-8


def test_ck_level_four(rng):
    # sqrt(T) sits in C_4
    u = np.diag([1, np.exp(1j * np.pi / 8)])
    o = dense_oracle(u)
    table = learn_ck(o, 4, rng)
    assert metric.d(realize_unitary(table), u) <= 1e-8
    assert o.ledger.snapshot() == nested_query_count(1, 4)


def test_ck_not_in_hierarchy():
    u = random_unitary(2, np.random.default_rng(0))
    with pytest.raises(learn.NotInHierarchy):
        learn_ck(dense_oracle(u), 3, 0)


def test_realize_examples():
    h = named_gate("H").entries
    w = realize_unitary(ConjugationTable.from_tableau(gate_tableau("H", 0)))
    assert metric.d(w, h) < 1e-12
    flat = w.ravel()
    top = flat[np.argmax(np.abs(flat))]
    assert top.imag == pytest.approx(0) and top.real > 0
    w = realize_unitary(ConjugationTable(2, 1, pauli=parse_pauli("+XY")))
    assert metric.d(w, to_dense(parse_pauli("+XY"))) < 1e-12


def test_realize_inconsistent():
    child = ConjugationTable.from_tableau(gate_tableau("H", 0))
    bad = ConjugationTable(1, 3, children=(child, child), signs=(1, 1))
    with pytest.raises(learn.InconsistentTable):
        realize_unitary(bad)


def test_table_json_roundtrip(rng):
    table = learn_ck(dense_oracle(named_gate("T")), 3, rng)
    again = ConjugationTable.from_json(table.to_json())
    assert again == table


def test_query_budget_examples():
    assert query_budget(1, 2) == (3, 2)
    assert query_budget(2, 3) == (21, 16)
    for n in range(1, 10):
        assert query_budget(n, 1) == (1, 0)
        assert query_budget(n, 2) == (2 * n + 1, 2 * n)


def test_query_budget_recurrence():
    for n in range(1, 65):
        for k in range(1, 7):
            assert query_budget(n, k) == query_budget_recurrence(n, k)


def test_nested_count_closed_form():
    for n in range(1, 9):
        for k in range(1, 6):
            s = ((4 * n) ** (k - 1) - 1) // (4 * n - 1)
            want = (1, 0) if k == 1 else (2 * n * s + 1, 2 * n * s)
            assert nested_query_count(n, k) == want
        assert nested_query_count(n, 2) == query_budget(n, 2)


def test_epsilon_prime_examples():
    assert epsilon_prime(0, 1) == pytest.approx(math.sqrt(2) - 1)
    assert epsilon_prime(0, 4) == pytest.approx(0.41421, abs=1e-5)
    assert epsilon_prime(0.3, 2) == pytest.approx(math.sqrt(1.28) - 1)
    assert epsilon_prime(0.3, 2) == pytest.approx(0.13137, abs=1e-5)
    with pytest.raises(learn.PreconditionError):
        epsilon_prime(0.5, 2)
    with pytest.raises(learn.PreconditionError):
        epsilon_prime(1 / math.sqrt(2), 1)


def test_majority_sample_count():
    assert majority_sample_count(0.5, 0.1) == math.ceil(2 * math.log(20) / 0.25)
    with pytest.raises(learn.PreconditionError):
        majority_sample_count(0.0, 0.1)


@given(st.floats(0.01, 0.7), st.floats(1e-6, 0.5))
def test_gap_hypothesis(eps, delta):
    # |gamma|^2 >= 1 - eps^2 implies top probability >= (1 + eps')/2
    ep = epsilon_prime(eps, 1)
    assert 1 - eps**2 >= (1 + ep) / 2 - 1e-12
    m = majority_sample_count(ep, delta)
    assert 2 * math.exp(-m * ep**2 / 2) <= delta + 1e-12


def test_approx_pauli_exact(rng):
    o = pauli_oracle(parse_pauli("+X"))
    for _ in range(10):
        vote = approx_learn_pauli(o, epsilon_prime(0.1, 1), 0.05, rng)
        assert vote.label == parse_pauli("+X") and vote.majority and not vote.tie


def test_approx_pauli_perturbed():
    ep = epsilon_prime(0.2, 1)
    m = majority_sample_count(ep, 0.01)
    z = pauli_as_tableau(parse_pauli("+Z"))
    wins = 0
    for seed in range(1000):
        o = make_perturbed_clifford(z, 0.2, seed=seed % 50)
        wins += approx_learn_pauli(o, ep, 0.01, seed).label == parse_pauli("+Z")
        assert o.ledger.snapshot() == (m, 0)
    assert wins >= 990


def test_approx_pauli_boundary():
    u = (to_dense(parse_pauli("+X")) + to_dense(parse_pauli("+Z"))) / math.sqrt(2)
    assert metric.nearest_pauli(u).distance == pytest.approx(1 / math.sqrt(2))
    with pytest.raises(learn.PreconditionError):
        epsilon_prime(metric.nearest_pauli(u).distance, 1)


def test_approx_tie_is_flagged():
    o = dense_oracle(named_gate("H"))
    votes = [approx_learn_pauli(o, 0.9, 0.5, s) for s in range(200)]
    ties = [v for v in votes if v.tie]
    assert ties and all(v.label == parse_pauli("+X") for v in ties)  # X sorts before Z


def test_approx_ck_exact_clifford():
    for seed in range(20):
        c = random_clifford(1, seed)
        o = tableau_oracle(c)
        assert approx_learn_ck(o, 2, 0.05, 0.1, seed).to_tableau() == c
        assert o.ledger.snapshot() == approx_query_count(1, 2, 0.05, 0.1)


def test_approx_ck_perturbed_n2():
    wins = 0
    for seed in range(50):
        c = random_clifford(2, seed)
        o = make_perturbed_clifford(c, 0.05, seed)
        try:
            wins += approx_learn_ck(o, 2, 0.05, 0.1, seed).to_tableau() == c
        except learn.LearningFailed:
            pass
        assert o.ledger.snapshot() == approx_query_count(2, 2, 0.05, 0.1)
    assert wins >= 45


def test_approx_ck_level_three(rng):
    c = np.diag([1, np.exp(1j * np.pi / 4)])
    o = dense_oracle(c)
    table = approx_learn_ck(o, 3, 0.02, 0.1, rng)
    assert metric.d(realize_unitary(table), c) < 1e-8
    assert o.ledger.snapshot() == approx_query_count(1, 3, 0.02, 0.1)


def test_approx_ck_precondition_before_queries():
    o = tableau_oracle(random_clifford(1, 0))
    with pytest.raises(learn.PreconditionError):
        approx_learn_ck(o, 2, 1 / (2 * math.sqrt(2)), 0.1)
    assert o.ledger.snapshot() == (0, 0)


def test_run_learner_report(rng):
    c = random_clifford(3, 5)
    rep = learn.run_learner("clifford", tableau_oracle(c), rng)
    assert rep.success and rep.ledger_ok and rep.learned == c
    data = rep.to_json()
    assert data["ledger"] == {"forward": 7, "conjugate": 6}
    assert "seconds" not in data
    bad = learn.run_learner("clifford", dense_oracle(random_unitary(3, np.random.default_rng(0))), 0)
    assert not bad.success
