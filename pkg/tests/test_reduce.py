from fractions import Fraction as F

import numpy as np
import pytest

import ctmcreduce as cr
from ctmcreduce.classify import Partition, classify_states, limit_jump_matrix
from ctmcreduce.errors import LabelMismatch, ReducedChainUndefined
from ctmcreduce.model import load_model
from ctmcreduce.reduce import (
    Distribution,
    check_slow_reachability,
    collapse_distribution,
    first_passage_distribution,
    reduced_generator,
    reduced_irreducible,
    sufficient_condition,
)
from ctmcreduce.solve import tv_distance

from randmodels import random_reducible_models

# fast states revisit each other before leaving: Omega_AA = [[0, 2/3], [1/2, 0]]
LOOPED = {
    "states": ["f1", "f2", "s1", "s2"],
    "rates": {
        "f1->f2": "2*lambda", "f1->s1": "lambda", "f2->f1": "lambda", "f2->s2": "lambda",
        "s1->f1": "1", "s1->s2": "1", "s2->s1": "2", "s2->f2": "1",
    },
}
# spectral radius of Omega_AA is sqrt(0.99)
STICKY = {
    "states": ["f1", "f2", "s1", "s2"],
    "rates": {
        "f1->f2": "99*lambda", "f1->s1": "lambda", "f2->f1": "lambda",
        "s1->f1": "1", "s1->s2": "1", "s2->s1": "2", "s2->f2": "1",
    },
}
CLOSED_FAST = {
    "states": ["a", "b", "c"],
    "rates": {"a->b": "lambda", "b->a": "lambda", "a->c": "1", "c->a": "1"},
}


def _reduce(m):
    p = classify_states(m)
    ld = limit_jump_matrix(m, p)
    return p, ld


def test_counterexample_gamma_is_zero(counterexample):
    p, ld = _reduce(counterexample)
    assert check_slow_reachability(ld, p)
    rc = reduced_generator(ld, p)
    assert rc.labels == ("3", "4")
    assert np.abs(rc.gamma.entries).max() <= 1e-12
    assert not reduced_irreducible(rc)


def _closed_form_three_state(a12, a13, a21, a23, a31, a32):
    g12 = a12 + F(a13 * a32, a31 + a32)
    g21 = a21 + F(a23 * a31, a31 + a32)
    return [[-g12, g12], [g21, -g21]]


def test_three_state_gamma(three_state):
    p, ld = _reduce(three_state)
    rc = reduced_generator(ld, p)
    want = np.array(_closed_form_three_state(3, 6, 1, 1, 4, 2), dtype=float)
    np.testing.assert_allclose(rc.gamma.entries, want, atol=1e-10, rtol=0)
    np.testing.assert_allclose(want, [[-5, 5], [5 / 3, -5 / 3]])
    assert reduced_irreducible(rc)


def test_no_fast_states_gives_limit_generator():
    m = load_model({"states": ["a", "b"], "rates": {"a->b": "1 + 1/lambda", "b->a": "2"}})
    p, ld = _reduce(m)
    assert check_slow_reachability(ld, p)
    rc = reduced_generator(ld, p)
    np.testing.assert_array_equal(rc.gamma.entries, ld.q_BB)
    np.testing.assert_array_equal(rc.gamma.entries, [[-1, 1], [2, -2]])


def test_closed_fast_cycle_is_unreachable():
    m = load_model(CLOSED_FAST)
    p, ld = _reduce(m)
    assert p.fast == ("a", "b")
    assert not check_slow_reachability(ld, p)
    with pytest.raises(ReducedChainUndefined):
        reduced_generator(ld, p)
    with pytest.raises(ReducedChainUndefined):
        collapse_distribution(Distribution.uniform(m.states), ld, p)
    # at finite lambda the exit a->c still has positive probability
    fp = first_passage_distribution(m, 10.0, Distribution.delta(m.states, "a"))
    assert fp.probs.tolist() == [1.0]


def test_collapse_concentrated_on_slow(counterexample):
    p, ld = _reduce(counterexample)
    pi = Distribution.from_mapping(counterexample.states, {"3": 0.3, "4": 0.7})
    np.testing.assert_array_equal(collapse_distribution(pi, ld, p).probs, [0.3, 0.7])


def test_collapse_counterexample_delta_one(counterexample):
    p, ld = _reduce(counterexample)
    out = collapse_distribution(Distribution.delta(counterexample.states, "1"), ld, p)
    np.testing.assert_array_equal(out.probs, [1.0, 0.0])


def test_collapse_counterexample_uniform(counterexample):
    p, ld = _reduce(counterexample)
    out = collapse_distribution(Distribution.uniform(counterexample.states), ld, p)
    np.testing.assert_allclose(out.probs, [0.5, 0.5], atol=1e-15)


def test_collapse_label_mismatch(counterexample):
    p, ld = _reduce(counterexample)
    with pytest.raises(LabelMismatch):
        collapse_distribution(Distribution.uniform(["x", "y"]), ld, p)


def _counterexample_first_passage_exact(lam):
    """Closed-form 2x2 solve for the chain at lam started in state 1."""
    lam = F(lam)
    eps = 1 / (lam + 1)
    stay = lam / (lam + 1)
    det = 1 - eps * eps
    return float(stay / det), float(eps * stay / det)


def test_first_passage_counterexample_closed_form(counterexample):
    pi = Distribution.delta(counterexample.states, "1")
    prev = None
    for lam in (10, 100, 1000):
        out = first_passage_distribution(counterexample, lam, pi)
        np.testing.assert_allclose(out.probs, _counterexample_first_passage_exact(lam), rtol=1e-12)
        gap = tv_distance(out, Distribution.delta(("3", "4"), "3"))
        if prev is not None:
            assert gap < prev
        prev = gap


def test_first_passage_from_slow_is_identity(bundled):
    p = classify_states(bundled)
    pi = Distribution.delta(bundled.states, p.slow[-1])
    for lam in (1.0, 37.0):
        out = first_passage_distribution(bundled, lam, pi, p)
        assert out[p.slow[-1]] == 1.0


def test_first_passage_without_fast_states():
    m = load_model({"states": ["a", "b"], "rates": {"a->b": "1", "b->a": "3"}})
    pi = Distribution.from_mapping(m.states, {"a": 0.25, "b": 0.75})
    np.testing.assert_array_equal(first_passage_distribution(m, 5.0, pi).probs, [0.25, 0.75])


def test_irreducibility_flags(counterexample, three_state):
    p, ld = _reduce(three_state)
    assert reduced_irreducible(reduced_generator(ld, p))
    p, ld = _reduce(counterexample)
    assert not reduced_irreducible(reduced_generator(ld, p))
    assert not sufficient_condition(ld)
    single = load_model({"states": ["f", "s"], "rates": {"f->s": "lambda", "s->f": "1"}})
    p, ld = _reduce(single)
    rc = reduced_generator(ld, p)
    assert rc.labels == ("s",)
    assert reduced_irreducible(rc)
    assert sufficient_condition(ld)


# ---------------------------------------------------------------------------
# oracles and properties

def _neumann_terms(omega_AA, tol=1e-8, max_terms=10000):
    """Partial sums of sum_n Omega_AA^n until they match the inverse."""
    k = omega_AA.shape[0]
    inv = np.linalg.inv(np.eye(k) - omega_AA)
    total = np.zeros((k, k))
    power = np.eye(k)
    for n in range(max_terms + 1):
        total += power
        if np.abs(total - inv).sum(axis=1).max() <= tol:
            return n, total
        power = power @ omega_AA
    return None, total


@pytest.mark.parametrize("doc", [LOOPED, STICKY], ids=["looped", "sticky"])
def test_neumann_series_matches_solve(doc):
    m = load_model(doc)
    p, ld = _reduce(m)
    n, partial = _neumann_terms(ld.omega_AA)
    assert n is not None and n <= 10000
    # Gamma from the truncated series agrees with the LU path
    rc = reduced_generator(ld, p)
    np.testing.assert_allclose(ld.q_BB + ld.q_BA @ partial @ ld.omega_AB, rc.gamma.entries, atol=1e-7)
    # probability of ever reaching B from each fast state
    mass = (partial @ ld.omega_AB).sum(axis=1)
    np.testing.assert_allclose(mass, 1.0, atol=1e-8)


def test_neumann_series_bundled(bundled):
    p, ld = _reduce(bundled)
    n, partial = _neumann_terms(ld.omega_AA)
    assert n is not None and n <= 10000
    np.testing.assert_allclose((partial @ ld.omega_AB).sum(axis=1), 1.0, atol=1e-8)


def test_looped_gamma_by_hand():
    # X = (I - W)^{-1} W_AB with W = [[0, 2/3], [1/2, 0]], W_AB = [[1/3, 0], [0, 1/2]]
    # (I - W)^{-1} = 3/2 [[1, 2/3], [1/2, 1]]; X = [[1/2, 1/2], [1/4, 3/4]]
    # Gamma = Q_BB + Q_BA X with Q_BA = diag(1, 1), Q_BB = [[-2, 1], [2, -3]]
    m = load_model(LOOPED)
    p, ld = _reduce(m)
    rc = reduced_generator(ld, p)
    np.testing.assert_allclose(rc.gamma.entries, [[-1.5, 1.5], [2.25, -2.25]], atol=1e-14)


def test_random_gamma_is_generator_and_dominates(rng):
    models = random_reducible_models(rng, 500)
    for m, p, ld, rc in models:
        g = rc.gamma.entries
        off = g - np.diag(np.diag(g))
        scale = max(1.0, np.abs(g).max())
        assert (off >= -1e-10 * scale).all()
        np.testing.assert_allclose(g.sum(axis=1), 0, atol=1e-10 * scale)
        qoff = ld.q_BB - np.diag(np.diag(ld.q_BB))
        assert (off >= qoff - 1e-10 * scale).all()
        if sufficient_condition(ld):
            assert reduced_irreducible(rc)


def test_random_collapsed_distributions(rng):
    models = random_reducible_models(rng, 500)
    for m, p, ld, rc in models:
        pi = Distribution(m.states, rng.dirichlet(np.ones(m.size)))
        out = collapse_distribution(pi, ld, p)
        assert (out.probs >= 0).all()
        assert abs(out.probs.sum() - 1) <= 1e-12
        assert out.labels == p.slow


def test_first_passage_converges_to_collapse(rng, bundled):
    cases = [(bundled,) + _reduce(bundled)]
    cases += [(m, p, ld) for m, p, ld, _ in random_reducible_models(rng, 50)]
    for m, p, ld in cases:
        pi = Distribution(m.states, rng.dirichlet(np.ones(m.size)))
        finite = first_passage_distribution(m, 1e8, pi, p)
        limit = collapse_distribution(pi, ld, p)
        np.testing.assert_allclose(finite.probs, limit.probs, atol=1e-6, rtol=0)


def test_partition_from_sets_orders_fast_first():
    p = Partition.from_sets(("a", "b", "c", "d"), {"c", "a"})
    assert p.labels == ("a", "c", "b", "d")
    assert p.perm == (0, 2, 1, 3)
