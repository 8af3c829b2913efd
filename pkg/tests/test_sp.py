import numpy as np
import pytest

from ctmcreduce.classify import classify_states, limit_jump_matrix
from ctmcreduce.errors import FastRecurrentClass, NotSingularlyPerturbed
from ctmcreduce.model import Generator, generator_at, load_model
from ctmcreduce.reduce import Distribution, ReducedChain, collapse_distribution, reduced_generator
from ctmcreduce.sp import outer_expansion, sp_classify, sp_collapse, sp_decompose, sp_reduced_generator

from randmodels import random_reducible_models

LAMBDA_FREE = {"states": ["a", "b", "c"], "rates": {"a->b": "1", "b->c": "2.5", "c->a": "0.5"}}


def test_three_state_tilde_row(three_state):
    d = sp_decompose(three_state)
    np.testing.assert_array_equal(d.tilde[:2], 0)
    np.testing.assert_array_equal(d.tilde[2], [4, 2, -6])
    np.testing.assert_array_equal(d.hat[2], 0)
    np.testing.assert_array_equal(d.hat[0], [-9, 3, 6])


def test_counterexample_is_not_affine(counterexample):
    with pytest.raises(NotSingularlyPerturbed) as info:
        sp_decompose(counterexample)
    assert sorted(info.value.keys) == ["3->4", "4->3"]


def test_lambda_free_model():
    m = load_model(LAMBDA_FREE)
    d = sp_decompose(m)
    assert not d.tilde.any()
    np.testing.assert_array_equal(d.hat, generator_at(m, 3.0).entries)
    p = sp_classify(d)
    assert p.fast == () and p.slow == ("a", "b", "c")
    rc = sp_reduced_generator(d, p)
    np.testing.assert_array_equal(rc.gamma.entries, d.hat)


def test_negative_parts_rejected():
    m = load_model({"states": ["a", "b"], "rates": {"a->b": "2*lambda - 1", "b->a": "1"}})
    with pytest.raises(NotSingularlyPerturbed) as info:
        sp_decompose(m)
    assert info.value.keys == ["a->b"]


@pytest.mark.parametrize("fixture", ["three_state", "mwc"])
def test_decomposition_reproduces_generator(fixture, request):
    bundled = request.getfixturevalue(fixture)
    d = sp_decompose(bundled)
    for lam in (0.5, 10.0, 1e4):
        np.testing.assert_allclose(d.at(lam), generator_at(bundled, lam).entries, atol=1e-10, rtol=0)
    for mat in (d.tilde, d.hat):
        off = mat - np.diag(np.diag(mat))
        assert (off >= 0).all()
        assert np.abs(mat.sum(axis=1)).max() <= 1e-12


def test_fast_recurrent_class():
    m = load_model({
        "states": ["a", "b", "c"],
        "rates": {"a->b": "lambda", "b->a": "lambda", "a->c": "1", "c->a": "1"},
    })
    with pytest.raises(FastRecurrentClass) as info:
        sp_classify(sp_decompose(m))
    assert sorted(info.value.members) == ["a", "b"]


def test_three_state_classification_and_gamma(three_state):
    d = sp_decompose(three_state)
    p = sp_classify(d)
    assert p.slow == ("1", "2") and p.fast == ("3",)
    general = classify_states(three_state)
    assert (p.fast, p.slow) == (general.fast, general.slow)
    rc = sp_reduced_generator(d, p)
    np.testing.assert_allclose(rc.gamma.entries, [[-5, 5], [5 / 3, -5 / 3]], atol=1e-10, rtol=0)
    rc_general = reduced_generator(limit_jump_matrix(three_state, general), general)
    assert np.abs(rc.gamma.entries - rc_general.gamma.entries).max() <= 1e-10


def test_mwc_agrees(mwc):
    d = sp_decompose(mwc)
    p = sp_classify(d)
    general = classify_states(mwc)
    assert set(p.fast) == {"1", "2"} == set(general.fast)
    g_sp = sp_reduced_generator(d, p).gamma.entries
    g_gen = reduced_generator(limit_jump_matrix(mwc, general), general).gamma.entries
    assert np.abs(g_sp - g_gen).max() <= 1e-10
    np.testing.assert_allclose(g_sp, [[-0.5, 0.5], [0.2, -0.2]], atol=1e-12)


def test_random_affine_models_agree(rng):
    models = random_reducible_models(rng, 100, kinds=("const", "linear", "affine"))
    for m, p, ld, rc in models:
        d = sp_decompose(m)
        q = sp_classify(d)
        assert (q.fast, q.slow) == (p.fast, p.slow)
        g_sp = sp_reduced_generator(d, q).gamma.entries
        assert np.abs(g_sp - rc.gamma.entries).max() <= 1e-10
        pi = Distribution(m.states, rng.dirichlet(np.ones(m.size)))
        np.testing.assert_allclose(sp_collapse(d, q, pi).probs, collapse_distribution(pi, ld, p).probs, atol=1e-10)


def test_outer_expansion_at_zero(three_state):
    d = sp_decompose(three_state)
    p = sp_classify(d)
    rc = sp_reduced_generator(d, p)
    gp = sp_collapse(d, p, Distribution.delta(three_state.states, "3"))
    np.testing.assert_allclose(gp.probs, [2 / 3, 1 / 3], atol=1e-15)
    np.testing.assert_array_equal(outer_expansion(rc, gp, 0.0).probs, gp.probs)


def test_outer_expansion_constant_for_zero_gamma():
    rc = ReducedChain(("3", "4"), Generator(("3", "4"), np.zeros((2, 2))))
    gp = Distribution(("3", "4"), [0.3, 0.7])
    for t in (1.0, 1e3):
        np.testing.assert_array_equal(outer_expansion(rc, gp, t).probs, gp.probs)


def test_outer_expansion_long_time(three_state):
    d = sp_decompose(three_state)
    p = sp_classify(d)
    rc = sp_reduced_generator(d, p)
    out = outer_expansion(rc, Distribution.delta(p.slow, "1"), 50.0)
    np.testing.assert_allclose(out.probs, [0.25, 0.75], atol=1e-12)
