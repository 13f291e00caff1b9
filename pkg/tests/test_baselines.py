import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from palette.baselines import (ClassifierGuidedStrategy, LinearStrategy, UnionStrategy, classifier_guided,
                               union_combine, weighted_log_linear)
from palette.combine import ANTI, AttributeSpec
from palette.dist import TokenDistribution, Vocabulary
from palette.errors import DegenerateProduct, InvalidProbability, VocabMismatch
from palette.providers import TabularModel


def d(vocab, probs):
    return TokenDistribution(vocab, probs)


def test_weighted_log_linear_examples(ab):
    x = d(ab, [0.3, 0.7])
    np.testing.assert_allclose(weighted_log_linear([x], [1.0]).probs, x.probs, atol=1e-15)
    out = weighted_log_linear([d(ab, [0.5, 0.5]), d(ab, [0.9, 0.1])], [1.0, -0.6])
    # 0.5 * 0.9^-0.6 vs 0.5 * 0.1^-0.6
    a, b = 0.9 ** -0.6, 0.1 ** -0.6
    np.testing.assert_allclose(out.probs, [a / (a + b), b / (a + b)], rtol=1e-12)
    np.testing.assert_allclose(out.probs, [0.211, 0.789], atol=5e-4)
    np.testing.assert_array_equal(weighted_log_linear([x, d(ab, [0.9, 0.1])], [0, 0]).probs, [0.5, 0.5])


def test_weighted_log_linear_errors(ab, abc):
    with pytest.raises(ValueError):
        weighted_log_linear([], [])
    with pytest.raises(ValueError):
        weighted_log_linear([d(ab, [0.5, 0.5])], [math.inf])
    with pytest.raises(VocabMismatch):
        weighted_log_linear([d(ab, [0.5, 0.5]), d(abc, [1, 1, 1])], [1, 1])


def test_union_examples(ab, abc):
    x = d(ab, [0.3, 0.7])
    np.testing.assert_allclose(union_combine(x, x).probs, x.probs, atol=1e-15)
    np.testing.assert_allclose(union_combine(d(ab, [0.8, 0.2]), d(ab, [0.2, 0.8])).probs, [0.5, 0.5])
    out = union_combine(d(abc, [0.7, 0.2, 0.1]), d(abc, [0.1, 0.6, 0.3]))
    np.testing.assert_allclose(out.probs, [0.4375, 0.375, 0.1875], atol=1e-15)


@settings(max_examples=200, deadline=None)
@given(st.lists(st.floats(0.001, 1), min_size=4, max_size=4), st.lists(st.floats(0.001, 1), min_size=4, max_size=4))
def test_union_commutative_idempotent(p, q):
    v = Vocabulary(list("wxyz"))
    a, b = d(v, p), d(v, q)
    np.testing.assert_array_equal(union_combine(a, b).probs, union_combine(b, a).probs)
    np.testing.assert_allclose(union_combine(a, a).probs, a.probs, rtol=1e-15)


def test_classifier_examples(abc):
    base = d(abc, [0.2, 0.5, 0.3])
    np.testing.assert_allclose(classifier_guided(base, [0.4, 0.4, 0.4]).probs, base.probs, rtol=1e-15)
    # excluded tokens sit at the EPS floor every distribution keeps
    np.testing.assert_allclose(classifier_guided(base, [1, 0, 1]).probs, [0.4, 0, 0.6], atol=1.5e-12)
    ab = Vocabulary(["a", "b"])
    np.testing.assert_allclose(classifier_guided(d(ab, [0.5, 0.5]), [0.9, 0.1]).probs, [0.9, 0.1], atol=1e-15)


def test_classifier_errors(abc):
    base = d(abc, [0.2, 0.5, 0.3])
    with pytest.raises(DegenerateProduct):
        classifier_guided(base, [0, 0, 0])
    with pytest.raises(InvalidProbability):
        classifier_guided(base, [1.5, 0, 0])
    with pytest.raises(ValueError):
        classifier_guided(base, [1, 1])


def test_linear_strategy_equals_unit_coefficient_rule(abc):
    base = TabularModel(abc, default=[0.2, 0.5, 0.3])
    pos = TabularModel(abc, default=[0.7, 0.2, 0.1])
    neg = TabularModel(abc, default=[0.1, 0.2, 0.7])
    attrs = [AttributeSpec("p", pos, 1.5), AttributeSpec("n", neg, 0.5, sign=ANTI)]
    got = LinearStrategy(base, attrs).next_distribution().probs
    z = 1 + 1.5 + 0.5
    w = (np.log([0.2, 0.5, 0.3]) + 1.5 * np.log([0.7, 0.2, 0.1]) - 0.5 * np.log([0.1, 0.2, 0.7])) / z
    expected = np.exp(w - w.max()) / np.exp(w - w.max()).sum()
    np.testing.assert_allclose(got, expected, rtol=1e-12)
    raw = LinearStrategy(base, attrs, normalize=False).weights()
    assert raw == [1.0, 1.5, -0.5]


def test_union_strategy(abc):
    ref = TabularModel(abc, default=[0.6, 0.3, 0.1])
    other = TabularModel(abc, default=[0.1, 0.2, 0.7])
    got = UnionStrategy(ref, other, 0.5).next_distribution().probs
    u = np.maximum([0.6, 0.3, 0.1], [0.1, 0.2, 0.7])
    u = u / u.sum()
    w = (np.log([0.6, 0.3, 0.1]) + 0.5 * np.log(u)) / 1.5
    np.testing.assert_allclose(got, np.exp(w) / np.exp(w).sum(), rtol=1e-12)


def test_classifier_strategy(abc):
    base = TabularModel(abc, default=[0.2, 0.5, 0.3])
    strat = ClassifierGuidedStrategy(base, lambda ctx: [1.0, 0.0, 1.0])
    np.testing.assert_allclose(strat.next_distribution(["a"]).probs, [0.4, 0.0, 0.6], atol=1.5e-12)
