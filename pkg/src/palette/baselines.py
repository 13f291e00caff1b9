"""Comparison strategies: weighted log-linear, union and classifier-guided."""
from __future__ import annotations

from typing import Callable, Sequence

import numpy as np

from .combine import AttributeSpec
from .dist import LogWeights, TokenDistribution, same_vocab, softmax_normalize
from .errors import DegenerateProduct, InvalidProbability
from .providers import AttributeModel


def weighted_log_linear(dists: Sequence[TokenDistribution], weights: Sequence[float]) -> TokenDistribution:
    """``softmax(sum_i w_i log p_i)``. Negative weights subtract a model."""
    if len(dists) == 0:
        raise ValueError("weighted_log_linear needs at least one term")
    if len(dists) != len(weights):
        raise ValueError("one weight per distribution")
    vocab = same_vocab(*(d.vocab for d in dists))
    w = np.asarray(weights, dtype=float)
    if not np.isfinite(w).all():
        raise ValueError("weights must be finite")
    logits = w @ np.array([d.log_probs() for d in dists])
    return softmax_normalize(LogWeights(vocab, logits))


def union_combine(d1: TokenDistribution, d2: TokenDistribution) -> TokenDistribution:
    """Token-wise maximum of two distributions, renormalized."""
    vocab = same_vocab(d1.vocab, d2.vocab)
    return TokenDistribution(vocab, np.maximum(d1.probs, d2.probs))


def classifier_guided(base: TokenDistribution, scores) -> TokenDistribution:
    """Reweight ``base`` by per-token attribute scores in ``[0, 1]``."""
    scores = np.asarray(scores, dtype=float)
    if scores.shape != base.probs.shape:
        raise ValueError(f"expected {base.probs.size} scores, got shape {scores.shape}")
    if not np.isfinite(scores).all() or (scores < 0).any() or (scores > 1).any():
        raise InvalidProbability("scores must lie in [0, 1]")
    prod = base.probs * scores
    if prod.sum() <= 0:
        raise DegenerateProduct("every token has zero guided probability")
    return TokenDistribution(base.vocab, prod)


class LinearStrategy(AttributeModel):
    """Weighted log-linear combination of a base and signed attributes.

    Uses the same inputs as :class:`~palette.combine.Palette` but a fixed
    coefficient of 1 per model: ``log P_b + sum_i f_i s_i log p_i``. With
    ``normalize`` the weights are divided by ``1 + sum_i s_i`` so the result
    sits on the same scale as the base model.
    """

    name = "linear"

    def __init__(self, base: AttributeModel, attributes: Sequence[AttributeSpec], normalize: bool = True):
        self.base = base
        self.attributes = tuple(attributes)
        self.vocab = same_vocab(base.vocab, *(a.model.vocab for a in self.attributes))
        self.normalize = normalize

    def weights(self) -> list[float]:
        w = [1.0] + [a.factor * a.strength for a in self.attributes]
        if self.normalize:
            z = 1.0 + sum(a.strength for a in self.attributes)
            w = [x / z for x in w]
        return w

    def next_distribution(self, context=()):
        context = self.vocab.check(context, "context")
        dists = [self.base.next_distribution(context)]
        dists += [a.model.next_distribution(context) for a in self.attributes]
        return weighted_log_linear(dists, self.weights())


class UnionStrategy(AttributeModel):
    """``reference`` combined with ``union(other, reference)`` at weight ``coefficient``.

    ``log p = (log p_ref + r log union(p_other, p_ref)) / (1 + r)``; the
    reference model plays the role of the base.
    """

    name = "union"

    def __init__(self, reference: AttributeModel, other: AttributeModel, coefficient: float = 1.0):
        self.reference = reference
        self.other = other
        self.vocab = same_vocab(reference.vocab, other.vocab)
        self.coefficient = float(coefficient)

    def next_distribution(self, context=()):
        context = self.vocab.check(context, "context")
        ref = self.reference.next_distribution(context)
        u = union_combine(self.other.next_distribution(context), ref)
        r = self.coefficient
        return weighted_log_linear([ref, u], [1.0 / (1.0 + r), r / (1.0 + r)])


class ClassifierGuidedStrategy(AttributeModel):
    """``base`` reweighted by ``scorer(context)``, a per-token score vector."""

    name = "classifier"

    def __init__(self, base: AttributeModel, scorer: Callable[[tuple], Sequence[float]]):
        self.base = base
        self.vocab = base.vocab
        self.scorer = scorer

    def next_distribution(self, context=()):
        context = self.vocab.check(context, "context")
        return classifier_guided(self.base.next_distribution(context), self.scorer(context))
