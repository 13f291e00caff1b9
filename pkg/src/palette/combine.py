"""Palette combination of a base model with attribute-conditioned models.

For every candidate token ``x`` the combined log-weight is::

    [sum_i f_i s_i c(p_i(x)) log p_i(x) + log P_b(x)] / M1
        + t [sum_i f_i s'_i c(q_i(x)) log q_i(x)] / M2

with ``q_i(x) = 1 - p_i(x)`` (the attribute model *not* predicting ``x``),
``f_i = +1`` for main and ``-1`` for anti attributes, and a per-token
coefficient ``c`` that is ``1 + 1/p`` in exact mode and
``1 + 1/sigmoid(p) = 2 + exp(-p)`` in sigmoid mode. The normalizers are
``M1 = 1 + (2 + 1/e) sum s_i`` and ``M2 = (2 + 1/e) sum s'_i``; canonical
scale drops ``M1`` (analysis form).
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .dist import EPS, LogWeights, TokenDistribution, Vocabulary, clamp_array, same_vocab, softmax_normalize
from .providers import AttributeModel

EXACT = "exact"
SIGMOID = "sigmoid"
MODES = (EXACT, SIGMOID)
NORMALIZED = "normalized"
CANONICAL = "canonical"
SCALES = (NORMALIZED, CANONICAL)
MAIN = "main"
ANTI = "anti"
SIGNS = (MAIN, ANTI)

# 1 + 1/sigmoid(1): smallest sigmoid-mode coefficient, used in M1 and M2
C_SIGMOID_MIN = 2.0 + math.exp(-1.0)


def coefficient_c(p, mode: str = SIGMOID, eps: float = EPS):
    """Per-token dynamic coefficient; works on scalars and arrays."""
    if mode == EXACT:
        return 1.0 + 1.0 / np.clip(p, eps, 1.0 - eps)
    if mode == SIGMOID:
        return 2.0 + np.exp(-np.asarray(p, dtype=float))
    raise ValueError(f"unknown mode {mode!r}")


def normalizers(strengths: Sequence[float], complement_strengths: Sequence[float]) -> tuple[float, float]:
    """``(M1, M2)`` for the given attribute strengths."""
    return (1.0 + C_SIGMOID_MIN * float(np.sum(strengths)),
            C_SIGMOID_MIN * float(np.sum(complement_strengths)))


@dataclass(frozen=True, eq=False)
class AttributeSpec:
    """One attribute in a combination.

    ``complement_strength`` defaults to ``strength``. ``attribute_tokens``
    are the tokens that express the attribute (used by analysis and
    scoring, not by the combination itself).
    """

    id: str
    model: AttributeModel
    strength: float = 1.0
    complement_strength: float | None = None
    sign: str = MAIN
    attribute_tokens: frozenset = frozenset()

    def __post_init__(self):
        if not (self.strength >= 0 and math.isfinite(self.strength)):
            raise ValueError(f"attribute {self.id!r}: strength must be finite and >= 0")
        if self.complement_strength is None:
            object.__setattr__(self, "complement_strength", float(self.strength))
        if not (self.complement_strength >= 0 and math.isfinite(self.complement_strength)):
            raise ValueError(f"attribute {self.id!r}: complement strength must be finite and >= 0")
        if self.sign not in SIGNS:
            raise ValueError(f"attribute {self.id!r}: sign must be 'main' or 'anti'")
        toks = frozenset(self.attribute_tokens)
        self.model.vocab.check(toks, f"attribute tokens of {self.id!r}")
        object.__setattr__(self, "attribute_tokens", toks)

    @property
    def factor(self) -> float:
        return 1.0 if self.sign == MAIN else -1.0

    def with_strength(self, s: float, complement: float | None = None) -> "AttributeSpec":
        """Copy with a new strength; the complement strength follows ``s`` unless given."""
        return AttributeSpec(self.id, self.model, s, s if complement is None else complement,
                             self.sign, self.attribute_tokens)


@dataclass(frozen=True, eq=False)
class PaletteConfig:
    base: AttributeModel
    attributes: tuple = ()
    t: float = 0.0
    mode: str = SIGMOID
    scale: str = NORMALIZED

    def __post_init__(self):
        object.__setattr__(self, "attributes", tuple(self.attributes))
        if not (self.t >= 0 and math.isfinite(self.t)):
            raise ValueError("t must be finite and >= 0")
        if self.mode not in MODES:
            raise ValueError(f"mode must be one of {MODES}")
        if self.scale not in SCALES:
            raise ValueError(f"scale must be one of {SCALES}")
        same_vocab(self.base.vocab, *(a.model.vocab for a in self.attributes))

    @property
    def vocab(self) -> Vocabulary:
        return self.base.vocab

    def replace(self, **changes) -> "PaletteConfig":
        fields = dict(base=self.base, attributes=self.attributes, t=self.t, mode=self.mode, scale=self.scale)
        fields.update(changes)
        return PaletteConfig(**fields)


@dataclass(frozen=True, eq=False)
class CombineTerms:
    """Audit record of one combination step.

    ``c`` and ``c_complement`` have shape ``(n_attributes, vocab_size)``.
    ``complement_active`` tells whether the t-weighted term was included.
    """

    c: np.ndarray = field(repr=False)
    c_complement: np.ndarray = field(repr=False)
    m1: float
    m2: float
    signs: tuple
    t: float
    mode: str
    scale: str
    complement_active: bool


def combine_terms(config: PaletteConfig, dists: Sequence[TokenDistribution]) -> CombineTerms:
    if len(dists) != len(config.attributes):
        raise ValueError("need one distribution per attribute")
    same_vocab(config.vocab, *(d.vocab for d in dists))
    V = config.vocab.size
    p = np.array([d.probs for d in dists]).reshape(len(dists), V)
    p = clamp_array(p)
    q = clamp_array(1.0 - p)
    s = [a.strength for a in config.attributes]
    s2 = [a.complement_strength for a in config.attributes]
    m1, m2 = normalizers(s, s2)
    return CombineTerms(
        c=coefficient_c(p, config.mode),
        c_complement=coefficient_c(q, config.mode),
        m1=m1,
        m2=m2,
        signs=tuple(a.factor for a in config.attributes),
        t=config.t,
        mode=config.mode,
        scale=config.scale,
        complement_active=config.t > 0 and m2 > 0,
    )


def palette_log_weights(base_probs, attr_probs, strengths, complement_strengths=None, signs=None,
                        t: float = 0.0, mode: str = SIGMOID, scale: str = NORMALIZED) -> np.ndarray:
    """Array form of the combination (no vocabulary bookkeeping).

    ``attr_probs`` has shape ``(n, V)``; returns the unnormalized log-weights.
    """
    base = clamp_array(base_probs)
    V = base.shape[-1]
    p = clamp_array(np.asarray(attr_probs, dtype=float).reshape(-1, V))
    n = p.shape[0]
    s = np.asarray(strengths, dtype=float).reshape(n)
    s2 = s if complement_strengths is None else np.asarray(complement_strengths, dtype=float).reshape(n)
    f = np.ones(n) if signs is None else np.asarray(signs, dtype=float).reshape(n)
    m1, m2 = normalizers(s, s2)
    if scale == CANONICAL:
        m1 = 1.0
    elif scale != NORMALIZED:
        raise ValueError(f"unknown scale {scale!r}")
    main = (f * s) @ (coefficient_c(p, mode) * np.log(p)) + np.log(base)
    w = main / m1
    if t > 0 and m2 > 0:
        q = clamp_array(1.0 - p)
        comp = (f * s2) @ (coefficient_c(q, mode) * np.log(q))
        w = w + t * comp / m2
    return w


def palette_from_distributions(config: PaletteConfig, base: TokenDistribution,
                               dists: Sequence[TokenDistribution]) -> tuple[TokenDistribution, CombineTerms]:
    terms = combine_terms(config, dists)
    same_vocab(config.vocab, base.vocab)
    attr = np.array([d.probs for d in dists]).reshape(len(dists), config.vocab.size)
    w = palette_log_weights(
        base.probs, attr,
        [a.strength for a in config.attributes],
        [a.complement_strength for a in config.attributes],
        terms.signs, config.t, config.mode, config.scale,
    )
    return softmax_normalize(LogWeights(config.vocab, w)), terms


def palette_combine(config: PaletteConfig, context: Sequence[str] = ()) -> tuple[TokenDistribution, CombineTerms]:
    """Combined next-token distribution at ``context`` plus its audit terms."""
    context = config.vocab.check(context, "context")
    base = config.base.next_distribution(context)
    dists = [a.model.next_distribution(context) for a in config.attributes]
    return palette_from_distributions(config, base, dists)


class Palette(AttributeModel):
    """A :class:`PaletteConfig` usable anywhere a model is expected."""

    name = "palette"

    def __init__(self, config: PaletteConfig):
        self.config = config
        self.vocab = config.vocab

    def combine(self, context=()):
        return palette_combine(self.config, context)

    def next_distribution(self, context=()):
        return palette_combine(self.config, context)[0]

