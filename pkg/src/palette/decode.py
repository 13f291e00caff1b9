"""Autoregressive generation and perplexity."""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .dist import TokenDistribution
from .errors import EmptySequence, GenerationError, PaletteError
from .providers import AttributeModel

GREEDY = "greedy"
TEMPERATURE = "temperature"
TOP_K = "top_k"
TOP_P = "top_p"
SAMPLER_KINDS = (GREEDY, TEMPERATURE, TOP_K, TOP_P)


@dataclass(frozen=True)
class SamplerConfig:
    kind: str = TEMPERATURE
    temperature: float = 1.0
    k: int = 10
    p: float = 0.9
    seed: int = 0

    def __post_init__(self):
        if self.kind not in SAMPLER_KINDS:
            raise ValueError(f"sampler kind must be one of {SAMPLER_KINDS}")
        if not self.temperature > 0:
            raise ValueError("temperature must be positive")
        if self.kind == TOP_K and self.k < 1:
            raise ValueError("k must be >= 1")
        if self.kind == TOP_P and not 0 < self.p <= 1:
            raise ValueError("p must lie in (0, 1]")
        if not 0 <= int(self.seed) < 2**64:
            raise ValueError("seed must be an unsigned 64-bit integer")

    def rng(self) -> np.random.Generator:
        return np.random.default_rng(int(self.seed))


def sample_index(probs: np.ndarray, sampler: SamplerConfig, rng: np.random.Generator | None) -> int:
    """Draw one token index.

    Every stochastic kind consumes exactly one uniform draw and inverts the
    CDF in vocabulary order, which keeps runs reproducible and lets callers
    share random numbers across strategies.
    """
    if sampler.kind == GREEDY:
        return int(np.argmax(probs))
    logp = np.log(probs) / sampler.temperature
    w = np.exp(logp - logp.max())
    if sampler.kind == TOP_K:
        # stable sort: among ties the lower index is kept
        order = np.argsort(-w, kind="stable")
        w[order[sampler.k:]] = 0.0
    elif sampler.kind == TOP_P:
        order = np.argsort(-w, kind="stable")
        sorted_w = w[order] / w.sum()
        keep = np.cumsum(sorted_w) - sorted_w < sampler.p
        w[order[~keep]] = 0.0
    cdf = np.cumsum(w)
    u = rng.random() * cdf[-1]
    return int(min(np.searchsorted(cdf, u, side="right"), len(w) - 1))


@dataclass
class GenerationTrace:
    prompt: tuple
    tokens: list = field(default_factory=list)
    step_distributions: list = field(default_factory=list)
    step_terms: list = field(default_factory=list)

    @property
    def text(self) -> str:
        return " ".join(self.tokens)


def _step(strategy: AttributeModel, context):
    combine = getattr(strategy, "combine", None)
    if combine is not None:
        return combine(context)
    return strategy.next_distribution(context), None


def generate(strategy: AttributeModel, prompt: Sequence[str] = (), max_tokens: int = 16,
             sampler: SamplerConfig | None = None, rng: np.random.Generator | None = None) -> GenerationTrace:
    """Sample up to ``max_tokens`` tokens after ``prompt``.

    ``strategy`` is any model; if it exposes ``combine(context)`` (as
    :class:`~palette.combine.Palette` does) the per-step terms are recorded
    too. ``rng`` defaults to a generator seeded from ``sampler.seed``.
    Generation stops early after the vocabulary's end-of-text token.
    """
    if max_tokens < 0:
        raise ValueError("max_tokens must be >= 0")
    sampler = sampler or SamplerConfig()
    if rng is None and sampler.kind != GREEDY:
        rng = sampler.rng()
    vocab = strategy.vocab
    context = vocab.check(prompt, "prompt")
    trace = GenerationTrace(prompt=context)
    for step in range(max_tokens):
        try:
            dist, terms = _step(strategy, context)
        except PaletteError as exc:
            raise GenerationError(step, exc) from exc
        tok = vocab.tokens[sample_index(dist.probs, sampler, rng)]
        trace.tokens.append(tok)
        trace.step_distributions.append(dist)
        trace.step_terms.append(terms)
        context = context + (tok,)
        if tok == vocab.eos:
            break
    return trace


def step_probabilities(reference: AttributeModel, tokens: Sequence[str], prompt: Sequence[str] = ()) -> np.ndarray:
    """``p_ref(token_t | prompt + tokens_<t)`` for every position."""
    vocab = reference.vocab
    context = vocab.check(prompt, "prompt")
    tokens = vocab.check(tokens, "scored tokens")
    out = np.empty(len(tokens))
    for i, tok in enumerate(tokens):
        dist: TokenDistribution = reference.next_distribution(context)
        out[i] = dist.probs[vocab.index(tok)]
        context = context + (tok,)
    return out


def sequence_log_probs(reference: AttributeModel, tokens: Sequence[str], prompt: Sequence[str] = ()) -> np.ndarray:
    return np.log(step_probabilities(reference, tokens, prompt))


def perplexity(reference: AttributeModel, tokens: Sequence[str], prompt: Sequence[str] = ()) -> float:
    """``exp`` of the mean negative log-likelihood of ``tokens`` under ``reference``.

    The logs are taken relative to the first step probability ``p0`` and
    summed exactly, so a constant sequence gives exactly ``1 / p0``.
    """
    if len(tokens) == 0:
        raise EmptySequence("perplexity of an empty sequence")
    probs = step_probabilities(reference, tokens, prompt)
    p0 = probs[0]
    rel = math.fsum(np.log(probs / p0)) / len(probs)
    return float(math.exp(-rel) / p0)
