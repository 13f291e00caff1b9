"""Vocabulary-indexed probability vectors and log-space weights.

Distributions keep linear-space probabilities; every combination rule in the
package works on log views and only exponentiates once, in
:func:`softmax_normalize`.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

from .errors import InvalidProbability, InvalidWeight, UnknownToken, VocabMismatch

EPS = 1e-12


class Vocabulary:
    """Ordered set of distinct token strings.

    ``eos`` optionally names a reserved end-of-text token that stops
    generation once emitted.
    """

    __slots__ = ("tokens", "eos", "_index")

    def __init__(self, tokens: Iterable[str], eos: str | None = None):
        tokens = tuple(tokens)
        if len(tokens) < 2:
            raise ValueError("a vocabulary needs at least two tokens")
        index = {tok: i for i, tok in enumerate(tokens)}
        if len(index) != len(tokens):
            dupes = sorted({t for t in tokens if tokens.count(t) > 1})
            raise ValueError(f"duplicate tokens in vocabulary: {dupes}")
        if eos is not None and eos not in index:
            raise UnknownToken(eos, "end-of-text token")
        self.tokens = tokens
        self.eos = eos
        self._index = index

    @classmethod
    def from_file(cls, path, eos: str | None = None) -> "Vocabulary":
        """One token per line, UTF-8. Blank lines are skipped."""
        text = Path(path).read_text(encoding="utf-8")
        return cls([line.strip() for line in text.splitlines() if line.strip()], eos=eos)

    def to_file(self, path) -> None:
        Path(path).write_text("\n".join(self.tokens) + "\n", encoding="utf-8")

    @property
    def size(self) -> int:
        return len(self.tokens)

    def __len__(self):
        return len(self.tokens)

    def __contains__(self, token):
        return token in self._index

    def __iter__(self):
        return iter(self.tokens)

    def __eq__(self, other):
        if not isinstance(other, Vocabulary):
            return NotImplemented
        return self is other or (self.tokens == other.tokens and self.eos == other.eos)

    def __hash__(self):
        return hash((self.tokens, self.eos))

    def __repr__(self):
        return f"Vocabulary(size={self.size})"

    def index(self, token: str) -> int:
        try:
            return self._index[token]
        except KeyError:
            raise UnknownToken(token) from None

    def indices(self, tokens: Iterable[str]) -> list[int]:
        return [self.index(t) for t in tokens]

    def check(self, tokens: Iterable[str], where: str | None = None) -> tuple[str, ...]:
        """Return ``tokens`` as a tuple, rejecting anything outside the vocabulary."""
        tokens = tuple(tokens)
        for tok in tokens:
            if tok not in self._index:
                raise UnknownToken(tok, where)
        return tokens

    def tokenize(self, text: str) -> tuple[str, ...]:
        """Whitespace tokenization; there is no unknown-token bucket."""
        return self.check(text.split(), "tokenize")


def same_vocab(*vocabs: Vocabulary) -> Vocabulary:
    first = vocabs[0]
    for other in vocabs[1:]:
        if other != first:
            raise VocabMismatch(f"{first!r} and {other!r} differ")
    return first


def clamp_probability(p: float, eps: float = EPS) -> float:
    """Clip ``p`` into ``[eps, 1 - eps]``."""
    p = float(p)
    if math.isnan(p):
        raise InvalidProbability("NaN probability")
    return min(max(p, eps), 1.0 - eps)


def clamp_array(p, eps: float = EPS) -> np.ndarray:
    p = np.asarray(p, dtype=float)
    if np.isnan(p).any():
        raise InvalidProbability("NaN probability")
    return np.clip(p, eps, 1.0 - eps)


@dataclass(frozen=True, eq=False)
class TokenDistribution:
    """Next-token probabilities over ``vocab``.

    Entries are floored at :data:`EPS` and renormalized on construction, so
    every stored value lies in ``[EPS, 1]`` and logs are always finite.
    """

    vocab: Vocabulary
    probs: np.ndarray = field(repr=False)

    def __post_init__(self):
        p = np.array(self.probs, dtype=float)
        if p.shape != (self.vocab.size,):
            raise VocabMismatch(f"expected {self.vocab.size} probabilities, got shape {p.shape}")
        if not np.isfinite(p).all() or (p < 0).any():
            raise InvalidProbability("probabilities must be finite and nonnegative")
        total = p.sum()
        if total <= 0:
            raise InvalidProbability("probabilities sum to zero")
        # leave vectors that already sum to one (up to rounding) untouched
        if abs(total - 1.0) > p.size * np.finfo(float).eps:
            p = p / total
        if (p < EPS).any():
            p = np.maximum(p, EPS)
            p = np.maximum(p / p.sum(), EPS)
        p = np.minimum(p, 1.0)
        p.flags.writeable = False
        object.__setattr__(self, "probs", p)

    @classmethod
    def uniform(cls, vocab: Vocabulary) -> "TokenDistribution":
        return cls(vocab, np.full(vocab.size, 1.0 / vocab.size))

    @classmethod
    def from_mapping(cls, vocab: Vocabulary, mapping: dict, rest: float = 0.0) -> "TokenDistribution":
        p = np.full(vocab.size, float(rest))
        for tok, val in mapping.items():
            p[vocab.index(tok)] = val
        return cls(vocab, p)

    def prob(self, token: str) -> float:
        return float(self.probs[self.vocab.index(token)])

    def log_probs(self) -> np.ndarray:
        return np.log(self.probs)

    def argmax(self) -> int:
        # np.argmax returns the first maximal index, i.e. lowest vocabulary index on ties
        return int(np.argmax(self.probs))

    def argmax_token(self) -> str:
        return self.vocab.tokens[self.argmax()]

    def as_dict(self) -> dict[str, float]:
        return dict(zip(self.vocab.tokens, self.probs.tolist()))

    def __len__(self):
        return self.vocab.size


@dataclass(frozen=True, eq=False)
class LogWeights:
    """Unnormalized log-space scores; every entry must be finite."""

    vocab: Vocabulary
    weights: np.ndarray = field(repr=False)

    def __post_init__(self):
        w = np.array(self.weights, dtype=float)
        if w.shape != (self.vocab.size,):
            raise VocabMismatch(f"expected {self.vocab.size} weights, got shape {w.shape}")
        if not np.isfinite(w).all():
            raise InvalidWeight("log-weights must be finite")
        w.flags.writeable = False
        object.__setattr__(self, "weights", w)


def softmax_normalize(w: LogWeights | Sequence[float], vocab: Vocabulary | None = None) -> TokenDistribution:
    """Exp-normalize log-weights into a :class:`TokenDistribution`.

    Accepts either a :class:`LogWeights` or a raw vector plus ``vocab``.
    """
    if not isinstance(w, LogWeights):
        if vocab is None:
            raise TypeError("a raw weight vector needs a vocabulary")
        w = LogWeights(vocab, w)
    x = w.weights - w.weights.max()
    e = np.exp(x)
    return TokenDistribution(w.vocab, e / e.sum())


def complement_prob(d: TokenDistribution, x: str, eps: float = EPS) -> float:
    """Probability that the model does *not* emit ``x``, clamped away from 0 and 1."""
    return clamp_probability(1.0 - d.probs[d.vocab.index(x)], eps)
