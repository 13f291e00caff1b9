"""Next-token providers: context in, :class:`TokenDistribution` out.

Three backends share the :class:`AttributeModel` interface:

* :class:`TabularModel` -- explicit lookup table, used for deterministic tests.
* :class:`NGramModel` -- add-k smoothed n-gram counts, trained with
  :func:`train_ngram`.
* :class:`RemoteLogitClient` -- HTTP client for a server that returns
  log-probabilities over the shared vocabulary.

:func:`attribute_view` induces an attribute in any model by prefixing a
prompt to every context.
"""
from __future__ import annotations

import json
import math
import threading
import urllib.error
import urllib.request
from abc import ABC, abstractmethod
from collections import defaultdict
from http.server import BaseHTTPRequestHandler, ThreadingHTTPServer
from pathlib import Path
from typing import Iterable, Mapping, Sequence

import numpy as np

from .dist import LogWeights, TokenDistribution, Vocabulary, softmax_normalize
from .errors import (
    DegenerateModel,
    InvalidResponse,
    InvalidWeight,
    SchemaMismatch,
    TransportError,
    UnknownToken,
    VocabMismatch,
)

NGRAM_FORMAT = "palette-ngram"
NGRAM_VERSION = 1


class AttributeModel(ABC):
    """Anything that maps a context to a next-token distribution."""

    vocab: Vocabulary

    @abstractmethod
    def next_distribution(self, context: Sequence[str] = ()) -> TokenDistribution:
        ...


def next_distribution(model: AttributeModel, context: Sequence[str] = ()) -> TokenDistribution:
    return model.next_distribution(tuple(context))


def _as_tokens(key) -> tuple[str, ...]:
    if isinstance(key, str):
        return tuple(key.split())
    return tuple(key)


class TabularModel(AttributeModel):
    """Lookup table keyed by context suffix.

    The longest stored suffix of the query context wins; contexts with no
    matching suffix get ``default`` (uniform when omitted).
    """

    def __init__(self, vocab: Vocabulary, table: Mapping | None = None, default=None):
        self.vocab = vocab
        self.table: dict[tuple[str, ...], TokenDistribution] = {}
        for key, value in (table or {}).items():
            ctx = vocab.check(_as_tokens(key), "table key")
            self.table[ctx] = self._to_dist(value)
        self.default = TokenDistribution.uniform(vocab) if default is None else self._to_dist(default)
        self.history = max((len(k) for k in self.table), default=0)

    def _to_dist(self, value) -> TokenDistribution:
        if isinstance(value, TokenDistribution):
            if value.vocab != self.vocab:
                raise VocabMismatch("tabular entry uses a different vocabulary")
            return value
        if isinstance(value, Mapping):
            return TokenDistribution.from_mapping(self.vocab, value)
        return TokenDistribution(self.vocab, value)

    def next_distribution(self, context=()):
        context = self.vocab.check(context, "context")
        for h in range(min(self.history, len(context)), -1, -1):
            key = context[len(context) - h:]
            if key in self.table:
                return self.table[key]
        return self.default


class NGramModel(AttributeModel):
    """Add-k smoothed n-gram model.

    ``counts`` maps every history of length ``0 .. order-1`` seen in training
    to a vector of next-token counts. A query uses the last ``order-1``
    context tokens and backs off to shorter histories when the full one was
    never observed (or the context is too short).
    """

    def __init__(self, vocab: Vocabulary, order: int, counts: Mapping, add_k: float = 1.0):
        if order < 1:
            raise ValueError("order must be >= 1")
        if add_k < 0 or not math.isfinite(add_k):
            raise ValueError("add_k must be a finite nonnegative number")
        self.vocab = vocab
        self.order = int(order)
        self.add_k = float(add_k)
        self.counts: dict[tuple[str, ...], np.ndarray] = {}
        for hist, vec in counts.items():
            hist = vocab.check(_as_tokens(hist), "n-gram history")
            if len(hist) >= self.order:
                raise ValueError(f"history {hist} too long for order {order}")
            vec = np.asarray(vec, dtype=float)
            if vec.shape != (vocab.size,) or (vec < 0).any():
                raise ValueError(f"bad count vector for history {hist}")
            vec.flags.writeable = False
            self.counts[hist] = vec
        if self.add_k == 0 and not any(v.sum() > 0 for v in self.counts.values()):
            raise DegenerateModel("no counts and add_k = 0")
        self._cache: dict[tuple[str, ...], TokenDistribution] = {}

    def _history(self, context: tuple[str, ...]) -> tuple[str, ...]:
        h = context[max(0, len(context) - (self.order - 1)):] if self.order > 1 else ()
        for start in range(len(h) + 1):
            vec = self.counts.get(h[start:])
            if vec is not None and vec.sum() > 0:
                return h[start:]
        return ()

    def next_distribution(self, context=()):
        context = self.vocab.check(context, "context")
        hist = self._history(context)
        dist = self._cache.get(hist)
        if dist is None:
            vec = self.counts.get(hist)
            if vec is None:
                vec = np.zeros(self.vocab.size)
            denom = vec.sum() + self.add_k * self.vocab.size
            if denom <= 0:
                raise DegenerateModel(f"history {hist} has no mass")
            dist = TokenDistribution(self.vocab, (vec + self.add_k) / denom)
            self._cache[hist] = dist
        return dist

    # serialization -------------------------------------------------------

    def to_dict(self) -> dict:
        toks = self.vocab.tokens
        entries = []
        for hist in sorted(self.counts, key=lambda h: (len(h), h)):
            vec = self.counts[hist]
            nz = {toks[i]: _num(vec[i]) for i in np.flatnonzero(vec)}
            entries.append({"history": list(hist), "counts": nz})
        return {
            "format": NGRAM_FORMAT,
            "version": NGRAM_VERSION,
            "order": self.order,
            "add_k": self.add_k,
            "vocab": list(toks),
            "eos": self.vocab.eos,
            "counts": entries,
        }

    def save(self, path) -> None:
        Path(path).write_text(dumps_ngram(self), encoding="utf-8")

    @classmethod
    def from_dict(cls, data: Mapping, vocab: Vocabulary | None = None) -> "NGramModel":
        if data.get("format") != NGRAM_FORMAT:
            raise ValueError("not a serialized n-gram model")
        if data.get("version") != NGRAM_VERSION:
            raise ValueError(f"unsupported n-gram model version {data.get('version')!r}")
        stored = Vocabulary(data["vocab"], eos=data.get("eos"))
        if vocab is not None and vocab.tokens != stored.tokens:
            raise ValueError("serialized model vocabulary differs from the declared vocabulary")
        vocab = vocab or stored
        counts = {}
        for entry in data["counts"]:
            vec = np.zeros(vocab.size)
            for tok, n in entry["counts"].items():
                vec[vocab.index(tok)] = n
            counts[tuple(entry["history"])] = vec
        return cls(vocab, data["order"], counts, data["add_k"])

    @classmethod
    def load(cls, path, vocab: Vocabulary | None = None) -> "NGramModel":
        return cls.from_dict(json.loads(Path(path).read_text(encoding="utf-8")), vocab)


def _num(x: float):
    return int(x) if float(x).is_integer() else float(x)


def dumps_ngram(model: NGramModel) -> str:
    return json.dumps(model.to_dict(), indent=1, sort_keys=True, ensure_ascii=False) + "\n"


def _sentences(corpus) -> list[tuple[str, ...]]:
    if isinstance(corpus, str):
        return [tuple(line.split()) for line in corpus.splitlines() if line.split()]
    out = []
    for sent in corpus:
        sent = tuple(sent.split()) if isinstance(sent, str) else tuple(sent)
        if sent:
            out.append(sent)
    return out


def read_corpus(path) -> list[tuple[str, ...]]:
    """UTF-8 text, one sentence per line, whitespace-tokenized."""
    return _sentences(Path(path).read_text(encoding="utf-8"))


def train_ngram(corpus, vocab: Vocabulary, order: int = 2, add_k: float = 1.0) -> NGramModel:
    """Count n-grams in ``corpus``; smoothing is applied at query time.

    ``corpus`` is either raw text (one sentence per line) or an iterable of
    sentences, each a whitespace-separated string or a token sequence.
    N-grams never cross sentence boundaries.
    """
    if order < 1:
        raise ValueError("order must be >= 1")
    if add_k < 0:
        raise ValueError("add_k must be nonnegative")
    sentences = _sentences(corpus)
    if not sentences and add_k == 0:
        raise DegenerateModel("empty corpus with add_k = 0")
    counts: dict[tuple[str, ...], np.ndarray] = defaultdict(lambda: np.zeros(vocab.size))
    for sent in sentences:
        idx = vocab.indices(sent)
        for i, tok in enumerate(idx):
            for h in range(min(order - 1, i) + 1):
                counts[sent[i - h:i]][tok] += 1
    return NGramModel(vocab, order, dict(counts), add_k)


class PrefixedModel(AttributeModel):
    """``base`` conditioned on a fixed prompt prefix."""

    def __init__(self, base: AttributeModel, prompt: Sequence[str]):
        self.base = base
        self.vocab = base.vocab
        self.prompt = base.vocab.check(prompt, "prompt")

    def next_distribution(self, context=()):
        return self.base.next_distribution(self.prompt + tuple(context))

    def __repr__(self):
        return f"PrefixedModel({self.base!r}, prompt={' '.join(self.prompt)!r})"


def attribute_view(base: AttributeModel, prompt: Sequence[str]) -> AttributeModel:
    """Induce an attribute in ``base`` by prefixing ``prompt`` to every context."""
    prompt = base.vocab.check(prompt, "prompt")
    if isinstance(base, PrefixedModel):
        return PrefixedModel(base.base, base.prompt + prompt)
    return PrefixedModel(base, prompt)


class RemoteLogitClient(AttributeModel):
    """Client for ``POST <endpoint>/logits``.

    Request body ``{"context": [tokens]}``; the response must be
    ``{"logprobs": [floats]}`` with one entry per vocabulary token, in
    vocabulary order. The values are softmax-normalized client side, so raw
    logits are accepted too. Each call opens its own connection, so
    concurrent use is safe.
    """

    def __init__(self, endpoint: str, vocab: Vocabulary, timeout: float = 10.0):
        self.endpoint = endpoint.rstrip("/")
        self.vocab = vocab
        self.timeout = float(timeout)

    def next_distribution(self, context=()):
        context = self.vocab.check(context, "context")
        body = json.dumps({"context": list(context)}).encode("utf-8")
        req = urllib.request.Request(
            self.endpoint + "/logits",
            data=body,
            headers={"Content-Type": "application/json"},
            method="POST",
        )
        try:
            with urllib.request.urlopen(req, timeout=self.timeout) as resp:
                raw = resp.read()
        except (urllib.error.URLError, TimeoutError, ConnectionError, OSError) as exc:
            raise TransportError(f"{self.endpoint}: {exc}") from exc
        return self.parse_response(raw)

    def parse_response(self, raw: bytes) -> TokenDistribution:
        try:
            payload = json.loads(raw)
            values = payload["logprobs"]
        except (ValueError, TypeError, KeyError) as exc:
            raise InvalidResponse(f"malformed response: {exc}") from exc
        if not isinstance(values, list):
            raise InvalidResponse("'logprobs' must be a list")
        if len(values) != self.vocab.size:
            raise SchemaMismatch(f"expected {self.vocab.size} logprobs, got {len(values)}")
        try:
            arr = np.array(values, dtype=float)
        except (TypeError, ValueError) as exc:
            raise InvalidResponse(f"non-numeric logprobs: {exc}") from exc
        try:
            return softmax_normalize(LogWeights(self.vocab, arr))
        except InvalidWeight as exc:
            raise InvalidResponse(str(exc)) from exc


def remote_next_distribution(client: RemoteLogitClient, context=()) -> TokenDistribution:
    return client.next_distribution(context)


def make_logit_server(model: AttributeModel, host: str = "127.0.0.1", port: int = 0) -> ThreadingHTTPServer:
    """Serve ``model`` over the remote logits protocol.

    Returns an unstarted server; call ``serve_forever`` (typically in a
    thread) and ``shutdown`` when done. ``server.server_address`` gives the
    bound port when ``port=0``.
    """

    class Handler(BaseHTTPRequestHandler):
        def do_POST(self):
            if self.path.rstrip("/") != "/logits":
                self.send_error(404)
                return
            length = int(self.headers.get("Content-Length", 0))
            try:
                context = json.loads(self.rfile.read(length))["context"]
                logprobs = model.next_distribution(context).log_probs().tolist()
            except (ValueError, KeyError, TypeError, UnknownToken) as exc:
                self.send_error(400, str(exc))
                return
            data = json.dumps({"logprobs": logprobs}).encode("utf-8")
            self.send_response(200)
            self.send_header("Content-Type", "application/json")
            self.send_header("Content-Length", str(len(data)))
            self.end_headers()
            self.wfile.write(data)

        def log_message(self, *args):
            pass

    return ThreadingHTTPServer((host, port), Handler)


def serve_in_thread(server: ThreadingHTTPServer) -> threading.Thread:
    thread = threading.Thread(target=server.serve_forever, daemon=True)
    thread.start()
    return thread
