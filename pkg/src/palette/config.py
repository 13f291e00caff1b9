"""YAML run configurations.

A config declares the vocabulary, named providers, the base model, the
palette attributes, the combination and sampler settings and the scenario
knobs of every experiment subcommand. :func:`load_config` validates the
whole file, builds every provider and returns a :class:`RunConfig`, so a bad
config fails before any generation starts. Relative paths resolve against
the config file's directory.

Minimal example::

    vocabulary: world/vocab.txt
    seed: 0
    providers:
      base: {type: ngram, corpus: world/base.txt, order: 3}
      positive: {type: ngram, corpus: world/positive.txt, order: 3}
    base: base
    attributes:
      - {id: positive, provider: positive, s: 1.0}
    combination: {mode: sigmoid, scale: normalized, t: 0.0}
    sampler: {kind: temperature, temperature: 1.0}
    scenario:
      prompt: the movie was
      lexicon: {good: 1, bad: -1}
"""
from __future__ import annotations

from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Mapping

import yaml

from .combine import MAIN, MODES, SCALES, SIGNS, AttributeSpec, PaletteConfig
from .decode import SamplerConfig
from .dist import Vocabulary
from .errors import ConfigError, PaletteError
from .evaluation import STRATEGIES, Scenario
from .providers import AttributeModel, NGramModel, RemoteLogitClient, TabularModel, attribute_view, read_corpus, train_ngram

PROVIDER_TYPES = ("tabular", "ngram", "remote")

TOP_LEVEL_KEYS = {"vocabulary", "eos", "seed", "providers", "base", "attributes", "combination",
                  "sampler", "scenario", "output", "format", "train"}


@dataclass
class RunConfig:
    path: Path | None
    vocab: Vocabulary
    providers: dict
    base: AttributeModel
    attributes: list
    mode: str
    scale: str
    t: float
    sampler: SamplerConfig
    seed: int
    scenario: dict = field(default_factory=dict)
    output: Path | None = None
    format: str = "csv"
    train: dict = field(default_factory=dict)
    raw: dict = field(default_factory=dict)

    def palette_config(self, attributes=None, t: float | None = None) -> PaletteConfig:
        return PaletteConfig(self.base, self.attributes if attributes is None else attributes,
                             self.t if t is None else t, self.mode, self.scale)

    def with_seed(self, seed: int) -> "RunConfig":
        seed = _seed(seed, "--seed")
        out = RunConfig(**{**self.__dict__})
        out.seed = seed
        out.sampler = SamplerConfig(self.sampler.kind, self.sampler.temperature, self.sampler.k,
                                    self.sampler.p, seed)
        return out

    def prompt(self) -> tuple:
        return self.vocab.check(_tokens(self.scenario.get("prompt", ())), "scenario prompt")

    def build_scenario(self, attributes=None) -> Scenario:
        sc = self.scenario
        lexicon = sc.get("lexicon")
        if not lexicon:
            raise ConfigError("scenario.lexicon is required for experiment subcommands")
        return Scenario(
            base=self.base,
            attributes=list(self.attributes if attributes is None else attributes),
            prompt=self.prompt(),
            sampler=self.sampler,
            generations=int(sc.get("generations", 50)),
            lexicon=lexicon,
            max_tokens=int(sc.get("max_tokens", 12)),
            mode=self.mode,
            scale=self.scale,
            t=self.t,
            seed=self.seed,
            name=str(sc.get("name", "scenario")),
        )


def _tokens(value) -> tuple:
    if value is None:
        return ()
    if isinstance(value, str):
        return tuple(value.split())
    if isinstance(value, (list, tuple)):
        return tuple(str(v) for v in value)
    raise ConfigError(f"expected a token list or string, got {type(value).__name__}")


def _seed(value, where: str) -> int:
    try:
        seed = int(value)
    except (TypeError, ValueError):
        raise ConfigError(f"{where}: seed must be an integer, got {value!r}") from None
    if isinstance(value, float) and not float(value).is_integer():
        raise ConfigError(f"{where}: seed must be an integer, got {value!r}")
    if not 0 <= seed < 2**64:
        raise ConfigError(f"{where}: seed must be an unsigned 64-bit integer")
    return seed


def _number(value, where: str, minimum: float | None = None) -> float:
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise ConfigError(f"{where}: expected a number, got {value!r}")
    value = float(value)
    if value != value or value in (float("inf"), float("-inf")):
        raise ConfigError(f"{where}: must be finite")
    if minimum is not None and value < minimum:
        raise ConfigError(f"{where}: must be >= {minimum}")
    return value


def _mapping(value, where: str) -> dict:
    if value is None:
        return {}
    if not isinstance(value, Mapping):
        raise ConfigError(f"{where}: expected a mapping")
    return dict(value)


def _resolve(root: Path, value, where: str, must_exist: bool = True) -> Path:
    if not isinstance(value, str) or not value:
        raise ConfigError(f"{where}: expected a path")
    path = Path(value)
    if not path.is_absolute():
        path = root / path
    if must_exist and not path.exists():
        raise ConfigError(f"{where}: file not found: {path}")
    return path


def _grid(value, where: str) -> list[float]:
    if not isinstance(value, (list, tuple)) or not value:
        raise ConfigError(f"{where}: expected a nonempty list of numbers")
    return [_number(v, f"{where}[{i}]") for i, v in enumerate(value)]


def build_provider(name: str, spec: Mapping, vocab: Vocabulary, root: Path) -> AttributeModel:
    kind = spec.get("type")
    where = f"providers.{name}"
    if kind not in PROVIDER_TYPES:
        raise ConfigError(f"{where}.type must be one of {PROVIDER_TYPES}, got {kind!r}")
    try:
        if kind == "tabular":
            return TabularModel(vocab, _mapping(spec.get("table"), f"{where}.table"), spec.get("default"))
        if kind == "ngram":
            if "model" in spec:
                return NGramModel.load(_resolve(root, spec["model"], f"{where}.model"), vocab)
            if "corpus" not in spec:
                raise ConfigError(f"{where}: ngram providers need 'corpus' or 'model'")
            corpus = read_corpus(_resolve(root, spec["corpus"], f"{where}.corpus"))
            order = spec.get("order", 2)
            if isinstance(order, bool) or not isinstance(order, int) or order < 1:
                raise ConfigError(f"{where}.order must be a positive integer")
            add_k = _number(spec.get("add_k", 1.0), f"{where}.add_k", 0.0)
            return train_ngram(corpus, vocab, order=order, add_k=add_k)
        endpoint = spec.get("endpoint")
        if not isinstance(endpoint, str) or not endpoint.startswith(("http://", "https://")):
            raise ConfigError(f"{where}.endpoint must be an http(s) URL")
        return RemoteLogitClient(endpoint, vocab, _number(spec.get("timeout", 10.0), f"{where}.timeout", 0.0))
    except ConfigError:
        raise
    except (PaletteError, ValueError, TypeError) as exc:
        raise ConfigError(f"{where}: {exc}") from exc


def _model_ref(ref, providers: dict, vocab: Vocabulary, where: str) -> AttributeModel:
    """``ref`` is a provider name or ``{provider: name, prompt: tokens}``."""
    if isinstance(ref, str):
        ref = {"provider": ref}
    ref = _mapping(ref, where)
    name = ref.get("provider")
    if name not in providers:
        raise ConfigError(f"{where}: undeclared provider {name!r}")
    prompt = _tokens(ref.get("prompt"))
    try:
        prompt = vocab.check(prompt, f"{where}.prompt")
    except PaletteError as exc:
        raise ConfigError(str(exc)) from exc
    model = providers[name]
    return attribute_view(model, prompt) if prompt else model


def _attribute(i: int, spec, providers: dict, vocab: Vocabulary) -> AttributeSpec:
    where = f"attributes[{i}]"
    spec = _mapping(spec, where)
    attr_id = spec.get("id")
    if not isinstance(attr_id, str) or not attr_id:
        raise ConfigError(f"{where}.id must be a nonempty string")
    model = _model_ref({"provider": spec.get("provider"), "prompt": spec.get("prompt")}, providers, vocab, where)
    s = _number(spec.get("s", 1.0), f"{where}.s", 0.0)
    s2 = spec.get("s_prime")
    s2 = None if s2 is None else _number(s2, f"{where}.s_prime", 0.0)
    sign = spec.get("sign", MAIN)
    if sign not in SIGNS:
        raise ConfigError(f"{where}.sign must be one of {SIGNS}")
    try:
        tokens = vocab.check(_tokens(spec.get("attribute_tokens")), f"{where}.attribute_tokens")
        return AttributeSpec(attr_id, model, s, s2, sign, frozenset(tokens))
    except PaletteError as exc:
        raise ConfigError(str(exc)) from exc


def _lexicon(value, vocab: Vocabulary) -> dict:
    lex = _mapping(value, "scenario.lexicon")
    for tok, pol in lex.items():
        if tok not in vocab:
            raise ConfigError(f"scenario.lexicon: unknown token {tok!r}")
        if pol not in (-1, 1) or isinstance(pol, bool):
            raise ConfigError(f"scenario.lexicon.{tok}: polarity must be -1 or +1")
    return {str(k): int(v) for k, v in lex.items()}


def _scenario(raw, vocab: Vocabulary, attr_ids: set, providers: dict) -> dict:
    sc = _mapping(raw, "scenario")
    try:
        vocab.check(_tokens(sc.get("prompt")), "scenario.prompt")
    except PaletteError as exc:
        raise ConfigError(str(exc)) from exc
    if "lexicon" in sc:
        sc["lexicon"] = _lexicon(sc["lexicon"], vocab)
    for key in ("generations", "max_tokens"):
        if key in sc and (isinstance(sc[key], bool) or not isinstance(sc[key], int) or sc[key] < 1):
            raise ConfigError(f"scenario.{key} must be a positive integer")
    for key in ("s_grid", "t_grid", "ratio_grid"):
        if key in sc:
            sc[key] = _grid(sc[key], f"scenario.{key}")
    for key in ("sweep_attribute", "target"):
        if sc.get(key) is not None and sc[key] not in attr_ids:
            raise ConfigError(f"scenario.{key}: no attribute {sc[key]!r}")
    if sc.get("overlapping") is not None:
        ovl = sc["overlapping"]
        ovl = [ovl] if isinstance(ovl, str) else ovl
        if not isinstance(ovl, list) or not ovl or any(o not in attr_ids for o in ovl):
            raise ConfigError(f"scenario.overlapping: expected attribute ids, got {sc['overlapping']!r}")
    if sc.get("same_trend_provider") is not None and sc["same_trend_provider"] not in providers:
        raise ConfigError(f"scenario.same_trend_provider: undeclared provider {sc['same_trend_provider']!r}")
    strategies = sc.get("strategies")
    if strategies is not None:
        if not isinstance(strategies, list) or not strategies or any(s not in STRATEGIES for s in strategies):
            raise ConfigError(f"scenario.strategies must be a nonempty subset of {STRATEGIES}")
    return sc


def parse_config(raw: Any, root: Path, path: Path | None = None) -> RunConfig:
    if not isinstance(raw, Mapping):
        raise ConfigError("config must be a mapping at the top level")
    unknown = set(raw) - TOP_LEVEL_KEYS
    if unknown:
        raise ConfigError(f"unknown config keys: {sorted(unknown)}")
    if "vocabulary" not in raw:
        raise ConfigError("config needs a 'vocabulary' path")
    vocab_path = _resolve(root, raw["vocabulary"], "vocabulary")
    try:
        vocab = Vocabulary.from_file(vocab_path, eos=raw.get("eos"))
    except (PaletteError, ValueError, OSError) as exc:
        raise ConfigError(f"vocabulary {vocab_path}: {exc}") from exc

    providers = {}
    for name, spec in _mapping(raw.get("providers"), "providers").items():
        providers[str(name)] = build_provider(str(name), _mapping(spec, f"providers.{name}"), vocab, root)

    base = None
    if raw.get("base") is not None:
        base = _model_ref(raw["base"], providers, vocab, "base")
    attrs_raw = raw.get("attributes") or []
    if not isinstance(attrs_raw, list):
        raise ConfigError("attributes must be a list")
    attributes = [_attribute(i, a, providers, vocab) for i, a in enumerate(attrs_raw)]
    ids = [a.id for a in attributes]
    if len(set(ids)) != len(ids):
        raise ConfigError(f"duplicate attribute ids: {ids}")
    if attributes and base is None:
        raise ConfigError("attributes given but no base model")

    comb = _mapping(raw.get("combination"), "combination")
    mode = comb.get("mode", "sigmoid")
    scale = comb.get("scale", "normalized")
    if mode not in MODES:
        raise ConfigError(f"combination.mode must be one of {MODES}")
    if scale not in SCALES:
        raise ConfigError(f"combination.scale must be one of {SCALES}")
    t = _number(comb.get("t", 0.0), "combination.t", 0.0)

    seed = _seed(raw.get("seed", 0), "seed")
    samp = _mapping(raw.get("sampler"), "sampler")
    unknown = set(samp) - {"kind", "temperature", "k", "p"}
    if unknown:
        raise ConfigError(f"unknown sampler keys: {sorted(unknown)}")
    try:
        sampler = SamplerConfig(seed=seed, **samp)
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"sampler: {exc}") from exc

    fmt = raw.get("format", "csv")
    if fmt not in ("csv", "json", "tabular", "structured"):
        raise ConfigError("format must be csv or json")
    output = _resolve(root, raw["output"], "output", must_exist=False) if raw.get("output") else None

    train = _mapping(raw.get("train"), "train")
    if "corpus" in train:
        train["corpus"] = _resolve(root, train["corpus"], "train.corpus")

    return RunConfig(
        path=path, vocab=vocab, providers=providers, base=base, attributes=attributes,
        mode=mode, scale=scale, t=t, sampler=sampler, seed=seed,
        scenario=_scenario(raw.get("scenario"), vocab, set(ids), providers),
        output=output, format=fmt, train=train, raw=dict(raw),
    )


def load_config(path) -> RunConfig:
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc.strerror or exc}") from exc
    try:
        raw = yaml.safe_load(text)
    except yaml.YAMLError as exc:
        raise ConfigError(f"{path}: invalid YAML: {exc}") from exc
    return parse_config(raw, path.resolve().parent, path)
