"""Desk-scale experiment harness: strength sweeps, t sweeps and conflict tables.

Every generation draws from its own generator seeded by
``(master seed, grid index, repetition)``; strategies evaluated at the same
grid point share those seeds, so their differences are not drowned by
sampling noise and every report is reproducible bit for bit.
"""
from __future__ import annotations

import csv
import io
import json
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field, replace
from typing import Callable, Mapping, Sequence

import numpy as np
from scipy.stats import spearmanr

from .baselines import LinearStrategy, UnionStrategy
from .combine import MAIN, NORMALIZED, SIGMOID, AttributeSpec, Palette, PaletteConfig
from .decode import SamplerConfig, generate, perplexity
from .errors import EmptyReport, InvalidScenario
from .providers import AttributeModel

PALETTE = "palette"
LINEAR = "linear"
UNION = "union"
STRATEGIES = (PALETTE, LINEAR, UNION)


def lexicon_score(tokens: Sequence[str], lexicon: Mapping[str, int]) -> float:
    """``(mean polarity + 1) / 2`` over tokens listed in ``lexicon``; 0.5 when none are."""
    pol = [lexicon[t] for t in tokens if t in lexicon]
    if not pol:
        return 0.5
    return (sum(pol) / len(pol) + 1.0) / 2.0


@dataclass(frozen=True)
class ReportRow:
    strategy: str
    param: float
    score_mean: float
    score_std: float
    ppl_mean: float
    seed: int


@dataclass
class Scenario:
    """Everything needed to run one experiment family.

    ``attributes`` are the palette attributes at their reference strengths;
    sweeps override strengths of individual attributes.
    """

    base: AttributeModel
    attributes: list
    prompt: tuple = ()
    sampler: SamplerConfig = field(default_factory=SamplerConfig)
    generations: int = 50
    lexicon: Mapping[str, int] = field(default_factory=dict)
    max_tokens: int = 12
    mode: str = SIGMOID
    scale: str = NORMALIZED
    t: float = 0.0
    seed: int = 0
    name: str = "scenario"

    def __post_init__(self):
        if self.generations < 1:
            raise InvalidScenario("generations per point must be >= 1")
        if not self.lexicon:
            raise InvalidScenario("a scenario needs a nonempty lexicon")
        self.prompt = self.base.vocab.check(self.prompt, "scenario prompt")

    def attribute(self, attr_id: str | None) -> AttributeSpec:
        if attr_id is None:
            for a in self.attributes:
                if a.sign == MAIN:
                    return a
            raise InvalidScenario("scenario has no main attribute")
        for a in self.attributes:
            if a.id == attr_id:
                return a
        raise InvalidScenario(f"no attribute {attr_id!r}")

    def with_strength(self, attr_id: str, s: float) -> list:
        return [a.with_strength(s) if a.id == attr_id else a for a in self.attributes]

    def palette(self, attributes=None, t: float | None = None) -> Palette:
        return Palette(PaletteConfig(self.base, self.attributes if attributes is None else attributes,
                                     self.t if t is None else t, self.mode, self.scale))


def rep_rng(seed: int, grid_index: int, rep: int) -> np.random.Generator:
    return np.random.default_rng(np.random.SeedSequence([seed, grid_index, rep]))


def evaluate_point(scenario: Scenario, strategy: AttributeModel, grid_index: int) -> tuple[float, float, float]:
    """Mean score, score std and mean perplexity (vs the base model) at one grid point."""
    scores, ppls = [], []
    for rep in range(scenario.generations):
        trace = generate(strategy, scenario.prompt, scenario.max_tokens, scenario.sampler,
                         rng=rep_rng(scenario.seed, grid_index, rep))
        scores.append(lexicon_score(trace.tokens, scenario.lexicon))
        ppls.append(perplexity(scenario.base, trace.tokens, scenario.prompt) if trace.tokens else 1.0)
    return float(np.mean(scores)), float(np.std(scores)), float(np.mean(ppls))


def _run_grid(jobs: int, tasks: list[Callable[[], list[ReportRow]]]) -> list[ReportRow]:
    if jobs <= 1 or len(tasks) <= 1:
        chunks = [task() for task in tasks]
    else:
        with ThreadPoolExecutor(max_workers=jobs) as pool:
            chunks = list(pool.map(lambda task: task(), tasks))
    return [row for chunk in chunks for row in chunk]


def run_strength_sweep(scenario: Scenario, s_grid: Sequence[float], attribute: str | None = None,
                       strategies: Sequence[str] = (PALETTE,), jobs: int = 1) -> list[ReportRow]:
    """Vary one attribute's strength; one row per (grid point, strategy)."""
    target = scenario.attribute(attribute).id
    for name in strategies:
        if name not in (PALETTE, LINEAR):
            raise InvalidScenario(f"strength sweeps support palette and linear, not {name!r}")

    def task(gi: int, s: float):
        def run():
            attrs = scenario.with_strength(target, float(s))
            rows = []
            for name in strategies:
                strat = scenario.palette(attrs) if name == PALETTE else LinearStrategy(scenario.base, attrs)
                rows.append(ReportRow(name, float(s), *evaluate_point(scenario, strat, gi), scenario.seed))
            return rows
        return run

    return _run_grid(jobs, [task(gi, s) for gi, s in enumerate(s_grid)])


def run_t_sweep(scenario: Scenario, t_grid: Sequence[float], jobs: int = 1) -> list[ReportRow]:
    """Vary the complementary-term weight ``t``.

    All grid points share grid index 0 for seeding so that every ``t`` sees
    the same random numbers; the ``t = 0`` row is then directly comparable
    to a run without the complementary term.
    """
    t_grid = list(t_grid)

    def task(t: float):
        def run():
            strat = scenario.palette(t=float(t))
            return [ReportRow(PALETTE, float(t), *evaluate_point(scenario, strat, 0), scenario.seed)]
        return run

    return _run_grid(jobs, [task(t) for t in t_grid])


def fluctuation_band(rows: Sequence[ReportRow]) -> float:
    """``max |score(t) - score(0)|`` over a t sweep."""
    ref = [r.score_mean for r in rows if r.param == 0.0]
    if not ref:
        raise InvalidScenario("t sweep has no t = 0 row")
    return max(abs(r.score_mean - ref[0]) for r in rows)


@dataclass
class ConflictTable:
    rows: list
    ratios: list
    palette_ge_linear: float
    palette_ge_union: float

    def scores(self, strategy: str) -> np.ndarray:
        return np.array([r.score_mean for r in self.rows if r.strategy == strategy])

    def mean_score(self, strategy: str) -> float:
        return float(self.scores(strategy).mean())


def run_conflict_eval(scenario: Scenario, ratio_grid: Sequence[float],
                      overlapping: str | Sequence[str] | None = None, target: str | None = None,
                      strategies: Sequence[str] = STRATEGIES, jobs: int = 1) -> ConflictTable:
    """Overlapping attributes at strength ratio ``s_overlap / s_target``.

    ``target`` (default: the last attribute) keeps its reference strength;
    each ``overlapping`` attribute (default: the first) gets
    ``ratio * s_target``, and any other attribute stays fixed. The union
    baseline takes a single overlapping attribute: the target is its
    reference model and the ratio is the coefficient of
    ``union(overlapping, target)``.
    """
    if len(scenario.attributes) < 2:
        raise InvalidScenario("conflict evaluation needs two attributes")
    tgt = scenario.attribute(target) if target else scenario.attributes[-1]
    if overlapping is None:
        overlapping = [scenario.attributes[0].id]
    elif isinstance(overlapping, str):
        overlapping = [overlapping]
    ovls = [scenario.attribute(o) for o in overlapping]
    if not ovls or any(o.id == tgt.id for o in ovls):
        raise InvalidScenario("target and overlapping attributes must differ")
    if UNION in strategies and len(ovls) > 1:
        raise InvalidScenario("the union baseline takes a single overlapping attribute")
    ovl = ovls[0]
    ratios = [float(r) for r in ratio_grid]

    def task(gi: int, ratio: float):
        def run():
            attrs = [a.with_strength(ratio * tgt.strength) if a.id in overlapping else a
                     for a in scenario.attributes]
            rows = []
            for name in strategies:
                if name == PALETTE:
                    strat = scenario.palette(attrs)
                elif name == LINEAR:
                    strat = LinearStrategy(scenario.base, attrs)
                elif name == UNION:
                    strat = UnionStrategy(tgt.model, ovl.model, ratio)
                else:
                    raise InvalidScenario(f"unknown strategy {name!r}")
                rows.append(ReportRow(name, ratio, *evaluate_point(scenario, strat, gi), scenario.seed))
            return rows
        return run

    rows = _run_grid(jobs, [task(gi, r) for gi, r in enumerate(ratios)])
    table = ConflictTable(rows, ratios, math.nan, math.nan)
    pal = table.scores(PALETTE) if PALETTE in strategies else None
    if pal is not None and LINEAR in strategies:
        table.palette_ge_linear = float(np.mean(pal >= table.scores(LINEAR)))
    if pal is not None and UNION in strategies:
        table.palette_ge_union = float(np.mean(pal >= table.scores(UNION)))
    return table


def score_increase(same: ConflictTable, conflicting: ConflictTable, strategy: str) -> float:
    """Average score gain of the same-trend variant over the conflicting one."""
    return float(np.mean(same.scores(strategy) - conflicting.scores(strategy)))


def spearman(x, y) -> float:
    return float(spearmanr(x, y).statistic)


def emit_report(rows: Sequence[ReportRow], fmt: str = "csv") -> bytes:
    """Serialize rows; identical rows always give identical bytes.

    ``csv`` (alias ``tabular``) writes a header plus one line per row.
    ``json`` (alias ``structured``) writes ``{"rows": [...], "by_strategy":
    {strategy: {param: {...}}}}``.
    """
    if not rows:
        raise EmptyReport("no rows to report")
    fields = ["strategy", "param", "score_mean", "score_std", "ppl_mean", "seed"]
    if fmt in ("csv", "tabular"):
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(fields)
        for r in rows:
            writer.writerow([r.strategy, repr(r.param), repr(r.score_mean), repr(r.score_std),
                             repr(r.ppl_mean), r.seed])
        return buf.getvalue().encode("utf-8")
    if fmt in ("json", "structured"):
        for r in rows:
            if not all(math.isfinite(v) for v in (r.param, r.score_mean, r.score_std, r.ppl_mean)):
                raise ValueError(f"non-finite value in report row {r}")
        nested: dict = {}
        for r in rows:
            nested.setdefault(r.strategy, {})[repr(r.param)] = {
                k: v for k, v in asdict(r).items() if k not in ("strategy", "param")}
        doc = {"rows": [asdict(r) for r in rows], "by_strategy": nested}
        return (json.dumps(doc, indent=2, sort_keys=True) + "\n").encode("utf-8")
    raise ValueError(f"unknown report format {fmt!r}")
