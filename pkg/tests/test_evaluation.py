import json
import math
from dataclasses import replace

import numpy as np
import pytest

from palette import desk
from palette.baselines import LinearStrategy, UnionStrategy
from palette.combine import AttributeSpec
from palette.decode import SamplerConfig
from palette.errors import EmptyReport, InvalidScenario
from palette.evaluation import (LINEAR, PALETTE, UNION, ReportRow, Scenario, emit_report, evaluate_point,
                                fluctuation_band, lexicon_score, rep_rng, run_conflict_eval, run_strength_sweep,
                                run_t_sweep, score_increase, spearman)

LEX = {"good": 1, "bad": -1}


def test_lexicon_score_examples():
    assert lexicon_score(["good", "good", "bad"], LEX) == pytest.approx((1 / 3 + 1) / 2)
    assert lexicon_score(["the", "plot"], LEX) == 0.5
    assert lexicon_score(["good", "the", "good"], LEX) == 1.0
    assert lexicon_score(["bad"], LEX) == 0.0


@pytest.fixture(scope="module")
def small(world_models):
    return desk.sentiment_scenario(world_models, generations=8)


def test_scenario_validation(world_models):
    with pytest.raises(InvalidScenario):
        desk.sentiment_scenario(world_models, generations=0)
    with pytest.raises(InvalidScenario):
        Scenario(world_models["base"], [], lexicon={})
    with pytest.raises(Exception):
        Scenario(world_models["base"], [], ("not-a-token",), lexicon=LEX)


def test_rep_rng_distinct_streams():
    draws = {rep_rng(0, g, r).random() for g in range(3) for r in range(3)}
    assert len(draws) == 9
    assert rep_rng(7, 1, 2).random() == rep_rng(7, 1, 2).random()


def test_one_point_grid_gives_one_row_per_strategy(small):
    rows = run_strength_sweep(small, [1.0], strategies=(PALETTE, LINEAR))
    assert [r.strategy for r in rows] == [PALETTE, LINEAR]
    assert all(r.param == 1.0 and r.seed == small.seed for r in rows)
    with pytest.raises(InvalidScenario):
        run_strength_sweep(small, [1.0], strategies=(UNION,))


def test_zero_strength_matches_base(world_models):
    sc = desk.sentiment_scenario(world_models, generations=20, anti_strength=0.0)
    row = run_strength_sweep(sc, [0.0])[0]
    base_score, _, base_ppl = evaluate_point(sc, sc.base, 0)
    assert row.score_mean == pytest.approx(base_score, abs=0.05)
    assert row.ppl_mean == pytest.approx(base_ppl, rel=0.05)


def test_sweep_is_deterministic_and_parallel_safe(small):
    grid = [0.0, 1.0, 3.0]
    serial = run_strength_sweep(small, grid, strategies=(PALETTE, LINEAR))
    assert run_strength_sweep(small, grid, strategies=(PALETTE, LINEAR), jobs=3) == serial
    assert emit_report(serial) == emit_report(run_strength_sweep(small, grid, strategies=(PALETTE, LINEAR)))


def test_t_sweep_shape_and_reference_row(small):
    rows = run_t_sweep(small, [0.0, 0.1, 0.2])
    assert [r.param for r in rows] == [0.0, 0.1, 0.2]
    assert all(math.isfinite(r.score_mean) and math.isfinite(r.ppl_mean) for r in rows)
    # complement disabled another way: zero complement strengths make M2 vanish
    silent = [a.with_strength(a.strength, 0.0) for a in small.attributes]
    disabled = evaluate_point(small, small.palette(silent, t=0.3), 0)
    assert (rows[0].score_mean, rows[0].score_std, rows[0].ppl_mean) == disabled
    assert fluctuation_band(rows) == max(abs(r.score_mean - rows[0].score_mean) for r in rows)
    with pytest.raises(InvalidScenario):
        fluctuation_band(rows[1:])


def test_identical_attributes_give_identical_argmax(world_models):
    # base shares the distribution too; every strategy is then a monotone map of p
    pos = world_models["positive"]
    attrs = [AttributeSpec("one", pos, 1.0), AttributeSpec("two", pos, 1.0)]
    sc = Scenario(pos, attrs, desk.SENTIMENT_PROMPT, SamplerConfig(kind="greedy"), 1,
                  desk.lexicon())
    table = run_conflict_eval(sc, [0.1, 0.5, 1.0])
    by = {(r.strategy, r.param): r for r in table.rows}
    for ratio in table.ratios:
        scores = {by[(s, ratio)].score_mean for s in (PALETTE, LINEAR, UNION)}
        assert len(scores) == 1
    for ratio in (0.1, 1.0):
        ctx = desk.SENTIMENT_PROMPT
        a = sc.with_strength("one", ratio)
        models = [sc.palette(a), LinearStrategy(sc.base, a), UnionStrategy(pos, pos, ratio)]
        for _ in range(6):
            picks = {int(np.argmax(m.next_distribution(ctx).probs)) for m in models}
            assert picks == {int(np.argmax(pos.next_distribution(ctx).probs))}
            ctx = ctx + (sc.base.vocab.tokens[picks.pop()],)


def test_conflict_eval_summary(world_models):
    sc = desk.conflict_scenario(world_models, generations=4)
    table = run_conflict_eval(sc, [0.5, 1.0], overlapping="clean", target="positive")
    assert len(table.rows) == 6
    pal, lin = table.scores(PALETTE), table.scores(LINEAR)
    assert table.palette_ge_linear == np.mean(pal >= lin)
    assert table.mean_score(PALETTE) == pytest.approx(pal.mean())
    same = run_conflict_eval(desk.conflict_scenario(world_models, same_trend=True, generations=4), [0.5, 1.0])
    assert score_increase(same, table, LINEAR) == pytest.approx(np.mean(same.scores(LINEAR) - lin))
    with pytest.raises(InvalidScenario):
        run_conflict_eval(sc, [1.0], overlapping="positive", target="positive")
    with pytest.raises(InvalidScenario):
        run_conflict_eval(replace(sc, attributes=sc.attributes[:1]), [1.0])


def test_only_requested_strategies(world_models):
    sc = desk.conflict_scenario(world_models, generations=2)
    table = run_conflict_eval(sc, [1.0], strategies=(PALETTE, LINEAR))
    assert {r.strategy for r in table.rows} == {PALETTE, LINEAR}
    assert math.isnan(table.palette_ge_union)


def test_spearman():
    assert spearman([1, 2, 3, 4], [10, 20, 25, 40]) == pytest.approx(1.0)
    assert spearman([1, 2, 3], [3, 2, 1]) == pytest.approx(-1.0)


ROWS = [ReportRow(PALETTE, 0.5, 0.6, 0.1, 9.5, 0), ReportRow(LINEAR, 0.5, 0.55, 0.2, 12.0, 0),
        ReportRow(PALETTE, 1.0, 0.7, 0.1, 10.25, 0)]


def test_emit_tabular():
    data = emit_report(ROWS, "csv")
    lines = data.decode().splitlines()
    assert lines[0] == "strategy,param,score_mean,score_std,ppl_mean,seed"
    assert lines[1] == "palette,0.5,0.6,0.1,9.5,0"
    assert len(lines) == 4
    assert emit_report(list(ROWS), "tabular") == data


def test_emit_structured():
    doc = json.loads(emit_report(ROWS, "structured"))
    assert len(doc["rows"]) == 3
    assert doc["by_strategy"]["palette"]["1.0"]["ppl_mean"] == 10.25
    assert set(doc["by_strategy"]) == {PALETTE, LINEAR}
    assert emit_report(ROWS, "json") == emit_report(ROWS, "structured")


def test_emit_errors():
    with pytest.raises(EmptyReport):
        emit_report([])
    with pytest.raises(ValueError):
        emit_report(ROWS, "xml")
    with pytest.raises(ValueError):
        emit_report([ReportRow(PALETTE, 0.5, math.nan, 0.0, 1.0, 0)], "json")


def test_several_overlapping_attributes_share_the_ratio(world_models):
    attrs = [AttributeSpec("clean", world_models["clean_negative"], 1.0),
             AttributeSpec("tone", world_models["tone_negative"], 1.0),
             AttributeSpec("positive", world_models["positive"], 2.0)]
    sc = Scenario(world_models["base"], attrs, desk.SENTIMENT_PROMPT, SamplerConfig(seed=0), 2, desk.lexicon())
    table = run_conflict_eval(sc, [0.5], ["clean", "tone"], "positive", (PALETTE, LINEAR))
    # the same run by hand: both overlapping attributes at 0.5 * 2
    by_hand = sc.palette([attrs[0].with_strength(1.0), attrs[1].with_strength(1.0), attrs[2]])
    assert table.scores(PALETTE)[0] == evaluate_point(sc, by_hand, 0)[0]
    with pytest.raises(InvalidScenario, match="single overlapping"):
        run_conflict_eval(sc, [0.5], ["clean", "tone"], "positive")
    with pytest.raises(InvalidScenario):
        run_conflict_eval(sc, [0.5], ["clean", "positive"], "positive", (PALETTE,))
