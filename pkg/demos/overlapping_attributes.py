"""Two overlapping attributes: an insult-free model with a slight negative
lean next to a positive target, compared across palette, linear and union.
The same-trend run swaps in an insult-free model that leans positive.
"""
from palette import desk
from palette.evaluation import LINEAR, PALETTE, STRATEGIES, UNION, run_conflict_eval, score_increase

models = desk.train_models(seed=0)
grid = desk.RATIO_GRID
conflict = run_conflict_eval(desk.conflict_scenario(models, seed=0), grid, "clean", "positive", jobs=4)
same = run_conflict_eval(desk.conflict_scenario(models, same_trend=True, seed=0), grid, "clean", "positive", jobs=4)

print("ratio  " + "  ".join(f"{s:>8}" for s in STRATEGIES))
for i, ratio in enumerate(grid):
    print(f"{ratio:5.1f}  " + "  ".join(f"{conflict.scores(s)[i]:8.3f}" for s in STRATEGIES))
print(f"palette >= linear on {conflict.palette_ge_linear:.0%} of ratios, >= union on {conflict.palette_ge_union:.0%}")
for s in (PALETTE, LINEAR, UNION):
    print(f"{s}: mean score {conflict.mean_score(s):.3f}, same-trend increase {score_increase(same, conflict, s):+.4f}")
