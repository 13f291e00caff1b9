"""Strength and t sweeps on the synthetic review world.

A negative prompt is steered toward positive reviews. Raising the positive
attribute's strength raises the lexicon score; the t sweep shows how little
the complementary term moves it.
"""
from palette import desk
from palette.evaluation import LINEAR, PALETTE, fluctuation_band, run_strength_sweep, run_t_sweep, spearman

models = desk.train_models(seed=0)
scenario = desk.sentiment_scenario(models, seed=0, generations=50)

rows = run_strength_sweep(scenario, desk.S_GRID, "positive", (PALETTE, LINEAR), jobs=4)
print("   s   palette  (ppl)   linear  (ppl)")
for pal, lin in zip(rows[::2], rows[1::2]):
    print(f"{pal.param:4.2f}   {pal.score_mean:.3f} {pal.ppl_mean:6.2f}   {lin.score_mean:.3f} {lin.ppl_mean:6.2f}")
for name in (PALETTE, LINEAR):
    sub = [r for r in rows if r.strategy == name]
    print(f"{name}: spearman(s, score) = {spearman([r.param for r in sub], [r.score_mean for r in sub]):.3f}")

t_rows = run_t_sweep(scenario, desk.T_GRID, jobs=4)
print("\n   t   score")
for r in t_rows:
    print(f"{r.param:4.2f}   {r.score_mean:.3f}")
print(f"fluctuation band: {fluctuation_band(t_rows):.4f}")
