"""Palette vs linear combination on a three-token vocabulary.

Prints the per-token coefficients, the normalizers and both combined
distributions so the numbers can be followed with a calculator.
"""
import numpy as np

from palette import AttributeSpec, LinearStrategy, Palette, PaletteConfig, TabularModel, Vocabulary
from palette.combine import EXACT, SIGMOID, combine_terms

vocab = Vocabulary(["kind", "plain", "rude"])
base = TabularModel(vocab, default=[0.3, 0.4, 0.3])
polite = TabularModel(vocab, default=[0.6, 0.3, 0.1])
attrs = [AttributeSpec("polite", polite, strength=1.0)]

np.set_printoptions(precision=4, suppress=True)
for mode in (EXACT, SIGMOID):
    cfg = PaletteConfig(base, attrs, t=0.0, mode=mode)
    terms = combine_terms(cfg, [polite.next_distribution()])
    print(f"{mode} mode: c = {terms.c[0]}  M1 = {terms.m1:.4f}")
    print("  palette:", Palette(cfg).next_distribution().probs)
print("linear:     ", LinearStrategy(base, attrs).next_distribution().probs)

# the complementary term rewards tokens the attribute model does not predict,
# so raising t softens the attribute's pull
for t in (0.0, 0.25, 0.5):
    d = Palette(PaletteConfig(base, attrs, t=t)).next_distribution()
    print(f"t={t:<4} p(rude) = {d.prob('rude'):.4f}")
