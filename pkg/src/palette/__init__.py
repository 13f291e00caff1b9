"""Attribute combination for controlled decoding.

Combine a base next-token model with several attribute models in log space,
with per-token dynamic coefficients, and compare against linear, union and
classifier-guided baselines. Also ships numerical checks of the theory and
desk-scale experiment harnesses over n-gram models.
"""
from .baselines import (ClassifierGuidedStrategy, LinearStrategy, UnionStrategy, classifier_guided,
                        union_combine, weighted_log_linear)
from .combine import (ANTI, CANONICAL, EXACT, MAIN, NORMALIZED, SIGMOID, AttributeSpec, CombineTerms, Palette,
                      PaletteConfig, coefficient_c, combine_terms, normalizers, palette_combine,
                      palette_log_weights)
from .decode import GenerationTrace, SamplerConfig, generate, perplexity, sample_index
from .dist import EPS, LogWeights, TokenDistribution, Vocabulary, softmax_normalize
from .errors import *  # noqa: F401,F403
from .evaluation import (ReportRow, Scenario, emit_report, lexicon_score, run_conflict_eval, run_strength_sweep,
                         run_t_sweep)
from .providers import (AttributeModel, NGramModel, RemoteLogitClient, TabularModel, attribute_view,
                        next_distribution, train_ngram)

__version__ = "0.1.0"
