"""Numerical checks for the derivation behind the palette combination.

Covers the overlap metric (conditional mutual information), the
total-probability factorizations and their CMI-minimizing couple
coefficients, the log-convexity approximation, the pairwise-traversal
coefficients and their simplification bounds, and the two strategy
properties (monotonicity in strength, enhancement over the linear rule).

Every "for all" statement is turned into a finite sweep: exhaustive grids
plus seeded random draws. :func:`run_suite` runs them all.
"""
from __future__ import annotations

import math
import time
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np
from scipy.special import comb

from .combine import CANONICAL, EXACT, SIGMOID, AttributeSpec, PaletteConfig, coefficient_c, palette_combine
from .dist import EPS, TokenDistribution, Vocabulary
from .errors import DegenerateInstance, InvalidScenario
from .providers import TabularModel

MODES = (EXACT, SIGMOID)


# ---------------------------------------------------------------------------
# conditional mutual information


def _xlogy_ratio(num, den):
    """``num * log(num / den)`` with ``0 log 0 = 0``."""
    num = np.asarray(num, dtype=float)
    den = np.asarray(den, dtype=float)
    out = np.zeros(np.broadcast(num, den).shape)
    mask = np.broadcast_to(num > 0, out.shape)
    n = np.broadcast_to(num, out.shape)[mask]
    d = np.broadcast_to(den, out.shape)[mask]
    out[mask] = n * np.log(n / d)
    return out


def validate_joint(joint) -> np.ndarray:
    joint = np.asarray(joint, dtype=float)
    if joint.ndim != 3:
        raise ValueError("joint must have axes (a_i, a_j, z)")
    if (joint < 0).any() or abs(joint.sum() - 1.0) > 1e-12:
        raise ValueError("joint must be nonnegative and sum to 1")
    return joint


def cmi_terms(joint) -> np.ndarray:
    """Per-outcome contributions ``p(z) * sum p(a_i,a_j|z) log(...)`` to I(A_i; A_j | Z)."""
    joint = validate_joint(joint)
    pz = joint.sum(axis=(0, 1))
    p_iz = joint.sum(axis=1, keepdims=True)
    p_jz = joint.sum(axis=0, keepdims=True)
    with np.errstate(divide="ignore", invalid="ignore"):
        # p(ai,aj|z) / (p(ai|z) p(aj|z)) == p(ai,aj,z) p(z) / (p(ai,z) p(aj,z))
        den = p_iz * p_jz / np.where(pz > 0, pz, 1.0)
    return _xlogy_ratio(joint, den).sum(axis=(0, 1))


def cmi(joint) -> float:
    """``I(A_i; A_j | Z)`` in nats by direct summation over a joint table."""
    return float(cmi_terms(joint).sum())


def cmi_contribution(joint, z: int) -> float:
    return float(cmi_terms(joint)[z])


def cmi_contribution_from_conditionals(p_i, p_j, pz_given_ij) -> float:
    """Contribution at ``Z = x`` for independent attributes.

    ``p_i``, ``p_j`` are the attribute marginals and ``pz_given_ij[a, b]`` is
    ``p(Z = x | a_i = a, a_j = b)``. Evaluates
    ``sum p(a_i) p(a_j) p(x|a_i,a_j) log[p(x|a_i,a_j) p(x) / (p(x|a_i) p(x|a_j))]``.
    """
    p_i = np.asarray(p_i, dtype=float)
    p_j = np.asarray(p_j, dtype=float)
    g = np.asarray(pz_given_ij, dtype=float)
    w = np.outer(p_i, p_j)
    px = float((w * g).sum())
    px_i = g @ p_j
    px_j = p_i @ g
    with np.errstate(divide="ignore", invalid="ignore"):
        den = np.outer(px_i, px_j) / px
    return float((w * _xlogy_ratio(g, den)).sum())


def joint_from_conditionals(p_i, p_j, pz_given_ij) -> np.ndarray:
    """Joint over ``(a_i, a_j, z)`` with ``z`` binary: index 0 is ``Z = x``."""
    w = np.outer(p_i, p_j)
    g = np.asarray(pz_given_ij, dtype=float)
    return np.stack([w * g, w * (1.0 - g)], axis=-1)


def separable_conditionals(rng: np.random.Generator, k_i: int = 3, k_j: int = 3):
    """Random marginals and ``p(x|a_i,a_j) = kappa u(a_i) v(a_j)``.

    This form satisfies ``p(x|a_i,a_j) p(x) = p(x|a_i) p(x|a_j)`` for every
    pair, the equality that zeroes the CMI contribution at ``Z = x``.
    """
    p_i = rng.dirichlet(np.ones(k_i))
    p_j = rng.dirichlet(np.ones(k_j))
    u = rng.uniform(0.05, 1.0, k_i)
    v = rng.uniform(0.05, 1.0, k_j)
    kappa = rng.uniform(0.1, 1.0) / (u.max() * v.max())
    return p_i, p_j, kappa * np.outer(u, v)


def random_joint(rng: np.random.Generator, shape=(3, 3, 4)) -> np.ndarray:
    alpha = rng.uniform(0.05, 2.0)
    flat = rng.dirichlet(np.full(int(np.prod(shape)), alpha))
    # zero some cells so the 0 log 0 convention gets exercised
    flat[rng.random(flat.size) < 0.1] = 0.0
    if flat.sum() == 0:
        flat[0] = 1.0
    return (flat / flat.sum()).reshape(shape)


# ---------------------------------------------------------------------------
# total-probability factorizations


@dataclass(frozen=True)
class FactorizationInstance:
    """Single-attribute factorization data for a couple ``(A_i, A_j)``.

    ``lam_i = p(Z=x|A_i=x)`` and ``lam_ic = p(Z=x|A_i!=x)``; ``p_z`` must equal
    ``lam_i p_i + lam_ic (1 - p_i)`` and likewise for ``j``.
    """

    p_i: float
    p_j: float
    lam_i: float
    lam_ic: float
    lam_j: float
    lam_jc: float
    p_z: float

    def single_residuals(self) -> tuple[float, float]:
        ri = abs(self.p_z - (self.lam_i * self.p_i + self.lam_ic * (1 - self.p_i)))
        rj = abs(self.p_z - (self.lam_j * self.p_j + self.lam_jc * (1 - self.p_j)))
        return ri, rj


@dataclass(frozen=True)
class CoupleLambdas:
    ij: float
    icjc: float
    ijc: float
    icj: float


def _draw_bundle(rng: np.random.Generator, p_z: float):
    """``(p, lam, lam_c)`` consistent with ``p_z``."""
    p = rng.uniform(0.01, 0.99)
    lo = max(0.0, (p_z - (1.0 - p)) / p)
    hi = min(1.0, p_z / p)
    lam = rng.uniform(lo, hi)
    lam_c = min(max((p_z - lam * p) / (1.0 - p), 0.0), 1.0)
    return p, lam, lam_c


def random_factorization(rng: np.random.Generator) -> FactorizationInstance:
    """Consistent-by-construction instance: draw ``p_i``, both lambdas, then ``p_z``."""
    p_i = rng.uniform(0.01, 0.99)
    lam_i, lam_ic = rng.uniform(0.0, 1.0, 2)
    p_z = lam_i * p_i + lam_ic * (1.0 - p_i)
    if p_z <= EPS:
        lam_ic = 0.5
        p_z = lam_i * p_i + lam_ic * (1.0 - p_i)
    p_j, lam_j, lam_jc = _draw_bundle(rng, p_z)
    return FactorizationInstance(p_i, p_j, lam_i, lam_ic, lam_j, lam_jc, p_z)


def lambda_from_cmi_min(inst: FactorizationInstance) -> CoupleLambdas:
    """Couple coefficients that zero the overlap at ``Z = x``: ``lam_ab = lam_a lam_b / p(Z=x)``."""
    if inst.p_z <= EPS:
        raise DegenerateInstance(f"p(Z=x) = {inst.p_z} is too small")
    pz = inst.p_z
    return CoupleLambdas(
        ij=inst.lam_i * inst.lam_j / pz,
        icjc=inst.lam_ic * inst.lam_jc / pz,
        ijc=inst.lam_i * inst.lam_jc / pz,
        icj=inst.lam_ic * inst.lam_j / pz,
    )


def couple_mixture(inst: FactorizationInstance, lam: CoupleLambdas) -> float:
    """Right-hand side of the couple factorization over the four joint events."""
    pi, pj = inst.p_i, inst.p_j
    return (lam.ij * pi * pj + lam.icjc * (1 - pi) * (1 - pj)
            + lam.ijc * pi * (1 - pj) + lam.icj * (1 - pi) * pj)


def check_factorization(inst: FactorizationInstance) -> dict:
    ri, rj = inst.single_residuals()
    lam = lambda_from_cmi_min(inst)
    return {
        "residual_single": max(ri, rj),
        "residual_single_i": ri,
        "residual_single_j": rj,
        "residual_couple": abs(inst.p_z - couple_mixture(inst, lam)),
        "couple": lam,
    }


def couple_coefficients(inst: FactorizationInstance, lam: CoupleLambdas | None = None) -> dict:
    """``alpha``/``beta`` weights of ``log p(A=x)`` and ``log p(A!=x)`` after regrouping."""
    lam = lam or lambda_from_cmi_min(inst)
    return {
        "alpha_i": inst.lam_i + lam.ij + lam.ijc,
        "beta_i": inst.lam_ic + lam.icj + lam.icjc,
        "alpha_j": inst.lam_j + lam.ij + lam.icj,
        "beta_j": inst.lam_jc + lam.ijc + lam.icjc,
    }


def couple_log_forms(inst: FactorizationInstance) -> tuple[float, float]:
    """The log-approximation of ``log 3p(Z=x)`` written two ways.

    Returns ``(expanded, regrouped)``: the term-by-term sum of
    ``lambda * log(event probability)`` over the two single and the four
    couple events, and the same quantity collected into
    ``alpha log p + beta log(1-p)`` per attribute. They must agree.
    """
    lam = lambda_from_cmi_min(inst)
    li, lic = math.log(inst.p_i), math.log(1 - inst.p_i)
    lj, ljc = math.log(inst.p_j), math.log(1 - inst.p_j)
    expanded = (inst.lam_i * li + inst.lam_ic * lic + inst.lam_j * lj + inst.lam_jc * ljc
                + lam.ij * (li + lj) + lam.icjc * (lic + ljc)
                + lam.ijc * (li + ljc) + lam.icj * (lic + lj))
    k = couple_coefficients(inst, lam)
    regrouped = k["alpha_i"] * li + k["beta_i"] * lic + k["alpha_j"] * lj + k["beta_j"] * ljc
    return expanded, regrouped


def convexity_gap(a, b, x, y):
    """``log(ax+by) - log(a+b) - [a/(a+b)] log x - [b/(a+b)] log y`` (nonnegative by concavity of log)."""
    a, b, x, y = (np.asarray(v, dtype=float) for v in (a, b, x, y))
    s = a + b
    out = np.log(a * x + b * y) - np.log(s) - (a / s) * np.log(x) - (b / s) * np.log(y)
    return float(out) if out.ndim == 0 else out


# ---------------------------------------------------------------------------
# pairwise traversal coefficients and their simplification


@dataclass(frozen=True)
class DerivationInstance:
    """``n`` single-attribute bundles sharing one ``p(Z=x)``."""

    p_z: float
    p: np.ndarray
    lam: np.ndarray
    lam_c: np.ndarray

    @property
    def n(self) -> int:
        return len(self.p)

    def posterior(self) -> np.ndarray:
        """``p(A_i=x | Z=x) = lam_i p_i / p(Z=x)``."""
        return self.lam * self.p / self.p_z

    def posterior_complement(self) -> np.ndarray:
        return self.lam_c * (1 - self.p) / self.p_z


def derivation_instance(p_z: float, p, lam, lam_c) -> DerivationInstance:
    p, lam, lam_c = (np.asarray(v, dtype=float) for v in (p, lam, lam_c))
    for arr in (p, lam, lam_c):
        if not np.isfinite(arr).all() or (arr < 0).any():
            raise ValueError("coefficients must be finite and nonnegative")
    return DerivationInstance(float(p_z), p, lam, lam_c)


def random_derivation(rng: np.random.Generator, n: int) -> DerivationInstance:
    p_z = rng.uniform(0.02, 0.98)
    rows = [_draw_bundle(rng, p_z) for _ in range(n)]
    p, lam, lam_c = (np.array(col) for col in zip(*rows))
    return DerivationInstance(p_z, p, lam, lam_c)


def traversal_coefficients(inst: DerivationInstance) -> dict:
    """``phi``/``omega`` from summing the couple approximation over all pairs.

    Also returns the simplified forms obtained by replacing
    ``[p(A_i=x|Z=x)/p(A_i=x)] sum_{j!=i}(lam_j + lam_j')`` with
    ``(n-1) lam_i / p(A_i=x)``, which leaves ``phi_i = (2 lam_i / n)(1 + 1/p_i)``
    (and the analogue for ``omega`` with ``1 - p_i``).
    """
    n = inst.n
    if n < 2:
        raise ValueError("need at least two attributes")
    pairs = comb(n, 2)
    tot = inst.lam + inst.lam_c
    others = tot.sum() - tot
    phi = ((n - 1) * inst.lam + inst.posterior() / inst.p * others) / pairs
    omega = ((n - 1) * inst.lam_c + inst.posterior_complement() / (1 - inst.p) * others) / pairs
    phi_s = (n - 1) * inst.lam * (1 + 1 / inst.p) / pairs
    omega_s = (n - 1) * inst.lam_c * (1 + 1 / (1 - inst.p)) / pairs
    return {"phi": phi, "omega": omega, "phi_simplified": phi_s, "omega_simplified": omega_s}


def simplification_bound_check(inst: DerivationInstance, tol: float = 1e-12) -> dict:
    """Check ``(n-1) r_i <= r_i sum_{j!=i}(lam_j+lam_j') <= 2(n-1) r_i`` per attribute.

    ``r_i = p(A_i=x | Z=x)``. The upper bound follows from ``lam <= 1``; the
    lower one needs ``sum_{j!=i}(lam_j + lam_j') >= n-1``, which nothing
    enforces, so violations are reported rather than raised.
    """
    n = inst.n
    r = inst.posterior()
    tot = inst.lam + inst.lam_c
    mid = r * (tot.sum() - tot)
    lower = (n - 1) * r
    upper = 2 * (n - 1) * r
    coef = traversal_coefficients(inst)

    def rel(a, b):
        return np.abs(a - b) / np.maximum(np.abs(a), 1e-300)

    return {
        "lower_ok": mid >= lower - tol,
        "upper_ok": mid <= upper + tol,
        "middle": mid,
        "lower": lower,
        "upper": upper,
        "phi_rel_error": rel(coef["phi"], coef["phi_simplified"]),
        "omega_rel_error": rel(coef["omega"], coef["omega_simplified"]),
        **coef,
    }


# ---------------------------------------------------------------------------
# strategy properties


def gap_term(p, mode: str):
    """``c(p) log p``: a token's log-weight contribution at unit strength."""
    p = np.asarray(p, dtype=float)
    return coefficient_c(p, mode) * np.log(p)


def p_ratio(p_k, p_v, mode: str = EXACT):
    """``p_v^{c(p_v)} / p_k^{c(p_k)}``, evaluated in log space."""
    return np.exp(gap_term(p_v, mode) - gap_term(p_k, mode))


@dataclass(frozen=True)
class EnhancementReport:
    p_attr: float
    p_v: float
    s: float
    mode: str
    gap_ours: float
    gap_linear: float
    p_vk: float

    @property
    def enhanced(self) -> bool:
        return self.gap_ours > self.gap_linear


def enhancement_gaps(p_attr: float, p_v: float, s: float = 1.0, mode: str = EXACT) -> EnhancementReport:
    """Log-weight gap between the attribute token and another token, palette vs linear."""
    ours = s * float(gap_term(p_attr, mode) - gap_term(p_v, mode))
    linear = s * (math.log(p_attr) - math.log(p_v))
    return EnhancementReport(p_attr, p_v, s, mode, ours, linear, float(p_ratio(p_attr, p_v, mode)))


def enhancement_margin(p_attr, p_v, s=1.0, mode: str = EXACT):
    """Vectorized ``gap_ours - gap_linear``."""
    p_attr = np.asarray(p_attr, dtype=float)
    p_v = np.asarray(p_v, dtype=float)
    ours = gap_term(p_attr, mode) - gap_term(p_v, mode)
    return s * (ours - (np.log(p_attr) - np.log(p_v)))


def monotone_function(x, mode: str):
    """Exact mode: ``log x / x - log x``. Sigmoid mode: ``(2 + e^-x) log x - log x``."""
    x = np.asarray(x, dtype=float)
    if mode == EXACT:
        return np.log(x) / x - np.log(x)
    if mode == SIGMOID:
        return (2 + np.exp(-x)) * np.log(x) - np.log(x)
    raise ValueError(f"unknown mode {mode!r}")


def monotone_function_derivative(x, mode: str):
    x = np.asarray(x, dtype=float)
    if mode == EXACT:
        return (1 - np.log(x) - x) / x**2
    if mode == SIGMOID:
        return (1 + np.exp(-x) - x * np.exp(-x) * np.log(x)) / x
    raise ValueError(f"unknown mode {mode!r}")


def f_monotone_check(mode: str, grid=None) -> dict:
    if grid is None:
        grid = np.linspace(1e-4, 1 - 1e-4, 10_000)
    grid = np.asarray(grid, dtype=float)
    if (grid <= 0).any() or (grid >= 1).any() or (np.diff(grid) <= 0).any():
        raise ValueError("grid must be increasing and strictly inside (0, 1)")
    diffs = np.diff(monotone_function(grid, mode))
    return {"mode": mode, "points": grid.size, "min_difference": float(diffs.min()),
            "passed": bool((diffs > 0).all())}


@dataclass
class MonotonicityScenario:
    """Target attribute plus fixed others, as plain distributions.

    ``others`` holds ``(distribution, strength)`` pairs that stay fixed while
    the target strength varies. ``x_attr`` must be the target's argmax.
    """

    base: TokenDistribution
    attribute: TokenDistribution
    x_attr: str
    others: list = field(default_factory=list)

    def config(self, s: float, mode: str) -> PaletteConfig:
        vocab = self.base.vocab
        attrs = [AttributeSpec("target", TabularModel(vocab, default=self.attribute), s)]
        attrs += [AttributeSpec(f"fixed{k}", TabularModel(vocab, default=d), w)
                  for k, (d, w) in enumerate(self.others)]
        return PaletteConfig(TabularModel(vocab, default=self.base), attrs, t=0.0, mode=mode, scale=CANONICAL)


def sweep_positive_correlation(scenario: MonotonicityScenario, s_grid: Sequence[float],
                               mode: str = EXACT, tol: float = 1e-9) -> dict:
    """Combined probability of the attribute token along ``s_grid`` (canonical scale, ``t = 0``)."""
    vocab = scenario.base.vocab
    k = vocab.index(scenario.x_attr)
    probs = scenario.attribute.probs
    if np.count_nonzero(probs >= probs[k]) != 1:
        raise InvalidScenario(f"{scenario.x_attr!r} is not the unique argmax of the attribute")
    s_grid = np.asarray(s_grid, dtype=float)
    values = np.array([palette_combine(scenario.config(s, mode))[0].probs[k] for s in s_grid])
    drops = values[:-1] - values[1:]
    return {
        "s": s_grid,
        "p_attr": values,
        "max_drop": float(drops.max()) if drops.size else 0.0,
        "monotone": bool((drops <= tol).all()),
    }


def random_monotonicity_scenario(rng: np.random.Generator, max_vocab: int = 32, max_attributes: int = 3):
    V = int(rng.integers(2, max_vocab + 1))
    vocab = Vocabulary([f"w{i}" for i in range(V)])

    def draw():
        return TokenDistribution(vocab, rng.dirichlet(np.full(V, rng.uniform(0.2, 3.0))))

    attribute = draw()
    while np.count_nonzero(attribute.probs == attribute.probs.max()) != 1:
        attribute = draw()
    others = [(draw(), float(rng.uniform(0.0, 3.0))) for _ in range(int(rng.integers(0, max_attributes)))]
    return MonotonicityScenario(draw(), attribute, vocab.tokens[attribute.argmax()], others)


# ---------------------------------------------------------------------------
# suite


@dataclass
class ClaimResult:
    name: str
    passed: bool
    detail: str
    seconds: float = 0.0
    info: dict = field(default_factory=dict)

    def line(self, timed: bool = True) -> str:
        text = f"[{'PASS' if self.passed else 'FAIL'}] {self.name}: {self.detail}"
        return f"{text} ({self.seconds:.2f}s)" if timed else text


def _timed(name: str, fn: Callable[[], tuple[bool, str, dict]]) -> ClaimResult:
    t0 = time.perf_counter()
    passed, detail, info = fn()
    return ClaimResult(name, bool(passed), detail, time.perf_counter() - t0, info)


def check_cmi_nonnegative(seed: int, draws: int = 10_000):
    rng = np.random.default_rng([seed, 1])
    vals = np.array([cmi(random_joint(rng)) for _ in range(draws)])
    return vals.min() >= -1e-12, f"min over {draws} joints = {vals.min():.3e}", {"min": float(vals.min())}


def check_cmi_closed_form(seed: int):
    diag = np.zeros((2, 2, 1))
    diag[0, 0, 0] = diag[1, 1, 0] = 0.5
    err = abs(cmi(diag) - math.log(2))
    rng = np.random.default_rng([seed, 2])
    # conditionally independent given z: product form per z
    pz = rng.dirichlet(np.ones(3))
    ci = np.array([np.outer(rng.dirichlet(np.ones(2)), rng.dirichlet(np.ones(3))) for _ in range(3)])
    indep = np.moveaxis(ci * pz[:, None, None], 0, -1)
    zero = cmi(indep)
    ok = err < 1e-12 and abs(zero) < 1e-12
    return ok, f"|I_diag - ln2| = {err:.1e}, I_condindep = {zero:.1e}", {}


def check_lambda_relations(seed: int, draws: int = 1000):
    rng = np.random.default_rng([seed, 3])
    single = couple = regroup = 0.0
    for _ in range(draws):
        inst = random_factorization(rng)
        res = check_factorization(inst)
        single = max(single, res["residual_single"])
        couple = max(couple, res["residual_couple"])
        a, b = couple_log_forms(inst)
        regroup = max(regroup, abs(a - b))
    ok = single <= 1e-12 and couple <= 1e-9 and regroup <= 1e-9
    return ok, (f"{draws} instances: max single residual {single:.1e}, couple residual {couple:.1e}, "
                f"regrouping {regroup:.1e}"), {"couple": couple}


def check_independence_equality(seed: int, draws: int = 1000):
    rng = np.random.default_rng([seed, 4])
    worst = worst_gap = 0.0
    for _ in range(draws):
        p_i, p_j, g = separable_conditionals(rng, int(rng.integers(2, 5)), int(rng.integers(2, 5)))
        direct = cmi_contribution(joint_from_conditionals(p_i, p_j, g), 0)
        via = cmi_contribution_from_conditionals(p_i, p_j, g)
        worst = max(worst, abs(direct))
        worst_gap = max(worst_gap, abs(direct - via))
    ok = worst <= 1e-9 and worst_gap <= 1e-9
    return ok, f"{draws} separable joints: max contribution at Z=x {worst:.1e}, route disagreement {worst_gap:.1e}", {}


def check_convexity(seed: int, draws: int = 100_000):
    rng = np.random.default_rng([seed, 5])
    a, b = rng.uniform(1e-3, 10.0, (2, draws))
    x, y = rng.uniform(1e-6, 1.0, (2, draws))
    gaps = convexity_gap(a, b, x, y)
    return gaps.min() >= -1e-12, f"min gap over {draws} draws = {gaps.min():.3e}", {"min": float(gaps.min())}


def check_simplification_bounds(seed: int, draws: int = 10_000):
    rng = np.random.default_rng([seed, 6])
    upper_bad = lower_bad = total = 0
    for k in range(draws):
        inst = random_derivation(rng, int(rng.choice([2, 3, 4])))
        rep = simplification_bound_check(inst)
        upper_bad += int((~rep["upper_ok"]).sum())
        lower_bad += int((~rep["lower_ok"]).sum())
        total += inst.n
    rate = lower_bad / total
    return upper_bad == 0, (f"upper bound violations {upper_bad}/{total}; "
                            f"lower bound violation rate {rate:.3f} (reported only)"), {"lower_violation_rate": rate}


def check_p_ratio(grid_points: int = 1000):
    grid = np.linspace(1e-3, 1 - 1e-3, grid_points)
    pk, pv = np.meshgrid(grid, grid, indexing="ij")
    mask = pk > pv
    parts = []
    ok = True
    for mode in MODES:
        logr = gap_term(pv[mask], mode) - gap_term(pk[mask], mode)
        ok &= bool((logr < 0).all())
        parts.append(f"{mode}: max log-ratio {logr.max():.3e}")
    return ok, f"{int(mask.sum())} pairs; " + ", ".join(parts), {}


def check_f_monotone():
    reps = [f_monotone_check(m) for m in MODES]
    ok = all(r["passed"] for r in reps)
    return ok, ", ".join(f"{r['mode']}: min diff {r['min_difference']:.2e}" for r in reps), {}


def check_enhancement(seed: int, draws: int = 100_000):
    rng = np.random.default_rng([seed, 7])
    a, b = rng.uniform(1e-3, 1 - 1e-3, (2, draws))
    keep = a != b
    p_attr = np.maximum(a, b)[keep]
    p_v = np.minimum(a, b)[keep]
    s = rng.uniform(0.01, 5.0, p_attr.size)
    parts = []
    ok = True
    for mode in MODES:
        margin = enhancement_margin(p_attr, p_v, s, mode)
        ok &= bool((margin > 0).all())
        parts.append(f"{mode}: {int((margin > 0).sum())}/{margin.size}")
    return ok, "gap_ours > gap_linear in " + ", ".join(parts), {}


def check_positive_correlation(seed: int, scenarios: int = 200, grid_points: int = 10):
    rng = np.random.default_rng([seed, 8])
    s_grid = np.linspace(0.1, 5.0, grid_points)
    good = {m: 0 for m in MODES}
    worst = 0.0
    for _ in range(scenarios):
        sc = random_monotonicity_scenario(rng)
        for mode in MODES:
            rep = sweep_positive_correlation(sc, s_grid, mode)
            good[mode] += rep["monotone"]
            worst = max(worst, rep["max_drop"])
    ok = all(v == scenarios for v in good.values())
    return ok, (", ".join(f"{m}: {good[m]}/{scenarios} monotone" for m in MODES)
                + f"; largest drop {worst:.1e}"), {}


def run_suite(seed: int = 0) -> list[ClaimResult]:
    """Run every claim check; results are deterministic for a given seed."""
    checks = [
        ("cmi >= 0", lambda: check_cmi_nonnegative(seed)),
        ("cmi closed forms", lambda: check_cmi_closed_form(seed)),
        ("lambda relations (couple factorization)", lambda: check_lambda_relations(seed)),
        ("independence equality zeroes CMI at Z=x", lambda: check_independence_equality(seed)),
        ("log convexity", lambda: check_convexity(seed)),
        ("simplification bounds", lambda: check_simplification_bounds(seed)),
        ("p_vk < 1", check_p_ratio),
        ("monotone kernel functions", check_f_monotone),
        ("attribute enhancement (gaps)", lambda: check_enhancement(seed)),
        ("positive correlation (monotonicity)", lambda: check_positive_correlation(seed)),
    ]
    return [_timed(name, fn) for name, fn in checks]
