"""Closed-form regret bounds and the lower-bound alternate instance.

The upper bounds are evaluated exactly over integer rounds; power series go
through the Hurwitz zeta function so that horizons of any size cost O(1).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.special import rel_entr, zeta

from .errors import DivergenceInfinite, NoFeasibleEpsilon, NotCompetitive, ZeroGap
from .model import LatentModel
from .pseudo import Classification, PseudoRewardTable, classify

#: horizons up to this size sum the exponential tail term by term
_DIRECT_SUM_LIMIT = 1_000_000
#: dyadic mixing weights tried by the automatic search, 2^-1 .. 2^-_EPS_DEPTH
_EPS_DEPTH = 60


@dataclass(frozen=True)
class BoundParams:
    K: int
    T: int
    t0: float
    delta: np.ndarray
    delta_min: float
    pseudo_gap_star: np.ndarray

    def __post_init__(self) -> None:
        if not self.t0 > 0:
            raise ValueError("t0 must be positive")
        if self.T < 1:
            raise ValueError("T must be >= 1")

    def with_T(self, T: int) -> "BoundParams":
        return BoundParams(self.K, T, self.t0, self.delta, self.delta_min, self.pseudo_gap_star)

    @classmethod
    def from_classification(cls, c: Classification, T: int, t0: float | None = None) -> "BoundParams":
        delta = np.asarray(c.gaps, dtype=float)
        K = delta.size
        sub = [k for k in range(K) if k != c.k_star]
        delta_min = float(min(delta[sub])) if sub else 0.0
        pg = c.pseudo_gaps[:, c.k_star].copy()
        if t0 is None:
            nc_gaps = [pg[k] for k in c.non_competitive]
            t0 = smallest_t0(K, delta_min, min(nc_gaps) if nc_gaps else None)
        return cls(K, T, float(t0), delta, delta_min, pg)


def _ln_ratio(t: float) -> float:
    return math.log(t) / t


def hypotheses(params: BoundParams, pseudo_gap: float | None = None) -> dict[str, bool]:
    """Whether the gap conditions of the instance-dependent bounds hold at ``t0``.

    ``pseudo_gap`` defaults to the smallest positive pseudo-gap in ``params``.
    """
    K, t0 = params.K, params.t0
    r = max(_ln_ratio(t0), 0.0)
    if pseudo_gap is None:
        pos = params.pseudo_gap_star[params.pseudo_gap_star > 0]
        pseudo_gap = float(pos.min()) if pos.size else math.inf
    return {
        "pseudo_gap": pseudo_gap >= 2 * math.sqrt(2 * K * r),
        "delta_min": params.delta_min >= 4 * math.sqrt(K * r),
    }


def smallest_t0(K: int, delta_min: float, pseudo_gap: float | None = None) -> float:
    """Smallest integer ``t0 >= 3`` meeting both gap conditions.

    ``ln(t)/t`` decreases for ``t >= 3``, so the feasible set is a ray and a
    doubling-then-bisection search finds its start.  Returns ``inf`` when a
    gap is not positive.
    """
    need = (delta_min / 4) ** 2 / K if delta_min > 0 else 0.0
    if pseudo_gap is not None:
        if pseudo_gap <= 0:
            return math.inf
        need = min(need, pseudo_gap**2 / (8 * K))
    if need <= 0:
        return math.inf

    def ok(t: int) -> bool:
        return _ln_ratio(t) <= need

    lo, hi = 3, 3
    while not ok(hi):
        lo, hi = hi, hi * 2
        if hi > 2**62:
            return math.inf
    if ok(lo):
        return float(lo)
    while hi - lo > 1:
        mid = (lo + hi) // 2
        if ok(mid):
            hi = mid
        else:
            lo = mid
    return float(hi)


def _power_sum(s: float, a: int, b: int) -> float:
    """``sum_{t=a}^{b} t^-s`` for integers ``1 <= a``."""
    if b < a:
        return 0.0
    return float(zeta(s, a) - zeta(s, b + 1))


def bound_noncompetitive(params: BoundParams) -> float:
    """Upper bound on the expected pulls of a non-competitive arm."""
    K, T, t0 = params.K, params.T, params.t0
    start = max(1, math.ceil(K * t0))
    middle = K * (K - 1) * 3 * K**2 * _power_sum(2, start, T)
    return K * t0 + middle + _power_sum(3, 1, T)


def _exp_tail_sum(T: int, a: float) -> float:
    """``sum_{t=1}^{T} t * exp(-t a)``."""
    if T <= _DIRECT_SUM_LIMIT:
        t = np.arange(1, T + 1, dtype=float)
        return math.fsum(t * np.exp(-t * a))
    if a <= 0:
        return T * (T + 1) / 2
    q = math.exp(-a)
    one_minus_q = -math.expm1(-a)
    qT1 = math.exp(-a * (T + 1))
    return (q - qT1 * ((T + 1) * one_minus_q + q)) / one_minus_q**2


def bound_competitive(params: BoundParams, k: int) -> float:
    """Upper bound on the expected pulls of competitive arm ``k``."""
    d = float(params.delta[k])
    if d <= 0:
        raise ZeroGap(f"arm {k} has no positive sub-optimality gap")
    a = params.delta_min**2 / (2 * params.K)
    return 8 * math.log(params.T) / d**2 + (1 + math.pi**2 / 3) + _exp_tail_sum(params.T, a)


def bound_total(c: Classification, params: BoundParams) -> float:
    """Upper bound on expected cumulative regret of C-UCB."""
    comp = sum(params.delta[k] * bound_competitive(params, k) for k in c.competitive)
    if not c.non_competitive:
        return float(comp)
    u_nc = bound_noncompetitive(params)
    return float(comp + sum(params.delta[k] * u_nc for k in c.non_competitive))


def bound_worst_case(K: int, T: int, beta: float = 1.0) -> float:
    """Gap-free regret bound ``3K sqrt(K T ln T) + 3K beta sqrt(T ln T / K)``."""
    if T < 2:
        raise ValueError("T must be >= 2")
    tl = T * math.log(T)
    return 3 * K * math.sqrt(K * tl) + 3 * K * beta * math.sqrt(tl / K)


def pushforward(model: LatentModel, pmf: np.ndarray, k: int, table: PseudoRewardTable) -> np.ndarray:
    """Distribution of arm ``k``'s reward over its canonical reward keys."""
    keys = table.arms[k]
    return np.bincount(keys.key_of_outcome, weights=pmf, minlength=keys.lo.size)


def kl_divergence(p: np.ndarray, q: np.ndarray) -> float:
    """``D(p || q)`` in nats with ``0 ln(0/q) = 0``."""
    p = np.asarray(p, dtype=float)
    q = np.asarray(q, dtype=float)
    if np.any((p > 0) & (q <= 0)):
        raise DivergenceInfinite("second distribution misses part of the first one's support")
    return float(math.fsum(rel_entr(p, q)))


@dataclass(frozen=True)
class AlternateInstance:
    arm: int
    k_star: int
    pmf_tilde: np.ndarray
    epsilon: float
    kl: float
    mean_tilde: float


def _alternate_pmf(model: LatentModel, table: PseudoRewardTable, k: int, k_star: int,
                   eps: float) -> np.ndarray:
    # per reward value of the best arm: keep its total mass, push 1-eps of it
    # onto the outcome where arm k pays most, spread the rest over the others
    g_k = model.rewards[k]
    tilde = np.zeros(model.n_outcomes)
    for pre in table.arms[k_star].preimages:
        mass = model.pmf[pre].sum()
        best = pre[int(np.argmax(g_k[pre]))]
        if pre.size == 1:
            tilde[best] = mass
            continue
        others = pre[pre != best]
        tilde[others] = eps * mass / others.size
        tilde[best] = (1 - eps) * mass
    return tilde


def build_alternate(
    model: LatentModel,
    table: PseudoRewardTable,
    k: int,
    epsilon: float | None = None,
    classification: Classification | None = None,
) -> AlternateInstance:
    """Reweight the latent pmf so arm ``k`` beats the best arm.

    The best arm's reward distribution is left unchanged.  With
    ``epsilon=None`` the largest ``2^-i`` that makes arm ``k`` strictly better
    is used.
    """
    c = classification or classify(model, table)
    k_star = c.k_star
    mu_star = model.means[k_star]
    if k == k_star or c.pseudo_gaps[k, k_star] >= 0:
        raise NotCompetitive(f"arm {k} has a non-negative pseudo-gap to arm {k_star}")
    if epsilon is not None and not 0 < epsilon < 1:
        raise ValueError("epsilon must lie in (0, 1)")
    candidates = [epsilon] if epsilon is not None else [2.0**-i for i in range(1, _EPS_DEPTH + 1)]
    for eps in candidates:
        tilde = _alternate_pmf(model, table, k, k_star, eps)
        mean_tilde = float(tilde @ model.rewards[k])
        if mean_tilde > mu_star:
            break
    else:
        raise NoFeasibleEpsilon(f"no mixing weight makes arm {k} beat arm {k_star}")
    kl = kl_divergence(pushforward(model, model.pmf, k, table),
                       pushforward(model, tilde, k, table))
    return AlternateInstance(k, k_star, tilde, eps, kl, mean_tilde)


def lower_bound(model: LatentModel, table: PseudoRewardTable,
                classification: Classification | None = None) -> float:
    """Asymptotic lower bound on ``E[Reg(T)] / ln T``; zero without competitive arms."""
    c = classification or classify(model, table)
    rates = []
    for k in c.competitive:
        if c.pseudo_gaps[k, c.k_star] == 0:
            continue
        alt = build_alternate(model, table, k, classification=c)
        rates.append(c.gaps[k] / alt.kl)
    return max(rates) if rates else 0.0

