"""Latent random source and the known reward functions of each arm.

A :class:`LatentModel` is a finite outcome space ``x_1..x_J`` with a
probability mass vector and a ``K x J`` reward table ``rewards[k, j] = g_k(x_j)``.
Continuous sources are reduced to this form by midpoint discretization and
vector-valued sources by flattening their product support.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from typing import Callable, NamedTuple, Sequence

import numpy as np

from .errors import DimensionMismatch, EmptySpace, NegativeProbability, ZeroMass

#: relative tolerance used to flag ties between arm means
TIE_TOL = 1e-12


def _frozen(a: np.ndarray) -> np.ndarray:
    a.setflags(write=False)
    return a


@dataclass(frozen=True)
class OutcomeSpace:
    """Finite support of the latent source; every outcome is an ``m``-vector."""

    outcomes: np.ndarray
    labels: tuple[str, ...] | None = None

    def __post_init__(self) -> None:
        pts = np.asarray(self.outcomes, dtype=float)
        if pts.ndim == 1:
            pts = pts[:, None]
        if pts.ndim != 2 or pts.shape[0] == 0 or pts.shape[1] == 0:
            raise EmptySpace("outcome space must contain at least one outcome of dimension >= 1")
        if len({tuple(row) for row in pts.tolist()}) != pts.shape[0]:
            raise DimensionMismatch("outcomes: outcome points must be pairwise distinct")
        if self.labels is not None:
            labels = tuple(str(s) for s in self.labels)
            if len(labels) != pts.shape[0]:
                raise DimensionMismatch(
                    f"labels: expected {pts.shape[0]} labels, got {len(labels)}"
                )
            object.__setattr__(self, "labels", labels)
        object.__setattr__(self, "outcomes", _frozen(pts.copy()))

    @property
    def size(self) -> int:
        return self.outcomes.shape[0]

    @property
    def dim(self) -> int:
        return self.outcomes.shape[1]

    def label(self, j: int) -> str:
        if self.labels is not None:
            return self.labels[j]
        point = self.outcomes[j]
        if point.size == 1:
            return f"{point[0]:g}"
        return "(" + ",".join(f"{v:g}" for v in point) + ")"


@dataclass(frozen=True)
class LatentModel:
    space: OutcomeSpace
    pmf: np.ndarray
    rewards: np.ndarray
    reward_span: float
    means: np.ndarray = field(init=False, repr=False)

    def __post_init__(self) -> None:
        object.__setattr__(self, "pmf", _frozen(np.array(self.pmf, dtype=float)))
        object.__setattr__(self, "rewards", _frozen(np.array(self.rewards, dtype=float)))
        object.__setattr__(self, "means", _frozen(self.rewards @ self.pmf))

    @property
    def n_arms(self) -> int:
        return self.rewards.shape[0]

    @property
    def n_outcomes(self) -> int:
        return self.rewards.shape[1]

    def to_dict(self) -> dict:
        out = {
            "outcomes": self.space.outcomes.tolist(),
            "pmf": self.pmf.tolist(),
            "rewards": self.rewards.tolist(),
            "reward_span": self.reward_span,
        }
        if self.space.labels is not None:
            out["labels"] = list(self.space.labels)
        return out


def build_discrete(
    space: OutcomeSpace | Sequence,
    pmf: Sequence[float],
    rewards: Sequence[Sequence[float]],
    reward_span: float | None = None,
) -> LatentModel:
    """Build a finite latent model, normalizing ``pmf`` to sum to one.

    ``reward_span`` defaults to the largest per-arm range of the reward table.
    An explicit value must be at least that large.
    """
    if not isinstance(space, OutcomeSpace):
        space = OutcomeSpace(np.asarray(space, dtype=float))
    p = np.asarray(pmf, dtype=float)
    g = np.asarray(rewards, dtype=float)
    if p.ndim != 1 or p.size == 0:
        raise EmptySpace("pmf: must be a non-empty vector")
    if g.ndim != 2 or g.shape[0] == 0:
        raise DimensionMismatch("rewards: must be a non-empty K x J matrix")
    if p.size != space.size:
        raise DimensionMismatch(f"pmf: expected {space.size} entries, got {p.size}")
    if g.shape[1] != space.size:
        raise DimensionMismatch(
            f"rewards: expected {space.size} columns per arm, got {g.shape[1]}"
        )
    if not np.all(np.isfinite(p)) or not np.all(np.isfinite(g)):
        raise DimensionMismatch("pmf/rewards: entries must be finite numbers")
    if np.any(p < 0):
        raise NegativeProbability("pmf: entries must be non-negative")
    total = p.sum()
    if total <= 0:
        raise ZeroMass("pmf: total probability mass is zero")
    p = p / total
    span = float(np.max(g.max(axis=1) - g.min(axis=1)))
    if reward_span is not None:
        if reward_span < span:
            raise DimensionMismatch(
                f"reward_span: {reward_span} is smaller than the largest arm range {span}"
            )
        span = float(reward_span)
    return LatentModel(space=space, pmf=p, rewards=g, reward_span=span)


def product_space(
    supports: Sequence[Sequence[float]], marginals: Sequence[Sequence[float]]
) -> tuple[OutcomeSpace, np.ndarray]:
    """Flatten the product of independent coordinate supports.

    Returns the flattened outcome space (row-major over the coordinates) and
    the product pmf.
    """
    if len(supports) != len(marginals):
        raise DimensionMismatch("marginals: one marginal per coordinate is required")
    for s, m in zip(supports, marginals):
        if len(s) != len(m):
            raise DimensionMismatch("marginals: marginal length must match its support")
    points = np.array(list(itertools.product(*supports)), dtype=float)
    probs = np.array([np.prod(c) for c in itertools.product(*marginals)], dtype=float)
    return OutcomeSpace(points), probs


@dataclass(frozen=True)
class ContinuousSpec:
    """Density on ``[a, b]`` plus one reward function per arm."""

    density: Callable[[np.ndarray], np.ndarray]
    reward_fns: Sequence[Callable[[np.ndarray], np.ndarray]]
    grid_size: int = 1000
    interval: tuple[float, float] = (0.0, 1.0)

    def __post_init__(self) -> None:
        a, b = self.interval
        if self.grid_size < 2:
            raise DimensionMismatch("grid_size: must be at least 2")
        if not a < b:
            raise DimensionMismatch("interval: lower end must be below upper end")
        if len(self.reward_fns) == 0:
            raise DimensionMismatch("reward_fns: at least one arm is required")


def discretize(spec: ContinuousSpec) -> LatentModel:
    """Midpoint discretization of a continuous source into ``grid_size`` cells."""
    a, b = spec.interval
    n = spec.grid_size
    width = (b - a) / n
    mids = a + (np.arange(n) + 0.5) * width
    dens = np.asarray(spec.density(mids), dtype=float) * np.ones(n)
    if np.any(dens < 0) or not np.all(np.isfinite(dens)):
        raise NegativeProbability("density: must be finite and non-negative on the grid")
    if dens.sum() <= 0:
        raise ZeroMass("density: no mass on the discretization grid")
    rewards = np.vstack([np.asarray(g(mids), dtype=float) * np.ones(n) for g in spec.reward_fns])
    return build_discrete(OutcomeSpace(mids), dens, rewards)


def sample_outcome(model: LatentModel, rng: np.random.Generator) -> int:
    """Draw one outcome index by inverting the cumulative pmf at one uniform draw."""
    return int(outcome_from_uniform(model, rng.random()))


def outcome_from_uniform(model: LatentModel, u):
    cdf = np.cumsum(model.pmf)
    idx = np.searchsorted(cdf, u, side="right")
    return np.minimum(idx, model.n_outcomes - 1)


def sample_outcomes(model: LatentModel, rng: np.random.Generator, size: int) -> np.ndarray:
    """Vectorized :func:`sample_outcome`: one uniform draw per returned index."""
    return outcome_from_uniform(model, rng.random(size)).astype(np.int32)


def expected_reward(model: LatentModel, k: int) -> float:
    return float(model.means[k])


class OptimalArm(NamedTuple):
    k_star: int
    gaps: np.ndarray
    tie: bool


def optimal_arm(model: LatentModel) -> OptimalArm:
    """Best arm by expected reward; ties go to the lowest index and set ``tie``."""
    mu = model.means
    k_star = int(np.argmax(mu))
    best = mu[k_star]
    close = np.abs(mu - best) <= TIE_TOL * max(1.0, abs(best))
    return OptimalArm(k_star, best - mu, bool(close.sum() > 1))
