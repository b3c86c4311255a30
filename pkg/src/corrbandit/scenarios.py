"""Built-in problem instances.

Only explicitly stated parameter values are hard-coded.  The five-outcome
discrete experiments have no stated reward table, so the ``discrete5-case*``
scenarios ship their outcome distributions and require the user to supply
the rewards.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable

import numpy as np
from scipy import stats

from .errors import ModelError
from .loader import constant, gaussian_pdf, one_minus_exp
from .model import ContinuousSpec, LatentModel, OutcomeSpace, build_discrete, discretize, product_space

EXAMPLE2_REWARDS = ((1.0, 2.0, 2.0), (1.5, 0.0, 1.5))
EXAMPLE2_PMF = (0.3, 0.35, 0.35)

CONTINUOUS_SHAPES = {1: (4.0, 4.0), 2: (2.0, 5.0), 3: (1.0, 5.0)}
GAUSS_MU, GAUSS_SIGMA, GAUSS_SCALE = 0.5, 0.2, 0.5
LAMBDA = 0.5
CONST_LEVEL = 0.5

VECTOR_SUPPORT = (-1.0, 0.0, 1.0)
VECTOR_CASE1_MARGINALS = ((0.3, 0.4, 0.3), (0.38, 0.22, 0.4))
VECTOR_CASE2_POINTS = {(1.0, -1.0): 0.48, (1.0, 1.0): 0.5}
#: nominal mass of every other support point; with it the total is 0.9996
VECTOR_CASE2_NOMINAL_OTHER = 0.0028

DISCRETE5_PMFS = {
    1: (0.1, 0.2, 0.25, 0.25, 0.2),
    2: (0.25, 0.17, 0.25, 0.17, 0.16),
    3: (0.05, 0.3, 0.3, 0.05, 0.3),
}


@dataclass(frozen=True)
class Scenario:
    name: str
    description: str
    params: dict
    build: Callable[..., LatentModel] = field(repr=False)


def example2(pmf=EXAMPLE2_PMF) -> LatentModel:
    return build_discrete(
        OutcomeSpace([[1.0], [2.0], [3.0]], ("x1", "x2", "x3")), pmf, EXAMPLE2_REWARDS
    )


def continuous_spec(case: int, grid: int = 1000) -> ContinuousSpec:
    a, b = CONTINUOUS_SHAPES[case]
    return ContinuousSpec(
        density=stats.beta(a, b).pdf,
        reward_fns=(
            gaussian_pdf(GAUSS_MU, GAUSS_SIGMA, GAUSS_SCALE),
            one_minus_exp(5 * LAMBDA),
            constant(CONST_LEVEL),
        ),
        grid_size=grid,
    )


def continuous_case(case: int, grid: int = 1000) -> LatentModel:
    return discretize(continuous_spec(case, grid))


def _vector_rewards(points: np.ndarray) -> np.ndarray:
    return np.vstack([points[:, 0] + points[:, 1], points[:, 0] - points[:, 1]])


def vector_case1() -> LatentModel:
    space, pmf = product_space((VECTOR_SUPPORT, VECTOR_SUPPORT), VECTOR_CASE1_MARGINALS)
    return build_discrete(space, pmf, _vector_rewards(space.outcomes))


def vector_case2(other_mass: str = "residual") -> LatentModel:
    """Two-point-heavy joint distribution on ``{-1,0,1}^2``.

    ``other_mass="residual"`` spreads the mass left by the two named points
    evenly over the remaining seven; ``"nominal"`` uses 0.0028 each and
    lets construction renormalize.
    """
    space, _ = product_space((VECTOR_SUPPORT, VECTOR_SUPPORT), ((1, 1, 1), (1, 1, 1)))
    pts = [tuple(p) for p in space.outcomes.tolist()]
    named = sum(VECTOR_CASE2_POINTS.values())
    if other_mass == "residual":
        other = (1.0 - named) / (len(pts) - len(VECTOR_CASE2_POINTS))
    elif other_mass == "nominal":
        other = VECTOR_CASE2_NOMINAL_OTHER
    else:
        raise ValueError(f"unknown other_mass mode {other_mass!r}")
    pmf = [VECTOR_CASE2_POINTS.get(p, other) for p in pts]
    return build_discrete(space, pmf, _vector_rewards(space.outcomes))


def discrete5_case(case: int, rewards=None) -> LatentModel:
    if rewards is None:
        raise ModelError(
            f"discrete5-case{case}: supply the 3 x 5 reward table "
            "(CLI: --rewards PATH, a JSON list of three 5-element lists)"
        )
    labels = tuple(f"x{j}" for j in range(1, 6))
    return build_discrete(OutcomeSpace(np.arange(1.0, 6.0)[:, None], labels), DISCRETE5_PMFS[case], rewards)


def _continuous_params(case: int) -> dict:
    a, b = CONTINUOUS_SHAPES[case]
    return {
        "density": f"beta({a:g},{b:g})",
        "arms": [
            f"gaussian_pdf(mu={GAUSS_MU}, sigma={GAUSS_SIGMA}, scale={GAUSS_SCALE})",
            f"one_minus_exp(lambda={LAMBDA}, rate=5*lambda={5 * LAMBDA})",
            f"constant({CONST_LEVEL})",
        ],
        "grid": 1000,
    }


SCENARIOS: dict[str, Scenario] = {}


def _register(s: Scenario) -> None:
    SCENARIOS[s.name] = s


_register(Scenario(
    "example2",
    "two arms on three outcomes, g1=(1,2,2), g2=(1.5,0,1.5); pmf overridable as example2:p1,p2,p3",
    {"rewards": [list(r) for r in EXAMPLE2_REWARDS], "pmf": list(EXAMPLE2_PMF)},
    lambda pmf=None, **_: example2(EXAMPLE2_PMF if pmf is None else pmf),
))
for _case in (1, 2, 3):
    _register(Scenario(
        f"continuous-case{_case}",
        f"continuous X ~ Beta{CONTINUOUS_SHAPES[_case]}; Gaussian-pdf, one-minus-exp and constant arms",
        _continuous_params(_case),
        (lambda c: lambda grid=1000, **_: continuous_case(c, grid))(_case),
    ))
_register(Scenario(
    "vector-case1",
    "X=(X1,X2) independent on {-1,0,1}^2, g1=X1+X2, g2=X1-X2",
    {"support": list(VECTOR_SUPPORT), "P_X1": list(VECTOR_CASE1_MARGINALS[0]),
     "P_X2": list(VECTOR_CASE1_MARGINALS[1]), "arms": ["X1+X2", "X1-X2"]},
    lambda **_: vector_case1(),
))
_register(Scenario(
    "vector-case2",
    "X=(X1,X2) on {-1,0,1}^2 with P(1,-1)=0.48, P(1,1)=0.5, g1=X1+X2, g2=X1-X2",
    {"support": list(VECTOR_SUPPORT), "P(1,-1)": 0.48, "P(1,1)": 0.5,
     "P(other)": "remaining 0.02 split evenly over 7 points (nominal: 0.0028 each)",
     "arms": ["X1+X2", "X1-X2"]},
    lambda **_: vector_case2(),
))
for _case in (1, 2, 3):
    _register(Scenario(
        f"discrete5-case{_case}",
        "five-outcome discrete X, three arms; reward table must be supplied by the user",
        {"pmf": list(DISCRETE5_PMFS[_case]), "rewards": "user-supplied 3 x 5 table"},
        (lambda c: lambda rewards=None, **_: discrete5_case(c, rewards))(_case),
    ))


def get_scenario(spec: str, grid: int = 1000, rewards=None) -> LatentModel:
    """Build a scenario by name; ``example2:p1,p2,p3`` overrides the pmf."""
    name, _, arg = spec.partition(":")
    if name not in SCENARIOS:
        raise KeyError(name)
    kwargs: dict = {"grid": grid, "rewards": rewards}
    if arg:
        if name != "example2":
            raise ModelError(f"scenario {name!r} takes no inline parameters")
        try:
            kwargs["pmf"] = [float(v) for v in arg.split(",")]
        except ValueError:
            raise ModelError(f"pmf: cannot parse {arg!r}") from None
    return SCENARIOS[name].build(**kwargs)

