"""Index policies as explicit select/update state machines.

``UCB1`` is the classic upper-confidence-bound rule.  ``CUCB`` first drops
every arm whose empirical pseudo-reward, measured against the most-pulled arm,
falls below that arm's empirical mean, then applies UCB1 to what is left.

All tie-breaking goes to the lowest arm index and no policy draws random
numbers, so replaying a reward sequence reproduces every decision.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .pseudo import PseudoRewardTable


@dataclass
class PolicyState:
    """Sufficient statistics after ``t`` rounds.

    Means are kept as sums and divided on read.  Sums of rewards on a common
    lattice are exact, and a correctly rounded ``S / n`` is monotone in ``S``,
    so ties and orderings between means survive floating point exactly.
    ``phi_sum[l, k]`` accumulates pseudo-rewards of arm ``l`` computed from
    the rewards of arm ``k``.
    """

    n_arms: int
    reward_span: float
    t: int = 0
    n: np.ndarray = field(default=None)
    reward_sum: np.ndarray = field(default=None)
    phi_sum: np.ndarray = field(default=None)

    def __post_init__(self) -> None:
        K = self.n_arms
        if self.n is None:
            self.n = np.zeros(K, dtype=np.int64)
        if self.reward_sum is None:
            self.reward_sum = np.zeros(K)
        if self.phi_sum is None:
            self.phi_sum = np.zeros((K, K))

    @property
    def mu_hat(self) -> np.ndarray:
        with np.errstate(invalid="ignore", divide="ignore"):
            return np.where(self.n > 0, self.reward_sum / self.n, 0.0)

    @property
    def phi_hat(self) -> np.ndarray:
        with np.errstate(invalid="ignore", divide="ignore"):
            return np.where(self.n[None, :] > 0, self.phi_sum / self.n[None, :], np.nan)


@dataclass(frozen=True)
class SelectionReport:
    chosen: int
    k_max: int | None
    removed: tuple[int, ...]
    indices: tuple[float, ...]

    def to_dict(self) -> dict:
        return {
            "k_max": self.k_max,
            "removed": list(self.removed),
            "indices": [None if math.isinf(v) else v for v in self.indices],
            "chosen": self.chosen,
        }


def ucb_index(state: PolicyState, k: int) -> float:
    n_k = state.n[k]
    if n_k == 0:
        return math.inf
    lt = math.log(state.t)
    return state.reward_sum[k] / n_k + state.reward_span * math.sqrt(2.0 * lt / n_k)


def ucb_indices(state: PolicyState) -> np.ndarray:
    return np.array([ucb_index(state, k) for k in range(state.n_arms)])


def ucb1_select(state: PolicyState) -> int:
    return int(np.argmax(ucb_indices(state)))


def cucb_select(state: PolicyState) -> SelectionReport:
    idx = ucb_indices(state)
    unpulled = np.flatnonzero(state.n == 0)
    if unpulled.size:
        # round-robin initialization: filtering needs a mean for the most-pulled arm
        return SelectionReport(int(unpulled[0]), None, (), tuple(idx.tolist()))
    k_max = int(np.argmax(state.n))
    # mu_hat[k_max] > phi_hat[k, k_max] compared on the shared count n[k_max]
    s_max = state.reward_sum[k_max]
    removed = tuple(
        k for k in range(state.n_arms)
        if k != k_max and s_max > state.phi_sum[k, k_max]
    )
    masked = idx.copy()
    masked[list(removed)] = -math.inf
    return SelectionReport(int(np.argmax(masked)), k_max, removed, tuple(idx.tolist()))


def update(
    state: PolicyState, chosen: int, r: float, table: PseudoRewardTable | None = None
) -> PolicyState:
    """Fold the reward of round ``t + 1`` into ``state`` (in place) and return it.

    Pseudo-reward statistics are only maintained when ``table`` is given.
    """
    if table is not None:
        state.phi_sum[:, chosen] += table.lookup(chosen, r)
    state.n[chosen] += 1
    state.reward_sum[chosen] += r
    state.t += 1
    return state


class UCB1:
    name = "ucb1"

    def __init__(self, n_arms: int, reward_span: float):
        self.state = PolicyState(n_arms, reward_span)
        self.last_report: SelectionReport | None = None

    def select(self) -> int:
        idx = ucb_indices(self.state)
        chosen = int(np.argmax(idx))
        self.last_report = SelectionReport(chosen, None, (), tuple(idx.tolist()))
        return chosen

    def update(self, arm: int, reward: float) -> None:
        update(self.state, arm, reward)


class CUCB:
    name = "cucb"

    def __init__(self, n_arms: int, reward_span: float, table: PseudoRewardTable):
        if table.n_arms != n_arms:
            raise ValueError("pseudo-reward table does not match the number of arms")
        self.state = PolicyState(n_arms, reward_span)
        self.table = table
        self.last_report: SelectionReport | None = None

    def select(self) -> int:
        self.last_report = cucb_select(self.state)
        return self.last_report.chosen

    def update(self, arm: int, reward: float) -> None:
        update(self.state, arm, reward, self.table)


class FixedArm:
    """Always pulls one arm.  Useful as a regret-accounting reference."""

    def __init__(self, n_arms: int, arm: int):
        if not 0 <= arm < n_arms:
            raise ValueError(f"arm {arm} out of range for {n_arms} arms")
        self.arm = arm
        self.name = f"fixed{arm}"
        self.state = PolicyState(n_arms, 0.0)
        self.last_report: SelectionReport | None = None

    def select(self) -> int:
        self.last_report = SelectionReport(self.arm, None, (), ())
        return self.arm

    def update(self, arm: int, reward: float) -> None:
        update(self.state, arm, reward)


POLICY_NAMES = ("ucb1", "cucb")


def make_policy(name: str, model, table: PseudoRewardTable | None = None):
    """Instantiate a policy by identifier: ``ucb1``, ``cucb`` or ``fixed<k>``."""
    K, B = model.n_arms, model.reward_span
    if name == "ucb1":
        return UCB1(K, B)
    if name == "cucb":
        if table is None:
            raise ValueError("cucb needs a pseudo-reward table")
        return CUCB(K, B, table)
    if name.startswith("fixed") and name[5:].isdigit():
        return FixedArm(K, int(name[5:]))
    raise ValueError(f"unknown policy {name!r}")
