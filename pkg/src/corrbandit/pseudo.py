"""Pseudo-rewards, expected pseudo-rewards, pseudo-gaps and arm classification.

For a source arm ``k`` and a reward value ``r`` the pseudo-reward of arm ``l``
is the largest reward ``l`` could have produced on any outcome that makes arm
``k`` pay ``r``.  Reward values are compared up to an absolute ``quantum`` so
that floating-point tables have a well defined preimage.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import NonUniqueOptimum, UnknownReward
from .model import LatentModel, optimal_arm

DEFAULT_QUANTUM = 1e-9


@dataclass(frozen=True)
class ArmKeys:
    """Canonical reward keys of one source arm.

    ``lo``/``hi`` bound the reward values merged into each key, ``pseudo[i, l]``
    is the pseudo-reward of arm ``l`` for key ``i``, and ``key_of_outcome[j]``
    is the key that outcome ``j`` falls in.
    """

    lo: np.ndarray
    hi: np.ndarray
    preimages: tuple[np.ndarray, ...]
    pseudo: np.ndarray
    key_of_outcome: np.ndarray

    @property
    def values(self) -> np.ndarray:
        return self.hi


@dataclass(frozen=True)
class PseudoRewardTable:
    arms: tuple[ArmKeys, ...]
    quantum: float

    @property
    def n_arms(self) -> int:
        return len(self.arms)

    def key_index(self, k: int, r):
        """Key indices of reward value(s) ``r`` for source arm ``k``.

        Raises :class:`UnknownReward` if any value is farther than ``quantum``
        from every reward value of arm ``k``.
        """
        keys = self.arms[k]
        r_arr = np.asarray(r, dtype=float)
        idx = np.searchsorted(keys.lo - self.quantum, r_arr, side="right") - 1
        ok = (idx >= 0) & (r_arr <= keys.hi[np.maximum(idx, 0)] + self.quantum)
        if not np.all(ok):
            bad = r_arr[~ok] if r_arr.ndim else r_arr
            raise UnknownReward(f"reward {np.ravel(bad)[0]!r} is not a reward value of arm {k}")
        return idx

    def lookup(self, k: int, r) -> np.ndarray:
        """Pseudo-rewards of every arm given reward ``r`` from arm ``k``."""
        return self.arms[k].pseudo[self.key_index(k, r)]

    def outcome_pseudo(self, k: int) -> np.ndarray:
        """``(J, K)`` matrix: row ``j`` holds ``s_{l,k}(g_k(x_j))`` for every ``l``."""
        keys = self.arms[k]
        return keys.pseudo[keys.key_of_outcome]


def _canonical_keys(values: np.ndarray, quantum: float) -> tuple[np.ndarray, np.ndarray]:
    # single-linkage clusters of sorted values, consecutive gap <= quantum
    order = np.argsort(values, kind="stable")
    sorted_v = values[order]
    breaks = np.flatnonzero(np.diff(sorted_v) > quantum) + 1
    labels_sorted = np.zeros(values.size, dtype=np.int64)
    labels_sorted[breaks] = 1
    labels_sorted = np.cumsum(labels_sorted)
    labels = np.empty_like(labels_sorted)
    labels[order] = labels_sorted
    return labels, sorted_v


def build_table(model: LatentModel, quantum: float = DEFAULT_QUANTUM) -> PseudoRewardTable:
    if not quantum > 0:
        raise ValueError("quantum must be positive")
    g = model.rewards
    arms = []
    for k in range(model.n_arms):
        labels, _ = _canonical_keys(g[k], quantum)
        n_keys = int(labels.max()) + 1
        preimages = tuple(np.flatnonzero(labels == i) for i in range(n_keys))
        lo = np.array([g[k, pre].min() for pre in preimages])
        hi = np.array([g[k, pre].max() for pre in preimages])
        pseudo = np.array([g[:, pre].max(axis=1) for pre in preimages])
        for a in (lo, hi, pseudo, labels):
            a.setflags(write=False)
        arms.append(ArmKeys(lo, hi, preimages, pseudo, labels))
    return PseudoRewardTable(tuple(arms), float(quantum))


def pseudo_reward(table: PseudoRewardTable, ell: int, k: int, r: float) -> float:
    """``s_{ell,k}(r)``: the most arm ``ell`` could pay when arm ``k`` paid ``r``."""
    return float(table.lookup(k, r)[ell])


def expected_pseudo_matrix(model: LatentModel, table: PseudoRewardTable) -> np.ndarray:
    """``phi[l, k]``: expected pseudo-reward of arm ``l`` with respect to arm ``k``."""
    K = model.n_arms
    phi = np.empty((K, K))
    for k in range(K):
        phi[:, k] = model.pmf @ table.outcome_pseudo(k)
    return phi


def expected_pseudo_reward(
    model: LatentModel, table: PseudoRewardTable, ell: int, k: int
) -> float:
    return float(model.pmf @ table.outcome_pseudo(k)[:, ell])


@dataclass(frozen=True)
class Classification:
    """Ground-truth split of the suboptimal arms by their pseudo-gap to the best arm.

    ``pseudo_gaps[l, k] = mu_k - phi[l, k]``.  Arms with a zero pseudo-gap
    against ``k_star`` are counted as competitive and listed in ``zero_gap``.
    """

    k_star: int
    competitive: tuple[int, ...]
    non_competitive: tuple[int, ...]
    pseudo_gaps: np.ndarray
    means: np.ndarray
    gaps: np.ndarray
    phi: np.ndarray
    zero_gap: tuple[int, ...] = ()

    @property
    def n_competitive(self) -> int:
        return len(self.competitive)

    def to_dict(self) -> dict:
        return {
            "k_star": self.k_star,
            "means": self.means.tolist(),
            "gaps": self.gaps.tolist(),
            "expected_pseudo_rewards": self.phi.tolist(),
            "pseudo_gaps": self.pseudo_gaps.tolist(),
            "competitive": list(self.competitive),
            "non_competitive": list(self.non_competitive),
            "zero_pseudo_gap": list(self.zero_gap),
        }


def classify(model: LatentModel, table: PseudoRewardTable) -> Classification:
    best = optimal_arm(model)
    if best.tie:
        raise NonUniqueOptimum("the optimal arm is not unique")
    k_star = best.k_star
    phi = expected_pseudo_matrix(model, table)
    mu = model.means
    pseudo_gaps = mu[None, :] - phi
    pseudo_gaps[np.arange(model.n_arms), np.arange(model.n_arms)] = 0.0
    col = pseudo_gaps[:, k_star]
    others = [ell for ell in range(model.n_arms) if ell != k_star]
    return Classification(
        k_star=k_star,
        competitive=tuple(ell for ell in others if col[ell] <= 0),
        non_competitive=tuple(ell for ell in others if col[ell] > 0),
        pseudo_gaps=pseudo_gaps,
        means=mu.copy(),
        gaps=best.gaps.copy(),
        phi=phi,
        zero_gap=tuple(ell for ell in others if col[ell] == 0),
    )
