"""Monte-Carlo regret simulation with common random numbers.

Every run draws one outcome sequence from its own seeded stream and replays
it to every policy under comparison.  Regret is accounted with the hidden
outcome: ``g_{k*}(x_t) - g_{k_t}(x_t)`` per round, never clamped.

:func:`run_episode` drives a single policy object round by round.
:func:`run_experiment` advances many runs in lockstep with array operations;
it reproduces :func:`run_episode` decision for decision.
"""

from __future__ import annotations

import csv
import io
import math
import os
import tempfile
from dataclasses import dataclass, field
from pathlib import Path
from typing import Sequence

import numpy as np

from .model import LatentModel, optimal_arm, sample_outcomes
from .policy import POLICY_NAMES, SelectionReport, make_policy
from .pseudo import PseudoRewardTable, build_table

RUN_CHUNK = 128


def derive_seed(base_seed: int, run: int) -> int:
    """64-bit seed for ``run``, mixed from ``base_seed`` by a SeedSequence hash."""
    ss = np.random.SeedSequence(int(base_seed) & (2**64 - 1), spawn_key=(int(run),))
    return int(ss.generate_state(1, np.uint64)[0])


def outcome_stream(model: LatentModel, T: int, seed: int) -> np.ndarray:
    """The ``T`` outcome indices a run with this seed consumes (one uniform each)."""
    return sample_outcomes(model, np.random.Generator(np.random.PCG64(seed)), T)


def default_stride(T: int) -> int:
    return max(1, T // 1000)


def recording_grid(T: int, stride: int) -> np.ndarray:
    grid = np.arange(stride, T + 1, stride)
    if grid.size == 0 or grid[-1] != T:
        grid = np.append(grid, T)
    return grid


@dataclass
class EpisodeTrace:
    outcomes: np.ndarray
    arms: np.ndarray
    rewards: np.ndarray
    cum_regret: np.ndarray
    reports: list[SelectionReport] | None = None

    def pulls(self, K: int, t: int | None = None) -> np.ndarray:
        arms = self.arms if t is None else self.arms[:t]
        return np.bincount(arms, minlength=K)

    def decision_log(self) -> list[dict]:
        if self.reports is None:
            raise ValueError("episode was run without decision logging")
        rows = []
        for t, rep in enumerate(self.reports):
            row = {"round": t + 1, **rep.to_dict(), "reward": float(self.rewards[t])}
            rows.append(row)
        return rows


def run_episode(
    model: LatentModel,
    policy,
    T: int,
    seed: int,
    *,
    outcomes: np.ndarray | None = None,
    log: bool = False,
) -> EpisodeTrace:
    """Play ``policy`` for ``T`` rounds; it only ever sees the rewards."""
    if T < 1:
        raise ValueError("T must be >= 1")
    if outcomes is None:
        outcomes = outcome_stream(model, T, seed)
    g = model.rewards
    k_star = optimal_arm(model).k_star
    arms = np.empty(T, dtype=np.int64)
    rewards = np.empty(T)
    regret = np.empty(T)
    reports = [] if log else None
    total = 0.0
    for t in range(T):
        j = outcomes[t]
        k = policy.select()
        r = g[k, j]
        policy.update(k, r)
        arms[t] = k
        rewards[t] = r
        total += g[k_star, j] - r
        regret[t] = total
        if log:
            reports.append(policy.last_report)
    return EpisodeTrace(np.asarray(outcomes[:T]), arms, rewards, regret, reports)


@dataclass(frozen=True)
class ExperimentConfig:
    T: int = 50_000
    runs: int = 500
    base_seed: int = 0
    policies: tuple[str, ...] = POLICY_NAMES
    record_stride: int | None = None

    def __post_init__(self) -> None:
        if self.T < 1:
            raise ValueError("T must be >= 1")
        if self.runs < 1:
            raise ValueError("runs must be >= 1")
        if self.record_stride is not None and self.record_stride < 1:
            raise ValueError("record_stride must be >= 1")
        if not self.policies:
            raise ValueError("at least one policy is required")

    @property
    def stride(self) -> int:
        return self.record_stride or default_stride(self.T)


@dataclass
class RegretTrace:
    """Per-policy regret at the recorded rounds.

    ``run_regret`` is ``(runs, n_rec)`` and ``run_pulls`` is
    ``(runs, n_rec, K)``; the aggregate fields reduce them over runs.
    """

    policy: str
    rounds: np.ndarray
    run_regret: np.ndarray
    run_pulls: np.ndarray
    consumed: np.ndarray | None = field(default=None, repr=False)

    @property
    def runs(self) -> int:
        return self.run_regret.shape[0]

    @property
    def mean_regret(self) -> np.ndarray:
        return self.run_regret.mean(axis=0)

    @property
    def stderr_regret(self) -> np.ndarray:
        if self.runs < 2:
            return np.zeros(self.rounds.size)
        return self.run_regret.std(axis=0, ddof=1) / math.sqrt(self.runs)

    @property
    def mean_pulls(self) -> np.ndarray:
        return self.run_pulls.mean(axis=0)

    def at(self, t: int) -> int:
        """Column of recorded round ``t``."""
        hits = np.flatnonzero(self.rounds == t)
        if hits.size == 0:
            raise KeyError(f"round {t} was not recorded")
        return int(hits[0])


def _simulate_batch(
    model: LatentModel,
    table: PseudoRewardTable,
    policy: str,
    outcomes: np.ndarray,
    grid: np.ndarray,
    k_star: int,
) -> tuple[np.ndarray, np.ndarray]:
    R, T = outcomes.shape
    K = model.n_arms
    g = model.rewards
    B = model.reward_span
    fixed = None
    if policy.startswith("fixed") and policy[5:].isdigit():
        fixed = int(policy[5:])
        if not 0 <= fixed < K:
            raise ValueError(f"arm {fixed} out of range for {K} arms")
    elif policy not in POLICY_NAMES:
        raise ValueError(f"unknown policy {policy!r}")
    use_pseudo = policy == "cucb"

    rows = np.arange(R)
    n = np.zeros((R, K), dtype=np.int64)
    rsum = np.zeros((R, K))
    phi_sum = np.zeros((R, K, K))
    reg = np.zeros(R)
    out_reg = np.empty((R, grid.size))
    out_n = np.empty((R, grid.size, K), dtype=np.int64)
    rec = 0
    for t in range(T):
        if fixed is not None:
            chosen = np.full(R, fixed)
        elif t < K:
            # every run is still in the one-pull-per-arm phase
            chosen = np.full(R, t)
        else:
            lt = math.log(t)
            idx = rsum / n + B * np.sqrt(2.0 * lt / n)
            if use_pseudo:
                k_max = np.argmax(n, axis=1)
                removed = rsum[rows, k_max][:, None] > phi_sum[rows, :, k_max]
                removed[rows, k_max] = False
                idx[removed] = -np.inf
            chosen = np.argmax(idx, axis=1)
        j = outcomes[:, t]
        r = g[chosen, j]
        if use_pseudo:
            for k in range(K):
                sel = chosen == k
                if sel.any():
                    phi_sum[sel, :, k] += table.lookup(k, r[sel])
        n[rows, chosen] += 1
        rsum[rows, chosen] += r
        reg += g[k_star, j] - r
        if rec < grid.size and grid[rec] == t + 1:
            out_reg[:, rec] = reg
            out_n[:, rec] = n
            rec += 1
    return out_reg, out_n


def run_experiment(
    model: LatentModel,
    config: ExperimentConfig,
    *,
    table: PseudoRewardTable | None = None,
    keep_outcomes: bool = False,
) -> dict[str, RegretTrace]:
    """Run every configured policy on the same per-run outcome sequences.

    With ``keep_outcomes`` each trace carries the ``(runs, T)`` outcome
    indices its policy consumed.
    """
    if table is None:
        table = build_table(model)
    k_star = optimal_arm(model).k_star
    grid = recording_grid(config.T, config.stride)
    parts: dict[str, list] = {p: [] for p in config.policies}
    for start in range(0, config.runs, RUN_CHUNK):
        stop = min(config.runs, start + RUN_CHUNK)
        outcomes = np.vstack([
            outcome_stream(model, config.T, derive_seed(config.base_seed, run))
            for run in range(start, stop)
        ])
        for p in config.policies:
            reg, pulls = _simulate_batch(model, table, p, outcomes, grid, k_star)
            parts[p].append((reg, pulls, outcomes if keep_outcomes else None))
    traces = {}
    for p, chunks in parts.items():
        traces[p] = RegretTrace(
            policy=p,
            rounds=grid,
            run_regret=np.vstack([c[0] for c in chunks]),
            run_pulls=np.concatenate([c[1] for c in chunks]),
            consumed=np.vstack([c[2] for c in chunks]) if keep_outcomes else None,
        )
    return traces


def run_single(model: LatentModel, policy_name: str, T: int, seed: int, log: bool = True,
               table: PseudoRewardTable | None = None) -> EpisodeTrace:
    if table is None:
        table = build_table(model)
    return run_episode(model, make_policy(policy_name, model, table), T, seed, log=log)


def csv_text(traces: Sequence[RegretTrace] | dict[str, RegretTrace]) -> str:
    """CSV rendering: ``policy,t,mean_regret,stderr_regret,n_0..n_{K-1}``."""
    if isinstance(traces, dict):
        traces = list(traces.values())
    if not traces:
        raise ValueError("no traces to export")
    K = traces[0].run_pulls.shape[2]
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["policy", "t", "mean_regret", "stderr_regret"] + [f"n_{k}" for k in range(K)])
    for tr in sorted(traces, key=lambda x: x.policy):
        mean, se, pulls = tr.mean_regret, tr.stderr_regret, tr.mean_pulls
        for i, t in enumerate(tr.rounds):
            w.writerow([tr.policy, int(t), f"{mean[i]:.12g}", f"{se[i]:.12g}"]
                       + [f"{v:.12g}" for v in pulls[i]])
    return buf.getvalue()


def atomic_write(path: str | Path, text: str) -> None:
    """Write via a temporary file in the target directory, then rename."""
    path = Path(path)
    fd, tmp = tempfile.mkstemp(dir=path.parent or ".", prefix=f".{path.name}.")
    try:
        with os.fdopen(fd, "w", newline="") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def export_csv(traces, path: str | Path) -> None:
    atomic_write(path, csv_text(traces))


def read_csv(path: str | Path) -> list[dict]:
    with open(path, newline="") as fh:
        return list(csv.DictReader(fh))
