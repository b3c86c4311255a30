"""Correlated multi-armed bandits driven by a latent random source."""

from .model import (
    ContinuousSpec,
    LatentModel,
    OutcomeSpace,
    build_discrete,
    discretize,
    expected_reward,
    optimal_arm,
    sample_outcome,
)
from .pseudo import Classification, PseudoRewardTable, build_table, classify, pseudo_reward
from .policy import CUCB, UCB1, PolicyState
from .sim import ExperimentConfig, RegretTrace, export_csv, run_episode, run_experiment

__version__ = "0.1.0"
