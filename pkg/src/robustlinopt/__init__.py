"""Stochastic linear optimization over polytopes with adversarially corrupted
rewards: the SBE learner, inscribed-ellipsoid geometry, a corruption-aware
simulator, baselines and an experiment harness."""

from .environment import Environment, LinearRewardModel, make_instance, make_strategy
from .geometry import (
    Ellipsoid,
    ExplorationBasis,
    Polytope,
    decompose,
    exploration_basis,
    inscribed_ellipsoid,
    validate_polytope,
)
from .harness import run_experiment, sweep
from .sbe import SbeConfig, SbeLearner

__version__ = "0.1.0"

__all__ = [
    "Ellipsoid",
    "Environment",
    "ExplorationBasis",
    "LinearRewardModel",
    "Polytope",
    "SbeConfig",
    "SbeLearner",
    "decompose",
    "exploration_basis",
    "inscribed_ellipsoid",
    "make_instance",
    "make_strategy",
    "run_experiment",
    "sweep",
    "validate_polytope",
]
