"""Non-robust reference learners: optimistic ridge regression (OFUL-style) and
explore-then-commit. Both pick among polytope vertices and share the
``select``/``update`` interface of :class:`robustlinopt.sbe.SbeLearner`."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import SingularGram
from .geometry import ExplorationBasis
from .sbe import Action, estimate_gap


@dataclass
class RidgeState:
    """V = lam I + sum x x^T and moment = sum r x, with V^-1 kept by rank-one updates."""

    lam: float
    d: int
    gram: np.ndarray = None
    gram_inv: np.ndarray = None
    moment: np.ndarray = None
    steps: int = 0

    def __post_init__(self):
        if self.lam <= 0:
            raise ValueError("regularizer must be positive")
        if self.gram is None:
            self.gram = self.lam * np.eye(self.d)
            self.gram_inv = np.eye(self.d) / self.lam
            self.moment = np.zeros(self.d)


def ridge_update(state: RidgeState, x, reward: float) -> None:
    x = np.asarray(x, dtype=float)
    state.gram += np.outer(x, x)
    vx = state.gram_inv @ x
    state.gram_inv -= np.outer(vx, vx) / (1.0 + x @ vx)
    state.moment += reward * x
    state.steps += 1


def ridge_estimate(state: RidgeState) -> np.ndarray:
    try:
        chol = np.linalg.cholesky(state.gram)
    except np.linalg.LinAlgError as exc:
        raise SingularGram("Gram matrix is not numerically positive definite") from exc
    y = np.linalg.solve(chol, state.moment)
    return np.linalg.solve(chol.T, y)


def oful_width(state: RidgeState, delta: float) -> float:
    return math.sqrt(state.d * math.log((1.0 + state.steps / state.lam) / delta)) + math.sqrt(state.lam)


def oful_step(state: RidgeState, vertices, delta: float) -> int:
    """Index of the vertex maximizing <x, theta_ridge> + w ||x||_{V^-1}."""
    V = np.asarray(vertices)
    theta = ridge_estimate(state)
    w = oful_width(state, delta)
    norms = np.sqrt(np.maximum(np.einsum("ij,jk,ik->i", V, state.gram_inv, V), 0.0))
    return int(np.argmax(V @ theta + w * norms))


class OfulLearner:
    name = "oful"

    def __init__(self, vertices, lam: float = 1.0, delta: float = 0.1):
        self.vertices = np.asarray(vertices, dtype=float)
        self.state = RidgeState(lam, self.vertices.shape[1])
        self.delta = delta
        self.epoch = 1
        self._pending = None

    def select(self, rng=None) -> Action:
        i = oful_step(self.state, self.vertices, self.delta)
        self._pending = self.vertices[i]
        return Action(self.vertices[i], False, None, 1, f"v{i}")

    def update(self, observed: float) -> None:
        ridge_update(self.state, self._pending, observed)
        self._pending = None


@dataclass
class EtcState:
    budget_per_axis: int
    d: int
    step: int = 0
    sums: np.ndarray = None
    commit_index: int | None = None

    def __post_init__(self):
        if self.budget_per_axis < 0:
            raise ValueError("budget must be nonnegative")
        if self.sums is None:
            self.sums = np.zeros(self.d)

    @property
    def exploring(self) -> bool:
        return self.step < self.budget_per_axis * self.d


def etc_step(state: EtcState, basis: ExplorationBasis, vertices) -> Action:
    """Round-robin over s0 + s_j, s0 - s_j (alternating sign per sweep) during
    exploration, then the empirical-best vertex forever."""
    if state.exploring:
        j = state.step % state.d
        sign = 1 if (state.step // state.d) % 2 == 0 else -1
        return Action(basis.point(j, sign), True, j, sign, f"s{j + 1}{'+' if sign > 0 else '-'}")
    if state.commit_index is None:
        n = state.budget_per_axis
        b_hat = np.zeros(state.d) if n == 0 else state.sums / n / basis.sq_norms
        state.commit_index = estimate_gap(basis.axes.T @ b_hat, vertices, 0).best_index
    i = state.commit_index
    return Action(np.asarray(vertices)[i], False, None, 1, f"v{i}")


class EtcLearner:
    name = "etc"

    def __init__(self, basis: ExplorationBasis, vertices, budget_per_axis: int):
        self.basis = basis
        self.vertices = np.asarray(vertices, dtype=float)
        self.state = EtcState(budget_per_axis, basis.d)
        self._pending: Action | None = None

    @property
    def epoch(self) -> int:
        return 1 if self.state.exploring else 2

    def select(self, rng=None) -> Action:
        self._pending = etc_step(self.state, self.basis, self.vertices)
        return self._pending

    def update(self, observed: float) -> None:
        a = self._pending
        if a.explore:
            self.state.sums[a.axis] += a.sign * observed
        self.state.step += 1
        self._pending = None
