"""Stochastic linear rewards with adversarial corruption.

Round protocol, enforced by :class:`Environment`:

1. ``begin_round(t)`` lets the adversary commit a corruption function for
   round t from the public history of rounds < t. The handle is sealed before
   it is returned.
2. The learner picks x_t.
3. ``observe(x_t, handle)`` draws fresh noise and returns the actual and the
   corrupted (observed) reward. Only the observed value may reach the learner.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field

import numpy as np

from . import geometry
from .errors import (
    ActionOutsideDecisionSet,
    BoundaryOutOfRange,
    BudgetViolation,
    GeneratorExhausted,
    ProtocolViolation,
)

NOISE_KINDS = ("gaussian_std", "uniform_pm1", "none")
CORRUPTION_KINDS = ("none", "first_k_flip", "target_vertex", "adaptive_gap_mask")


@dataclass(frozen=True)
class LinearRewardModel:
    theta: np.ndarray
    noise_kind: str = "gaussian_std"

    def __post_init__(self):
        theta = np.array(self.theta, dtype=float)
        theta.setflags(write=False)
        object.__setattr__(self, "theta", theta)
        if np.linalg.norm(theta) > 1.0 + 1e-12:
            raise ValueError("||theta||_2 must be at most 1")
        if self.noise_kind not in NOISE_KINDS:
            raise ValueError(f"unknown noise kind {self.noise_kind!r}")

    def mean(self, x) -> float:
        return float(np.dot(x, self.theta))

    def draw_noise(self, rng: np.random.Generator, size: int) -> np.ndarray:
        if self.noise_kind == "gaussian_std":
            return rng.standard_normal(size)
        if self.noise_kind == "uniform_pm1":
            return rng.uniform(-1.0, 1.0, size)
        return np.zeros(size)


@dataclass
class CorruptionLedger:
    """Declared per-step corruption magnitudes; step t is ``per_step[t-1]``."""

    per_step: list = field(default_factory=list)

    def record(self, magnitude: float) -> None:
        if magnitude < 0:
            raise ValueError("declared magnitude must be nonnegative")
        self.per_step.append(float(magnitude))

    @property
    def total(self) -> float:
        return math.fsum(self.per_step)

    def cumulative(self) -> np.ndarray:
        return np.cumsum(self.per_step)

    def to_csv(self, path) -> None:
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["t", "declared_magnitude", "cumulative_C"])
            running = 0.0
            for t, mag in enumerate(self.per_step, start=1):
                running += mag
                w.writerow([t, repr(mag), repr(running)])


def ledger_epoch_close(ledger: CorruptionLedger, boundaries) -> list[float]:
    """Per-epoch corruption C_m for epochs ending at the cumulative step counts
    ``boundaries`` (T_1, T_2, ...); epoch m covers steps T_{m-1}+1 .. T_m."""
    out = []
    prev = 0
    n = len(ledger.per_step)
    for end in boundaries:
        end = int(end)
        if end < prev:
            raise BoundaryOutOfRange(f"boundaries must be nondecreasing ({end} < {prev})")
        if end > n:
            raise BoundaryOutOfRange(f"boundary {end} exceeds the {n} recorded steps")
        out.append(math.fsum(ledger.per_step[prev:end]))
        prev = end
    return out


@dataclass(frozen=True)
class StepOutcome:
    actual_reward: float
    observed_reward: float
    corruption_applied: float
    declared_magnitude: float


class History:
    """Public record of past rounds: actions and observed rewards only."""

    def __init__(self):
        self.actions: list[np.ndarray] = []
        self.observed: list[float] = []

    def __len__(self):
        return len(self.observed)

    def append(self, x, observed):
        # callers pass arrays they no longer mutate
        self.actions.append(x)
        self.observed.append(float(observed))


class CorruptionHandle:
    """The adversary's committed c_t. Queries before sealing are refused."""

    __slots__ = ("t", "magnitude", "_fn", "_sealed")

    def __init__(self, t: int, magnitude: float, fn=None):
        if not 0.0 <= magnitude <= 1.0:
            raise BudgetViolation(f"declared magnitude {magnitude} outside [0, 1]")
        self.t = t
        self.magnitude = float(magnitude)
        self._fn = fn
        self._sealed = False

    def seal(self) -> "CorruptionHandle":
        self._sealed = True
        return self

    @property
    def sealed(self) -> bool:
        return self._sealed

    def __call__(self, x) -> float:
        if not self._sealed:
            raise ProtocolViolation(f"corruption for round {self.t} queried before sealing")
        if self._fn is None or self.magnitude == 0.0:
            return 0.0
        value = float(self._fn(x))
        if abs(value) > self.magnitude + 1e-12:
            raise BudgetViolation(f"|c_{self.t}(x)| = {abs(value):.6g} exceeds declared {self.magnitude:.6g}")
        return value


# ---------------------------------------------------------------------------
# strategies


class CorruptionStrategy:
    """Base adversary. ``plan`` returns (declared magnitude, function of x)."""

    kind = "none"

    def plan(self, t: int, history: History):
        return 0.0, None


class NoCorruption(CorruptionStrategy):
    pass


class FirstKFlip(CorruptionStrategy):
    """Push the expected reward toward its negation during the first k rounds:
    c_t(x) = clip(-2 <x, theta>, -1, 1)."""

    kind = "first_k_flip"

    def __init__(self, k: int, theta):
        self.k = int(k)
        self.theta = np.asarray(theta, dtype=float)

    def plan(self, t, history):
        if t > self.k:
            return 0.0, None
        theta = self.theta
        return 1.0, lambda x: min(1.0, max(-1.0, -2.0 * float(np.dot(x, theta))))


class _Budgeted(CorruptionStrategy):
    def __init__(self, budget: float, magnitude: float = 1.0):
        if budget < 0:
            raise ValueError("budget must be nonnegative")
        if not 0.0 < magnitude <= 1.0:
            raise ValueError("magnitude must lie in (0, 1]")
        self.budget = float(budget)
        self.magnitude = float(magnitude)
        self.spent = 0.0

    def _next_magnitude(self) -> float:
        mag = min(self.magnitude, self.budget - self.spent)
        if mag <= 1e-15:
            return 0.0
        self.spent += mag
        return mag


class TargetVertex(_Budgeted):
    """Affine corruption worth +mag at ``target`` and -mag at ``optimum``.

    c(x) = mag * clip(<x - midpoint, u>, -1, 1) with u = 2 (target - optimum) / ||target - optimum||^2,
    applied while the budget lasts.
    """

    kind = "target_vertex"

    def __init__(self, target, optimum, budget: float, magnitude: float = 1.0):
        super().__init__(budget, magnitude)
        self.target = np.asarray(target, dtype=float)
        self.optimum = np.asarray(optimum, dtype=float)
        diff = self.target - self.optimum
        nrm2 = float(diff @ diff)
        if nrm2 == 0:
            raise ValueError("target must differ from the optimum")
        self.direction = 2.0 * diff / nrm2
        self.midpoint = 0.5 * (self.target + self.optimum)

    def plan(self, t, history):
        mag = self._next_magnitude()
        if mag == 0.0:
            return 0.0, None
        u, mid = self.direction, self.midpoint

        def fn(x):
            return mag * min(1.0, max(-1.0, float(np.dot(np.asarray(x) - mid, u))))

        return mag, fn


class AdaptiveGapMask(_Budgeted):
    """Re-planned every round: subtract ``magnitude`` from the observation of the
    action with the best empirical mean observed reward so far."""

    kind = "adaptive_gap_mask"

    def __init__(self, budget: float, magnitude: float = 1.0, decimals: int = 9):
        super().__init__(budget, magnitude)
        self.decimals = decimals
        self._sums: dict = {}
        self._counts: dict = {}
        self._seen = 0

    def _key(self, x):
        return tuple(np.round(np.asarray(x, dtype=float), self.decimals).tolist())

    def plan(self, t, history):
        for x, y in zip(history.actions[self._seen:], history.observed[self._seen:]):
            k = self._key(x)
            self._sums[k] = self._sums.get(k, 0.0) + y
            self._counts[k] = self._counts.get(k, 0) + 1
        self._seen = len(history)
        if not self._counts:
            return 0.0, None
        mag = self._next_magnitude()
        if mag == 0.0:
            return 0.0, None
        best = max(self._counts, key=lambda k: (self._sums[k] / self._counts[k], k))
        key = self._key

        def fn(x):
            return -mag if key(x) == best else 0.0

        return mag, fn


def make_strategy(kind: str, *, budget: float = 0.0, k: int | None = None, theta=None,
                  target=None, optimum=None, magnitude: float = 1.0) -> CorruptionStrategy:
    if kind == "none":
        return NoCorruption()
    if kind == "first_k_flip":
        return FirstKFlip(int(budget) if k is None else k, theta)
    if kind == "target_vertex":
        return TargetVertex(target, optimum, budget, magnitude)
    if kind == "adaptive_gap_mask":
        return AdaptiveGapMask(budget, magnitude)
    raise ValueError(f"unknown corruption kind {kind!r}")


# ---------------------------------------------------------------------------
# environment


class Environment:
    """Owns the hidden model, the adversary, the noise stream and the ledger.

    Learners must only ever see ``StepOutcome.observed_reward``.
    """

    def __init__(self, polytope: geometry.Polytope, model: LinearRewardModel,
                 strategy: CorruptionStrategy | None = None, rng: np.random.Generator | None = None,
                 noise_block: int = 4096):
        self.polytope = polytope
        self.model = model
        self.strategy = strategy if strategy is not None else NoCorruption()
        self.rng = rng if rng is not None else np.random.default_rng()
        self.ledger = CorruptionLedger()
        self.history = History()
        self.actual: list[float] = []
        self._noise = np.empty(0)
        self._noise_pos = 0
        self._noise_block = noise_block
        self._open: CorruptionHandle | None = None
        self._A = np.asarray(polytope.A)
        self._b = np.asarray(polytope.b) + geometry.TOL
        self._theta = model.theta

    @property
    def t(self) -> int:
        """Number of completed rounds."""
        return len(self.history)

    def begin_round(self, t: int) -> CorruptionHandle:
        if self._open is not None:
            raise ProtocolViolation(f"round {self._open.t} is still open")
        if t != self.t + 1:
            raise ProtocolViolation(f"expected round {self.t + 1}, got {t}")
        mag, fn = self.strategy.plan(t, self.history)
        handle = CorruptionHandle(t, mag, fn).seal()
        self._open = handle
        return handle

    def _next_noise(self) -> float:
        if self._noise_pos >= self._noise.shape[0]:
            self._noise = self.model.draw_noise(self.rng, self._noise_block)
            self._noise_pos = 0
        eta = self._noise[self._noise_pos]
        self._noise_pos += 1
        return float(eta)

    def observe(self, x, handle: CorruptionHandle) -> StepOutcome:
        if handle is not self._open or not handle.sealed:
            raise ProtocolViolation("observe() needs the sealed handle of the open round")
        x = np.asarray(x, dtype=float)
        if (self._A @ x - self._b).max() > 0.0:
            raise ActionOutsideDecisionSet(f"action {x.tolist()} violates the decision set")
        actual = float(x @ self._theta) + self._next_noise()
        c = handle(x)
        observed = actual + c
        self._open = None
        self.ledger.record(handle.magnitude)
        self.history.append(x, observed)
        self.actual.append(actual)
        return StepOutcome(actual, observed, c, handle.magnitude)


def begin_round(env: Environment, t: int) -> CorruptionHandle:
    return env.begin_round(t)


def observe(env: Environment, x, handle: CorruptionHandle) -> StepOutcome:
    return env.observe(x, handle)


# ---------------------------------------------------------------------------
# instances


@dataclass(frozen=True)
class Instance:
    polytope: geometry.Polytope
    model: LinearRewardModel
    gap: float
    best_index: int
    second_index: int

    @property
    def x_star(self) -> np.ndarray:
        return self.polytope.vertices[self.best_index]

    @property
    def x_second(self) -> np.ndarray:
        return self.polytope.vertices[self.second_index]


def vertex_gap(vertices, theta):
    """(gap, best index, second index) by a scan over vertex scores."""
    scores = np.asarray(vertices) @ np.asarray(theta, dtype=float)
    order = np.argsort(-scores, kind="stable")
    best, second = int(order[0]), int(order[1])
    return float(scores[best] - scores[second]), best, second


def make_instance(polytope: geometry.Polytope, rng: np.random.Generator, theta=None,
                  theta_norm: float = 1.0, delta_floor: float = 0.05, noise_kind: str = "gaussian_std",
                  perturbation: float = 0.05, max_retries: int = 1000) -> Instance:
    """Pick or perturb theta until the best vertex is unique with gap >= ``delta_floor``.

    A given ``theta`` is kept if it already meets the floor; otherwise it is
    perturbed by Gaussian noise of scale ``perturbation`` (rescaled into the
    unit ball). Without ``theta`` a random direction of norm ``theta_norm``
    is drawn each try.
    """
    V = polytope.vertices
    d = polytope.d
    base = None if theta is None else np.asarray(theta, dtype=float)
    for attempt in range(max_retries + 1):
        if base is None:
            cand = rng.standard_normal(d)
            cand *= theta_norm / np.linalg.norm(cand)
        elif attempt == 0:
            cand = base.copy()
        else:
            cand = base + perturbation * rng.standard_normal(d)
        nrm = np.linalg.norm(cand)
        if nrm > 1.0:
            cand = cand / nrm
        gap, best, second = vertex_gap(V, cand)
        if gap >= delta_floor and gap > 0:
            return Instance(polytope, LinearRewardModel(cand, noise_kind), gap, best, second)
    raise GeneratorExhausted(f"no theta with a unique optimum and gap >= {delta_floor} after {max_retries} retries")
