"""Support Basis Exploration (SBE) learner.

Epoch m lasts N_m = zeta 4^m + zeta / gap_{m-1}^2 steps. Each step explores a
uniformly chosen basis axis with probability gamma_{m-1} and otherwise plays
the best vertex under the previous epoch's estimate. At the end of the epoch
every axis gets the estimate  b_j = (sum of its observations / n_e) / ||s_j||^2,
where n_e is the *expected* per-axis exploration count gamma_{m-1} N_m / d.
"""

from __future__ import annotations

import math
import sys
from dataclasses import dataclass, field
from typing import NamedTuple

import numpy as np

from .errors import HorizonExhausted, ZeroExpectedCount
from .geometry import ExplorationBasis

MODES = ("exact_ellipsoid", "weak_ellipsoid")
EXPLORATION = ("signed", "one_sided")


def _ceil(x: float) -> int:
    # snap values within a few ulps of an integer (50.000000000000007) before rounding up
    r = round(x)
    if abs(x - r) <= 8 * sys.float_info.epsilon * max(1.0, abs(x)):
        return int(r)
    return int(math.ceil(x))


@dataclass(frozen=True)
class SbeConfig:
    """``zeta`` overrides the formula value; ``zeta_scale`` multiplies whichever is used.

    ``exploration="signed"`` plays s0 +- s_j with a fair random sign and records
    sign * observation, which cancels the constant <s0, theta> that one-sided
    exploration would leak into every b_j when the ellipsoid center is not the
    origin. ``"one_sided"`` plays s0 + s_j only.
    """

    delta: float = 0.1
    horizon: int = 1000
    zeta: float | None = None
    zeta_scale: float = 1.0
    mode: str = "weak_ellipsoid"
    exploration: str = "signed"

    def __post_init__(self):
        if not 0.0 < self.delta < 1.0:
            raise ValueError("delta must lie in (0, 1)")
        if self.horizon < 1:
            raise ValueError("horizon must be >= 1")
        if self.mode not in MODES:
            raise ValueError(f"mode must be one of {MODES}")
        if self.exploration not in EXPLORATION:
            raise ValueError(f"exploration must be one of {EXPLORATION}")
        if self.zeta_scale <= 0 or (self.zeta is not None and self.zeta <= 0):
            raise ValueError("zeta must be positive")

    def resolve_zeta(self, d: int) -> float:
        if self.zeta is not None:
            return self.zeta * self.zeta_scale
        return default_zeta(d, self.horizon, self.delta, self.mode, self.zeta_scale)


def default_zeta(d: int, T: int, delta: float, mode: str = "weak_ellipsoid", scale: float = 1.0) -> float:
    """2^14 d^p log(4 d log T / delta), p = 6 (weak) or 5 (exact), times ``scale``."""
    if T <= 1:
        raise ValueError("the formula needs T > 1")
    inner = 4.0 * d * math.log(T) / delta
    if mode == "weak_ellipsoid":
        power = 6
    elif mode == "exact_ellipsoid":
        power = 5
    else:
        raise ValueError(f"unknown mode {mode!r}")
    return scale * 2.0**14 * d**power * math.log(inner)


@dataclass(frozen=True)
class EpochSchedule:
    m: int
    n_m: int
    N_m: int
    start: int  # T_{m-1}
    end: int  # T_m, possibly truncated at the horizon
    gamma_prev: float
    expected_count: float  # n_e = gamma_{m-1} N_m / d
    truncated: bool

    @property
    def length(self) -> int:
        return self.end - self.start


def exploration_ratio(m: int, delta_hat: float) -> float:
    """gamma_m = gap^-2 / (gap^-2 + 4^(m+1))."""
    inv = delta_hat**-2
    return inv / (inv + 4.0 ** (m + 1))


def next_schedule(m: int, delta_prev: float, zeta: float, T: int, start: int, d: int,
                  gamma_prev: float | None = None) -> EpochSchedule:
    if m < 1:
        raise ValueError("epochs are numbered from 1")
    if not delta_prev > 0:
        raise ValueError("previous gap estimate must be positive")
    if start >= T:
        raise HorizonExhausted(f"horizon {T} already consumed")
    if gamma_prev is None:
        gamma_prev = exploration_ratio(m - 1, delta_prev)
    n_m = _ceil(zeta * 4.0**m)
    N_m = _ceil(zeta * 4.0**m + zeta * delta_prev**-2)
    end = start + N_m
    truncated = end > T
    return EpochSchedule(m, n_m, N_m, start, min(end, T), gamma_prev, gamma_prev * N_m / d, truncated)


class Action(NamedTuple):
    x: np.ndarray
    explore: bool
    axis: int | None
    sign: int
    label: str


def select_action(gamma: float, exploit_index: int, vertices, basis: ExplorationBasis, rng,
                  signed: bool = True) -> Action:
    """One step of the randomized explore/exploit choice.

    ``rng`` needs ``random()`` and ``integers(n)``; exploration consumes one
    uniform for the coin, one integer for the axis and, when ``signed``, one
    integer for the sign.
    """
    if rng.random() < gamma:
        j = int(rng.integers(basis.d))
        sign = 1
        if signed and int(rng.integers(2)) == 1:
            sign = -1
        return Action(basis.point(j, sign), True, j, sign, f"s{j + 1}{'+' if sign > 0 else '-'}")
    return Action(vertices[exploit_index], False, None, 1, f"v{exploit_index}")


@dataclass
class EpochTally:
    d: int
    expected_count: float
    sums: np.ndarray = None
    counts: np.ndarray = None

    def __post_init__(self):
        if self.sums is None:
            self.sums = np.zeros(self.d)
        if self.counts is None:
            self.counts = np.zeros(self.d, dtype=int)


def record_step(tally: EpochTally, axis: int, observed: float, sign: int = 1) -> None:
    tally.sums[axis] += sign * observed
    tally.counts[axis] += 1


@dataclass(frozen=True)
class Estimate:
    m: int
    b_hat: np.ndarray
    theta_hat: np.ndarray


def close_epoch(tally: EpochTally, basis: ExplorationBasis, m: int) -> Estimate:
    if tally.expected_count < 1.0:
        raise ZeroExpectedCount(f"expected per-axis exploration count {tally.expected_count:.3g} < 1")
    r = tally.sums / tally.expected_count
    b_hat = r / basis.sq_norms
    return Estimate(m, b_hat, basis.axes.T @ b_hat)


@dataclass(frozen=True)
class GapEstimate:
    m: int
    delta_hat: float
    best_index: int
    second_index: int
    raw_gap: float


def estimate_gap(theta_hat, vertices, m: int) -> GapEstimate:
    """Best and runner-up vertex under ``theta_hat`` (lowest index wins ties); gap floored at 2^-m."""
    V = np.asarray(vertices)
    if V.shape[0] < 2:
        raise ValueError("need at least two vertices")
    scores = V @ np.asarray(theta_hat, dtype=float)
    best = int(np.argmax(scores))
    rest = scores.copy()
    rest[best] = -np.inf
    second = int(np.argmax(rest))
    raw = float(scores[best] - scores[second])
    return GapEstimate(m, max(2.0**-m, raw), best, second, raw)


def beta_m(d: int, C_m: float, N_m: float, delta_prev: float, kappa: float | None = None) -> float:
    """Confidence width 4 d^2 C_m / N_m + gap_{m-1} / 16.

    With a certified containment factor ``kappa`` the per-coefficient bound
    2d becomes 2 kappa, giving 4 d kappa C_m / N_m + kappa gap_{m-1} / (16 d).
    """
    if min(C_m, N_m, delta_prev) < 0:
        raise ValueError("inputs must be nonnegative")
    k = d if kappa is None else kappa
    return 4.0 * d * k * C_m / N_m + k * delta_prev / (16.0 * d)


class BufferedRng:
    """Block-drawn uniforms for the per-step coin flips; same interface as
    the bits of ``numpy.random.Generator`` that :func:`select_action` uses."""

    def __init__(self, rng: np.random.Generator, block: int = 4096):
        self._rng = rng
        self._block = block
        self._u = np.empty(0)
        self._i = 0

    def random(self) -> float:
        if self._i >= self._u.shape[0]:
            self._u = self._rng.random(self._block)
            self._i = 0
        v = self._u[self._i]
        self._i += 1
        return float(v)

    def integers(self, n: int) -> int:
        return min(int(self.random() * n), n - 1)


class SbeLearner:
    """Stateful SBE policy.

    ``select(rng)`` returns the next :class:`Action` and ``update(observed)``
    feeds back the corrupted reward of that action. The learner never sees
    theta, the corruption, or actual rewards.
    """

    name = "sbe"

    def __init__(self, basis: ExplorationBasis, vertices, config: SbeConfig):
        self.basis = basis
        self.vertices = np.asarray(vertices, dtype=float)
        self.config = config
        self.d = basis.d
        self.T = config.horizon
        self.zeta = config.resolve_zeta(self.d)
        self.signed = config.exploration == "signed"
        self.t = 0
        self.epoch_log: list[dict] = []
        self.estimate = Estimate(0, np.zeros(self.d), np.zeros(self.d))
        # theta_hat^(0) = 0: every vertex ties, so vertex 0 is exploited and the floor gives gap 1
        self.gap = estimate_gap(self.estimate.theta_hat, self.vertices, 0)
        self.gamma = 0.2
        self.schedule: EpochSchedule | None = None
        self.tally: EpochTally | None = None
        self._pending: Action | None = None
        self._start_epoch(1)

    @property
    def epoch(self) -> int:
        return self.schedule.m

    def _start_epoch(self, m: int) -> None:
        self.schedule = next_schedule(m, self.gap.delta_hat, self.zeta, self.T, self.t, self.d, self.gamma)
        self.tally = EpochTally(self.d, self.schedule.expected_count)

    def _close(self) -> None:
        s = self.schedule
        est = close_epoch(self.tally, self.basis, s.m)
        gap = estimate_gap(est.theta_hat, self.vertices, s.m)
        gamma = exploration_ratio(s.m, gap.delta_hat)
        self.epoch_log.append(self._log_entry(est, gap, gamma))
        self.estimate, self.gap, self.gamma = est, gap, gamma

    def _log_entry(self, est, gap, gamma) -> dict:
        s = self.schedule
        return {
            "m": s.m,
            "theta_hat": None if est is None else est.theta_hat.tolist(),
            "b_hat": None if est is None else est.b_hat.tolist(),
            "delta_hat": None if gap is None else gap.delta_hat,
            "best_vertex": None if gap is None else gap.best_index,
            "gamma": gamma,
            "gamma_prev": s.gamma_prev,
            "delta_hat_prev": self.gap.delta_hat,
            "exploit_vertex": self.gap.best_index,
            "n_m": s.n_m,
            "N_m": s.N_m,
            "start": s.start,
            "end": s.end,
            "expected_count": s.expected_count,
            "realized_counts": self.tally.counts.tolist(),
            "truncated": s.truncated,
        }

    def select(self, rng) -> Action:
        if self._pending is not None:
            raise RuntimeError("update() must follow every select()")
        if self.t >= self.T:
            raise HorizonExhausted(f"horizon {self.T} reached")
        if self.t >= self.schedule.end:
            self._close()
            self._start_epoch(self.schedule.m + 1)
        a = select_action(self.gamma, self.gap.best_index, self.vertices, self.basis, rng, self.signed)
        self._pending = a
        return a

    def update(self, observed: float) -> None:
        a = self._pending
        if a is None:
            raise RuntimeError("update() without a pending action")
        if a.explore:
            record_step(self.tally, a.axis, observed, a.sign)
        self._pending = None
        self.t += 1
        if self.t == self.T:
            if self.schedule.truncated:
                self.epoch_log.append(self._log_entry(None, None, None))
            else:
                self._close()


def run(config: SbeConfig, polytope, basis: ExplorationBasis, environment, rng: np.random.Generator):
    """Drive SBE for ``config.horizon`` rounds against ``environment``.

    Returns the learner (its ``epoch_log`` holds per-epoch state) and the
    learner-side step log.
    """
    from .harness import play

    learner = SbeLearner(basis, polytope.vertices, config)
    steps = play(learner, environment, config.horizon, rng)
    return learner, steps
