"""Experiment orchestration: the round loop, pseudo-regret traces, seeded sweeps
and harness-side checks of the estimator's confidence bounds.

Everything that needs the hidden theta or the corruption ledger lives here;
learners only receive observed rewards through :func:`play`.
"""

from __future__ import annotations

import csv
import itertools
import json
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import geometry
from .baselines import EtcLearner, OfulLearner
from .config import ExperimentConfig, SweepConfig
from .environment import Environment, Instance, ledger_epoch_close, make_instance, make_strategy
from .errors import MissingLedger
from .sbe import BufferedRng, SbeConfig, SbeLearner, beta_m, default_zeta, next_schedule

TRACE_COLUMNS = ("t", "epoch", "action_id", "actual", "observed", "inst_regret", "cum_regret")


@dataclass
class StepLog:
    """Learner-side record of a run: what was played and what was observed."""

    epoch: list = field(default_factory=list)
    label: list = field(default_factory=list)
    explore: list = field(default_factory=list)
    actions: list = field(default_factory=list)
    observed: list = field(default_factory=list)

    def __len__(self):
        return len(self.observed)


def play(learner, env: Environment, T: int, rng: np.random.Generator) -> StepLog:
    """Run the corruption protocol for T rounds: seal c_t, take the learner's
    action, reveal only the corrupted observation."""
    coins = BufferedRng(rng)
    log = StepLog()
    for t in range(1, T + 1):
        handle = env.begin_round(t)
        a = learner.select(coins)
        out = env.observe(a.x, handle)
        learner.update(out.observed_reward)
        log.epoch.append(learner.epoch)
        log.label.append(a.label)
        log.explore.append(a.explore)
        log.actions.append(a.x)
        log.observed.append(out.observed_reward)
    return log


@dataclass
class RegretTrace:
    t: np.ndarray
    epoch: np.ndarray
    action_id: list
    actual: np.ndarray
    observed: np.ndarray
    inst_regret: np.ndarray
    cum_regret: np.ndarray
    seed: int
    algorithm: str

    @property
    def final_regret(self) -> float:
        return float(self.cum_regret[-1]) if len(self.cum_regret) else 0.0

    def to_csv(self, path) -> None:
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(TRACE_COLUMNS)
            for row in zip(self.t, self.epoch, self.action_id, self.actual, self.observed,
                           self.inst_regret, self.cum_regret):
                w.writerow([int(row[0]), int(row[1]), row[2]] + [repr(float(v)) for v in row[3:]])


def pseudo_regret(actions, theta, best_value: float) -> np.ndarray:
    """Per-step <x* - x_t, theta>; tiny negative rounding is snapped to 0."""
    inst = best_value - np.asarray(actions, dtype=float) @ np.asarray(theta, dtype=float)
    if np.any(inst < -1e-12):
        raise ValueError("an action beat the vertex optimum; theta or x* is inconsistent")
    return np.maximum(inst, 0.0)


def build_trace(log: StepLog, env: Environment, instance: Instance, seed: int, algorithm: str) -> RegretTrace:
    theta = instance.model.theta
    inst = pseudo_regret(log.actions, theta, float(instance.x_star @ theta))
    return RegretTrace(
        t=np.arange(1, len(log) + 1),
        epoch=np.asarray(log.epoch),
        action_id=list(log.label),
        actual=np.asarray(env.actual),
        observed=np.asarray(log.observed),
        inst_regret=inst,
        cum_regret=np.cumsum(inst),
        seed=seed,
        algorithm=algorithm,
    )


# ---------------------------------------------------------------------------
# single experiments


@dataclass
class RunResult:
    trace: RegretTrace
    epoch_log: list
    ledger: object
    instance: Instance
    basis: geometry.ExplorationBasis
    lemma_report: dict | None = None


def build_polytope(cfg) -> geometry.Polytope:
    inst = cfg.instance
    rng = np.random.default_rng(inst.instance_seed)
    if inst.polytope_file is not None:
        return geometry.load_polytope(inst.polytope_file)
    if inst.family == "random_hull":
        n = inst.n_points if inst.n_points is not None else 3 * inst.d + 3
        poly = geometry.random_hull(inst.d, n, rng)
    else:
        poly = geometry.family_polytope(inst.family, inst.d, inst.size)
    if inst.transform == "random_linear":
        poly = geometry.random_linear_image(poly, rng)
    return poly


def build_instance(cfg) -> tuple[Instance, geometry.ExplorationBasis]:
    poly = build_polytope(cfg)
    inst = cfg.instance
    rng = np.random.default_rng([inst.instance_seed, 1])
    instance = make_instance(poly, rng, theta=inst.theta, theta_norm=inst.theta_norm,
                             delta_floor=inst.delta_floor, noise_kind=cfg.noise)
    basis = geometry.exploration_basis(poly, geometry.inscribed_ellipsoid(poly), cfg.algorithm.mode)
    return instance, basis


def build_learner(cfg, instance: Instance, basis):
    alg = cfg.algorithm
    V = instance.polytope.vertices
    if alg.name == "sbe":
        sc = SbeConfig(delta=cfg.delta, horizon=cfg.T, zeta=alg.zeta, zeta_scale=alg.zeta_scale,
                       mode=alg.mode, exploration=alg.exploration)
        return SbeLearner(basis, V, sc)
    if alg.name == "oful":
        return OfulLearner(V, lam=alg.lam, delta=cfg.delta)
    return EtcLearner(basis, V, alg.budget_per_axis)


def build_strategy(cfg, instance: Instance):
    c = cfg.corruption
    V = instance.polytope.vertices
    target = instance.second_index if c.target is None else c.target
    if target >= len(V):
        raise ValueError(f"corruption.target {target} is not a vertex index")
    return make_strategy(c.kind, budget=c.budget, k=c.k, theta=instance.model.theta,
                         target=V[target], optimum=instance.x_star, magnitude=c.magnitude)


def run_experiment(cfg: ExperimentConfig, seed: int, check_lemmas: bool | None = None,
                   prepared=None) -> RunResult:
    """One replication. ``prepared`` may carry a cached (instance, basis) pair."""
    instance, basis = prepared if prepared is not None else build_instance(cfg)
    env_ss, learner_ss = np.random.SeedSequence(seed).spawn(2)
    env = Environment(instance.polytope, instance.model, build_strategy(cfg, instance),
                      np.random.default_rng(env_ss))
    learner = build_learner(cfg, instance, basis)
    log = play(learner, env, cfg.T, np.random.default_rng(learner_ss))
    trace = build_trace(log, env, instance, seed, cfg.algorithm.name)
    epoch_log = getattr(learner, "epoch_log", [])
    result = RunResult(trace, epoch_log, env.ledger, instance, basis)
    if check_lemmas if check_lemmas is not None else cfg.check_lemmas:
        result.lemma_report = lemma_report_for(result)
    return result


def lemma_report_for(result: RunResult) -> dict:
    if result.trace.algorithm != "sbe":
        return {"algorithm": result.trace.algorithm, "applicable": False}
    closed = [e for e in result.epoch_log if e["theta_hat"] is not None]
    C_m = ledger_epoch_close(result.ledger, [e["end"] for e in closed])
    rep = lemma_checks(closed, result.instance.model.theta, C_m, result.basis, result.instance.gap)
    rep.update(algorithm="sbe", applicable=True, seed=result.trace.seed)
    return rep


def write_run(result: RunResult, out_dir, tag: str | None = None) -> list[Path]:
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    tag = f"seed{result.trace.seed}" if tag is None else tag
    paths = [out / f"trace_{tag}.csv", out / f"epochs_{tag}.jsonl", out / f"ledger_{tag}.csv"]
    result.trace.to_csv(paths[0])
    with open(paths[1], "w") as fh:
        for e in result.epoch_log:
            fh.write(json.dumps(e, sort_keys=True) + "\n")
    result.ledger.to_csv(paths[2])
    if result.lemma_report is not None:
        p = out / f"lemmas_{tag}.json"
        p.write_text(json.dumps(result.lemma_report, indent=2, sort_keys=True))
        paths.append(p)
    return paths


# ---------------------------------------------------------------------------
# sweeps


@dataclass
class SweepResult:
    rows: list  # dicts: C, d, algorithm, seed, final_regret

    def cell(self, C=None, d=None, algorithm=None) -> np.ndarray:
        sel = [r["final_regret"] for r in self.rows
               if (C is None or r["C"] == C) and (d is None or r["d"] == d)
               and (algorithm is None or r["algorithm"] == algorithm)]
        return np.asarray(sel)

    def aggregate(self) -> list[dict]:
        keys = []
        for r in self.rows:
            k = (r["C"], r["d"], r["algorithm"])
            if k not in keys:
                keys.append(k)
        out = []
        for C, d, alg in keys:
            v = self.cell(C, d, alg)
            q25, med, q75 = np.percentile(v, [25, 50, 75])
            out.append({"C": C, "d": d, "algorithm": alg, "n": len(v), "mean": float(v.mean()),
                        "median": float(med), "q25": float(q25), "q75": float(q75)})
        return out

    def to_csv(self, path) -> None:
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["C", "d", "algorithm", "seed", "final_regret"])
            for r in self.rows:
                w.writerow([repr(float(r["C"])), r["d"], r["algorithm"], r["seed"], repr(float(r["final_regret"]))])

    def aggregate_to_csv(self, path) -> None:
        cols = ["C", "d", "algorithm", "n", "mean", "median", "q25", "q75"]
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(cols)
            for r in self.aggregate():
                w.writerow([repr(v) if isinstance(v, float) else v for v in (r[c] for c in cols)])


def sweep_cells(cfg: SweepConfig) -> list[ExperimentConfig]:
    g = cfg.grid
    Cs = g.C if g.C is not None else [cfg.corruption.budget]
    ds = g.d if g.d is not None else [cfg.instance.d]
    algs = g.algorithm if g.algorithm is not None else [cfg.algorithm.name]
    base = ExperimentConfig.model_validate(cfg.model_dump(exclude={"grid"}))
    cells = []
    for C, d, alg in itertools.product(Cs, ds, algs):
        corr = {"budget": float(C)}
        if cfg.corruption.kind == "first_k_flip":
            corr["k"] = int(C)
        inst = {"d": d}
        if d != cfg.instance.d:
            inst["theta"] = None
        cells.append(base.model_copy(update={
            "instance": base.instance.model_copy(update=inst),
            "algorithm": base.algorithm.model_copy(update={"name": alg}),
            "corruption": base.corruption.model_copy(update=corr),
        }))
    return cells


def _sweep_task(args):
    cell, seed, check, out_dir, tag = args
    res = run_experiment(cell, seed, check_lemmas=check)
    if out_dir is not None:
        write_run(res, out_dir, tag)
    row = {"C": cell.corruption.budget, "d": cell.instance.d, "algorithm": cell.algorithm.name,
           "seed": seed, "final_regret": res.trace.final_regret}
    return row, res.lemma_report


def sweep(cfg: SweepConfig, jobs: int = 1, seed_offset: int = 0, check_lemmas: bool = False,
          trace_dir=None) -> tuple[SweepResult, list]:
    """Run every (cell, seed) pair. Results are merged in grid-then-seed order
    whatever the completion order."""
    tasks = []
    for cell in sweep_cells(cfg):
        for s in cfg.seeds:
            seed = s + seed_offset
            tag = f"C{cell.corruption.budget:g}_d{cell.instance.d}_{cell.algorithm.name}_seed{seed}"
            tasks.append((cell, seed, check_lemmas, trace_dir, tag))
    if jobs > 1 and len(tasks) > 1:
        with ProcessPoolExecutor(max_workers=jobs) as ex:
            results = list(ex.map(_sweep_task, tasks))
    else:
        results = [_sweep_task(t) for t in tasks]
    rows = [r for r, _ in results]
    reports = [rep for _, rep in results]
    return SweepResult(rows), reports


def regret_slope(budgets, regrets) -> float:
    """Least-squares slope of final regret against corruption budget."""
    x = np.asarray(budgets, dtype=float)
    y = np.asarray(regrets, dtype=float)
    X = np.column_stack([np.ones_like(x), x])
    coef, *_ = np.linalg.lstsq(X, y, rcond=None)
    return float(coef[1])


# ---------------------------------------------------------------------------
# concentration and confidence-bound checks


def concentration_tolerance(n: int, variance_proxy: float, eps: float) -> float:
    """Deviation u with P(|mean - E| >= u) <= eps for n sub-Gaussian samples:
    sqrt(2 sigma^2 log(2 / eps) / n)."""
    if n < 1:
        raise ValueError("n must be >= 1")
    if not 0.0 < eps < 1.0:
        raise ValueError("eps must lie in (0, 1)")
    return math.sqrt(2.0 * variance_proxy * math.log(2.0 / eps) / n)


def binomial_slack(p: float, n: int, sigmas: float = 3.0) -> float:
    return p + sigmas * math.sqrt(p * (1.0 - p) / n)


def rho_recursive(C, N, d: int) -> list[float]:
    """rho_m = d^2 sum_{s<=m} 8^-(m-s) C_s / N_s, accumulated as rho_m = rho_{m-1}/8 + d^2 C_m/N_m."""
    out, rho = [], 0.0
    for c, n in zip(C, N):
        rho = rho / 8.0 + d * d * c / n
        out.append(rho)
    return out


def rho_closed(C, N, d: int) -> list[float]:
    out = []
    for m in range(1, len(C) + 1):
        out.append(d * d * math.fsum(8.0 ** -(m - s) * C[s - 1] / N[s - 1] for s in range(1, m + 1)))
    return out


def lemma_checks(epoch_log, theta, C_m, basis: geometry.ExplorationBasis, gap: float) -> dict:
    """Evaluate the per-epoch estimator bounds against the hidden truth.

    For every closed epoch m (entries of ``epoch_log`` with an estimate):
      coefficient bound  max_j |b_j^ - b_j| ||s_j||^2 <= 2 C_m / N_m + gap_{m-1} / (32 d^2)
      reward bound       max_v |<v - s0, theta^ - theta>| <= beta_m
      gap sandwich       gap/2 - 2^-(m+1) - 8 rho_m <= gap_m^ <= 2 (gap + 2^-m + 4 rho_m)
    and reports each bound's violation fraction.
    """
    entries = [e for e in epoch_log if e.get("theta_hat") is not None]
    if len(C_m) < len(entries):
        raise MissingLedger(f"{len(entries)} closed epochs but only {len(C_m)} ledger totals")
    d = basis.d
    theta = np.asarray(theta, dtype=float)
    b_true = basis.axes @ theta / basis.sq_norms
    kappa = None if basis.kappa <= d else basis.kappa
    Ns = [e["N_m"] for e in entries]
    rhos = rho_recursive(C_m[: len(entries)], Ns, d)
    rows = []
    v1 = v2 = v3 = v4 = 0
    n1 = n2 = 0
    for e, c, rho in zip(entries, C_m, rhos):
        m, N, prev = e["m"], e["N_m"], e["delta_hat_prev"]
        b_hat = np.asarray(e["b_hat"])
        theta_hat = np.asarray(e["theta_hat"])
        err1 = np.abs(b_hat - b_true) * basis.sq_norms
        bound1 = 2.0 * c / N + prev / (32.0 * d * d)
        err2 = np.abs(basis.shifted_vertices @ (theta_hat - theta))
        bound2 = beta_m(d, c, N, prev, kappa)
        upper = 2.0 * (gap + 2.0**-m + 4.0 * rho)
        lower = gap / 2.0 - 2.0 ** -(m + 1) - 8.0 * rho
        dh = e["delta_hat"]
        v1 += int(np.sum(err1 > bound1))
        n1 += d
        v2 += int(np.sum(err2 > bound2))
        n2 += len(err2)
        v3 += int(dh > upper)
        v4 += int(dh < lower)
        rows.append({"m": m, "C_m": c, "N_m": N, "coef_err": float(err1.max()), "coef_bound": bound1,
                     "reward_err": float(err2.max()), "beta_m": bound2, "delta_hat": dh,
                     "gap_upper": upper, "gap_lower": lower, "rho_m": rho})
    k = max(len(entries), 1)
    return {
        "epochs": rows,
        "coef_violation_fraction": v1 / max(n1, 1),
        "reward_violation_fraction": v2 / max(n2, 1),
        "gap_upper_violation_fraction": v3 / k,
        "gap_lower_violation_fraction": v4 / k,
        "true_gap": gap,
    }


# ---------------------------------------------------------------------------
# aggregated single-epoch simulation


def one_epoch_horizon(d: int, delta: float, mode: str = "weak_ellipsoid", scale: float = 1.0) -> int:
    """Smallest T (fixed point) with T >= N_1 for the formula zeta at horizon T."""
    T = 2
    for _ in range(100):
        zeta = default_zeta(d, T, delta, mode, scale)
        N1 = next_schedule(1, 1.0, zeta, math.inf, 0, d).N_m
        if N1 <= T:
            return T
        T = N1
    raise RuntimeError("horizon fixed point did not converge")


def simulate_epoch_estimates(basis: geometry.ExplorationBasis, theta, zeta: float, reps: int,
                             rng: np.random.Generator, m: int = 1, delta_prev: float = 1.0,
                             gamma_prev: float = 0.2) -> tuple[np.ndarray, object]:
    """Distributionally exact b_hat draws for one corruption-free SBE epoch with
    signed exploration and standard normal noise.

    Within an epoch the actions do not depend on that epoch's observations, so
    the per-axis signed sums are determined by multinomial pull counts k+, k-
    and a N(0, k+ + k-) noise total:
        sum_j = (k+ - k-) <s0, theta> + (k+ + k-) <s_j, theta> + sqrt(k+ + k-) Z.
    """
    d = basis.d
    theta = np.asarray(theta, dtype=float)
    sched = next_schedule(m, delta_prev, zeta, math.inf, 0, d, gamma_prev)
    p = np.full(2 * d, gamma_prev / (2 * d))
    probs = np.append(p, 1.0 - gamma_prev)
    counts = rng.multinomial(sched.N_m, probs, size=reps)
    kp, km = counts[:, 0:2 * d:2], counts[:, 1:2 * d:2]
    k = kp + km
    offset = float(basis.origin_shift @ theta)
    proj = basis.axes @ theta
    sums = (kp - km) * offset + k * proj + np.sqrt(k) * rng.standard_normal((reps, d))
    b_hat = sums / sched.expected_count / basis.sq_norms
    return b_hat, sched
