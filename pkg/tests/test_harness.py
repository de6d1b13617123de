import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from robustlinopt.config import ExperimentConfig, SweepConfig
from robustlinopt.environment import vertex_gap
from robustlinopt.errors import MissingLedger
from robustlinopt.harness import (
    binomial_slack,
    concentration_tolerance,
    lemma_checks,
    pseudo_regret,
    regret_slope,
    rho_closed,
    rho_recursive,
    run_experiment,
    sweep,
)

BASE = {
    "instance": {"family": "box", "d": 2, "size": 0.7, "theta": [0.5, 1 / 7]},
    "algorithm": {"name": "sbe", "zeta": 10},
    "T": 1500,
}


def _cfg(**over):
    raw = {**BASE, **over}
    return ExperimentConfig.model_validate(raw)


def test_all_optimal_pulls_zero_regret(square):
    theta = np.array([0.5, 0.1])
    x_star = square.vertices[0]
    assert pseudo_regret([x_star] * 5, theta, x_star @ theta).sum() == 0.0


def test_optimal_then_second_gives_gap(square):
    theta = np.array([0.5, 0.1])
    gap, best, second = vertex_gap(square.vertices, theta)
    r = pseudo_regret([square.vertices[best], square.vertices[second]], theta, square.vertices[best] @ theta)
    assert r.sum() == pytest.approx(gap) == pytest.approx(0.14)


def test_pseudo_regret_rejects_better_than_optimal(square):
    with pytest.raises(ValueError):
        pseudo_regret([square.vertices[0]], [0.5, 0.1], -1.0)


def test_trace_resums_and_is_monotone():
    tr = run_experiment(_cfg(corruption={"kind": "first_k_flip", "k": 20}), 4).trace
    assert math.fsum(tr.inst_regret) == pytest.approx(tr.final_regret, rel=1e-12)
    resum = np.zeros(len(tr.t))
    acc = 0.0
    for i, v in enumerate(tr.inst_regret):
        acc += v
        resum[i] = acc
    np.testing.assert_allclose(tr.cum_regret, resum, rtol=1e-12)
    assert np.all(tr.inst_regret >= 0) and np.all(np.diff(tr.cum_regret) >= 0)
    # observed minus actual is the applied corruption, nonzero only inside the flip window
    diff = tr.observed - tr.actual
    assert np.all(diff[20:] == 0) and np.all(np.abs(diff[:20]) <= 1)


def test_csv_byte_identical(tmp_path):
    a, b = tmp_path / "a.csv", tmp_path / "b.csv"
    run_experiment(_cfg(), 9).trace.to_csv(a)
    run_experiment(_cfg(), 9).trace.to_csv(b)
    assert a.read_bytes() == b.read_bytes()
    assert a.read_text().splitlines()[0] == "t,epoch,action_id,actual,observed,inst_regret,cum_regret"


def _sweep_cfg(**over):
    raw = {**BASE, "seeds": [0, 1, 2], "corruption": {"kind": "target_vertex"},
           "grid": {"C": [0, 30], "algorithm": ["sbe", "etc"]}, **over}
    return SweepConfig.model_validate(raw)


def test_single_cell_sweep_matches_run():
    cfg = _sweep_cfg(seeds=[5], grid={"C": [0]})
    res, _ = sweep(cfg)
    direct = run_experiment(_cfg(seeds=[5], corruption={"kind": "target_vertex"}), 5)
    assert res.rows == [{"C": 0.0, "d": 2, "algorithm": "sbe", "seed": 5, "final_regret": direct.trace.final_regret}]


def test_sweep_parallel_equals_serial():
    cfg = _sweep_cfg()
    serial, _ = sweep(cfg, jobs=1)
    parallel, _ = sweep(cfg, jobs=2)
    assert serial.rows == parallel.rows
    assert len(serial.rows) == 12
    assert serial.aggregate() == parallel.aggregate()
    assert [r["n"] for r in serial.aggregate()] == [3] * 4


def test_regret_slope_exact_line():
    assert regret_slope([0, 50, 100, 200], [10, 35, 60, 110]) == pytest.approx(0.5)


# ---------------------------------------------------------------------------
# tolerance helpers


def test_concentration_examples():
    assert concentration_tolerance(8, 1.0, 2 / math.e) == pytest.approx(0.5)
    assert concentration_tolerance(16, 1.0, 0.1) * math.sqrt(2) == pytest.approx(concentration_tolerance(8, 1.0, 0.1))
    with pytest.raises(ValueError):
        concentration_tolerance(0, 1.0, 0.1)
    with pytest.raises(ValueError):
        concentration_tolerance(4, 1.0, 1.0)


def test_binomial_slack():
    assert binomial_slack(0.1, 100) == pytest.approx(0.1 + 3 * 0.03)


@given(
    C=st.lists(st.floats(0, 50), min_size=1, max_size=12),
    N=st.lists(st.integers(1, 10**6), min_size=12, max_size=12),
    d=st.integers(1, 8),
)
def test_rho_two_ways(C, N, d):
    N = N[: len(C)]
    a, b = rho_recursive(C, N, d), rho_closed(C, N, d)
    np.testing.assert_allclose(a, b, rtol=1e-12, atol=1e-12)


# ---------------------------------------------------------------------------
# lemma checks


def test_noiseless_exact_counts_no_violations(square_basis, square):
    theta = np.array([0.5, 1 / 7])
    b = square_basis.axes @ theta / square_basis.sq_norms
    gap, best, second = vertex_gap(square.vertices, theta)
    log = [{"m": 1, "N_m": 50, "delta_hat_prev": 1.0, "b_hat": b.tolist(),
            "theta_hat": (square_basis.axes.T @ b).tolist(), "delta_hat": max(0.5, gap)}]
    rep = lemma_checks(log, theta, [0.0], square_basis, gap)
    assert rep["coef_violation_fraction"] == 0
    assert rep["reward_violation_fraction"] == 0
    assert rep["gap_upper_violation_fraction"] == 0 and rep["gap_lower_violation_fraction"] == 0
    with pytest.raises(MissingLedger):
        lemma_checks(log, theta, [], square_basis, gap)


def test_lemma_report_in_run():
    # at desk-scale zeta the bounds need not hold; only the bookkeeping is checked here
    res = run_experiment(_cfg(T=3000, corruption={"kind": "first_k_flip", "k": 30}), 0, check_lemmas=True)
    rep = res.lemma_report
    closed = [e for e in res.epoch_log if e["theta_hat"] is not None]
    assert rep["applicable"] and len(rep["epochs"]) == len(closed) >= 2
    assert rep["epochs"][0]["C_m"] == 30.0 and rep["epochs"][1]["C_m"] == 0.0
    for key in ("coef", "reward", "gap_upper", "gap_lower"):
        assert 0 <= rep[f"{key}_violation_fraction"] <= 1


def test_lemma_report_not_applicable_for_baselines():
    res = run_experiment(_cfg(algorithm={"name": "oful"}, T=50), 0, check_lemmas=True)
    assert res.lemma_report == {"algorithm": "oful", "applicable": False}
