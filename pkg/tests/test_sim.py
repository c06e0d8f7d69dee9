import csv

import numpy as np
import pytest

from opensis.config import SimulationConfig, derive_seed
from opensis.dynamics import aggregate_v
from opensis.events import EventRates, ThetaDistribution, next_open_event
from opensis.graph import largest_eigenvalue, sample_er_graph
from opensis.sim import (
    EVENT_KINDS,
    TRAJECTORY_COLUMNS,
    initial_state,
    run_ensemble,
    simulate,
    write_trajectories_csv,
)

SMALL = SimulationConfig(n0=20, horizon=10.0, realizations=4, base_seed=11)


def test_pure_replacement_without_events_is_constant():
    cfg = SMALL.replace(mu=0.0)
    tr = simulate("pure_replacement", cfg, 3)
    assert tr.n_events == 0
    assert np.all(tr.v == tr.v[0])
    assert tr.v[0] == pytest.approx(aggregate_v(initial_state(cfg, np.random.default_rng(3))))


def test_healthy_replacements_drive_v_to_zero():
    cfg = SMALL.replace(theta=ThetaDistribution("point", 0.0), horizon=60.0)
    tr = simulate("replacement", cfg, 5)
    assert np.all(np.diff(tr.v) <= 1e-12)
    assert np.all(tr.ev_v_post <= tr.ev_v_pre + 1e-15)
    assert tr.v[-1] < 1e-3


@pytest.mark.parametrize("c", [0.0, 0.35, 1.0])
def test_constant_initial_state(c):
    s = initial_state(SMALL.replace(init=c), np.random.default_rng(0))
    assert aggregate_v(s) == pytest.approx(c * c)


def test_iid_initial_v_mean():
    cfg = SimulationConfig(n0=50)
    rng = np.random.default_rng(1)
    v0 = np.array([aggregate_v(initial_state(cfg, rng)) for _ in range(10_000)])
    assert abs(v0.mean() - 1 / 3) < 4 * v0.std(ddof=1) / 100


def test_initial_topology_per_kind():
    rng = np.random.default_rng(2)
    assert initial_state(SMALL, rng, "replacement").adjacency.uniform_weight == SMALL.p
    assert initial_state(SMALL, rng, "open").adjacency.uniform_weight is None
    fixed = SMALL.replace(topology_mode="sampled_er_fixed")
    assert set(np.unique(initial_state(fixed, rng, "replacement").adjacency.weights)) <= {0.0, 1.0}


def test_kinds_share_initial_state_for_a_seed():
    a = simulate("open", SMALL, 9)
    b = simulate("replacement", SMALL, 9)
    assert a.v[0] == b.v[0]


@pytest.mark.parametrize("kind", ["open", "replacement", "pure_replacement"])
def test_trajectory_invariants(kind):
    cfg = SMALL.replace(horizon=30.0)
    tr = simulate(kind, cfg, 17)
    assert tr.grid[0] == 0 and tr.grid[-1] == pytest.approx(30.0)
    assert np.all(np.diff(tr.grid) > 0)
    assert np.all((tr.v >= 0) & (tr.v <= 1))
    assert np.all((tr.ev_v_pre >= 0) & (tr.ev_v_post <= 1))
    assert np.all(tr.n >= 1) and np.all(tr.ev_n_post >= 1)
    assert np.all(np.diff(tr.ev_t) > 0) and tr.ev_t[-1] < 30.0


def test_open_size_changes_by_one():
    tr = simulate("open", SMALL.replace(horizon=30.0), 4)
    step = tr.ev_n_post - tr.ev_n_pre
    arrivals = tr.ev_kind == EVENT_KINDS.index("arrival")
    assert np.all(step[arrivals] == 1) and np.all(step[~arrivals] == -1)
    assert np.all(tr.ev_n_pre[1:] == tr.ev_n_post[:-1])
    assert tr.ev_n_pre[0] == SMALL.n0


def test_replacement_jumps_reconstruct_from_log():
    cfg = SimulationConfig(horizon=20.0)
    tr = simulate("replacement", cfg, 8)
    assert tr.n_events > 50
    assert np.allclose(tr.ev_v_post - tr.ev_v_pre, (tr.ev_theta**2 - tr.ev_x_pre**2) / cfg.n0, atol=1e-14)


def test_cadlag_continuity_between_jumps():
    cfg = SimulationConfig(horizon=20.0)
    for kind in ("replacement", "open"):
        tr = simulate(kind, cfg, 21)
        rows = tr.samples()
        for (t0, v0, n0, f0, *_), (t1, v1, n1, f1, *_) in zip(rows, rows[1:]):
            if f1 == 2:     # post-jump sample: the jump itself
                continue
            # no jump between the two samples: V moves at most 2 (beta lambda1 + delta) per unit time
            beta = cfg.beta_bar / n0
            lam = n0 - 1    # lambda1 of any 0/1 or p-weighted graph on n0 nodes is at most n0 - 1
            assert abs(v1 - v0) <= 2 * (beta * lam + cfg.delta_bar) * (t1 - t0) + 1e-6


def test_pre_jump_matches_flow_limit():
    # With a very fine output grid, the last grid value before a jump is close to the pre-jump V.
    cfg = SimulationConfig(n0=30, horizon=5.0, grid=0.02, step=0.01)
    tr = simulate("replacement", cfg, 2)
    for t, v_pre in zip(tr.ev_t, tr.ev_v_pre):
        k = np.searchsorted(tr.grid, t, side="right") - 1
        assert abs(tr.v[k] - v_pre) < 0.02 * 2 * 0.2


def test_pure_replacement_ignores_epidemic_parameters():
    stable = simulate("pure_replacement", SMALL, 33)
    unstable = simulate("pure_replacement", SMALL.replace(beta_bar=50.0), 33)
    assert np.array_equal(stable.v, unstable.v) and np.array_equal(stable.ev_t, unstable.ev_t)


def test_simulate_is_deterministic():
    a = simulate("open", SMALL, 123)
    b = simulate("open", SMALL, 123)
    assert np.array_equal(a.v, b.v) and np.array_equal(a.ev_theta, b.ev_theta, equal_nan=True)


def test_singleton_ensemble_matches_simulate():
    (tr,) = run_ensemble("replacement", SMALL, realizations=1, base_seed=77)
    ref = simulate("replacement", SMALL, derive_seed(77, 0))
    assert tr.seed == ref.seed and np.array_equal(tr.v, ref.v)


def test_ensemble_independent_of_workers():
    serial = run_ensemble("open", SMALL, workers=1)
    parallel = run_ensemble("open", SMALL, workers=2)
    for a, b in zip(serial, parallel):
        assert np.array_equal(a.v, b.v) and np.array_equal(a.ev_t, b.ev_t)
    assert len({tr.seed for tr in serial}) == len(serial)


def test_open_process_with_no_rates_is_pure_flow():
    cfg = SMALL.replace(mu_a=0.0, mu_d=0.0, mu=0.0)
    tr = simulate("open", cfg, 1)
    assert tr.n_events == 0 and np.all(tr.n == SMALL.n0)


def test_trajectory_csv(tmp_path):
    trs = run_ensemble("open", SMALL.replace(horizon=2.0), realizations=2)
    path = tmp_path / "traj.csv"
    write_trajectories_csv(path, trs)
    with open(path) as fh:
        rows = list(csv.reader(fh))
    assert tuple(rows[0]) == TRAJECTORY_COLUMNS
    body = rows[1:]
    assert len(body) == sum(len(tr.grid) + 2 * tr.n_events for tr in trs)
    grid_rows = [r for r in body if r[4] == "0"]
    assert all(r[5] == r[6] == r[7] == "" for r in grid_rows)
    departures = [r for r in body if r[5] == "departure"]
    assert departures and all(r[7] == "" for r in departures)
    arrivals = [r for r in body if r[5] == "arrival"]
    assert arrivals and all(0 <= float(r[7]) <= 1 for r in arrivals)


def test_size_chain_oracle_stays_near_n0():
    """The n(t) chain alone: matched arrival/departure rates keep E[n(100)] near 50."""
    rng = np.random.default_rng(3)
    rates = EventRates(7.0, 7.0)
    theta = ThetaDistribution()
    finals = []
    for _ in range(1000):
        t, n = 0.0, 50
        while True:
            e = next_open_event(t, n, rates, theta, rng)
            if e.t > 100:
                break
            t, n = e.t, n + (1 if e.kind == "arrival" else -1)
        finals.append(n)
    assert 45 <= np.mean(finals) <= 55


@pytest.mark.slow
def test_open_ensemble_size_stays_near_n0(fig2_run):
    result, _, _ = fig2_run
    final_n = np.array([tr.n[-1] for tr in result.ensembles["open"]])
    assert 45 <= final_n.mean() <= 55


def test_lipschitz_helper_bound_is_valid():
    # lambda1 <= n - 1 for any graph with weights in [0, 1], used in the continuity test
    rng = np.random.default_rng(0)
    for n in (2, 10, 50):
        assert largest_eigenvalue(sample_er_graph(n, 0.9, rng)).lambda1 <= n - 1 + 1e-9
