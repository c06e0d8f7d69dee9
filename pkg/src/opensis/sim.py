"""Hybrid flow-and-jump simulation of the open, replacement and pure-replacement processes.

Each realization alternates RK4 flow segments with jumps, landing exactly on
every event time. V is recorded on a uniform grid and immediately before and
after every jump.
"""

from __future__ import annotations

import csv
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .config import KINDS, SimulationConfig, derive_seed
from .dynamics import CLAMP_ABORT, EpidemicState, IntegrationFault, _flow_recording, aggregate_v
from .events import (
    DeadProcess,
    Event,
    apply_arrival,
    apply_departure,
    apply_replacement,
    next_open_event,
    next_replacement_event,
    sample_theta,
)
from .graph import expected_adjacency, sample_er_graph

__all__ = [
    "Trajectory",
    "EVENT_KINDS",
    "initial_state",
    "simulate",
    "run_ensemble",
    "write_trajectories_csv",
    "TRAJECTORY_COLUMNS",
]

EVENT_KINDS = ("arrival", "departure", "replacement")
TRAJECTORY_COLUMNS = ("realization", "t", "V", "n", "event_flag", "event_kind", "agent_id", "theta")

# event_flag values in exported samples
GRID, PRE_JUMP, POST_JUMP = 0, 1, 2


@dataclass(eq=False)
class Trajectory:
    """One cadlag realization of V(t) and n(t).

    Grid samples live in ``grid``/``v``/``n``. Events are stored column-wise:
    ``ev_kind`` indexes :data:`EVENT_KINDS`, ``ev_x_pre`` is the pre-jump
    state of the departing or replaced agent (NaN for arrivals) and
    ``ev_theta`` the newcomer's state (NaN for departures).
    """

    kind: str
    seed: int
    grid: np.ndarray
    v: np.ndarray
    n: np.ndarray
    ev_t: np.ndarray
    ev_kind: np.ndarray
    ev_agent: np.ndarray
    ev_theta: np.ndarray
    ev_x_pre: np.ndarray
    ev_v_pre: np.ndarray
    ev_v_post: np.ndarray
    ev_n_pre: np.ndarray
    ev_n_post: np.ndarray
    clamp_diagnostic: float = 0.0
    clamp_max: float = 0.0
    final_state: EpidemicState | None = field(default=None, repr=False)

    @property
    def n_events(self) -> int:
        return self.ev_t.shape[0]

    @property
    def events(self) -> list[Event]:
        out = []
        for i in range(self.n_events):
            kind = EVENT_KINDS[self.ev_kind[i]]
            theta = None if kind == "departure" else float(self.ev_theta[i])
            out.append(Event(float(self.ev_t[i]), kind, -1, theta, int(self.ev_agent[i])))
        return out

    def samples(self) -> list[tuple]:
        """Grid and jump samples merged in time order.

        Rows are ``(t, V, n, event_flag, event_kind, agent_id, theta)``; a
        grid time that coincides with a jump reports the post-jump value and
        sorts after the jump pair.
        """
        rows = []
        for t, v, n in zip(self.grid, self.v, self.n):
            rows.append((float(t), 2, float(v), int(n), GRID, "", "", ""))
        for i in range(self.n_events):
            kind = EVENT_KINDS[self.ev_kind[i]]
            theta = "" if kind == "departure" else float(self.ev_theta[i])
            agent = int(self.ev_agent[i])
            t = float(self.ev_t[i])
            rows.append((t, 0, float(self.ev_v_pre[i]), int(self.ev_n_pre[i]), PRE_JUMP, kind, agent, theta))
            rows.append((t, 1, float(self.ev_v_post[i]), int(self.ev_n_post[i]), POST_JUMP, kind, agent, theta))
        rows.sort(key=lambda r: (r[0], r[1]))
        return [(r[0],) + r[2:] for r in rows]


def initial_state(cfg: SimulationConfig, rng: np.random.Generator, kind: str = "replacement") -> EpidemicState:
    """n0 agents at time 0.

    States are drawn before the topology so that every process kind started
    from the same seed shares x(0).
    """
    if cfg.init is None:
        x = np.array([sample_theta(cfg.theta, rng) for _ in range(cfg.n0)])
    else:
        x = np.full(cfg.n0, float(cfg.init))
    if kind == "open" or (kind == "replacement" and cfg.topology_mode == "sampled_er_fixed"):
        adj = sample_er_graph(cfg.n0, cfg.p, rng)
    else:
        adj = expected_adjacency(cfg.n0, cfg.p)
    return EpidemicState(x, adj, 0.0)


class _Log:
    def __init__(self):
        self.rows = []

    def add(self, e: Event, agent, x_pre, v_pre, v_post, n_pre, n_post):
        theta = np.nan if e.theta is None else e.theta
        self.rows.append((e.t, EVENT_KINDS.index(e.kind), agent, theta, x_pre, v_pre, v_post, n_pre, n_post))

    def columns(self):
        cols = list(zip(*self.rows)) if self.rows else [()] * 9
        dtypes = (float, np.int8, np.int64, float, float, float, float, np.int64, np.int64)
        return [np.array(c, dtype=d) for c, d in zip(cols, dtypes)]


def simulate(kind: str, cfg: SimulationConfig, seed: int) -> Trajectory:
    """Run one realization of ``kind`` up to ``cfg.horizon``.

    ``kind`` is ``"open"`` (arrivals and departures on a growing/shrinking
    Erdos-Renyi graph, beta = beta_bar / n(t)), ``"replacement"`` (fixed
    n0-node network, beta = beta_bar / n0) or ``"pure_replacement"`` (jumps
    only, no flow).
    """
    if kind not in KINDS:
        raise ValueError(f"unknown process kind {kind!r}")
    rng = np.random.default_rng(seed)
    state = initial_state(cfg, rng, kind)
    grid = cfg.grid_times()
    horizon = cfg.horizon
    v_out = np.empty(grid.shape[0])
    n_out = np.empty(grid.shape[0], dtype=np.int64)
    clamp = np.zeros(2)
    log = _Log()
    next_id = cfg.n0
    k = 0
    t = 0.0

    def next_event():
        try:
            if kind == "open":
                return next_open_event(t, state.n, cfg.rates, cfg.theta, rng)
            return next_replacement_event(t, cfg.rates, cfg.n0, cfg.theta, rng)
        except DeadProcess:
            return None

    while True:
        event = next_event()
        t_stop = horizon if event is None or event.t >= horizon else event.t
        k0 = k
        if kind == "pure_replacement":
            v_now = aggregate_v(state)
            while k < grid.shape[0] and grid[k] < t_stop:
                v_out[k] = v_now
                k += 1
        else:
            x = state.x.copy()
            beta = cfg.beta_bar / (state.n if kind == "open" else cfg.n0)
            adj = state.adjacency
            uw = -1.0 if adj.uniform_weight is None else adj.uniform_weight
            k = _flow_recording(x, adj.weights, uw, beta, cfg.delta_bar, t, t_stop, cfg.step,
                                grid, k, v_out, clamp)
            if clamp[1] > CLAMP_ABORT:
                raise IntegrationFault(
                    f"seed {seed}: clamp of {clamp[1]:.3g} exceeds {CLAMP_ABORT:g}; reduce the step size")
            state = EpidemicState(x, adj, t_stop, state.node_ids)
        n_out[k0:k] = state.n
        t = t_stop
        if t_stop == horizon:
            break

        n_pre = state.n
        v_pre = aggregate_v(state)
        if event.kind == "arrival":
            state = apply_arrival(state, event, cfg.p, rng, new_id=next_id)
            agent, x_pre = next_id, np.nan
            next_id += 1
        elif event.kind == "departure":
            agent, x_pre = state.node_ids[event.target], state.x[event.target]
            state = apply_departure(state, event)
        else:
            agent, x_pre = state.node_ids[event.target], state.x[event.target]
            state = apply_replacement(state, event, new_id=next_id)
            next_id += 1
        log.add(event, agent, x_pre, v_pre, aggregate_v(state), n_pre, state.n)

    v_final = aggregate_v(state)
    while k < grid.shape[0]:
        v_out[k] = v_final
        n_out[k] = state.n
        k += 1

    return Trajectory(kind, seed, grid, v_out, n_out, *log.columns(),
                      clamp_diagnostic=float(clamp[0]), clamp_max=float(clamp[1]),
                      final_state=state)


def _simulate_packed(args):
    return simulate(*args)


def run_ensemble(kind: str, cfg: SimulationConfig, realizations: int | None = None,
                 base_seed: int | None = None, workers: int = 1) -> list[Trajectory]:
    """Independent realizations; realization ``r`` is seeded by ``derive_seed(base_seed, r)``.

    Results do not depend on ``workers``.
    """
    realizations = cfg.realizations if realizations is None else realizations
    base_seed = cfg.base_seed if base_seed is None else base_seed
    if realizations < 1:
        raise ValueError("realizations must be at least 1")
    jobs = [(kind, cfg, derive_seed(base_seed, r)) for r in range(realizations)]
    if workers <= 1:
        return [simulate(*job) for job in jobs]
    with ProcessPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(_simulate_packed, jobs, chunksize=max(1, realizations // (4 * workers))))


def write_trajectories_csv(path, trajectories: list[Trajectory]) -> None:
    """Long-format export, one block per realization."""
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(TRAJECTORY_COLUMNS)
        for r, traj in enumerate(trajectories):
            for row in traj.samples():
                writer.writerow((r,) + tuple(row))
