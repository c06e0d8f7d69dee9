"""Deterministic SIS flow between jumps and the aggregate infection level V."""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from typing import Literal

import numpy as np
from numba import njit

from .graph import Adjacency

__all__ = [
    "EpidemicState",
    "RateParams",
    "IntegrationFault",
    "CLAMP_ABORT",
    "sis_derivative",
    "integrate_flow",
    "advance_flow",
    "aggregate_v",
    "v_descent_rate_bound",
]

# A single projection back onto [0, 1] larger than this means the integrator
# has left the invariant cube, which the exact flow never does.
CLAMP_ABORT = 1e-6


class IntegrationFault(RuntimeError):
    pass


@dataclass(frozen=True, eq=False)
class EpidemicState:
    """Infection probabilities ``x`` of the agents ``node_ids`` on ``adjacency`` at time ``t``."""

    x: np.ndarray
    adjacency: Adjacency
    t: float = 0.0
    node_ids: tuple = field(default=None)

    def __post_init__(self):
        x = np.array(self.x, dtype=float)
        if x.ndim != 1:
            raise ValueError("x must be a vector")
        if x.shape[0] != self.adjacency.n:
            raise ValueError(f"len(x)={x.shape[0]} does not match adjacency n={self.adjacency.n}")
        if x.size and (x.min() < 0 or x.max() > 1):
            raise ValueError("infection probabilities must lie in [0, 1]")
        x.setflags(write=False)
        object.__setattr__(self, "x", x)
        ids = tuple(range(x.shape[0])) if self.node_ids is None else tuple(self.node_ids)
        if len(ids) != x.shape[0]:
            raise ValueError("node_ids length does not match x")
        object.__setattr__(self, "node_ids", ids)

    @property
    def n(self) -> int:
        return self.x.shape[0]


@dataclass(frozen=True)
class RateParams:
    """Size-scaled SIS rates: beta = beta_bar / n, delta = delta_bar.

    With ``scaling_mode="current_n"`` the infection rate follows the live
    network size; ``"fixed_n0"`` pins it to ``beta_bar / n0``.
    """

    beta_bar: float
    delta_bar: float
    scaling_mode: Literal["current_n", "fixed_n0"] = "current_n"
    n0: int | None = None

    def __post_init__(self):
        if self.beta_bar < 0 or self.delta_bar <= 0:
            raise ValueError("beta_bar must be >= 0 and delta_bar > 0")
        if self.scaling_mode not in ("current_n", "fixed_n0"):
            raise ValueError(f"unknown scaling_mode {self.scaling_mode!r}")
        if self.scaling_mode == "fixed_n0" and not self.n0:
            raise ValueError("fixed_n0 scaling requires n0")

    def beta(self, n: int) -> float:
        return self.beta_bar / (self.n0 if self.scaling_mode == "fixed_n0" else n)

    @property
    def delta(self) -> float:
        return self.delta_bar


def sis_derivative(s: EpidemicState, r: RateParams) -> np.ndarray:
    """(beta A - delta I) x - beta X A x."""
    beta = r.beta(s.n)
    ax = s.adjacency.weights @ s.x
    return (beta * s.adjacency.weights - r.delta * np.eye(s.n)) @ s.x - beta * s.x * ax


@njit(cache=True, fastmath=True)
def _deriv(x, w, uw, beta, delta, out):
    n = x.shape[0]
    if uw >= 0.0:
        total = 0.0
        for i in range(n):
            total += x[i]
        for i in range(n):
            out[i] = beta * uw * (total - x[i]) * (1.0 - x[i]) - delta * x[i]
    else:
        for i in range(n):
            ax = 0.0
            for j in range(n):
                ax += w[i, j] * x[j]
            out[i] = beta * ax * (1.0 - x[i]) - delta * x[i]


@njit(cache=True)
def _rk4_span(x, w, uw, beta, delta, duration, h, k1, k2, k3, k4, tmp, clamp):
    # clamp[0] accumulates total projection, clamp[1] tracks the largest one
    if duration <= 0.0:
        return
    steps = int(math.ceil(duration / h - 1e-9))
    if steps < 1:
        steps = 1
    n = x.shape[0]
    for s in range(steps):
        dt = h if s < steps - 1 else duration - h * (steps - 1)
        _deriv(x, w, uw, beta, delta, k1)
        for i in range(n):
            tmp[i] = x[i] + 0.5 * dt * k1[i]
        _deriv(tmp, w, uw, beta, delta, k2)
        for i in range(n):
            tmp[i] = x[i] + 0.5 * dt * k2[i]
        _deriv(tmp, w, uw, beta, delta, k3)
        for i in range(n):
            tmp[i] = x[i] + dt * k3[i]
        _deriv(tmp, w, uw, beta, delta, k4)
        for i in range(n):
            xi = x[i] + dt / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i])
            c = 0.0
            if xi < 0.0:
                c = -xi
                xi = 0.0
            elif xi > 1.0:
                c = xi - 1.0
                xi = 1.0
            if c > 0.0:
                clamp[0] += c
                if c > clamp[1]:
                    clamp[1] = c
            x[i] = xi


@njit(cache=True)
def _flow_recording(x, w, uw, beta, delta, t0, t1, h, grid, k, out_v, clamp):
    """Advance x from t0 to t1, writing V at every grid time in [t0, t1).

    Grid times are hit exactly. Returns the index of the first grid time
    not yet recorded.
    """
    n = x.shape[0]
    k1 = np.empty(n)
    k2 = np.empty(n)
    k3 = np.empty(n)
    k4 = np.empty(n)
    tmp = np.empty(n)
    t = t0
    ng = grid.shape[0]
    while k < ng and grid[k] < t1:
        _rk4_span(x, w, uw, beta, delta, grid[k] - t, h, k1, k2, k3, k4, tmp, clamp)
        t = grid[k]
        acc = 0.0
        for i in range(n):
            acc += x[i] * x[i]
        out_v[k] = acc / n
        k += 1
    _rk4_span(x, w, uw, beta, delta, t1 - t, h, k1, k2, k3, k4, tmp, clamp)
    return k


def _uniform_flag(a: Adjacency) -> float:
    return -1.0 if a.uniform_weight is None else a.uniform_weight


def advance_flow(x: np.ndarray, a: Adjacency, beta: float, delta: float,
                 duration: float, h: float) -> tuple[float, float]:
    """Integrate ``x`` in place over ``duration`` with fixed-step RK4.

    Returns ``(total_clamp, max_clamp)``, the projection back onto [0, 1]
    summed over the run and the largest single correction.
    """
    if h <= 0:
        raise ValueError(f"step size must be positive, got {h}")
    n = x.shape[0]
    scratch = [np.empty(n) for _ in range(5)]
    clamp = np.zeros(2)
    _rk4_span(x, a.weights, _uniform_flag(a), float(beta), float(delta),
              float(duration), float(h), *scratch, clamp)
    return float(clamp[0]), float(clamp[1])


def integrate_flow(s: EpidemicState, r: RateParams, t_end: float, h: float = 0.01) -> EpidemicState:
    """Advance the state to exactly ``t_end`` (RK4, final partial step)."""
    if h <= 0:
        raise ValueError(f"step size must be positive, got {h}")
    if t_end < s.t:
        raise ValueError(f"t_end={t_end} precedes state time {s.t}")
    if t_end == s.t:
        return s
    x = s.x.copy()
    _, worst = advance_flow(x, s.adjacency, r.beta(s.n), r.delta, t_end - s.t, h)
    if worst > CLAMP_ABORT:
        raise IntegrationFault(f"clamp of {worst:.3g} exceeds {CLAMP_ABORT:g}; reduce the step size")
    return replace(s, x=x, t=t_end)


def aggregate_v(s) -> float:
    """V(x) = |x|^2 / n. Accepts a state or a bare vector."""
    x = s.x if isinstance(s, EpidemicState) else np.asarray(s, dtype=float)
    return float(x @ x) / x.shape[0]


def v_descent_rate_bound(s: EpidemicState, r: RateParams, lambda1: float) -> float:
    """Upper bound 2 (beta lambda1 - delta) V on dV/dt along the flow."""
    return 2.0 * (r.beta(s.n) * lambda1 - r.delta) * aggregate_v(s)
