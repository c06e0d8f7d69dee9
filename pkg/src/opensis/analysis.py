"""Closed-form moment bounds and Monte Carlo moment estimation.

All bound formulas use the expected-graph spectral radius p (n0 - 1) and
the scaling beta = beta_bar / n0, delta = delta_bar. The recurring
denominator is

    D = mu + 2 n0 delta_bar - 2 beta_bar p (n0 - 1),

which is positive whenever the epidemic is below threshold.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field

import numpy as np

from .config import SimulationConfig
from .events import ThetaDistribution

__all__ = [
    "UnstableConfiguration",
    "GridMismatch",
    "stability_check",
    "pure_replacement_expectation",
    "ev_limsup_bound",
    "ev_transient_bound",
    "ev2_limsup_bound",
    "ev2_transient_bound",
    "initial_moments",
    "BoundReport",
    "bound_report",
    "MomentEstimates",
    "estimate_moments",
    "ComparisonTable",
    "compare_bounds",
    "TailSummary",
    "tail_summary",
    "MOMENT_COLUMNS",
]

MOMENT_COLUMNS = ("t", "ev", "ev_se", "ev2", "ev2_se", "var", "var_se",
                  "bound_ev", "bound_ev2", "violation_ev", "violation_ev2")


class UnstableConfiguration(ValueError):
    pass


class GridMismatch(ValueError):
    pass


def stability_check(n0: int, p: float, beta_bar: float, delta_bar: float) -> tuple[float, bool]:
    """Reproduction ratio lambda1 * beta / delta on the expected graph, and whether it is < 1."""
    if n0 < 1 or not 0.0 <= p <= 1.0 or beta_bar < 0 or delta_bar <= 0:
        raise ValueError("need n0 >= 1, p in [0, 1], beta_bar >= 0 and delta_bar > 0")
    ratio = p * (n0 - 1) * (beta_bar / n0) / delta_bar
    return ratio, ratio < 1.0


def pure_replacement_expectation(t, v0: float, mu: float, n0: int, theta: ThetaDistribution):
    """E[V(t)] under replacements only: relaxes from v0 to E[Theta^2] at rate mu / n0."""
    m2 = theta.m2
    return (v0 - m2) * np.exp(-mu / n0 * np.asarray(t, dtype=float)) + m2


def _denominator(n0, p, beta_bar, delta_bar, mu) -> float:
    den = mu + 2 * n0 * delta_bar - 2 * beta_bar * p * (n0 - 1)
    if den <= 0:
        raise UnstableConfiguration(
            f"mu + 2 n0 delta_bar - 2 beta_bar p (n0-1) = {den:.6g} <= 0; no finite bound")
    return den


def ev_limsup_bound(n0, p, beta_bar, delta_bar, mu, theta: ThetaDistribution) -> float:
    den = _denominator(n0, p, beta_bar, delta_bar, mu)
    return mu * theta.m2 / den


def ev_transient_bound(t, ev0: float, n0, p, beta_bar, delta_bar, mu, theta: ThetaDistribution):
    """Comparison-lemma bound on E[V(t)] starting from E[V0] = ev0."""
    den = _denominator(n0, p, beta_bar, delta_bar, mu)
    m_v = mu * theta.m2 / den
    return (ev0 - m_v) * np.exp(-den / n0 * np.asarray(t, dtype=float)) + m_v


def ev2_limsup_bound(n0, p, beta_bar, delta_bar, mu, theta: ThetaDistribution) -> float:
    den = _denominator(n0, p, beta_bar, delta_bar, mu)
    e2, e4 = theta.m2, theta.m4
    return (mu * e4 * den + mu**2 * e2 * (2 * e2 * (n0 - 1) + 1)) / (2 * n0 * den**2)


def ev2_transient_bound(t, ev0: float, ev20: float, n0, p, beta_bar, delta_bar, mu,
                        theta: ThetaDistribution):
    """Bound on E[V(t)^2] from E[V0] = ev0 and E[V0^2] = ev20.

    Solves dy/dt = a y + b E[V] + c with E[V] replaced by its transient
    bound d exp(a t / 2) + m.
    """
    den = _denominator(n0, p, beta_bar, delta_bar, mu)
    t = np.asarray(t, dtype=float)
    e2, e4 = theta.m2, theta.m4
    a = -2.0 * den / n0
    b = mu * (2 * e2 * (n0 - 1) + 1) / n0**2
    c = mu * e4 / n0**2
    m_v = mu * e2 / den
    d_v = ev0 - m_v
    return ((ev20 + c / a + 2 * b * d_v / a + b * m_v / a) * np.exp(a * t)
            - 2 * b * d_v / a * np.exp(a * t / 2) - (c / a + b * m_v / a))


def initial_moments(cfg: SimulationConfig) -> tuple[float, float]:
    """Exact (E[V0], E[V0^2]) for the configured initial condition."""
    if cfg.init is not None:
        c2 = cfg.init**2
        return c2, c2**2
    n, e2, e4 = cfg.n0, cfg.theta.m2, cfg.theta.m4
    # V0 = mean of n i.i.d. Theta^2 draws
    return e2, (e4 + (n - 1) * e2**2) / n


@dataclass(frozen=True)
class BoundReport:
    """Closed-form quantities for one configuration.

    Bound fields are ``None`` when the expected-graph epidemic is at or
    above threshold.
    """

    n0: int
    p: float
    beta_bar: float
    delta_bar: float
    mu: float
    theta: ThetaDistribution
    ev0: float
    ev20: float
    reproduction_ratio: float
    stable: bool
    pure_replacement_asymptote: float
    ev_limsup_bound: float | None
    ev_transient_params: tuple[float, float, float] | None
    ev2_limsup_bound: float | None
    var_limsup_bound: float | None

    @property
    def params(self):
        return self.n0, self.p, self.beta_bar, self.delta_bar, self.mu, self.theta

    def ev_curve(self, t):
        if not self.stable:
            return np.full(np.shape(t), np.nan)
        return ev_transient_bound(t, self.ev0, *self.params)

    def ev2_curve(self, t):
        if not self.stable:
            return np.full(np.shape(t), np.nan)
        return ev2_transient_bound(t, self.ev0, self.ev20, *self.params)

    def pure_curve(self, t):
        return pure_replacement_expectation(t, self.ev0, self.mu, self.n0, self.theta)

    def to_text(self) -> str:
        def fmt(v):
            if v is None:
                return ""
            if isinstance(v, bool):
                return str(v).lower()
            if isinstance(v, tuple):
                return ", ".join(repr(float(u)) for u in v)
            if isinstance(v, float):
                return repr(v)
            return str(v)

        keys = ("n0", "p", "beta_bar", "delta_bar", "mu", "theta", "ev0", "ev20",
                "reproduction_ratio", "stable", "pure_replacement_asymptote",
                "ev_limsup_bound", "ev_transient_params", "ev2_limsup_bound", "var_limsup_bound")
        return "".join(f"{k} = {fmt(getattr(self, k))}\n" for k in keys)


def bound_report(cfg: SimulationConfig) -> BoundReport:
    ratio, stable = stability_check(cfg.n0, cfg.p, cfg.beta_bar, cfg.delta_bar)
    ev0, ev20 = initial_moments(cfg)
    args = (cfg.n0, cfg.p, cfg.beta_bar, cfg.delta_bar, cfg.mu, cfg.theta)
    ev_b = ev2_b = params = None
    if stable:
        ev_b = ev_limsup_bound(*args)
        ev2_b = ev2_limsup_bound(*args)
        den = _denominator(*args[:5])
        params = (ev0 - ev_b, ev_b, -den / cfg.n0)
    return BoundReport(cfg.n0, cfg.p, cfg.beta_bar, cfg.delta_bar, cfg.mu, cfg.theta, ev0, ev20,
                       ratio, stable, cfg.theta.m2, ev_b, params, ev2_b, ev2_b)


def _batch_se(values: np.ndarray, stat, batches: int = 50) -> np.ndarray:
    """Standard error of ``stat`` (applied along axis 0) by batch means."""
    parts = np.array_split(values, batches, axis=0)
    per_batch = np.stack([stat(part) for part in parts])
    return per_batch.std(axis=0, ddof=1) / math.sqrt(batches)


def _var_se(values: np.ndarray) -> np.ndarray:
    r = values.shape[0]
    if r >= 100:
        return _batch_se(values, lambda v: v.var(axis=0, ddof=1))
    # delta method for the sample variance
    centered = values - values.mean(axis=0)
    s2 = values.var(axis=0, ddof=1)
    m4 = (centered**4).mean(axis=0)
    return np.sqrt(np.maximum(m4 - s2**2 * (r - 3) / (r - 1), 0.0) / r)


@dataclass(eq=False)
class MomentEstimates:
    grid: np.ndarray
    ev: np.ndarray
    ev_se: np.ndarray
    ev2: np.ndarray
    ev2_se: np.ndarray
    var: np.ndarray
    var_se: np.ndarray
    realizations: int
    values: np.ndarray = field(repr=False, default=None)


def estimate_moments(trajectories, grid=None) -> MomentEstimates:
    """Pointwise E[V], E[V^2] and Var(V) over an ensemble sharing one output grid.

    Standard errors are sample std / sqrt(R) for the means. The variance
    error uses 50 batch means from R >= 100 on, the delta method below.
    """
    if len(trajectories) < 2:
        raise ValueError("moment estimation needs at least two trajectories")
    grid = trajectories[0].grid if grid is None else np.asarray(grid, dtype=float)
    for tr in trajectories:
        if not np.array_equal(tr.grid, grid):
            raise GridMismatch("trajectories do not share the requested output grid")
    v = np.stack([tr.v for tr in trajectories])
    r = v.shape[0]
    root = math.sqrt(r)
    v2 = v * v
    return MomentEstimates(
        grid=grid,
        ev=v.mean(axis=0), ev_se=v.std(axis=0, ddof=1) / root,
        ev2=v2.mean(axis=0), ev2_se=v2.std(axis=0, ddof=1) / root,
        var=v.var(axis=0, ddof=1), var_se=_var_se(v),
        realizations=r, values=v,
    )


@dataclass(eq=False)
class ComparisonTable:
    """Per-grid-point estimates next to the applicable bound curve."""

    kind: str
    est: MomentEstimates
    bound_ev: np.ndarray
    bound_ev2: np.ndarray
    violation_ev: np.ndarray
    violation_ev2: np.ndarray

    @property
    def margin_ev(self) -> np.ndarray:
        return self.bound_ev - self.est.ev

    @property
    def margin_ev2(self) -> np.ndarray:
        return self.bound_ev2 - self.est.ev2

    @property
    def violations(self) -> int:
        return int(self.violation_ev.sum() + self.violation_ev2.sum())

    def rows(self):
        e = self.est

        def num(v):
            return "" if np.isnan(v) else repr(float(v))

        for i in range(e.grid.shape[0]):
            yield (repr(float(e.grid[i])), num(e.ev[i]), num(e.ev_se[i]), num(e.ev2[i]),
                   num(e.ev2_se[i]), num(e.var[i]), num(e.var_se[i]), num(self.bound_ev[i]),
                   num(self.bound_ev2[i]), int(self.violation_ev[i]), int(self.violation_ev2[i]))

    def write_csv(self, path) -> None:
        with open(path, "w", newline="", encoding="utf-8") as fh:
            writer = csv.writer(fh, lineterminator="\n")
            writer.writerow(MOMENT_COLUMNS)
            writer.writerows(self.rows())


def compare_bounds(est: MomentEstimates, rep: BoundReport, kind: str = "replacement",
                   sigma: float = 4.0) -> ComparisonTable:
    """Flag grid points where an estimate exceeds its bound by more than ``sigma`` SE.

    For ``pure_replacement`` the reference curve is the exact expectation,
    so the E[V] margin scatters around zero; no E[V^2] curve applies.
    """
    t = est.grid
    if kind == "pure_replacement":
        b1 = rep.pure_curve(t)
        b2 = np.full(t.shape, np.nan)
    else:
        b1 = rep.ev_curve(t)
        b2 = rep.ev2_curve(t)
    with np.errstate(invalid="ignore"):
        v1 = est.ev - sigma * est.ev_se > b1
        v2 = est.ev2 - sigma * est.ev2_se > b2
    return ComparisonTable(kind, est, b1, b2, v1, v2)


@dataclass(frozen=True)
class TailSummary:
    ev: float
    ev_se: float
    ev2: float
    ev2_se: float
    var: float
    var_se: float


def tail_summary(est: MomentEstimates, mask: np.ndarray) -> TailSummary:
    """Time averages over the grid points in ``mask``, with standard errors.

    The mean errors come from per-realization tail averages; the variance
    error from batch means of the tail-averaged sample variance.
    """
    v = est.values[:, mask]
    per_real = v.mean(axis=1)
    per_real2 = (v * v).mean(axis=1)
    r = v.shape[0]
    root = math.sqrt(r)
    var_tail = float(est.var[mask].mean())
    batches = min(50, r // 2) if r >= 4 else 0
    var_se = float(_batch_se(v, lambda u: u.var(axis=0, ddof=1).mean(), batches)) if batches >= 2 else float("nan")
    return TailSummary(float(per_real.mean()), float(per_real.std(ddof=1) / root),
                       float(per_real2.mean()), float(per_real2.std(ddof=1) / root),
                       var_tail, var_se)
