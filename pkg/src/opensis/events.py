"""Poisson event sampling and the arrival / departure / replacement jumps."""

from __future__ import annotations

import re
from dataclasses import dataclass, replace
from typing import Literal

import numpy as np

from .dynamics import EpidemicState
from .graph import CannotEmpty, attach_node, remove_node

__all__ = [
    "ThetaDistribution",
    "EventRates",
    "Event",
    "DeadProcess",
    "sample_theta",
    "next_open_event",
    "next_replacement_event",
    "apply_arrival",
    "apply_departure",
    "apply_replacement",
]


class DeadProcess(Exception):
    """No event can occur: every rate is zero."""


@dataclass(frozen=True)
class ThetaDistribution:
    """Law of the infection probability given to new agents.

    ``kind`` is ``"uniform01"``, ``"beta"`` (with shape parameters ``a``,
    ``b``) or ``"point"`` (a point mass at ``a``, only meant for tests).
    """

    kind: Literal["uniform01", "beta", "point"] = "uniform01"
    a: float = 1.0
    b: float = 1.0

    def __post_init__(self):
        if self.kind == "beta" and (self.a <= 0 or self.b <= 0):
            raise ValueError("beta shape parameters must be positive")
        if self.kind == "point" and not 0.0 <= self.a <= 1.0:
            raise ValueError("point mass must lie in [0, 1]")
        if self.kind not in ("uniform01", "beta", "point"):
            raise ValueError(f"unknown theta distribution {self.kind!r}")

    @classmethod
    def parse(cls, text: str) -> "ThetaDistribution":
        """Read ``uniform01``, ``beta(a, b)`` or ``point(c)``."""
        text = text.strip().lower()
        if text in ("uniform01", "uniform"):
            return cls()
        m = re.fullmatch(r"beta\(\s*([^,]+?)\s*,\s*([^)]+?)\s*\)", text)
        if m:
            return cls("beta", float(m.group(1)), float(m.group(2)))
        m = re.fullmatch(r"point\(\s*([^)]+?)\s*\)", text)
        if m:
            return cls("point", float(m.group(1)), 0.0)
        raise ValueError(f"cannot parse theta distribution {text!r}")

    def __str__(self):
        if self.kind == "uniform01":
            return "uniform01"
        if self.kind == "beta":
            return f"beta({self.a:g}, {self.b:g})"
        return f"point({self.a:g})"

    def raw_moment(self, k: int) -> float:
        """E[Theta^k]."""
        if self.kind == "uniform01":
            return 1.0 / (k + 1)
        if self.kind == "point":
            return self.a**k
        out = 1.0
        for r in range(k):
            out *= (self.a + r) / (self.a + self.b + r)
        return out

    @property
    def m(self) -> float:
        return self.raw_moment(1)

    @property
    def m2(self) -> float:
        return self.raw_moment(2)

    @property
    def sigma2(self) -> float:
        return self.m2 - self.m**2

    @property
    def m4(self) -> float:
        return self.raw_moment(4)


def sample_theta(d: ThetaDistribution, rng: np.random.Generator) -> float:
    if d.kind == "uniform01":
        return float(rng.random())
    if d.kind == "beta":
        return float(rng.beta(d.a, d.b))
    return float(d.a)


@dataclass(frozen=True)
class EventRates:
    mu_a: float = 0.0
    mu_d: float = 0.0
    mu: float = 0.0

    def __post_init__(self):
        if min(self.mu_a, self.mu_d, self.mu) < 0:
            raise ValueError("event rates must be nonnegative")


@dataclass(frozen=True)
class Event:
    """A jump at time ``t``.

    ``target`` is the matrix index of the departing or replaced agent (for
    arrivals it is the index the newcomer will take) and ``agent_id`` its
    stable identity once known.
    """

    t: float
    kind: Literal["arrival", "departure", "replacement"]
    target: int
    theta: float | None = None
    agent_id: int | None = None

    def __post_init__(self):
        has_theta = self.kind in ("arrival", "replacement")
        if has_theta != (self.theta is not None):
            raise ValueError(f"{self.kind} event must {'' if has_theta else 'not '}carry theta")
        if self.theta is not None and not 0.0 <= self.theta <= 1.0:
            raise ValueError("theta must lie in [0, 1]")


def next_open_event(t_now: float, n: int, rates: EventRates, theta: ThetaDistribution,
                    rng: np.random.Generator) -> Event:
    """Next arrival or departure, sampled as one merged exponential clock.

    Departures are switched off while a single agent remains.
    """
    if n < 1:
        raise ValueError("the open process needs at least one agent")
    mu_d = rates.mu_d if n > 1 else 0.0
    total = rates.mu_a + mu_d
    if total <= 0:
        raise DeadProcess("arrival and departure rates are both zero")
    t = t_now + rng.exponential(1.0 / total)
    if rng.random() * total < rates.mu_a:
        return Event(t, "arrival", n, sample_theta(theta, rng))
    return Event(t, "departure", int(rng.integers(n)))


def next_replacement_event(t_now: float, rates: EventRates, n0: int, theta: ThetaDistribution,
                           rng: np.random.Generator) -> Event:
    if rates.mu <= 0:
        raise DeadProcess("replacement rate is zero")
    t = t_now + rng.exponential(1.0 / rates.mu)
    j = int(rng.integers(n0))
    return Event(t, "replacement", j, sample_theta(theta, rng))


def _next_id(s: EpidemicState) -> int:
    return max(s.node_ids) + 1


def apply_arrival(s: EpidemicState, e: Event, p: float, rng: np.random.Generator,
                  new_id: int | None = None) -> EpidemicState:
    if e.kind != "arrival":
        raise ValueError(f"expected an arrival, got {e.kind}")
    adj = attach_node(s.adjacency, p, rng)
    new_id = _next_id(s) if new_id is None else new_id
    return replace(s, x=np.append(s.x, e.theta), adjacency=adj, t=e.t,
                   node_ids=s.node_ids + (new_id,))


def apply_departure(s: EpidemicState, e: Event) -> EpidemicState:
    if e.kind != "departure":
        raise ValueError(f"expected a departure, got {e.kind}")
    if s.n == 1:
        raise CannotEmpty("departure from a single-agent system")
    j = e.target
    adj = remove_node(s.adjacency, j)
    return replace(s, x=np.delete(s.x, j), adjacency=adj, t=e.t,
                   node_ids=s.node_ids[:j] + s.node_ids[j + 1:])


def apply_replacement(s: EpidemicState, e: Event, new_id: int | None = None) -> EpidemicState:
    """Overwrite agent ``e.target`` with a newcomer of state ``e.theta``.

    The newcomer inherits the slot and its edges but gets a fresh id.
    """
    if e.kind != "replacement":
        raise ValueError(f"expected a replacement, got {e.kind}")
    j = e.target
    if not 0 <= j < s.n:
        raise IndexError(f"replacement target {j} out of range for n={s.n}")
    x = s.x.copy()
    x[j] = e.theta
    new_id = _next_id(s) if new_id is None else new_id
    ids = s.node_ids[:j] + (new_id,) + s.node_ids[j + 1:]
    return replace(s, x=x, t=e.t, node_ids=ids)
