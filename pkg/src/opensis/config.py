"""Experiment configuration, ``key = value`` config files and seeding."""

from __future__ import annotations

import dataclasses
import re
import warnings
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path

import numpy as np

from .events import EventRates, ThetaDistribution

__all__ = [
    "SimulationConfig",
    "ConfigError",
    "KINDS",
    "load_config",
    "parse_config",
    "bundled_config",
    "derive_seed",
    "seed_stream",
]

KINDS = ("open", "replacement", "pure_replacement")
_KIND_ALIASES = {"pure": "pure_replacement"}
TOPOLOGY_MODES = ("expected_abar", "sampled_er_fixed")


class ConfigError(ValueError):
    """Invalid configuration; ``key`` names the offending entry when known."""

    def __init__(self, message: str, key: str | None = None):
        super().__init__(message)
        self.key = key


@dataclass(frozen=True)
class SimulationConfig:
    """All knobs of an experiment. Defaults are the reference setup
    (n0=50, p=0.5, beta_bar=0.1, delta_bar=0.075, rates 7) at 100 realizations.

    ``init`` is ``None`` for i.i.d. Theta initial states, or a constant in
    [0, 1] given to every agent.
    """

    n0: int = 50
    p: float = 0.5
    beta_bar: float = 0.1
    delta_bar: float = 0.075
    mu_a: float = 7.0
    mu_d: float = 7.0
    mu: float = 7.0
    theta: ThetaDistribution = field(default_factory=ThetaDistribution)
    init: float | None = None
    horizon: float = 100.0
    step: float = 0.01
    grid: float = 0.1
    realizations: int = 100
    base_seed: int = 0
    kinds: tuple[str, ...] = ("open", "replacement")
    topology_mode: str = "expected_abar"
    tail_fraction: float = 0.25
    violation_sigma: float = 4.0
    export_trajectories: int = 1

    def __post_init__(self):
        kinds = tuple(_KIND_ALIASES.get(k, k) for k in self.kinds)
        object.__setattr__(self, "kinds", kinds)
        self.validate()

    def validate(self) -> None:
        def need(ok, key, msg):
            if not ok:
                raise ConfigError(f"{key}: {msg}", key)

        need(isinstance(self.n0, int) and self.n0 >= 1, "n0", "must be a positive integer")
        need(0.0 <= self.p <= 1.0, "p", "must lie in [0, 1]")
        need(self.beta_bar > 0, "beta_bar", "must be positive")
        need(self.delta_bar > 0, "delta_bar", "must be positive")
        for key in ("mu_a", "mu_d", "mu"):
            need(getattr(self, key) >= 0, key, "must be nonnegative")
        need(self.init is None or 0.0 <= self.init <= 1.0, "init", "constant must lie in [0, 1]")
        need(self.horizon > 0, "horizon", "must be positive")
        need(self.grid > 0, "grid", "must be positive")
        need(0 < self.step < self.grid, "step", "must be positive and smaller than grid")
        need(self.realizations >= 1, "realizations", "must be at least 1")
        need(self.base_seed >= 0, "base_seed", "must be nonnegative")
        need(len(self.kinds) > 0 and all(k in KINDS for k in self.kinds), "kinds",
             f"must be a non-empty subset of {', '.join(KINDS)}")
        need(self.topology_mode in TOPOLOGY_MODES, "topology_mode",
             f"must be one of {', '.join(TOPOLOGY_MODES)}")
        need(0.0 < self.tail_fraction < 1.0, "tail_fraction", "must lie in (0, 1)")
        need(self.violation_sigma > 0, "violation_sigma", "must be positive")
        need(self.export_trajectories >= 0, "export_trajectories", "must be nonnegative")

    def check_rates(self) -> None:
        """Warn when the replacement approximation is not meant to hold."""
        if "open" in self.kinds and self.mu_a != self.mu_d:
            warnings.warn("mu_a != mu_d: the network size is not preserved in expectation",
                          stacklevel=2)
        if self.mu != self.mu_a:
            warnings.warn("mu != mu_a: replacement and open processes use different rates",
                          stacklevel=2)

    @property
    def rates(self) -> EventRates:
        return EventRates(self.mu_a, self.mu_d, self.mu)

    def grid_times(self) -> np.ndarray:
        count = int(np.floor(self.horizon / self.grid + 1e-9))
        return np.arange(count + 1) * self.grid

    def tail_mask(self, grid: np.ndarray) -> np.ndarray:
        return grid >= (1.0 - self.tail_fraction) * self.horizon - 1e-12

    def replace(self, **changes) -> "SimulationConfig":
        return dataclasses.replace(self, **changes)

    def to_text(self) -> str:
        lines = []
        for f in dataclasses.fields(self):
            value = getattr(self, f.name)
            if f.name == "kinds":
                value = ",".join(value)
            elif f.name == "init":
                value = "iid_theta" if value is None else f"constant({value!r})"
            lines.append(f"{f.name} = {value}")
        return "\n".join(lines) + "\n"


_INT_KEYS = {"n0", "realizations", "base_seed", "export_trajectories"}
_FLOAT_KEYS = {"p", "beta_bar", "delta_bar", "mu_a", "mu_d", "mu", "horizon", "step", "grid",
               "tail_fraction", "violation_sigma"}


def _convert(key: str, raw: str):
    try:
        if key in _INT_KEYS:
            return int(raw)
        if key in _FLOAT_KEYS:
            return float(raw)
        if key == "theta":
            return ThetaDistribution.parse(raw)
        if key == "kinds":
            return tuple(k.strip() for k in raw.split(",") if k.strip())
        if key == "topology_mode":
            return raw
        if key == "init":
            if raw in ("iid_theta", "iid"):
                return None
            m = re.fullmatch(r"constant\(\s*([^)]+?)\s*\)", raw)
            if m is None:
                raise ValueError(f"expected iid_theta or constant(c), got {raw!r}")
            return float(m.group(1))
    except ValueError as exc:
        raise ConfigError(f"{key}: {exc}", key) from None
    raise ConfigError(f"unknown key {key!r}", key)


def parse_config(text: str) -> SimulationConfig:
    values = {}
    for lineno, line in enumerate(text.splitlines(), 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"line {lineno}: expected 'key = value', got {line!r}")
        key, raw = (s.strip() for s in line.split("=", 1))
        if key in values:
            raise ConfigError(f"line {lineno}: duplicate key {key!r}", key)
        values[key] = _convert(key, raw)
    return SimulationConfig(**values)


def load_config(path) -> SimulationConfig:
    return parse_config(Path(path).read_text(encoding="utf-8"))


def bundled_config(name: str = "fig2.cfg") -> SimulationConfig:
    """Load one of the configs shipped in ``opensis/data``."""
    return parse_config(resources.files("opensis.data").joinpath(name).read_text(encoding="utf-8"))


def derive_seed(base_seed: int, index: int) -> int:
    """64-bit seed for realization ``index``, hashed by SeedSequence."""
    ss = np.random.SeedSequence(base_seed, spawn_key=(index,))
    return int(ss.generate_state(1, np.uint64)[0])


def seed_stream(base_seed: int, index: int) -> np.random.Generator:
    """Independent PCG64 stream for realization ``index``."""
    return np.random.default_rng(derive_seed(base_seed, index))
