"""Experiment recipes: ensembles per process kind, moment tables, bound report, figures."""

from __future__ import annotations

import csv
import logging
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .analysis import (
    BoundReport,
    ComparisonTable,
    bound_report,
    compare_bounds,
    estimate_moments,
    tail_summary,
)
from .config import SimulationConfig
from .sim import Trajectory, run_ensemble, write_trajectories_csv
from .svg import write_chart

__all__ = ["ExperimentResult", "execute", "write_outputs", "run_experiment", "SUMMARY_COLUMNS"]

log = logging.getLogger(__name__)

EXIT_OK, EXIT_ERROR, EXIT_VIOLATION = 0, 1, 2
SUMMARY_COLUMNS = ("kind", "quantity", "tail_estimate", "tail_se", "bound", "margin", "violations")


@dataclass(eq=False)
class ExperimentResult:
    cfg: SimulationConfig
    report: BoundReport
    ensembles: dict[str, list[Trajectory]] = field(default_factory=dict)
    tables: dict[str, ComparisonTable] = field(default_factory=dict)

    @property
    def violations(self) -> int:
        return sum(t.violations for t in self.tables.values())

    def summary_rows(self) -> list[tuple]:
        rows = []
        rep = self.report
        for kind, table in self.tables.items():
            est = table.est
            tail = tail_summary(est, self.cfg.tail_mask(est.grid))
            if kind == "pure_replacement":
                bounds = {"ev": rep.pure_replacement_asymptote, "ev2": None, "var": None}
            else:
                bounds = {"ev": rep.ev_limsup_bound, "ev2": rep.ev2_limsup_bound,
                          "var": rep.var_limsup_bound}
            var_flags = int(np.sum(est.var - self.cfg.violation_sigma * est.var_se > table.bound_ev2))
            counts = {"ev": int(table.violation_ev.sum()), "ev2": int(table.violation_ev2.sum()),
                      "var": var_flags}
            values = {"ev": (tail.ev, tail.ev_se), "ev2": (tail.ev2, tail.ev2_se),
                      "var": (tail.var, tail.var_se)}
            for q in ("ev", "ev2", "var"):
                b = bounds[q]
                est_q, se_q = values[q]
                rows.append((kind, q, repr(est_q), repr(se_q), "" if b is None else repr(b),
                             "" if b is None else repr(b - est_q), counts[q]))
        return rows


def execute(cfg: SimulationConfig, workers: int = 1) -> ExperimentResult:
    """Simulate every configured kind and compare the moments with the bounds."""
    cfg.check_rates()
    result = ExperimentResult(cfg, bound_report(cfg))
    for kind in cfg.kinds:
        log.info("simulating %d realizations of the %s process", cfg.realizations, kind)
        ens = run_ensemble(kind, cfg, workers=workers)
        result.ensembles[kind] = ens
        if len(ens) >= 2:
            est = estimate_moments(ens)
            result.tables[kind] = compare_bounds(est, result.report, kind, cfg.violation_sigma)
    return result


def _figure1(path, kind: str, traj: Trajectory) -> None:
    rows = traj.samples()
    t = [r[0] for r in rows]
    panels = [
        {"title": f"V(x(t)), one realization ({kind})", "ylabel": "V",
         "series": [{"x": t, "y": [r[1] for r in rows], "label": "V"}]},
        {"title": "number of agents n(t)", "xlabel": "t", "ylabel": "n",
         "series": [{"x": t, "y": [r[2] for r in rows], "label": "n", "color": "#2ca02c"}]},
    ]
    write_chart(path, panels)


def _figure2(path, result: ExperimentResult) -> None:
    styles = {"open": "solid", "replacement": "dashed", "pure_replacement": "dotted"}
    panels = []
    for attr, title, bound_attr in (("ev", "E[V]", "bound_ev"), ("ev2", "E[V^2]", "bound_ev2"),
                                    ("var", "Var(V)", "bound_ev2")):
        series = [{"x": tab.est.grid, "y": getattr(tab.est, attr), "label": kind,
                   "style": styles[kind]} for kind, tab in result.tables.items()]
        bounded = [tab for kind, tab in result.tables.items() if kind != "pure_replacement"]
        if bounded and result.report.stable:
            series.append({"x": bounded[0].est.grid, "y": getattr(bounded[0], bound_attr),
                           "label": "upper bound", "style": "dashdot", "color": "#e6b800"})
        panels.append({"title": title, "ylabel": title, "series": series})
    panels[-1]["xlabel"] = "t"
    write_chart(path, panels)


def write_outputs(result: ExperimentResult, out_dir, plots: bool = False) -> None:
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    cfg = result.cfg
    (out / "config_used.cfg").write_text(cfg.to_text(), encoding="utf-8")
    meta = f"tail_fraction = {cfg.tail_fraction!r}\nviolation_sigma = {cfg.violation_sigma!r}\n"
    (out / "bounds.txt").write_text(result.report.to_text() + meta, encoding="utf-8")
    for kind, ens in result.ensembles.items():
        keep = max(cfg.export_trajectories, 1) if len(ens) == 1 else cfg.export_trajectories
        if keep:
            write_trajectories_csv(out / f"trajectories_{kind}.csv", ens[:keep])
        if plots:
            _figure1(out / f"fig1_{kind}.svg", kind, ens[0])
    for kind, table in result.tables.items():
        table.write_csv(out / f"moments_{kind}.csv")
    if result.tables:
        with open(out / "comparison.csv", "w", newline="", encoding="utf-8") as fh:
            writer = csv.writer(fh, lineterminator="\n")
            writer.writerow(SUMMARY_COLUMNS)
            writer.writerows(result.summary_rows())
        if plots:
            _figure2(out / "fig2_moments.svg", result)


def run_experiment(cfg: SimulationConfig, out_dir, plots: bool = False, workers: int = 1) -> int:
    """Run and write everything; returns 0, or 2 when any bound-violation flag is raised."""
    result = execute(cfg, workers=workers)
    write_outputs(result, out_dir, plots=plots)
    if result.violations:
        log.warning("%d bound-violation flags raised", result.violations)
        return EXIT_VIOLATION
    return EXIT_OK
