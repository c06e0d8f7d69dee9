"""
One realization of the open network
===================================

Agents arrive and leave at rate 7. Between events the SIS flow pulls the
infection down. Each event makes V jump.
"""

from opensis.config import bundled_config, derive_seed
from opensis.sim import simulate
from opensis.svg import write_chart

cfg = bundled_config("fig1.cfg")
tr = simulate("open", cfg, derive_seed(cfg.base_seed, 0))

print(f"{tr.n_events} events, n between {tr.n.min()} and {tr.n.max()}")
print(f"V(0) = {tr.v[0]:.4f}, V({cfg.horizon:g}) = {tr.v[-1]:.4f}")

# samples() merges the grid with the pre- and post-jump points
rows = tr.samples()
t = [r[0] for r in rows]
write_chart("single_realization.svg", [
    {"title": "V(x(t))", "ylabel": "V", "series": [{"x": t, "y": [r[1] for r in rows], "label": "V"}]},
    {"title": "n(t)", "xlabel": "t", "ylabel": "n",
     "series": [{"x": t, "y": [r[2] for r in rows], "label": "n", "color": "#2ca02c"}]},
])
