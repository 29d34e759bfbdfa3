"""
Scaling fits, averaged time and the effort/speed map
====================================================

Fit t(p) = serial + parallel / p to timings, average the times at 2, 20 and
40 threads, and place approaches on the [-1, 1] x [-1, 1] map with effort on
x (easy to difficult) and speed on y (slow to fast).
"""

import inspect

import numpy as np

from heatbench import SolverConfig, classify, cocomo, fit_scaling, sweep, t_average
from heatbench import core, exchange
from heatbench.analysis import DEFAULT_COMMENT_RULES, count_lines

# Plant-and-recover: exact data gives back the planted parameters and R^2 = 1.
ps = [1, 2, 4, 8, 16]
print(fit_scaling([(p, 1 + 8 / p) for p in ps]))
rng = np.random.default_rng(1)
print(fit_scaling([(p, 1 + 8 / p + rng.normal(0, 0.05)) for p in ps]))

# Lines of code of the published implementations, and the Basic COCOMO
# (organic) schedule they imply. Only the effort axis can be rebuilt from
# these numbers, so every speed is set equal and y collapses to 0.
loc = {"Python": 66, "Swift": 111, "HPX": 109, "Julia": 86, "Go": 120, "Rust": 134,
       "Chapel": 44, "Charm++": 160, "C++ 17": 139, "Java": 152}
effort_only = classify([(name, cocomo(n).schedule_months, 1.0) for name, n in loc.items()])
for point in sorted(effort_only, key=lambda p: p.x):
    print(f"{point.label:<8} LOC={loc[point.label]:>3}  x={point.x:+.6f}")

# The full map for this package's own strategies: effort from the LOC of the
# code each one needs, speed from measured T_average. Threads beyond the
# machine's core count still run, they just share cores.
rule = DEFAULT_COMMENT_RULES[".py"]


def loc_of(*objects):
    return sum(count_lines(inspect.getsource(o), rule).code for o in objects)


efforts = {
    "sequential": loc_of(core.sweep_sequential, core.update_range, core.update_block),
    "barrier": loc_of(core._solve_barrier, core.update_range, core.update_block),
    "queues": loc_of(exchange) + loc_of(core.update_block),
}
base = SolverConfig(nodes=40_000, steps=50)
entries = []
for strategy, n in efforts.items():
    recs = sweep(base.replace(strategy=strategy), [2, 20, 40], repetitions=2, warmup=0)
    mean = {p: np.mean([r.elapsed_s for r in recs if r.threads == p]) for p in (2, 20, 40)}
    t_avg = t_average(mean[2], mean[20], mean[40])
    entries.append((strategy, cocomo(n).schedule_months, t_avg))
    print(f"{strategy:<10} LOC={n:>3}  schedule={cocomo(n).schedule_months:.3f} months  T_average={t_avg:.4f}s")
for point in classify(entries):
    print(f"{point.label:<10} x={point.x:+.6f} y={point.y:+.6f}")
