"""
The periodic stencil and its three solve strategies
===================================================

A ring of N cells starts from u(0, x_i) = x_i and is advanced with explicit
Euler steps of the 3-point stencil. All three strategies evaluate exactly the
same floating point expression per cell, so their results are bitwise equal.
"""

import numpy as np

from heatbench import SolverConfig, init_field, solve, sweep_sequential, total_heat

# The hand-checkable case: alpha=0.25, dt=1, dx=1, four cells, one step.
cfg = SolverConfig(nodes=4, steps=1)
print("initial     ", init_field(cfg).current)
print("after 1 step", sweep_sequential(init_field(cfg), cfg).current)

# Same answer, bit for bit, from the barrier and queue strategies at any
# thread count.
cfg = SolverConfig(nodes=1000, steps=200, strategy="sequential")
oracle = solve(cfg).current
for strategy in ("barrier", "queues"):
    for threads in (1, 3, 8):
        u = solve(cfg.replace(strategy=strategy, threads=threads)).current
        print(f"{strategy:>8} x{threads}: bitwise equal = {u.tobytes() == oracle.tobytes()}")

# Heat is redistributed, never created: the total stays put on the ring while
# the profile flattens towards the initial mean.
cfg = SolverConfig(nodes=64, steps=20_000, strategy="queues", threads=4)
start = init_field(cfg)
end = solve(cfg)
print(f"total heat {total_heat(start)!r} -> {total_heat(end)!r}")
print(f"spread max-min after {cfg.steps} steps: {np.ptp(end.current):.3e}")

# The printed form of the update divides by 2*dx instead of dx**2. It is
# available for literal reproduction; with dx=1 it simply halves the weight.
literal = solve(SolverConfig(nodes=4, steps=1, denominator_mode="paper_literal")).current
print("2*dx denominator, 1 step:", literal)
