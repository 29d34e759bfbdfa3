"""
Ghost exchange over bounded single-producer/single-consumer channels
====================================================================

Each worker owns one segment of the ring. Per step it sends both boundary
values to its neighbours, updates its interior, then receives the two ghosts
and finishes its edge cells. With ``validate=True`` every message carries its
step number and the receiver checks it.
"""

import random
import time

from heatbench import GhostMessage, SolverConfig, channel_create, init_field, run_queues, solve
from heatbench.core import make_partition

# A channel on its own: FIFO, bounded, blocking.
tx, rx = channel_create(capacity=2)
tx.send(GhostMessage(1.0, step_tag=0))
tx.send(GhostMessage(2.0, step_tag=1))
print("buffered:", len(rx), "->", rx.recv(), rx.recv())

# How the grid is cut: front-loaded, lengths differ by at most one.
print("partition of 10 cells over 3 workers:", list(make_partition(10, 3)))

# A validated run reports the traffic on each of the 2T channels.
cfg = SolverConfig(nodes=10_000, steps=500, threads=8, validate=True)
field = init_field(cfg)
stats = run_queues(field, cfg)
print(f"{len(stats.messages)} channels, messages per channel: {sorted(set(stats.messages.values()))}")

# Jitter every worker at random; the ring still finishes and the answer does
# not change.
rng = random.Random(0)


def jitter(segment, step):
    if rng.random() < 0.2:
        time.sleep(rng.uniform(0, 2e-4))


stressed = init_field(cfg)
t0 = time.perf_counter()
run_queues(stressed, cfg, step_hook=jitter)
print(f"jittered run: {time.perf_counter() - t0:.2f}s, identical = {stressed.current.tobytes() == field.current.tobytes()}")
print("matches sequential:", field.current.tobytes() == solve(cfg.replace(strategy="sequential")).current.tobytes())
