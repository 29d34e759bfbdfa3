"""
Throughput sweep and CSV results
================================

Time the solver across thread counts, report cells processed per second and
append everything to a CSV file that ``heatbench analyze`` can read.

The baseline problem is 1,000,000 cells and 1,000 steps; set BASELINE=1 in
the environment to use it (tens of seconds per thread count).
"""

import os
import tempfile

from heatbench import SolverConfig, read_csv, sweep, write_csv

if os.environ.get("BASELINE") == "1":
    base = SolverConfig(nodes=1_000_000, steps=1000)
else:
    base = SolverConfig(nodes=200_000, steps=100)

out = os.path.join(tempfile.mkdtemp(), "bench.csv")
for strategy in ("queues", "barrier"):
    records = sweep(base.replace(strategy=strategy), [1, 2, 4], repetitions=3, warmup=1,
                    on_record=lambda r: print(r.summary()))
    write_csv(records, out, append=True)

rows = read_csv(out)
print(f"\n{len(rows)} rows in {out}")
with open(out) as fh:
    print("".join(fh.readlines()[:3]), end="")
