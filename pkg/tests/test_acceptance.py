"""Exit criteria. Each test prints one PASS/FAIL line in the pytest summary
(section "acceptance criteria"); run with ``pytest tests/test_acceptance.py``."""

import os
import random
import threading
import time

import numpy as np
import pytest

from heatbench.analysis import classify, cocomo, fit_scaling
from heatbench.bench import BenchRecord, read_csv, sweep, write_csv
from heatbench.cli import main
from heatbench.core import SolverConfig, init_field, solve, total_heat
from heatbench.exchange import run_queues

from conftest import reference_run

acceptance = pytest.mark.acceptance


def physical_cores():
    try:
        import psutil

        physical = psutil.cpu_count(logical=False) or 1
    except ImportError:
        physical = os.cpu_count() or 1
    usable = len(os.sched_getaffinity(0)) if hasattr(os, "sched_getaffinity") else physical
    return min(physical, usable)


@acceptance("1", "oracle equivalence: barrier/queues bitwise equal to sequential, < 10 s")
def test_oracle_equivalence():
    start = time.perf_counter()
    for nodes in (1, 4, 10, 1000):
        for steps in (0, 1, 100):
            oracle = solve(SolverConfig(nodes=nodes, steps=steps, strategy="sequential")).current
            for threads in (1, 2, 4, 8):
                if threads > nodes:
                    continue
                for strategy in ("barrier", "queues"):
                    got = solve(SolverConfig(nodes=nodes, steps=steps, threads=threads, strategy=strategy)).current
                    assert got.tobytes() == oracle.tobytes(), (nodes, steps, threads, strategy)
    assert time.perf_counter() - start < 10.0


@acceptance("2", "hand check: defaults, N=4, one step -> [1, 1, 2, 2] exactly")
def test_hand_check():
    for strategy in ("sequential", "barrier", "queues"):
        assert solve(SolverConfig(nodes=4, steps=1, strategy=strategy)).current.tolist() == [1.0, 1.0, 2.0, 2.0]
    assert reference_run(4, 1) == [1.0, 1.0, 2.0, 2.0]


@acceptance("3", "conservation: N=1e5, 1e3 steps, queues x8, relative drift <= 1e-9")
def test_conservation():
    cfg = SolverConfig(nodes=100_000, steps=1000, threads=8, strategy="queues")
    before = total_heat(init_field(cfg))
    after = total_heat(solve(cfg))
    assert abs(after - before) / abs(before) <= 1e-9


@acceptance("4", "convergence: N=64, 1e5 steps -> spread < 1e-6, every cell within 1e-6 of mean")
def test_convergence():
    cfg = SolverConfig(nodes=64, steps=100_000)
    mean = float(np.mean(init_field(cfg).current))
    u = solve(cfg).current
    assert u.max() - u.min() < 1e-6
    assert np.all(np.abs(u - mean) < 1e-6)


@acceptance("5", "protocol: validate, T=8, N=1e4, 500 steps; 500 msgs/channel; delayed run ends < 60 s")
def test_protocol():
    cfg = SolverConfig(nodes=10_000, steps=500, threads=8, validate=True)
    field = init_field(cfg)
    stats = run_queues(field, cfg)  # raises ProtocolError on any step-tag violation
    assert len(stats.messages) == 16
    assert all(count == 500 for count in stats.messages.values())
    assert field.current.tolist() == solve(cfg.replace(strategy="sequential")).current.tolist()

    rng = random.Random(20240501)
    delays = [[rng.choice((0.0, 0.0, 0.0, rng.uniform(0, 5e-4))) for _ in range(cfg.steps)] for _ in range(8)]

    def hook(segment, step):
        if delays[segment][step]:
            time.sleep(delays[segment][step])

    stressed = init_field(cfg)
    outcome = {}

    def target():
        outcome["stats"] = run_queues(stressed, cfg, step_hook=hook)

    worker = threading.Thread(target=target, daemon=True)
    start = time.perf_counter()
    worker.start()
    worker.join(60)
    assert not worker.is_alive(), "delayed queues run did not finish within 60 s"
    assert time.perf_counter() - start < 60
    assert all(count == 500 for count in outcome["stats"].messages.values())
    assert stressed.current.tobytes() == field.current.tobytes()


@acceptance("6", "baseline bench (1e6 nodes, 1e3 steps, 1 thread) < 2 min; cells/s consistent")
def test_baseline_bench(tmp_path, capsys):
    out = tmp_path / "baseline.csv"
    start = time.perf_counter()
    code = main(["bench", "--nodes", "1000000", "--steps", "1000", "--threads", "1", "--output", str(out)])
    elapsed = time.perf_counter() - start
    capsys.readouterr()
    assert code == 0
    assert elapsed < 120
    records = read_csv(out)
    assert len(records) == 5
    for r in records:
        assert (r.nodes, r.steps, r.threads) == (1_000_000, 1000, 1)
        assert r.cells_per_s == pytest.approx(r.nodes * r.steps / r.elapsed_s, rel=1e-15)


@acceptance("7", "scaling: >= 4 physical cores, queues baseline, 4 threads >= 1.8x 1 thread (5 reps)")
def test_scaling():
    cores = physical_cores()
    if cores < 4:
        pytest.skip(f"needs >= 4 physical cores, this machine has {cores}")
    base = SolverConfig(nodes=1_000_000, steps=1000, strategy="queues")
    records = sweep(base, [1, 4], repetitions=5, warmup=1)
    mean = {p: np.mean([r.cells_per_s for r in records if r.threads == p]) for p in (1, 4)}
    print(f"cells/s: 1 thread {mean[1]:.4e}, 4 threads {mean[4]:.4e}, ratio {mean[4] / mean[1]:.3f}")
    assert mean[4] >= 1.8 * mean[1]


@acceptance("8", "fit oracle: planted 1 + 8/p recovered within 1e-9, R2 = 1; noisy R2 < 1")
def test_fit_oracle():
    ps = [1, 2, 4, 8, 16]
    fit = fit_scaling([(p, 1 + 8 / p) for p in ps])
    assert abs(fit.serial_s - 1) <= 1e-9 and abs(fit.parallel_s - 8) <= 1e-9
    assert fit.r_squared == 1.0
    rng = np.random.default_rng(8)
    noisy = fit_scaling([(p, 1 + 8 / p + rng.uniform(-0.01, 0.01)) for p in ps])
    assert noisy.r_squared < 1.0


@acceptance("9", "COCOMO oracle: 1000 LOC -> 2.4 pm exact, schedule 3.4867 +- 1e-4; 0 LOC -> (0, 0)")
def test_cocomo_oracle():
    est = cocomo(1000)
    assert est.effort_pm == 2.4
    assert abs(est.schedule_months - 3.4867) <= 1e-4
    zero = cocomo(0)
    assert (zero.effort_pm, zero.schedule_months) == (0, 0)


@acceptance("10", "classification: endpoints exactly +-1, middle strictly between; all-equal -> 0")
def test_classification():
    pts = classify([("a", 10.0, 3.0), ("b", 4.0, 9.0), ("c", 6.0, 5.0)])
    by = {p.label: p for p in pts}
    assert (by["b"].x, by["a"].x) == (-1.0, 1.0)
    assert (by["b"].y, by["a"].y) == (-1.0, 1.0)
    assert -1.0 < by["c"].x < 1.0 and -1.0 < by["c"].y < 1.0
    flat = classify([("a", 2.0, 2.0), ("b", 2.0, 2.0), ("c", 2.0, 2.0)])
    assert all((p.x, p.y) == (0.0, 0.0) for p in flat)


@acceptance("11", "CSV round trip and append: equality, one header, concatenated rows")
def test_csv_round_trip_and_append(tmp_path):
    recs = [
        BenchRecord("queues", t, 1000, 10, 0.25, 1.0, 1.0, rep, e, 1000 * 10 / e)
        for t, rep, e in [(1, 0, 0.3141592653589793), (2, 0, 0.17), (2, 1, 1e-5 / 3)]
    ]
    path = tmp_path / "rt.csv"
    write_csv(recs, path)
    assert read_csv(path) == recs

    appended = tmp_path / "ap.csv"
    write_csv(recs[:1], appended, append=True)
    write_csv(recs[1:], appended, append=True)
    text = appended.read_text()
    assert text.count("strategy,threads") == 1
    assert read_csv(appended) == recs
