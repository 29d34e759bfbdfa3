import itertools
import os

import pytest

from heatbench import bench
from heatbench.bench import CSV_HEADER, BenchRecord, read_csv, sweep, timed_run, write_csv
from heatbench.core import ConfigError, SolverConfig

SMALL = SolverConfig(nodes=200, steps=5, strategy="queues")


def _record(**overrides):
    base = dict(
        strategy="queues", threads=2, nodes=1000, steps=10, alpha=0.25, dt=1.0, dx=1.0,
        repetition=0, elapsed_s=0.1234567890123, cells_per_s=1000 * 10 / 0.1234567890123,
    )
    base.update(overrides)
    return BenchRecord(**base)


def test_header_is_bit_exact():
    assert ",".join(CSV_HEADER) == "strategy,threads,nodes,steps,alpha,dt,dx,repetition,elapsed_s,cells_per_s"


def test_timed_run_throughput_arithmetic(monkeypatch):
    clock = itertools.count(start=100.0, step=10.0)
    monkeypatch.setattr(bench.time, "perf_counter", lambda: next(clock))
    monkeypatch.setattr(bench, "advance", lambda field, config: field)
    rec = timed_run(SolverConfig(nodes=10**6, steps=10**3))
    assert rec.elapsed_s == 10.0
    assert rec.cells_per_s == 1e8


def test_timed_run_excludes_initialisation(monkeypatch):
    calls = []
    clock = itertools.count(start=0.0, step=1.0)

    def fake_clock():
        calls.append("clock")
        return next(clock)

    def fake_init(config):
        calls.append("init")
        return object()

    monkeypatch.setattr(bench.time, "perf_counter", fake_clock)
    monkeypatch.setattr(bench, "init_field", fake_init)
    monkeypatch.setattr(bench, "advance", lambda field, config: calls.append("solve"))
    timed_run(SMALL)
    assert calls == ["init", "clock", "solve", "clock"]


def test_timed_run_record_fields():
    rec = timed_run(SMALL.replace(threads=3), repetition=4)
    assert (rec.strategy, rec.threads, rec.nodes, rec.steps, rec.repetition) == ("queues", 3, 200, 5, 4)
    assert rec.elapsed_s > 0
    assert rec.cells_per_s == rec.nodes * rec.steps / rec.elapsed_s


def test_timed_run_rejects_zero_steps():
    with pytest.raises(ConfigError):
        timed_run(SMALL.replace(steps=0))


def test_timed_run_propagates_config_error():
    with pytest.raises(ConfigError):
        timed_run(SMALL.replace(alpha=2.0))


def test_sweep_counts_and_order():
    recs = sweep(SMALL, [1, 2, 4], repetitions=2, warmup=0)
    assert [(r.threads, r.repetition) for r in recs] == [(1, 0), (1, 1), (2, 0), (2, 1), (4, 0), (4, 1)]


def test_sweep_warmup_is_not_recorded(monkeypatch):
    seen = []
    real = bench.timed_run

    def spy(config, repetition=0):
        seen.append(config.threads)
        return real(config, repetition)

    monkeypatch.setattr(bench, "timed_run", spy)
    recs = sweep(SMALL, [1, 2], repetitions=3, warmup=1)
    assert seen == [1] * 4 + [2] * 4
    assert len(recs) == 6
    assert [r.repetition for r in recs] == [0, 1, 2] * 2


def test_sweep_on_record_callback():
    got = []
    recs = sweep(SMALL, [2], repetitions=2, warmup=0, on_record=got.append)
    assert got == recs


@pytest.mark.parametrize("bad", [dict(thread_list=[]), dict(repetitions=0), dict(warmup=-1)])
def test_sweep_usage_errors(bad):
    kwargs = dict(thread_list=[1], repetitions=1, warmup=0)
    kwargs.update(bad)
    with pytest.raises(ValueError):
        sweep(SMALL, **kwargs)


def test_sweep_aborts_on_invalid_thread_count():
    with pytest.raises(ConfigError):
        sweep(SMALL.replace(nodes=4), [2, 8], repetitions=1, warmup=0)


def test_csv_round_trip(tmp_path):
    records = [_record(), _record(threads=8, repetition=3, elapsed_s=1e-7, cells_per_s=1e11 / 1.1)]
    path = tmp_path / "bench.csv"
    write_csv(records, path)
    assert read_csv(path) == records
    text = path.read_text()
    assert text.endswith("\n")
    assert text.splitlines()[0] == ",".join(CSV_HEADER)


def test_csv_round_trip_real_runs(tmp_path):
    records = sweep(SMALL, [1, 3], repetitions=2, warmup=0)
    write_csv(records, tmp_path / "r.csv")
    back = read_csv(tmp_path / "r.csv")
    assert back == records
    for r in back:
        assert r.cells_per_s == r.nodes * r.steps / r.elapsed_s


def test_append_creates_then_extends(tmp_path):
    path = tmp_path / "sub.csv"
    a = [_record(repetition=0)]
    b = [_record(repetition=1), _record(repetition=2)]
    write_csv(a, path, append=True)
    write_csv(b, path, append=True)
    lines = path.read_text().splitlines()
    assert lines.count(",".join(CSV_HEADER)) == 1
    assert read_csv(path) == a + b


def test_overwrite_mode_replaces(tmp_path):
    path = tmp_path / "o.csv"
    write_csv([_record()], path)
    write_csv([_record(repetition=9)], path)
    assert [r.repetition for r in read_csv(path)] == [9]


def test_io_error_mentions_path(tmp_path):
    target = tmp_path / "missing-dir" / "x.csv"
    with pytest.raises(OSError, match="missing-dir"):
        write_csv([_record()], target)
    with pytest.raises(OSError, match="missing-dir"):
        read_csv(target)


def test_read_rejects_foreign_header(tmp_path):
    path = tmp_path / "bad.csv"
    path.write_text("a,b\n1,2\n")
    with pytest.raises(ValueError, match="header"):
        read_csv(path)


def test_summary_line():
    line = _record().summary()
    assert "queues" in line and "threads=2" in line and "cells/s=" in line


@pytest.mark.skipif(os.environ.get("HEATBENCH_SKIP_TIMING") == "1", reason="timing tests disabled")
def test_elapsed_positive_for_tiny_problem():
    rec = timed_run(SolverConfig(nodes=1, steps=1, strategy="sequential"))
    assert rec.elapsed_s > 0 and rec.cells_per_s > 0
