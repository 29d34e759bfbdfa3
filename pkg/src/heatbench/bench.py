"""Timing harness: throughput in cells per second and CSV result files."""

from __future__ import annotations

import csv
import os
import time
from dataclasses import dataclass, fields
from pathlib import Path
from typing import Iterable, Sequence, TextIO

from .core import ConfigError, SolverConfig, advance, init_field

CSV_HEADER = ("strategy", "threads", "nodes", "steps", "alpha", "dt", "dx", "repetition", "elapsed_s", "cells_per_s")

DEFAULT_REPETITIONS = 5
DEFAULT_WARMUP = 1


@dataclass(frozen=True)
class BenchRecord:
    strategy: str
    threads: int
    nodes: int
    steps: int
    alpha: float
    dt: float
    dx: float
    repetition: int
    elapsed_s: float
    cells_per_s: float

    def row(self) -> list[str]:
        # repr() gives the shortest string that round-trips a float exactly.
        return [v if isinstance(v, str) else repr(v) for v in (getattr(self, name) for name in CSV_HEADER)]

    @classmethod
    def from_row(cls, row: dict[str, str]) -> BenchRecord:
        kwargs = {}
        for f in fields(cls):
            raw = row[f.name]
            kwargs[f.name] = raw if f.type == "str" else (int(raw) if f.type == "int" else float(raw))
        return cls(**kwargs)

    def summary(self) -> str:
        return (
            f"{self.strategy:<10} threads={self.threads:<3d} nodes={self.nodes} steps={self.steps} "
            f"rep={self.repetition} elapsed={self.elapsed_s:.6f}s cells/s={self.cells_per_s:.4e}"
        )


def timed_run(config: SolverConfig, repetition: int = 0) -> BenchRecord:
    """Time one solve; allocation and initial condition are outside the timed region."""
    if config.steps == 0:
        raise ConfigError("benchmark runs need steps > 0 (throughput is undefined otherwise)")
    config.check()
    field = init_field(config)
    start = time.perf_counter()
    advance(field, config)
    elapsed = time.perf_counter() - start
    # perf_counter ties are possible for tiny problems; keep elapsed strictly positive.
    elapsed = max(elapsed, time.get_clock_info("perf_counter").resolution)
    return BenchRecord(
        strategy=config.strategy,
        threads=config.threads,
        nodes=config.nodes,
        steps=config.steps,
        alpha=float(config.alpha),
        dt=float(config.dt),
        dx=float(config.dx),
        repetition=repetition,
        elapsed_s=elapsed,
        cells_per_s=config.nodes * config.steps / elapsed,
    )


def sweep(
    base: SolverConfig,
    thread_list: Sequence[int],
    repetitions: int = DEFAULT_REPETITIONS,
    warmup: int = DEFAULT_WARMUP,
    on_record=None,
) -> list[BenchRecord]:
    """Benchmark ``base`` at every thread count, in the given order.

    Each thread count gets ``warmup`` untimed runs, then ``repetitions``
    recorded ones. ``on_record`` is called with each record as it completes.
    """
    if not thread_list:
        raise ValueError("thread_list must not be empty")
    if repetitions < 1:
        raise ValueError(f"repetitions must be positive, got {repetitions}")
    if warmup < 0:
        raise ValueError(f"warmup must be non-negative, got {warmup}")
    configs = [base.replace(threads=int(p)) for p in thread_list]
    for cfg in configs:
        cfg.check()

    records = []
    for cfg in configs:
        for _ in range(warmup):
            timed_run(cfg)
        for rep in range(repetitions):
            rec = timed_run(cfg, rep)
            records.append(rec)
            if on_record is not None:
                on_record(rec)
    return records


def write_records(records: Iterable[BenchRecord], stream: TextIO, header: bool = True) -> None:
    writer = csv.writer(stream, lineterminator="\n")
    if header:
        writer.writerow(CSV_HEADER)
    for rec in records:
        writer.writerow(rec.row())


def write_csv(records: Iterable[BenchRecord], path: str | os.PathLike, append: bool = False) -> None:
    """Write records to ``path``; with ``append`` an existing file keeps its header and rows."""
    path = Path(path)
    try:
        exists = append and path.exists() and path.stat().st_size > 0
        with open(path, "a" if append else "w", newline="") as fh:
            write_records(records, fh, header=not exists)
    except OSError as exc:
        raise OSError(exc.errno, f"cannot write benchmark CSV {path}: {exc.strerror}") from exc


def read_csv(path: str | os.PathLike) -> list[BenchRecord]:
    path = Path(path)
    try:
        with open(path, newline="") as fh:
            reader = csv.DictReader(fh)
            if tuple(reader.fieldnames or ()) != CSV_HEADER:
                raise ValueError(f"{path}: unexpected CSV header {reader.fieldnames}")
            return [BenchRecord.from_row(row) for row in reader]
    except OSError as exc:
        raise OSError(exc.errno, f"cannot read benchmark CSV {path}: {exc.strerror}") from exc

