"""Problem setup, stencil kernels and solve strategies for the periodic 1D heat equation.

The grid has ``nodes`` cells at ``x_i = i * dx`` on a ring, starts from
``u(0, x_i) = x_i`` and is advanced with explicit Euler steps of the 3-point
stencil::

    u'[i] = u[i] + dt * alpha * (u[i-1] - 2 u[i] + u[i+1]) / D

where ``D = dx**2`` (default) or ``D = 2 dx`` (``denominator_mode="paper_literal"``).

Every strategy evaluates exactly the same floating point expression for every
cell, so results are bitwise identical whatever the strategy or thread count.
"""

from __future__ import annotations

import threading
from dataclasses import dataclass, field, replace
from typing import Literal, NamedTuple

import numpy as np

Strategy = Literal["sequential", "barrier", "queues"]
DenominatorMode = Literal["squared", "paper_literal"]

STRATEGIES: tuple[str, ...] = ("sequential", "barrier", "queues")
DENOMINATOR_MODES: tuple[str, ...] = ("squared", "paper_literal")

# Largest coefficient dt*alpha/D for which explicit Euler diffusion is stable.
CFL_LIMIT = 0.5

# Cells per vectorised chunk; keeps the kernel temporaries cache resident.
BLOCK = 32768


class ConfigError(ValueError):
    """Invalid solver configuration."""


class PartitionError(ValueError):
    """Grid cannot be split into the requested number of segments."""


@dataclass(frozen=True)
class SolverConfig:
    nodes: int = 1_000_000
    steps: int = 1000
    threads: int = 1
    alpha: float = 0.25
    dt: float = 1.0
    dx: float = 1.0
    strategy: Strategy = "queues"
    denominator_mode: DenominatorMode = "squared"
    validate: bool = False
    allow_unstable: bool = False

    def __post_init__(self):
        if not isinstance(self.nodes, (int, np.integer)) or self.nodes < 1:
            raise ConfigError(f"nodes must be a positive integer, got {self.nodes!r}")
        if not isinstance(self.steps, (int, np.integer)) or self.steps < 0:
            raise ConfigError(f"steps must be a non-negative integer, got {self.steps!r}")
        if not isinstance(self.threads, (int, np.integer)) or self.threads < 1:
            raise ConfigError(f"threads must be a positive integer, got {self.threads!r}")
        if not self.alpha >= 0:
            raise ConfigError(f"alpha must be non-negative, got {self.alpha!r}")
        if not self.dt > 0:
            raise ConfigError(f"dt must be positive, got {self.dt!r}")
        if not self.dx > 0:
            raise ConfigError(f"dx must be positive, got {self.dx!r}")
        if self.strategy not in STRATEGIES:
            raise ConfigError(f"unknown strategy {self.strategy!r}; expected one of {STRATEGIES}")
        if self.denominator_mode not in DENOMINATOR_MODES:
            raise ConfigError(
                f"unknown denominator_mode {self.denominator_mode!r}; "
                f"expected one of {DENOMINATOR_MODES}"
            )

    @property
    def length(self) -> float:
        """Ring circumference L = nodes * dx."""
        return self.nodes * self.dx

    @property
    def denominator(self) -> float:
        if self.denominator_mode == "squared":
            return self.dx * self.dx
        return 2.0 * self.dx

    @property
    def cfl(self) -> float:
        """Diffusion number alpha * dt / dx**2."""
        return self.alpha * self.dt / (self.dx * self.dx)

    @property
    def coefficient(self) -> float:
        """Effective update weight dt * alpha / D, the quantity bounded for stability."""
        return self.alpha * self.dt / self.denominator

    def check(self) -> None:
        """Raise ConfigError for cross-field rules that a run cannot satisfy."""
        if self.coefficient > CFL_LIMIT and not self.allow_unstable:
            raise ConfigError(
                f"unstable configuration: dt*alpha/D = {self.coefficient:g} exceeds "
                f"{CFL_LIMIT} (cfl = {self.cfl:g}); set allow_unstable (--allow-unstable) to run anyway"
            )
        if self.strategy == "queues" and self.threads > self.nodes:
            raise ConfigError(
                f"queues strategy needs threads <= nodes, got threads={self.threads} "
                f"nodes={self.nodes}"
            )

    def replace(self, **changes) -> SolverConfig:
        return replace(self, **changes)


@dataclass
class Field:
    """Double-buffered temperature array."""

    current: np.ndarray
    next: np.ndarray
    step: int = 0

    @property
    def nodes(self) -> int:
        return self.current.shape[0]

    def swap(self) -> None:
        self.current, self.next = self.next, self.current
        self.step += 1

    def copy(self) -> Field:
        return Field(self.current.copy(), self.next.copy(), self.step)


class Segment(NamedTuple):
    start: int
    length: int

    @property
    def stop(self) -> int:
        return self.start + self.length


@dataclass(frozen=True)
class Partition:
    segments: tuple[Segment, ...] = field(default_factory=tuple)

    def __len__(self) -> int:
        return len(self.segments)

    def __iter__(self):
        return iter(self.segments)

    def __getitem__(self, i: int) -> Segment:
        return self.segments[i]


def init_field(config: SolverConfig) -> Field:
    """Field at t = 0 with ``current[i] = i * dx``."""
    current = np.arange(config.nodes, dtype=np.float64) * config.dx
    return Field(current, np.empty_like(current), 0)


def stencil_update(left: float, mid: float, right: float, config: SolverConfig) -> float:
    """One explicit Euler update of a single cell from its three time-t operands."""
    return mid + config.dt * config.alpha * (left - 2.0 * mid + right) / config.denominator


def update_block(
    left: np.ndarray,
    mid: np.ndarray,
    right: np.ndarray,
    out: np.ndarray,
    config: SolverConfig,
    tmp: np.ndarray | None = None,
) -> None:
    """Vectorised :func:`stencil_update` over aligned operand views.

    Performs the same IEEE operations in the same order as the scalar version,
    so each output element is bitwise equal to it. ``out`` must not alias the
    operands. Work is chunked into blocks of ``BLOCK`` cells.
    """
    n = mid.shape[0]
    if n == 0:
        return
    if tmp is None or tmp.shape[0] < min(n, BLOCK):
        tmp = np.empty(min(n, BLOCK))
    k = config.dt * config.alpha
    d = config.denominator
    for s in range(0, n, BLOCK):
        e = min(s + BLOCK, n)
        t = tmp[: e - s]
        m = mid[s:e]
        np.multiply(m, 2.0, out=t)
        np.subtract(left[s:e], t, out=t)
        np.add(t, right[s:e], out=t)
        np.multiply(t, k, out=t)
        np.divide(t, d, out=t)
        np.add(m, t, out=out[s:e])


def update_range(
    cur: np.ndarray,
    nxt: np.ndarray,
    start: int,
    stop: int,
    config: SolverConfig,
    tmp: np.ndarray | None = None,
) -> None:
    """Write ``nxt[start:stop]`` from ``cur`` with periodic wrap at the ring ends."""
    n = cur.shape[0]
    if stop <= start:
        return
    lo = max(start, 1)
    hi = min(stop, n - 1)
    if lo < hi:
        update_block(cur[lo - 1 : hi - 1], cur[lo:hi], cur[lo + 1 : hi + 1], nxt[lo:hi], config, tmp)
    if start == 0:
        nxt[0] = stencil_update(cur[n - 1], cur[0], cur[1 % n], config)
    if stop == n and n > 1:
        nxt[n - 1] = stencil_update(cur[n - 2], cur[n - 1], cur[0], config)


def sweep_sequential(field: Field, config: SolverConfig) -> Field:
    """Advance ``field`` one step in place, single threaded, and return it."""
    update_range(field.current, field.next, 0, field.nodes, config)
    field.swap()
    return field


def make_partition(nodes: int, threads: int) -> Partition:
    """Split ``[0, nodes)`` into ``threads`` contiguous segments, larger ones first."""
    if threads < 1:
        raise PartitionError(f"threads must be positive, got {threads}")
    if threads > nodes:
        raise PartitionError(f"cannot split {nodes} cells into {threads} non-empty segments")
    base, extra = divmod(nodes, threads)
    segments = []
    start = 0
    for i in range(threads):
        length = base + 1 if i < extra else base
        segments.append(Segment(start, length))
        start += length
    return Partition(tuple(segments))


def total_heat(field: Field) -> float:
    return float(np.sum(field.current))


def _solve_barrier(field: Field, config: SolverConfig) -> None:
    # Idle workers are pointless for a parallel-for; never spawn more than one per cell.
    workers = min(config.threads, field.nodes)
    partition = make_partition(field.nodes, workers)
    steps = config.steps
    barrier = threading.Barrier(workers)
    errors: list[BaseException] = []
    buffers = (field.current, field.next)

    def work(seg: Segment) -> None:
        cur, nxt = buffers
        tmp = np.empty(min(seg.length, BLOCK))
        try:
            for _ in range(steps):
                update_range(cur, nxt, seg.start, seg.stop, config, tmp)
                # Nobody may overwrite `cur` for the next step while a peer still reads it.
                barrier.wait()
                cur, nxt = nxt, cur
        except threading.BrokenBarrierError:
            pass
        except BaseException as exc:  # noqa: BLE001 - re-raised by the caller
            errors.append(exc)
            barrier.abort()

    threads = [threading.Thread(target=work, args=(seg,), daemon=True) for seg in partition]
    for t in threads:
        t.start()
    for t in threads:
        t.join()
    if errors:
        raise errors[0]
    if steps % 2:
        field.current, field.next = field.next, field.current
    field.step += steps


def advance(field: Field, config: SolverConfig, **queue_options) -> Field:
    """Run ``config.steps`` steps on an existing field with the configured strategy.

    ``queue_options`` are forwarded to :func:`heatbench.exchange.run_queues`.
    """
    config.check()
    if field.nodes != config.nodes:
        raise ConfigError(f"field has {field.nodes} cells, config expects {config.nodes}")
    if config.steps == 0:
        return field
    if config.strategy == "sequential":
        for _ in range(config.steps):
            sweep_sequential(field, config)
    elif config.strategy == "barrier":
        _solve_barrier(field, config)
    else:
        from .exchange import run_queues

        run_queues(field, config, **queue_options)
    return field


def solve(config: SolverConfig, **queue_options) -> Field:
    """Initialise the field and advance it ``config.steps`` steps."""
    config.check()
    return advance(init_field(config), config, **queue_options)
