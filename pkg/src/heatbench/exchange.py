"""Bounded SPSC channels and the per-step ghost-cell protocol for the queues strategy.

Each segment owns a contiguous slice of the shared field buffers and talks to
its two ring neighbours only through channels. Per time step a segment:

1. sends its left boundary value leftward and its right boundary value rightward,
2. updates its interior cells (no ghosts needed),
3. receives the right ghost and updates its right boundary cell,
4. receives the left ghost and updates its left boundary cell.

Because both sends precede any receive, a producer can run at most one step
ahead of its consumer, so at most two messages are ever buffered per channel
and any capacity >= 2 is deadlock free.
"""

from __future__ import annotations

import threading
from collections import deque
from dataclasses import dataclass
from typing import Callable, NamedTuple

import numpy as np

from .core import BLOCK, ConfigError, Field, Segment, SolverConfig, make_partition, stencil_update, update_block

DEFAULT_CAPACITY = 4
MIN_CAPACITY = 2


class Disconnected(Exception):
    """The other end of a channel has been closed."""


class ProtocolError(RuntimeError):
    """Ghost exchange contract violated (step tag mismatch or shared endpoint)."""


class GhostMessage(NamedTuple):
    value: float
    step_tag: int | None = None


class _Channel:
    __slots__ = (
        "capacity", "buffer", "lock", "not_empty", "not_full",
        "producer_open", "consumer_open", "sent", "received", "validate", "name",
    )

    def __init__(self, capacity: int, validate: bool, name: str):
        self.capacity = capacity
        self.buffer: deque = deque()
        self.lock = threading.Lock()
        self.not_empty = threading.Condition(self.lock)
        self.not_full = threading.Condition(self.lock)
        self.producer_open = True
        self.consumer_open = True
        self.sent = 0
        self.received = 0
        self.validate = validate
        self.name = name


class _Endpoint:
    __slots__ = ("_chan", "_owner")

    def __init__(self, chan: _Channel):
        self._chan = chan
        self._owner: int | None = None

    def _claim(self) -> None:
        # Ownership goes to the first thread that uses the endpoint.
        me = threading.get_ident()
        if self._owner is None:
            self._owner = me
        elif self._owner != me:
            raise ProtocolError(f"channel {self._chan.name}: {type(self).__name__} used from two threads")

    def __len__(self) -> int:
        with self._chan.lock:
            return len(self._chan.buffer)

    @property
    def capacity(self) -> int:
        return self._chan.capacity

    @property
    def name(self) -> str:
        return self._chan.name

    def __enter__(self):
        return self

    def __exit__(self, *exc):
        self.close()


class Sender(_Endpoint):
    """Producer end of a channel."""

    __slots__ = ()

    def send(self, msg: GhostMessage) -> None:
        """Append ``msg``, blocking while the channel is full."""
        chan = self._chan
        if chan.validate:
            self._claim()
        with chan.not_full:
            while chan.consumer_open and len(chan.buffer) >= chan.capacity:
                chan.not_full.wait()
            if not chan.consumer_open:
                raise Disconnected(f"channel {chan.name}: consumer closed")
            chan.buffer.append(msg)
            chan.sent += 1
            chan.not_empty.notify()

    def close(self) -> None:
        chan = self._chan
        with chan.lock:
            chan.producer_open = False
            chan.not_empty.notify_all()

    @property
    def sent(self) -> int:
        return self._chan.sent


class Receiver(_Endpoint):
    """Consumer end of a channel."""

    __slots__ = ()

    def recv(self) -> GhostMessage:
        """Pop the oldest message, blocking while the channel is empty."""
        chan = self._chan
        if chan.validate:
            self._claim()
        with chan.not_empty:
            while not chan.buffer:
                if not chan.producer_open:
                    raise Disconnected(f"channel {chan.name}: producer closed")
                chan.not_empty.wait()
            msg = chan.buffer.popleft()
            chan.received += 1
            chan.not_full.notify()
            return msg

    def close(self) -> None:
        chan = self._chan
        with chan.lock:
            chan.consumer_open = False
            chan.not_full.notify_all()

    @property
    def received(self) -> int:
        return self._chan.received


def channel_create(capacity: int = DEFAULT_CAPACITY, *, validate: bool = False, name: str = "") -> tuple[Sender, Receiver]:
    """Create an empty bounded channel and return its ``(producer, consumer)`` endpoints."""
    if capacity < MIN_CAPACITY:
        raise ValueError(f"channel capacity must be >= {MIN_CAPACITY}, got {capacity}")
    chan = _Channel(capacity, validate, name)
    return Sender(chan), Receiver(chan)


@dataclass
class SegmentLinks:
    send_left: Sender
    send_right: Sender
    recv_left: Receiver
    recv_right: Receiver

    def close(self) -> None:
        for end in (self.send_left, self.send_right, self.recv_left, self.recv_right):
            end.close()


def build_links(
    threads: int, capacity: int = DEFAULT_CAPACITY, *, validate: bool = False
) -> tuple[list[SegmentLinks], list[Sender]]:
    """Wire ``2 * threads`` channels into a ring.

    Returns the per-segment links and the producer end of every channel (for
    inspecting message counts after a run).
    """
    rightward = [channel_create(capacity, validate=validate, name=f"{i}->{(i + 1) % threads} rightward") for i in range(threads)]
    leftward = [channel_create(capacity, validate=validate, name=f"{i}->{(i - 1) % threads} leftward") for i in range(threads)]
    links = []
    for i in range(threads):
        links.append(
            SegmentLinks(
                send_left=leftward[i][0],
                send_right=rightward[i][0],
                # my left ghost is my left neighbour's right boundary
                recv_left=rightward[(i - 1) % threads][1],
                recv_right=leftward[(i + 1) % threads][1],
            )
        )
    producers = [s for s, _ in rightward] + [s for s, _ in leftward]
    return links, producers


def _checked(msg: GhostMessage, step: int, validate: bool, where: str) -> float:
    if validate and msg.step_tag != step:
        raise ProtocolError(f"{where}: expected ghost for step {step}, got step_tag {msg.step_tag}")
    return msg.value


def run_segment(
    segment: Segment,
    links: SegmentLinks,
    config: SolverConfig,
    buffers: tuple[np.ndarray, np.ndarray],
    step_hook: Callable[[int], None] | None = None,
) -> None:
    """Advance one segment ``config.steps`` steps, exchanging ghosts through ``links``.

    ``buffers`` are the shared ``(current, next)`` arrays at the starting step;
    only ``[start, start + length)`` of them is ever touched. ``step_hook`` is
    called with the step index at the top of every step (used to inject delays).
    """
    cur, nxt = buffers
    s, e = segment.start, segment.stop
    n = segment.length
    validate = config.validate
    tmp = np.empty(max(1, min(n, BLOCK)))
    send_left, send_right = links.send_left.send, links.send_right.send
    recv_left, recv_right = links.recv_left.recv, links.recv_right.recv

    for step in range(config.steps):
        if step_hook is not None:
            step_hook(step)
        tag = step if validate else None
        send_left(GhostMessage(float(cur[s]), tag))
        send_right(GhostMessage(float(cur[e - 1]), tag))
        if n >= 3:
            update_block(cur[s : e - 2], cur[s + 1 : e - 1], cur[s + 2 : e], nxt[s + 1 : e - 1], config, tmp)
        right = _checked(recv_right(), step, validate, f"segment [{s}, {e}) right ghost")
        if n == 1:
            left = _checked(recv_left(), step, validate, f"segment [{s}, {e}) left ghost")
            nxt[s] = stencil_update(left, cur[s], right, config)
        else:
            nxt[e - 1] = stencil_update(cur[e - 2], cur[e - 1], right, config)
            left = _checked(recv_left(), step, validate, f"segment [{s}, {e}) left ghost")
            nxt[s] = stencil_update(left, cur[s], cur[s + 1], config)
        cur, nxt = nxt, cur


@dataclass
class QueueRunStats:
    """Per-channel traffic of one queues-strategy run."""

    messages: dict[str, int]

    @property
    def total(self) -> int:
        return sum(self.messages.values())


def run_queues(
    field: Field,
    config: SolverConfig,
    *,
    capacity: int = DEFAULT_CAPACITY,
    step_hook: Callable[[int, int], None] | None = None,
) -> QueueRunStats:
    """Advance ``field`` in place with one worker thread per segment.

    ``step_hook(segment_index, step)`` runs at the top of every step of every
    segment; it must be thread safe.
    """
    config.check()
    if field.nodes != config.nodes:
        raise ConfigError(f"field has {field.nodes} cells, config expects {config.nodes}")
    partition = make_partition(field.nodes, config.threads)
    links, producers = build_links(config.threads, capacity, validate=config.validate)
    buffers = (field.current, field.next)
    errors: list[tuple[int, BaseException]] = []

    def work(i: int, seg: Segment) -> None:
        hook = None if step_hook is None else (lambda step: step_hook(i, step))
        try:
            run_segment(seg, links[i], config, buffers, hook)
        except BaseException as exc:  # noqa: BLE001 - re-raised by the caller
            errors.append((i, exc))
        finally:
            # Wakes any neighbour blocked on us so a failure cannot hang the ring.
            links[i].close()

    workers = [
        threading.Thread(target=work, args=(i, seg), name=f"segment-{i}", daemon=True)
        for i, seg in enumerate(partition)
    ]
    for w in workers:
        w.start()
    for w in workers:
        w.join()

    if errors:
        # Disconnected errors are fallout; report the root cause when there is one.
        root = [exc for _, exc in errors if not isinstance(exc, Disconnected)]
        raise (root or [errors[0][1]])[0]

    if config.steps % 2:
        field.current, field.next = field.next, field.current
    field.step += config.steps
    return QueueRunStats({p.name: p.sent for p in producers})
