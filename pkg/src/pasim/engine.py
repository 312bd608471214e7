"""Deterministic discrete-event core.

Integer-nanosecond clock, a heap-based event queue with stable FIFO order
among events sharing a timestamp, and named RNG substreams derived from a
single master seed so that adding one consumer never perturbs another's
draws.
"""

from __future__ import annotations

import hashlib
import heapq
import random
from typing import Callable

# Nanoseconds per microsecond / millisecond / second.
US = 1_000
MS = 1_000_000
S = 1_000_000_000


def derive_seed(master: int | str, stream: str) -> int:
    """Stable 64-bit seed for a named substream of a master seed."""
    material = f"{master}|{stream}".encode()
    return int.from_bytes(hashlib.sha256(material).digest()[:8], "big")


class RngStream:
    """A named, independently seeded random stream."""

    __slots__ = ("name", "_rng")

    def __init__(self, master: int | str, name: str):
        self.name = name
        self._rng = random.Random(derive_seed(master, name))

    def uniform_int(self, lo: int, hi: int) -> int:
        """Uniform integer in [lo, hi], inclusive on both ends."""
        if lo > hi:
            raise ValueError(f"uniform_int: empty range [{lo}, {hi}]")
        return self._rng.randint(lo, hi)


class Engine:
    """Event queue with an integer-ns clock.

    Events at equal timestamps dispatch in scheduling order; this is part of
    the simulator contract (e.g. a backoff slot that matured at time t is
    consumed before a busy notification scheduled at the same t).
    """

    def __init__(self, seed: int | str = 0, trace: Callable[[str], None] | None = None):
        self.now: int = 0
        self.seed = seed
        self._heap: list = []
        self._seq = 0
        self._cancelled: set[int] = set()
        self._streams: dict[str, RngStream] = {}
        self.trace = trace

    def stream(self, name: str) -> RngStream:
        st = self._streams.get(name)
        if st is None:
            st = self._streams[name] = RngStream(self.seed, name)
        return st

    def schedule(self, at: int, fn: Callable, *args,
                 kind: str = "ev", target: str = "-") -> int:
        """Schedule fn(*args) at absolute time `at`; returns a cancel handle."""
        if at < self.now:
            raise ValueError(f"schedule at {at} ns is in the past (now={self.now})")
        self._seq += 1
        heapq.heappush(self._heap, (at, self._seq, fn, args, kind, target))
        return self._seq

    def cancel(self, handle: int) -> None:
        self._cancelled.add(handle)

    def run_until(self, t_end: int) -> int:
        """Dispatch every event with fire time <= t_end; returns the count.

        The clock lands on t_end even when the queue empties early.
        """
        if t_end < self.now:
            raise ValueError(f"run_until({t_end}) is before now={self.now}")
        heap = self._heap
        pop = heapq.heappop
        cancelled = self._cancelled
        trace = self.trace
        n = 0
        while heap and heap[0][0] <= t_end:
            t, seq, fn, args, kind, target = pop(heap)
            if cancelled:
                if seq in cancelled:
                    cancelled.discard(seq)
                    continue
            self.now = t
            if trace is not None:
                trace(f"{t}\t{target}\t{kind}\t-")
            fn(*args)
            n += 1
        self.now = t_end
        return n

    def log(self, target: str, kind: str, detail: str = "-") -> None:
        """Emit a trace line outside the dispatch loop (no-op when untraced)."""
        if self.trace is not None:
            self.trace(f"{self.now}\t{target}\t{kind}\t{detail}")
