"""Deterministic discrete-event scheduler."""
from __future__ import annotations

import heapq
import itertools


class EventQueue:
    """Min-heap of ``(time, counter, callback, arg)``.

    Events at equal times run in insertion order, so a run is bit-reproducible.
    """

    def __init__(self):
        self._heap = []
        self._counter = itertools.count()
        self.now = 0.0
        self.processed = 0

    def __len__(self):
        return len(self._heap)

    def schedule(self, time, callback, arg=None):
        if time < self.now:
            raise ValueError(f"cannot schedule in the past ({time} < {self.now})")
        heapq.heappush(self._heap, (time, next(self._counter), callback, arg))

    def peek_time(self):
        return self._heap[0][0] if self._heap else None

    def run_until(self, horizon):
        """Process every event with time <= ``horizon``; the clock ends at ``horizon``."""
        heap = self._heap
        pop = heapq.heappop
        n = 0
        while heap and heap[0][0] <= horizon:
            t, _, callback, arg = pop(heap)
            self.now = t
            callback(arg)
            n += 1
        self.processed += n
        if horizon > self.now:
            self.now = horizon
