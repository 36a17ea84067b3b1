"""Event selection strategies.

A strategy has two halves: ``selectable`` computes the events that may be
selected at a synchronization point (the verifier only uses this half), and
``choose`` picks one of them using a seeded random source.
"""
from __future__ import annotations

import random
from typing import NamedTuple, Optional, Sequence

from .core import NONE, ConfigurationError, Event, SyncStatement


class SnapshotEntry(NamedTuple):
    bthread: str
    priority: int
    statement: SyncStatement


# Entries in b-program registration order.
SyncSnapshot = Sequence[SnapshotEntry]


class RandomSource(random.Random):
    """Seeded generator; the same seed yields the same choices everywhere."""

    def __init__(self, seed: int = 0):
        super().__init__(seed)
        self.seed_value = seed


def _blockers(snapshot):
    return [e.statement.block for e in snapshot if e.statement.block is not NONE]


def is_blocked(event: Event, snapshot: SyncSnapshot) -> bool:
    return any(b.contains(event) for b in _blockers(snapshot))


class _BlockCheck:
    """Memoized 'is this event blocked by anyone' test for one snapshot."""

    __slots__ = ("blocks", "cache")

    def __init__(self, snapshot):
        self.blocks = _blockers(snapshot)
        self.cache = {}

    def __call__(self, event):
        hit = self.cache.get(event)
        if hit is None:
            hit = self.cache[event] = any(b.contains(event) for b in self.blocks)
        return hit


class Strategy:
    """Base class. Subclasses override :meth:`selectable`."""

    name = "abstract"

    def selectable(self, snapshot: SyncSnapshot) -> list:
        raise NotImplementedError

    def choose(self, snapshot: SyncSnapshot, selectable: Sequence[Event],
               rng: random.Random) -> Optional[Event]:
        return simple_choose(snapshot, selectable, rng)

    def __repr__(self):
        return f"{type(self).__name__}()"


def simple_selectable(snapshot: SyncSnapshot) -> list:
    """All requested, non-blocked events; deduplicated in statement/request order."""
    blocked = _BlockCheck(snapshot)
    out, seen = [], set()
    for entry in snapshot:
        for ev in entry.statement.request:
            if ev not in seen:
                seen.add(ev)
                if not blocked(ev):
                    out.append(ev)
    return out


def simple_choose(snapshot, selectable, rng):
    """Uniform pick from ``selectable``; None when it is empty."""
    if not selectable:
        return None
    return selectable[rng.randrange(len(selectable))]


class SimpleStrategy(Strategy):
    name = "simple"

    def selectable(self, snapshot):
        return simple_selectable(snapshot)


class PrioritizedBThreadsStrategy(Strategy):
    """Only b-threads of the highest priority that still have a selectable request count."""

    name = "priority-bthread"

    def selectable(self, snapshot):
        return prioritized_bthreads_selectable(snapshot)


def prioritized_bthreads_selectable(snapshot):
    blocked = _BlockCheck(snapshot)
    best = None
    per_thread = []
    for entry in snapshot:
        free = [ev for ev in entry.statement.request if not blocked(ev)]
        if free:
            per_thread.append((entry.priority, free))
            if best is None or entry.priority > best:
                best = entry.priority
    out, seen = [], set()
    for prio, free in per_thread:
        if prio == best:
            for ev in free:
                if ev not in seen:
                    seen.add(ev)
                    out.append(ev)
    return out


def _hint_priority(entry: SnapshotEntry) -> int:
    hint = entry.statement.hint
    if hint is None:
        return 0
    if isinstance(hint, bool) or not isinstance(hint, int):
        raise ConfigurationError(
            f"b-thread {entry.bthread!r}: priority hint must be an integer, got {hint!r}")
    return hint


class PrioritizedSyncStrategy(Strategy):
    """Statement-level priorities taken from the statement hint (default 0)."""

    name = "priority-sync"

    def selectable(self, snapshot):
        return prioritized_sync_selectable(snapshot)


def prioritized_sync_selectable(snapshot):
    blocked = _BlockCheck(snapshot)
    prio = {}
    order = []
    for entry in snapshot:
        if not entry.statement.request:
            continue
        p = _hint_priority(entry)
        for ev in entry.statement.request:
            if blocked(ev):
                continue
            if ev not in prio:
                order.append(ev)
                prio[ev] = p
            elif p > prio[ev]:
                prio[ev] = p
    if not order:
        return []
    top = max(prio.values())
    return [ev for ev in order if prio[ev] == top]


class OrderedEventsStrategy(Strategy):
    """Each b-thread offers only the first non-blocked event of its request list."""

    name = "ordered"

    def selectable(self, snapshot):
        return ordered_events_selectable(snapshot)


def ordered_events_selectable(snapshot):
    blocked = _BlockCheck(snapshot)
    out, seen = [], set()
    for entry in snapshot:
        for ev in entry.statement.request:
            if not blocked(ev):
                if ev not in seen:
                    seen.add(ev)
                    out.append(ev)
                break
    return out


STRATEGIES = {
    "simple": SimpleStrategy,
    "priority-bthread": PrioritizedBThreadsStrategy,
    "priority-sync": PrioritizedSyncStrategy,
    "ordered": OrderedEventsStrategy,
}


def get_strategy(name: str) -> Strategy:
    try:
        return STRATEGIES[name]()
    except KeyError:
        raise ConfigurationError(
            f"unknown strategy {name!r} (choose from {', '.join(STRATEGIES)})") from None
