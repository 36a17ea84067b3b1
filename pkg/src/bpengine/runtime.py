"""The b-program runner: synchronize, select, advance.

External events enter through an :class:`EventQueue`. They are only looked
at when no internal event is selectable (super-step semantics); the first
queued event not blocked by any current statement is dispatched and blocked
ones stay queued in order.
"""
from __future__ import annotations

import threading
from collections import deque
from dataclasses import dataclass, field
from typing import Any, Iterable, NamedTuple, Optional, Sequence

from .core import DONE, START, BProgram, BThreadDef, Event, SyncStatement, Violation, advance_bthread
from .strategy import RandomSource, SimpleStrategy, SnapshotEntry, Strategy


class QueueClosedError(RuntimeError):
    pass


class ReplayError(RuntimeError):
    """A forced event was not selectable at its position in the trace."""


class EventQueue:
    """Thread-safe FIFO of external events (many producers, one consumer)."""

    def __init__(self, events: Iterable[Event] = ()):
        self._items = deque(events)
        self._cond = threading.Condition()
        self._closed = False
        self._version = 0

    def put(self, event: Event) -> None:
        if not isinstance(event, Event):
            raise TypeError(f"expected Event, got {event!r}")
        with self._cond:
            if self._closed:
                raise QueueClosedError("external event queue is closed")
            self._items.append(event)
            self._version += 1
            self._cond.notify_all()

    def close(self) -> None:
        with self._cond:
            self._closed = True
            self._version += 1
            self._cond.notify_all()

    @property
    def closed(self) -> bool:
        return self._closed

    def __len__(self):
        with self._cond:
            return len(self._items)

    def pending(self) -> list:
        with self._cond:
            return list(self._items)

    def remove(self, event: Event) -> bool:
        """Drop the first queued occurrence of ``event``; True if one was found."""
        with self._cond:
            try:
                self._items.remove(event)
            except ValueError:
                return False
            return True

    def push_front(self, event: Event) -> None:
        with self._cond:
            self._items.appendleft(event)

    def take_first(self, accept) -> Optional[Event]:
        with self._cond:
            for i, ev in enumerate(self._items):
                if accept(ev):
                    del self._items[i]
                    return ev
            return None

    def version(self) -> int:
        with self._cond:
            return self._version

    def wait_for_change(self, version: int, timeout: Optional[float] = None) -> None:
        with self._cond:
            self._cond.wait_for(lambda: self._version != version, timeout)


def enqueue_external(queue: EventQueue, event: Event) -> None:
    queue.put(event)


class RunnerListener:
    """No-op base; override the callbacks you care about."""

    def started(self, program_name: str): pass

    def event_selected(self, event: Event, index: int): pass

    def bthread_done(self, name: str): pass

    def assertion_failed(self, name: str, message: str): pass

    def deadlock(self): pass

    def parked(self):
        """Daemon mode only: the runner is idle, waiting for external events."""

    def ended(self, reason: "Termination"): pass


# ---------------------------------------------------------------------------
# Termination causes

class Termination:
    kind = "?"

    def __eq__(self, other):
        return type(self) is type(other) and vars(self) == vars(other)

    def __hash__(self):
        return hash((type(self), tuple(sorted(vars(self).items()))))

    def __repr__(self):
        return f"{type(self).__name__}()"


class Completed(Termination):
    kind = "completed"


class Deadlock(Termination):
    kind = "deadlock"


class EventLimit(Termination):
    kind = "event-limit"


class AssertionFailed(Termination):
    kind = "assertion-failed"

    def __init__(self, bthread: str, message: str):
        self.bthread = bthread
        self.message = message

    def __repr__(self):
        return f"AssertionFailed({self.bthread!r}, {self.message!r})"


@dataclass
class RunnerConfig:
    strategy: Strategy = field(default_factory=SimpleStrategy)
    seed: int = 0
    max_events: Optional[int] = None
    daemon: bool = False

    def __post_init__(self):
        if self.max_events is not None and self.max_events <= 0:
            raise ValueError("max_events must be positive")


@dataclass
class RunResult:
    trace: list
    termination: Termination


# ---------------------------------------------------------------------------
# Step semantics shared by the runner and the verifier

class Live(NamedTuple):
    bthread: BThreadDef
    state: Any
    statement: SyncStatement


class Advance(NamedTuple):
    live: list                       # surviving b-threads, registration order
    violation: Optional[tuple]       # (b-thread name, message) of the first failure
    finished: list                   # names of b-threads that returned DONE


def _settle(bthread, state, result, live, finished):
    if result is DONE:
        finished.append(bthread.name)
        return None
    if isinstance(result, Violation):
        return (bthread.name, result.message)
    live.append(Live(bthread, state, result))
    return None


def start(program: BProgram) -> Advance:
    """Activate every b-thread with START up to its first synchronization point."""
    live, finished, violation = [], [], None
    for bt in program.bthreads:
        state, result = advance_bthread(bt, bt.initial_state, START)
        v = _settle(bt, state, result, live, finished)
        if v is not None and violation is None:
            violation = v
    return Advance(live, violation, finished)


def dispatch(selected: Event, live: Sequence[Live]) -> Advance:
    """Resume exactly the b-threads that requested or wait for ``selected``."""
    out, finished, violation = [], [], None
    for slot in live:
        if not slot.statement.affected_by(selected):
            out.append(slot)
            continue
        state, result = advance_bthread(slot.bthread, slot.state, selected)
        v = _settle(slot.bthread, state, result, out, finished)
        if v is not None and violation is None:
            violation = v
    return Advance(out, violation, finished)


def snapshot_of(live: Sequence[Live]) -> list:
    return [SnapshotEntry(s.bthread.name, s.bthread.priority, s.statement) for s in live]


def blocked_by(live: Sequence[Live], event: Event) -> bool:
    return any(s.statement.block.contains(event) for s in live)


def has_requests(live: Sequence[Live]) -> bool:
    return any(s.statement.request for s in live)


# ---------------------------------------------------------------------------

class BProgramRunner:
    """Executes one b-program; listeners are called synchronously in loop order."""

    def __init__(self, program: BProgram, config: Optional[RunnerConfig] = None,
                 queue: Optional[EventQueue] = None, listeners: Iterable[RunnerListener] = ()):
        self.program = program
        self.config = config or RunnerConfig()
        self.queue = queue if queue is not None else EventQueue()
        self.listeners = list(listeners)
        self.trace: list = []
        self.live: list = []

    def _notify(self, name, *args):
        for listener in self.listeners:
            getattr(listener, name)(*args)

    def _finish(self, termination):
        if isinstance(termination, AssertionFailed):
            self._notify("assertion_failed", termination.bthread, termination.message)
        elif isinstance(termination, Deadlock):
            self._notify("deadlock")
        self._notify("ended", termination)
        return RunResult(list(self.trace), termination)

    def _apply(self, adv: Advance):
        self.live = adv.live
        for name in adv.finished:
            self._notify("bthread_done", name)
        if adv.violation is not None:
            return AssertionFailed(*adv.violation)
        return None

    def run(self) -> RunResult:
        cfg = self.config
        rng = RandomSource(cfg.seed)
        self._notify("started", self.program.name)
        failed = self._apply(start(self.program))
        if failed:
            return self._finish(failed)

        while True:
            if not self.live:
                return self._finish(Completed())
            snapshot = snapshot_of(self.live)
            selectable = cfg.strategy.selectable(snapshot)
            at_limit = cfg.max_events is not None and len(self.trace) >= cfg.max_events
            if selectable:
                if at_limit:
                    return self._finish(EventLimit())
                event = cfg.strategy.choose(snapshot, selectable, rng)
            else:
                version = self.queue.version()
                event = self.queue.take_first(lambda e: not blocked_by(self.live, e))
                if event is None:
                    if cfg.daemon:
                        if self.queue.closed:
                            return self._finish(Completed())
                        self._notify("parked")
                        self.queue.wait_for_change(version)
                        continue
                    if has_requests(self.live):
                        return self._finish(Deadlock())
                    return self._finish(Completed())
                if at_limit:
                    self.queue.push_front(event)
                    return self._finish(EventLimit())
            self.trace.append(event)
            self._notify("event_selected", event, len(self.trace) - 1)
            failed = self._apply(dispatch(event, self.live))
            if failed:
                return self._finish(failed)


def run(program: BProgram, config: Optional[RunnerConfig] = None,
        queue: Optional[EventQueue] = None, listeners: Iterable[RunnerListener] = ()) -> RunResult:
    return BProgramRunner(program, config, queue, listeners).run()


class _Forced(SimpleStrategy):
    """Selects the scripted events in order, refusing any that are not selectable."""

    def __init__(self, base: Strategy, events: Sequence[Event]):
        self.base = base
        self.events = list(events)
        self.pos = 0

    def selectable(self, snapshot):
        return self.base.selectable(snapshot)

    def choose(self, snapshot, selectable, rng):
        event = self.events[self.pos]
        if event not in selectable:
            raise ReplayError(f"event #{self.pos} {event!r} is not selectable "
                              f"(selectable: {selectable!r})")
        self.pos += 1
        return event


def replay(program: BProgram, trace: Sequence[Event],
           strategy: Optional[Strategy] = None) -> RunResult:
    """Run ``program`` forcing the choices in ``trace``.

    After the trace is used up the result is Deadlock / AssertionFailed /
    Completed if the final state shows one, otherwise EventLimit.
    """
    strategy = _Forced(strategy or SimpleStrategy(), trace)
    if not trace:
        adv = start(program)
        if adv.violation:
            return RunResult([], AssertionFailed(*adv.violation))
        if not adv.live:
            return RunResult([], Completed())
        if strategy.selectable(snapshot_of(adv.live)):
            return RunResult([], EventLimit())
        return RunResult([], Deadlock() if has_requests(adv.live) else Completed())
    return run(program, RunnerConfig(strategy=strategy, max_events=len(trace)))
