"""Events, event sets, synchronization statements and b-program assembly.

A b-thread is a pure step function over an explicit state value::

    step(state, resume) -> (next_state, result)

where ``resume`` is :data:`START` on the first activation and the selected
:class:`Event` afterwards, and ``result`` is a :class:`SyncStatement`,
:data:`DONE` or a :class:`Violation`. Because states are plain immutable
values, the verifier can clone, hash and compare them freely.
"""
from __future__ import annotations

import hashlib
import math
from collections.abc import Mapping
from dataclasses import dataclass, field
from typing import Any, Callable, Iterable, Optional, Sequence

INT64_MIN = -(2**63)
INT64_MAX = 2**63 - 1


class EngineError(RuntimeError):
    """A b-thread step function raised or returned garbage."""

    def __init__(self, bthread: str, message: str):
        super().__init__(f"b-thread {bthread!r}: {message}")
        self.bthread = bthread


class ConfigurationError(ValueError):
    pass


# ---------------------------------------------------------------------------
# Structured values

class FrozenMap(Mapping):
    """Immutable string-keyed mapping with key-order independent equality."""

    __slots__ = ("_items", "_dict", "_hash")

    def __init__(self, items=()):
        d = dict(items)
        for k in d:
            if not isinstance(k, str):
                raise TypeError(f"map keys must be strings, got {k!r}")
        self._items = tuple(sorted(d.items()))
        self._dict = d
        self._hash = None

    def __getitem__(self, key):
        return self._dict[key]

    def __iter__(self):
        return (k for k, _ in self._items)

    def __len__(self):
        return len(self._items)

    def __eq__(self, other):
        if isinstance(other, FrozenMap):
            return _tagged(self) == _tagged(other)
        if isinstance(other, Mapping):
            # plain dicts compare by frozen value, so {"col": 0} == event.data works
            try:
                return _tagged(self) == _tagged(freeze(other))
            except (TypeError, ValueError):
                return False
        return NotImplemented

    def __hash__(self):
        if self._hash is None:
            self._hash = hash(_tagged(self))
        return self._hash

    def __repr__(self):
        return f"FrozenMap({dict(self._items)!r})"


def freeze(value: Any) -> Any:
    """Convert a JSON-like value into its immutable structured form.

    Lists become tuples and dicts become :class:`FrozenMap`. Rejects NaN,
    infinities, integers outside the signed 64-bit range and any other type.
    """
    if value is None or isinstance(value, (bool, str)):
        return value
    if isinstance(value, int):
        if not INT64_MIN <= value <= INT64_MAX:
            raise ValueError(f"integer out of 64-bit range: {value}")
        return value
    if isinstance(value, float):
        if not math.isfinite(value):
            raise ValueError(f"non-finite float not allowed: {value}")
        return value
    if isinstance(value, (list, tuple)):
        return tuple(freeze(v) for v in value)
    if isinstance(value, Mapping):
        return FrozenMap((k, freeze(v)) for k, v in value.items())
    raise TypeError(f"unsupported structured value: {value!r}")


def thaw(value: Any) -> Any:
    """Inverse of :func:`freeze`, producing JSON-serializable data."""
    if isinstance(value, tuple):
        return [thaw(v) for v in value]
    if isinstance(value, FrozenMap):
        return {k: thaw(v) for k, v in value.items()}
    return value


def _tagged(value: Any):
    # bool/int/float carry distinct tags so True != 1 != 1.0
    if value is None:
        return ("n",)
    if isinstance(value, bool):
        return ("b", value)
    if isinstance(value, int):
        return ("i", value)
    if isinstance(value, float):
        return ("f", value + 0.0)  # folds -0.0 into 0.0
    if isinstance(value, str):
        return ("s", value)
    if isinstance(value, tuple):
        return ("l",) + tuple(_tagged(v) for v in value)
    if isinstance(value, FrozenMap):
        return ("m",) + tuple((k, _tagged(v)) for k, v in value._items)
    raise TypeError(f"unsupported structured value: {value!r}")


# ---------------------------------------------------------------------------
# Events

class Event(tuple):
    """A named event with optional structured data.

    ``data=None`` means "no data"; two events are equal iff their names and
    deeply-compared data agree. Events are tuples underneath so hashing and
    comparison stay in C; they are hashed constantly during verification.
    """

    def __new__(cls, name: str, data: Any = None):
        if not isinstance(name, str) or not name:
            raise ValueError("event name must be a non-empty string")
        frozen = freeze(data)
        self = tuple.__new__(cls, (name, _tagged(frozen)))
        self.__dict__["data"] = frozen
        return self

    def __getnewargs__(self):
        return (self[0], thaw(self.data))

    def __setattr__(self, key, value):
        raise AttributeError("Event is immutable")

    @property
    def name(self) -> str:
        return self[0]

    def __repr__(self):
        if self.data is None:
            return f"Event({self[0]!r})"
        return f"Event({self[0]!r}, {thaw(self.data)!r})"

    def __str__(self):
        return self[0]

    def to_json(self) -> dict:
        d = {"name": self[0]}
        if self.data is not None:
            d["data"] = thaw(self.data)
        return d

    @classmethod
    def from_json(cls, obj: Mapping) -> "Event":
        return cls(obj["name"], obj.get("data"))


class _Start:
    """Resume token passed to a b-thread's first activation."""

    _instance = None

    def __new__(cls):
        if cls._instance is None:
            cls._instance = super().__new__(cls)
        return cls._instance

    def __repr__(self):
        return "START"

    def __reduce__(self):
        return (_Start, ())


START = _Start()


# ---------------------------------------------------------------------------
# Event sets

def _memo_hash(cls):
    """Cache the dataclass-generated hash; these values are hashed a lot during search."""
    raw = cls.__hash__

    def __hash__(self):
        try:
            return self.__dict__["_h"]
        except KeyError:
            h = raw(self)
            object.__setattr__(self, "_h", h)
            return h

    cls.__hash__ = __hash__
    return cls


class EventSet:
    """Predicate over events. Subclasses implement :meth:`contains`."""

    __slots__ = ()

    def contains(self, event: Event) -> bool:
        raise NotImplementedError

    def __contains__(self, event):
        return self.contains(event)


@_memo_hash
@dataclass(frozen=True)
class NoEvents(EventSet):
    def contains(self, event):
        return False

    def __repr__(self):
        return "NONE"


@_memo_hash
@dataclass(frozen=True)
class AllEvents(EventSet):
    def contains(self, event):
        return True

    def __repr__(self):
        return "ALL"


NONE = NoEvents()
ALL = AllEvents()


@_memo_hash
@dataclass(frozen=True)
class Exact(EventSet):
    event: Event

    def contains(self, event):
        return event == self.event


@_memo_hash
@dataclass(frozen=True)
class NameIs(EventSet):
    name: str

    def contains(self, event):
        return event.name == self.name


@_memo_hash
@dataclass(frozen=True)
class NamePrefix(EventSet):
    prefix: str

    def contains(self, event):
        return event.name.startswith(self.prefix)


@_memo_hash
@dataclass(frozen=True)
class AnyOf(EventSet):
    sets: tuple
    # members that are plain Exact events, checked via one hash lookup
    _exact: frozenset = field(init=False, repr=False, compare=False)
    _rest: tuple = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        sets = tuple(as_eventset(s) for s in self.sets)
        object.__setattr__(self, "sets", sets)
        object.__setattr__(self, "_exact", frozenset(s.event for s in sets if type(s) is Exact))
        object.__setattr__(self, "_rest", tuple(s for s in sets if type(s) is not Exact))

    def contains(self, event):
        if event in self._exact:
            return True
        return any(s.contains(event) for s in self._rest)


@_memo_hash
@dataclass(frozen=True)
class AllOf(EventSet):
    sets: tuple

    def __post_init__(self):
        object.__setattr__(self, "sets", tuple(as_eventset(s) for s in self.sets))

    def contains(self, event):
        return all(s.contains(event) for s in self.sets)


@_memo_hash
@dataclass(frozen=True)
class Not(EventSet):
    set: EventSet

    def contains(self, event):
        return not self.set.contains(event)


@_memo_hash
@dataclass(frozen=True)
class AllExcept(EventSet):
    events: frozenset

    def __post_init__(self):
        object.__setattr__(self, "events", frozenset(self.events))

    def contains(self, event):
        return event not in self.events


def events_of(events: Iterable[Event]) -> AnyOf:
    """Event set holding exactly the given events."""
    return AnyOf(tuple(Exact(e) for e in events))


def as_eventset(value) -> EventSet:
    """Coerce ``None``, a single event or a collection of events to an EventSet."""
    if value is None:
        return NONE
    if isinstance(value, EventSet):
        return value
    if isinstance(value, Event):
        return Exact(value)
    if isinstance(value, (list, tuple, set, frozenset)):
        items = list(value)
        if isinstance(value, (set, frozenset)):
            items.sort(key=repr)
        return AnyOf(tuple(items))
    raise TypeError(f"cannot use {value!r} as an event set")


def eventset_contains(eventset: EventSet, event: Event) -> bool:
    return as_eventset(eventset).contains(event)


# ---------------------------------------------------------------------------
# Synchronization statements and step results

@_memo_hash
@dataclass(frozen=True)
class SyncStatement:
    request: tuple = ()
    wait_for: EventSet = NONE
    block: EventSet = NONE
    hot: bool = False
    hint: Any = None

    def __post_init__(self):
        req = self.request
        if req is None:
            req = ()
        elif isinstance(req, Event):
            req = (req,)
        req = tuple(req)
        for e in req:
            if not isinstance(e, Event):
                raise TypeError(f"request must contain events, got {e!r}")
        object.__setattr__(self, "request", req)
        object.__setattr__(self, "_requested", frozenset(req))
        object.__setattr__(self, "_affected", {})
        object.__setattr__(self, "wait_for", as_eventset(self.wait_for))
        object.__setattr__(self, "block", as_eventset(self.block))
        object.__setattr__(self, "hot", bool(self.hot))
        object.__setattr__(self, "hint", freeze(self.hint))

    def affected_by(self, event: Event) -> bool:
        """True if the owning b-thread resumes when ``event`` is selected."""
        cache = self.__dict__["_affected"]
        hit = cache.get(event)
        if hit is None:
            hit = cache[event] = event in self._requested or self.wait_for.contains(event)
        return hit


def sync(request=(), wait_for=None, block=None, hot=False, hint=None) -> SyncStatement:
    return SyncStatement(request, wait_for, block, hot, hint)


class _Done:
    _instance = None

    def __new__(cls):
        if cls._instance is None:
            cls._instance = super().__new__(cls)
        return cls._instance

    def __repr__(self):
        return "DONE"

    def __reduce__(self):
        return (_Done, ())


DONE = _Done()


@dataclass(frozen=True)
class Violation:
    message: str = ""


StepFn = Callable[[Any, Any], tuple]


@dataclass(frozen=True)
class BThreadDef:
    name: str
    step: StepFn = field(compare=False)
    initial_state: Any = None
    priority: int = 0


@dataclass(frozen=True)
class BProgram:
    name: str
    bthreads: tuple = ()

    def __post_init__(self):
        bts = tuple(self.bthreads)
        seen = set()
        for bt in bts:
            if bt.name in seen:
                raise ConfigurationError(f"duplicate b-thread name {bt.name!r} in {self.name!r}")
            seen.add(bt.name)
        object.__setattr__(self, "bthreads", bts)

    def with_bthreads(self, *extra: BThreadDef, name: Optional[str] = None) -> "BProgram":
        return BProgram(name or self.name, self.bthreads + tuple(extra))

    def __getitem__(self, name: str) -> BThreadDef:
        for bt in self.bthreads:
            if bt.name == name:
                return bt
        raise KeyError(name)


def advance_bthread(bthread: BThreadDef, state: Any, resume: Any):
    """Run one step of ``bthread``; returns ``(next_state, result)``."""
    try:
        out = bthread.step(state, resume)
    except Exception as exc:
        raise EngineError(bthread.name, f"step raised {type(exc).__name__}: {exc}") from exc
    try:
        next_state, result = out
    except (TypeError, ValueError):
        raise EngineError(bthread.name, f"step must return (state, result), got {out!r}") from None
    if not (isinstance(result, (SyncStatement, Violation)) or result is DONE):
        raise EngineError(bthread.name, f"invalid step result {result!r}")
    return next_state, result


# ---------------------------------------------------------------------------
# Convenience b-thread builders

def scripted(name: str, steps: Sequence, loop: bool = False, priority: int = 0) -> BThreadDef:
    """B-thread that walks a fixed list of statements (or Violations).

    The state is just the index of the pending step, so the thread ignores
    which event resumed it. With ``loop`` the list repeats forever.
    """
    steps = tuple(steps)
    n = len(steps)

    def step(pc, resume):
        pc = 0 if resume is START else pc + 1
        if pc >= n:
            if not loop or n == 0:
                return pc, DONE
            pc = 0
        return pc, steps[pc]

    return BThreadDef(name, step, 0, priority)


def assert_that(condition: bool, message: str = "") -> Optional[Violation]:
    """Return a Violation when ``condition`` is false, else None."""
    return None if condition else Violation(message)


# ---------------------------------------------------------------------------
# Canonical hashing

def canonical_form(value: Any):
    """Deterministic nested-tuple form used for stable hashing."""
    if value is None or isinstance(value, (bool, int, float, str)):
        return _tagged(value)
    if isinstance(value, Event):
        return ("E", value.name, _tagged(value.data))
    if isinstance(value, (tuple, list)):
        return ("l",) + tuple(canonical_form(v) for v in value)
    if isinstance(value, (FrozenMap, dict)):
        return ("m",) + tuple(sorted((str(k), canonical_form(v)) for k, v in value.items()))
    if isinstance(value, (frozenset, set)):
        return ("S",) + tuple(sorted((canonical_form(v) for v in value), key=repr))
    if value is START or value is DONE:
        return (repr(value),)
    if isinstance(value, SyncStatement):
        return ("sync", canonical_form(value.request), canonical_form(value.wait_for),
                canonical_form(value.block), value.hot, _tagged(value.hint))
    if isinstance(value, Violation):
        return ("violation", value.message)
    if isinstance(value, AnyOf):
        return ("AnyOf",) + tuple(canonical_form(s) for s in value.sets)
    if isinstance(value, AllOf):
        return ("AllOf",) + tuple(canonical_form(s) for s in value.sets)
    if isinstance(value, Not):
        return ("Not", canonical_form(value.set))
    if isinstance(value, AllExcept):
        return ("AllExcept", canonical_form(value.events))
    if isinstance(value, Exact):
        return ("Exact", canonical_form(value.event))
    if isinstance(value, NameIs):
        return ("NameIs", value.name)
    if isinstance(value, NamePrefix):
        return ("NamePrefix", value.prefix)
    if isinstance(value, (NoEvents, AllEvents)):
        return (repr(value),)
    custom = getattr(value, "canonical_form", None)
    if custom is not None:
        return custom()
    raise TypeError(f"no canonical form for {type(value).__name__}: {value!r}")


def canonical_hash(value: Any) -> int:
    """64-bit hash that is stable across processes and platforms."""
    raw = repr(canonical_form(value)).encode("utf-8")
    return int.from_bytes(hashlib.blake2b(raw, digest_size=8).digest(), "big")
