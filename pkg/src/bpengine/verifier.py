"""Explicit-state model checking of b-programs.

The verifier explores the graph of synchronization-point states of an
unmodified :class:`~bpengine.core.BProgram` depth-first, with an explicit
stack. It reports assertion violations, deadlocks (something requested,
everything requested blocked) and, optionally, hot cycles.

Every expanded state's outgoing edges are kept, so a counterexample found by
the DFS can be shortened to a shortest path through the explored graph, and
the hot-cycle pass can run over the same graph afterwards.
"""
from __future__ import annotations

import gc
import time
from collections import deque
from dataclasses import dataclass, field
from typing import Optional

from .core import DONE, START, BProgram, ConfigurationError, Violation, advance_bthread, canonical_form, canonical_hash
from .strategy import SimpleStrategy, SnapshotEntry, Strategy, simple_selectable


class VerificationResourceError(MemoryError):
    def __init__(self, states_visited: int):
        super().__init__(f"ran out of memory after {states_visited} states")
        self.states_visited = states_visited


# ---------------------------------------------------------------------------
# Verdicts

class Verdict:
    kind = "?"

    def __eq__(self, other):
        return type(self) is type(other) and vars(self) == vars(other)

    def __hash__(self):
        return hash(self.kind)

    def __repr__(self):
        fields = ", ".join(f"{k}={v!r}" for k, v in vars(self).items())
        return f"{type(self).__name__}({fields})"


class Ok(Verdict):
    kind = "ok"

    def __init__(self, hash_only: bool = False):
        self.hash_only = hash_only


class AssertionViolation(Verdict):
    kind = "assertion-violation"

    def __init__(self, bthread: str, message: str, trace=()):
        self.bthread = bthread
        self.message = message
        self.trace = list(trace)


class DeadlockViolation(Verdict):
    kind = "deadlock"

    def __init__(self, trace=()):
        self.trace = list(trace)


class HotCycle(Verdict):
    kind = "hot-cycle"

    def __init__(self, prefix=(), cycle=()):
        self.prefix = list(prefix)
        self.cycle = list(cycle)

    @property
    def trace(self):
        return self.prefix + self.cycle


class DepthBoundReached(Verdict):
    kind = "depth-bound"


@dataclass
class VerificationSettings:
    strategy: Strategy = field(default_factory=SimpleStrategy)
    store: str = "exact"                  # "exact" or "hash"
    max_depth: Optional[int] = None
    detect_hot_cycles: bool = False
    detect_deadlocks: bool = True
    shorten_counterexamples: bool = True

    def __post_init__(self):
        if self.store not in ("exact", "hash"):
            raise ConfigurationError(f"unknown visited-state store {self.store!r}")
        if self.max_depth is not None and self.max_depth <= 0:
            raise ConfigurationError("max_depth must be positive")
        if self.detect_hot_cycles and self.store != "exact":
            raise ConfigurationError("hot-cycle detection needs the exact visited-state store")


@dataclass
class VerificationResult:
    verdict: Verdict
    states_visited: int
    edges_traversed: int
    store: str = "exact"
    millis: float = 0.0

    @property
    def ok(self) -> bool:
        return isinstance(self.verdict, Ok)

    def to_json(self) -> dict:
        v = self.verdict
        out = {"verdict": v.kind, "statesVisited": self.states_visited,
               "edgesTraversed": self.edges_traversed, "store": self.store,
               "millis": round(self.millis, 3)}
        trace = getattr(v, "trace", None)
        out["trace"] = [e.to_json() for e in trace] if trace is not None else []
        if isinstance(v, AssertionViolation):
            out["bthread"] = v.bthread
            out["message"] = v.message
        if isinstance(v, HotCycle):
            out["prefix"] = [e.to_json() for e in v.prefix]
            out["cycle"] = [e.to_json() for e in v.cycle]
        if isinstance(v, Ok) and v.hash_only:
            out["caveat"] = "hash-only store: a hash collision may have hidden states"
        return out


# ---------------------------------------------------------------------------
# Program states

class ProgramState:
    """All live b-threads at a synchronization point, sorted by name.

    :attr:`entries` are ``(name, state value, pending statement)`` triples;
    finished b-threads are dropped. Internally each distinct triple is
    interned by its :class:`StateSpace` and a state is a tuple of small ints
    kept in registration order (a fixed permutation of name order, so equality
    is unaffected).
    """

    __slots__ = ("ids", "space", "_hash")

    def __init__(self, ids, space):
        self.ids = ids
        self.space = space
        self._hash = hash(ids)

    @property
    def entries(self):
        table = self.space._entries
        return tuple(sorted((table[i] for i in self.ids), key=lambda e: e[0]))

    def __eq__(self, other):
        if self is other:
            return True
        if not isinstance(other, ProgramState):
            return NotImplemented
        if self.space is other.space:
            return self.ids == other.ids
        return self.entries == other.entries

    def __hash__(self):
        # consistent with cross-space equality only through canonical_hash
        return self._hash

    @property
    def hot(self) -> bool:
        hot = self.space._hot
        return any(hot[i] for i in self.ids)

    def has_requests(self) -> bool:
        return any(stmt.request for _, _, stmt in self.entries)

    def canonical_form(self):
        return ("ProgramState",) + tuple(
            (name, canonical_form(st), canonical_form(stmt)) for name, st, stmt in self.entries)

    def statement(self, name):
        for n, _, stmt in self.entries:
            if n == name:
                return stmt
        raise KeyError(name)

    def __repr__(self):
        return f"ProgramState({[(n, s) for n, s, _ in self.entries]!r})"


_DONE_ID = -1


class StateSpace:
    """Successor function of one b-program under one strategy.

    Step functions are pure, so transitions are memoized per interned entry
    and event.
    """

    def __init__(self, program: BProgram, strategy: Optional[Strategy] = None):
        self.program = program
        self.strategy = strategy or SimpleStrategy()
        self.defs = {bt.name: bt for bt in program.bthreads}
        self.rank = {bt.name: i for i, bt in enumerate(program.bthreads)}
        self._ids = {}        # entry triple -> id
        self._entries = []    # id -> entry triple
        self._snap = []       # id -> SnapshotEntry
        self._hot = []        # id -> bool
        self._trans = {}      # event -> {id: next id | _DONE_ID | Violation}

    def _intern(self, name, state, stmt):
        entry = (name, state, stmt)
        try:
            return self._ids[entry]
        except KeyError:
            i = self._ids[entry] = len(self._entries)
            self._entries.append(entry)
            self._snap.append(SnapshotEntry(name, self.defs[name].priority, stmt))
            self._hot.append(stmt.hot)
            return i

    def _settle(self, name, state, result):
        if result is DONE:
            return _DONE_ID
        if isinstance(result, Violation):
            return result
        return self._intern(name, state, result)

    def initial(self):
        """Root ProgramState, or an AssertionViolation raised during setup."""
        ids = []
        for bt in self.program.bthreads:
            state, result = advance_bthread(bt, bt.initial_state, START)
            if isinstance(result, Violation):
                return AssertionViolation(bt.name, result.message, [])
            if result is not DONE:
                ids.append(self._intern(bt.name, state, result))
        return ProgramState(tuple(ids), self)

    def snapshot(self, state: ProgramState):
        snap = self._snap
        return [snap[i] for i in state.ids]

    def selectable(self, state: ProgramState):
        return self.strategy.selectable(self.snapshot(state))

    def is_deadlock(self, state: ProgramState) -> bool:
        return state.has_requests() and not simple_selectable(self.snapshot(state))

    def successors(self, state: ProgramState):
        return [(event, self.apply(state, event)) for event in self.selectable(state)]

    def apply(self, state: ProgramState, event):
        table = self._trans.get(event)
        if table is None:
            table = self._trans[event] = {}
        new, violation = [], None
        for i in state.ids:
            j = table.get(i)
            if j is None:
                name, st, stmt = self._entries[i]
                if stmt.affected_by(event):
                    nst, res = advance_bthread(self.defs[name], st, event)
                    j = self._settle(name, nst, res)
                else:
                    j = i
                table[i] = j
            if j.__class__ is int:
                if j != _DONE_ID:
                    new.append(j)
            elif violation is None:
                # ids are in registration order: first failure wins, as in the runner
                violation = AssertionViolation(self._entries[i][0], j.message, [])
        if violation is not None:
            return violation
        return ProgramState(tuple(new), self)


def initial_state(program: BProgram, strategy: Optional[Strategy] = None):
    return StateSpace(program, strategy).initial()


def successors(state: ProgramState, strategy: Optional[Strategy] = None):
    """Outgoing ``(event, ProgramState | AssertionViolation)`` edges of ``state``."""
    space = state.space
    if strategy is not None and strategy is not space.strategy:
        space = StateSpace(space.program, strategy)
    return space.successors(state)


# ---------------------------------------------------------------------------
# Search

def _shortest_path(graph, root, target):
    """Event list of a shortest root->target path over recorded edges."""
    if root == target:
        return []
    parent = {root: None}
    queue = deque([root])
    while queue:
        node = queue.popleft()
        for event, child in graph.get(node, ()):
            if child is None or child in parent:
                continue
            parent[child] = (node, event)
            if child == target:
                path = []
                while parent[child] is not None:
                    child, ev = parent[child]
                    path.append(ev)
                return path[::-1]
            queue.append(child)
    return None


class _Search:
    def __init__(self, program, settings):
        self.settings = settings
        self.space = StateSpace(program, settings.strategy)
        self.hash_only = settings.store == "hash"
        self.depth = {}       # key -> shallowest depth seen
        self.graph = {}       # key -> [(event, child key | None)]
        self.hot = {}         # key -> bool
        self.edges = 0
        self.bound_hit = False

    def key(self, state):
        return canonical_hash(state) if self.hash_only else state

    def _trace_to(self, key, stack_trace):
        if self.settings.shorten_counterexamples:
            path = _shortest_path(self.graph, self.root_key, key)
            if path is not None and len(path) <= len(stack_trace):
                return path
        return list(stack_trace)

    def run(self):
        s = self.settings
        root = self.space.initial()
        if isinstance(root, AssertionViolation):
            return root
        self.root_key = rk = self.key(root)
        self.depth[rk] = 0
        self.hot[rk] = root.hot

        trace = []
        stack = []  # frames: [state, key, children, next index]
        verdict = self._expand(root, rk, 0, trace, stack)
        while verdict is None and stack:
            frame = stack[-1]
            children = frame[2]
            if frame[3] >= len(children):
                stack.pop()
                if trace:
                    trace.pop()
                continue
            event, child, ckey = children[frame[3]]
            frame[3] += 1
            d = len(stack)
            seen = self.depth.get(ckey)
            if seen is not None and (s.max_depth is None or seen <= d):
                continue
            self.depth[ckey] = d
            self.hot[ckey] = child.hot
            trace.append(event)
            verdict = self._expand(child, ckey, d, trace, stack)
            if verdict is None and stack[-1][0] is not child:
                trace.pop()
        if verdict is not None:
            return verdict
        if s.detect_hot_cycles:
            hc = self._hot_cycle()
            if hc is not None:
                return hc
        if self.bound_hit:
            return DepthBoundReached()
        return Ok(hash_only=self.hash_only)

    def _expand(self, state, key, depth, trace, stack):
        """Check ``state``; push a frame if it has children. Returns a verdict or None."""
        s = self.settings
        space = self.space
        if s.max_depth is not None and depth >= s.max_depth:
            if s.detect_deadlocks and space.is_deadlock(state):
                return DeadlockViolation(self._trace_to(key, trace))
            if space.selectable(state):
                self.bound_hit = True
            return None
        succ = space.successors(state)
        self.edges += len(succ)
        children = []
        recorded = []
        for event, child in succ:
            if isinstance(child, AssertionViolation):
                self.graph[key] = recorded
                path = self._trace_to(key, trace)
                return AssertionViolation(child.bthread, child.message, path + [event])
            ckey = self.key(child)
            children.append((event, child, ckey))
            recorded.append((event, ckey))
        self.graph[key] = recorded
        if not succ and s.detect_deadlocks and space.is_deadlock(state):
            return DeadlockViolation(self._trace_to(key, trace))
        if children:
            stack.append([state, key, children, 0])
        return None

    def _hot_cycle(self):
        """Find a reachable cycle whose states are all hot, over the explored graph."""
        graph, hot = self.graph, self.hot
        color = {}
        for start in graph:
            if not hot.get(start) or start in color:
                continue
            color[start] = 1
            path = [start]
            events = []
            its = [iter(graph.get(start, ()))]
            while its:
                advanced = False
                for event, child in its[-1]:
                    if child is None or not hot.get(child):
                        continue
                    c = color.get(child)
                    if c == 1:
                        i = path.index(child)
                        cycle = events[i:] + [event]
                        prefix = _shortest_path(graph, self.root_key, child)
                        return HotCycle(prefix or [], cycle)
                    if c is None:
                        color[child] = 1
                        path.append(child)
                        events.append(event)
                        its.append(iter(graph.get(child, ())))
                        advanced = True
                        break
                if not advanced:
                    color[path.pop()] = 2
                    its.pop()
                    if events:
                        events.pop()
        return None


def verify(program: BProgram, settings: Optional[VerificationSettings] = None,
           external_queue=None) -> VerificationResult:
    """Model-check ``program``; the first violation found wins."""
    settings = settings or VerificationSettings()
    if external_queue is not None and len(external_queue):
        raise ConfigurationError("verification does not consume external events; "
                                 "model the environment as b-threads")
    search = _Search(program, settings)
    t0 = time.perf_counter()
    # the search allocates millions of acyclic tuples; cyclic GC passes only cost time
    gc_enabled = gc.isenabled()
    gc.disable()
    try:
        verdict = search.run()
    except MemoryError:
        n = len(search.depth)
        search.depth.clear()
        search.graph.clear()
        raise VerificationResourceError(n) from None
    finally:
        if gc_enabled:
            gc.enable()
    millis = (time.perf_counter() - t0) * 1000.0
    return VerificationResult(verdict, len(search.depth), search.edges, settings.store, millis)


def detect_hot_cycles(program: BProgram, settings: Optional[VerificationSettings] = None) -> VerificationResult:
    settings = settings or VerificationSettings()
    if settings.store != "exact":
        raise ConfigurationError("hot-cycle detection needs the exact visited-state store")
    settings = VerificationSettings(settings.strategy, settings.store, settings.max_depth,
                                    True, settings.detect_deadlocks, settings.shorten_counterexamples)
    return verify(program, settings)


def explore(program: BProgram, strategy: Optional[Strategy] = None):
    """Whole reachable graph as ``(root, {state: [(event, child)]})``.

    Assertion-violation edges point at the AssertionViolation object. Meant for
    tests and analyses at desk scale.
    """
    space = StateSpace(program, strategy)
    root = space.initial()
    if isinstance(root, AssertionViolation):
        return root, {}
    graph = {}
    todo = [root]
    graph[root] = None
    while todo:
        st = todo.pop()
        succ = space.successors(st)
        graph[st] = succ
        for _, child in succ:
            if isinstance(child, ProgramState) and child not in graph:
                graph[child] = None
                todo.append(child)
    return root, graph
