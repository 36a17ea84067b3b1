"""Behavioral programming engine with an explicit-state verifier."""
from .core import (ALL, DONE, NONE, START, AllEvents, AllExcept, AllOf, AnyOf, BProgram, BThreadDef,
                   ConfigurationError, EngineError, Event, EventSet, Exact, FrozenMap, NameIs,
                   NamePrefix, NoEvents, Not, SyncStatement, Violation, advance_bthread, as_eventset,
                   assert_that, canonical_form, canonical_hash, events_of, freeze, scripted, sync, thaw)
from .runtime import (AssertionFailed, BProgramRunner, Completed, Deadlock, EventLimit, EventQueue,
                      QueueClosedError, ReplayError, RunnerConfig, RunnerListener, RunResult,
                      enqueue_external, replay, run)
from .strategy import (STRATEGIES, OrderedEventsStrategy, PrioritizedBThreadsStrategy,
                       PrioritizedSyncStrategy, SimpleStrategy, SnapshotEntry, Strategy, get_strategy)
from .verifier import (AssertionViolation, DeadlockViolation, DepthBoundReached, HotCycle, Ok,
                       VerificationResourceError, VerificationResult, VerificationSettings,
                       detect_hot_cycles, verify)

__version__ = "0.1.0"
