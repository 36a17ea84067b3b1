"""Command-line harness: run or verify the bundled examples and maze files,
and play tic-tac-toe against the engine over standard input."""
from __future__ import annotations

import argparse
import json
import sys
import threading

from .core import ConfigurationError, Event
from .examples import (DRAW, GAME_OVER, O_WIN, X, X_WIN, board_from_trace, build_hotcold,
                       build_philosophers, build_ttt, no_consecutive_hot, render_board)
from .mazedsl import MazeParseError, build_maze_bprogram, parse_maze, path_from_trace, solver_program
from .runtime import (AssertionFailed, BProgramRunner, Deadlock, EventQueue, RunnerConfig,
                      RunnerListener)
from .strategy import STRATEGIES, get_strategy
from .verifier import (AssertionViolation, HotCycle, VerificationResourceError,
                       VerificationSettings, verify)

EXIT_OK = 0
EXIT_DEADLOCK = 2
EXIT_ASSERTION = 3
EXIT_HOT_CYCLE = 4
EXIT_DEPTH_BOUND = 5
EXIT_USAGE = 64
EXIT_DATAERR = 65
EXIT_NOINPUT = 66
EXIT_SOFTWARE = 70

VERDICT_EXIT = {
    "ok": EXIT_OK,
    "deadlock": EXIT_DEADLOCK,
    "assertion-violation": EXIT_ASSERTION,
    "hot-cycle": EXIT_HOT_CYCLE,
    "depth-bound": EXIT_DEPTH_BOUND,
}


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


def event_line(event: Event) -> str:
    return json.dumps(event.to_json(), separators=(",", ":"), ensure_ascii=False)


class Example:
    def __init__(self, program, strategy="simple", maze=None):
        self.program = program
        self.strategy = strategy
        self.maze = maze


def resolve_example(name: str, for_verify: bool = False) -> Example:
    """Map a CLI example name to a program; raises UsageError for unknown names."""
    if name == "hotcold":
        return Example(build_hotcold(False).with_bthreads(no_consecutive_hot()))
    if name == "hotcold:balanced":
        return Example(build_hotcold(True).with_bthreads(no_consecutive_hot()))
    if name.startswith("philosophers:"):
        try:
            n = int(name.split(":", 1)[1])
            return Example(build_philosophers(n))
        except (ValueError, ConfigurationError):
            raise UsageError(f"bad philosopher count in {name!r}") from None
    if name == "ttt":
        return Example(build_ttt(), "priority-sync")
    if name.startswith("maze:"):
        maze = load_maze(name.split(":", 1)[1])
        program = solver_program(maze) if for_verify else build_maze_bprogram(maze)
        return Example(program, maze=maze)
    raise UsageError(f"unknown example {name!r}")


class _MazeFileError(Exception):
    def __init__(self, code, message):
        super().__init__(message)
        self.code = code


def load_maze(path):
    try:
        with open(path, encoding="utf-8", newline="") as fh:
            text = fh.read()
    except (OSError, UnicodeDecodeError) as exc:
        raise _MazeFileError(EXIT_NOINPUT, f"cannot read maze file {path}: {exc}") from None
    try:
        return parse_maze(text)
    except MazeParseError as exc:
        raise _MazeFileError(EXIT_DATAERR, f"{path}: {exc}") from None


def build_parser():
    p = _Parser(prog="bpengine", description="Behavioral programming engine and verifier.")
    sub = p.add_subparsers(dest="command", parser_class=_Parser)

    r = sub.add_parser("run", help="run an example and print its event trace")
    r.add_argument("--example", required=True)
    r.add_argument("--strategy", choices=sorted(STRATEGIES))
    r.add_argument("--seed", type=int, default=0)
    r.add_argument("--max-events", type=int)
    r.add_argument("--daemon", action="store_true",
                   help="keep running; read external events as JSON lines from stdin")

    v = sub.add_parser("verify", help="verify an example or a maze file")
    src = v.add_mutually_exclusive_group(required=True)
    src.add_argument("--example")
    src.add_argument("--maze")
    v.add_argument("--strategy", choices=sorted(STRATEGIES))
    v.add_argument("--store", choices=["exact", "hash"], default="exact")
    v.add_argument("--max-depth", type=int)
    v.add_argument("--hot-cycles", action="store_true")
    v.add_argument("--json", metavar="OUT")

    sub.add_parser("play-ttt", help="play tic-tac-toe as X against the engine")
    return p


# ---------------------------------------------------------------------------
# run

class _Printer(RunnerListener):
    def __init__(self, out):
        self.out = out

    def event_selected(self, event, index):
        self.out.write(event_line(event) + "\n")
        self.out.flush()


def _feed_stdin(stdin, queue, err):
    for line in stdin:
        line = line.strip()
        if not line:
            continue
        try:
            queue.put(Event.from_json(json.loads(line)))
        except (ValueError, KeyError, TypeError) as exc:
            err.write(f"ignoring bad external event {line!r}: {exc}\n")
    queue.close()


def cmd_run(args, stdin, out, err) -> int:
    ex = resolve_example(args.example)
    if args.max_events is not None and args.max_events <= 0:
        raise UsageError("--max-events must be positive")
    config = RunnerConfig(strategy=get_strategy(args.strategy or ex.strategy), seed=args.seed,
                          max_events=args.max_events, daemon=args.daemon)
    queue = EventQueue()
    if args.daemon:
        threading.Thread(target=_feed_stdin, args=(stdin, queue, err), daemon=True).start()
    result = BProgramRunner(ex.program, config, queue, [_Printer(out)]).run()
    term = result.termination
    if isinstance(term, AssertionFailed):
        err.write(f"assertion failed in {term.bthread}: {term.message}\n")
        return EXIT_ASSERTION
    if isinstance(term, Deadlock):
        err.write("deadlock\n")
        return EXIT_DEADLOCK
    return EXIT_OK


# ---------------------------------------------------------------------------
# verify

def _report(name, result, maze, out):
    v = result.verdict
    out.write(f"program: {name}\n")
    out.write(f"verdict: {v.kind}\n")
    out.write(f"states visited: {result.states_visited}\n")
    out.write(f"edges traversed: {result.edges_traversed}\n")
    if isinstance(v, AssertionViolation):
        out.write(f"violated by: {v.bthread}: {v.message}\n")
    if isinstance(v, HotCycle):
        out.write(f"prefix ({len(v.prefix)} events):\n")
        for e in v.prefix:
            out.write(f"  {event_line(e)}\n")
        out.write(f"cycle ({len(v.cycle)} events):\n")
        for e in v.cycle:
            out.write(f"  {event_line(e)}\n")
    else:
        trace = getattr(v, "trace", None)
        if trace is not None:
            out.write(f"trace ({len(trace)} events):\n")
            for e in trace:
                out.write(f"  {event_line(e)}\n")
    if getattr(v, "hash_only", False):
        out.write("note: hash-only store, a collision could have hidden states\n")
    if maze is not None:
        if isinstance(v, AssertionViolation) and v.bthread == "target-never-found":
            path = path_from_trace(v.trace)
            out.write("path: " + " ".join(f"({c},{r})" for c, r in path) + "\n")
            out.write(maze.render(path) + "\n")
        elif v.kind == "ok":
            out.write("no path to a target\n")


def cmd_verify(args, stdin, out, err) -> int:
    if args.maze is not None:
        name = f"maze:{args.maze}"
    else:
        name = args.example
    ex = resolve_example(name, for_verify=True)
    settings = VerificationSettings(
        strategy=get_strategy(args.strategy or ex.strategy), store=args.store,
        max_depth=args.max_depth, detect_hot_cycles=args.hot_cycles,
        detect_deadlocks=ex.maze is None)
    try:
        result = verify(ex.program, settings)
    except VerificationResourceError as exc:
        err.write(f"verification ran out of memory after {exc.states_visited} states\n")
        return EXIT_SOFTWARE
    _report(name, result, ex.maze, out)
    if args.json:
        doc = {"program": name, **result.to_json()}
        try:
            with open(args.json, "w", encoding="utf-8") as fh:
                json.dump(doc, fh, indent=2)
                fh.write("\n")
        except OSError as exc:
            err.write(f"cannot write {args.json}: {exc}\n")
            return EXIT_SOFTWARE
    return VERDICT_EXIT[result.verdict.kind]


# ---------------------------------------------------------------------------
# play-ttt

class _GameWatch(RunnerListener):
    def __init__(self):
        self.cond = threading.Condition()
        self.events = []
        self.parks = 0
        self.finished = False

    def event_selected(self, event, index):
        with self.cond:
            self.events.append(event)
            self.cond.notify_all()

    def parked(self):
        with self.cond:
            self.parks += 1
            self.cond.notify_all()

    def ended(self, reason):
        with self.cond:
            self.finished = True
            self.cond.notify_all()

    def wait_park(self, after):
        with self.cond:
            self.cond.wait_for(lambda: self.parks > after or self.finished)
            return list(self.events)


def parse_move(line):
    parts = line.split()
    if len(parts) != 2:
        return None
    try:
        c, r = int(parts[0]), int(parts[1])
    except ValueError:
        return None
    if 0 <= c <= 2 and 0 <= r <= 2:
        return c, r
    return None


def cmd_play_ttt(args, stdin, out, err) -> int:
    program = build_ttt(include_simulated_x=False, include_spec=False)
    queue = EventQueue()
    watch = _GameWatch()
    runner = BProgramRunner(program, RunnerConfig(strategy=get_strategy("priority-sync"), daemon=True),
                            queue, [watch])
    thread = threading.Thread(target=runner.run, daemon=True)
    thread.start()

    shown = 0
    seen = watch.wait_park(0)
    out.write(render_board(board_from_trace(seen)) + "\n")
    while True:
        over = [e for e in seen if e in GAME_OVER]
        if over:
            result = {X_WIN: "X wins.", O_WIN: "O wins.", DRAW: "Draw."}[over[0]]
            out.write(result + "\n")
            break
        out.write("your move (col row): ")
        out.flush()
        line = stdin.readline()
        if not line:
            out.write("\nbye\n")
            break
        move = parse_move(line)
        if move is None:
            out.write("enter two numbers 0-2, column then row\n")
            continue
        parks = watch.parks
        event = X(*move)
        queue.put(event)
        seen = watch.wait_park(parks)
        if event not in seen[shown:]:
            queue.remove(event)
            out.write(f"square {move[0]} {move[1]} is taken\n")
            continue
        for ev in seen[shown:]:
            if ev not in GAME_OVER:
                out.write(f"{ev.name}\n")
        shown = len(seen)
        out.write(render_board(board_from_trace(seen)) + "\n")
    out.flush()
    queue.close()
    thread.join(timeout=5)
    return EXIT_OK


COMMANDS = {"run": cmd_run, "verify": cmd_verify, "play-ttt": cmd_play_ttt}


def main(argv=None, stdin=None, stdout=None, stderr=None) -> int:
    stdin = stdin or sys.stdin
    out = stdout or sys.stdout
    err = stderr or sys.stderr
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        if args.command is None:
            raise UsageError("missing command")
        return COMMANDS[args.command](args, stdin, out, err)
    except UsageError as exc:
        err.write(parser.format_usage())
        err.write(f"error: {exc}\n")
        return EXIT_USAGE
    except ConfigurationError as exc:
        err.write(f"error: {exc}\n")
        return EXIT_USAGE
    except _MazeFileError as exc:
        err.write(f"error: {exc}\n")
        return exc.code


if __name__ == "__main__":
    sys.exit(main())
