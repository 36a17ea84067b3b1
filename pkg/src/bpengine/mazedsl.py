"""ASCII maze DSL: parse a drawing, build its b-program, solve it by verification.

Character semantics: ``' '`` is open floor, ``s`` the start, ``t`` a target,
anything else is a wall. Ragged lines are padded with walls on the right;
tabs are rejected because their width is ambiguous.
"""
from __future__ import annotations

import enum
from dataclasses import dataclass
from typing import Optional

from .core import (AllExcept, BProgram, BThreadDef, Event, NamePrefix, START, Violation,
                   events_of, scripted, sync)
from .verifier import AssertionViolation, VerificationSettings, verify


class MazeParseError(ValueError):
    def __init__(self, message, line=None, column=None):
        where = f" at line {line}, column {column}" if line is not None else ""
        super().__init__(message + where)
        self.line = line
        self.column = column


class Cell(enum.Enum):
    WALL = "#"
    SPACE = " "
    START = "s"
    TARGET = "t"

    @property
    def walkable(self):
        return self is not Cell.WALL


@dataclass(frozen=True)
class MazeModel:
    width: int
    height: int
    cells: tuple  # rows of Cell

    def at(self, col, row) -> Cell:
        if 0 <= col < self.width and 0 <= row < self.height:
            return self.cells[row][col]
        return Cell.WALL

    def coords(self, kind: Cell):
        return [(c, r) for r in range(self.height) for c in range(self.width)
                if self.cells[r][c] is kind]

    @property
    def start(self):
        return self.coords(Cell.START)[0]

    @property
    def targets(self):
        return self.coords(Cell.TARGET)

    def walkable_cells(self):
        return [(c, r) for r in range(self.height) for c in range(self.width)
                if self.cells[r][c].walkable]

    def neighbors(self, col, row):
        out = []
        for dc, dr in ((0, -1), (-1, 0), (1, 0), (0, 1)):
            if self.at(col + dc, row + dr).walkable:
                out.append((col + dc, row + dr))
        return out

    def render(self, path=()) -> str:
        on_path = set(path)
        lines = []
        for r in range(self.height):
            chars = []
            for c in range(self.width):
                cell = self.cells[r][c]
                if cell is Cell.SPACE and (c, r) in on_path:
                    chars.append("*")
                else:
                    chars.append(cell.value)
            lines.append("".join(chars))
        return "\n".join(lines)


def parse_maze(text: str) -> MazeModel:
    lines = [ln[:-1] if ln.endswith("\r") else ln for ln in text.split("\n")]
    while lines and lines[-1] == "":
        lines.pop()
    if not lines:
        raise MazeParseError("empty maze")
    width = max(len(ln) for ln in lines)
    rows = []
    start_at = None
    targets = 0
    for r, ln in enumerate(lines):
        row = []
        for c, ch in enumerate(ln.ljust(width, "#")):
            if ch == "\t":
                raise MazeParseError("tab characters are not allowed", r + 1, c + 1)
            if ch == "s":
                if start_at is not None:
                    raise MazeParseError(
                        f"second start cell (first at line {start_at[0]}, column {start_at[1]})",
                        r + 1, c + 1)
                start_at = (r + 1, c + 1)
                row.append(Cell.START)
            elif ch == "t":
                targets += 1
                row.append(Cell.TARGET)
            elif ch == " ":
                row.append(Cell.SPACE)
            else:
                row.append(Cell.WALL)
        rows.append(tuple(row))
    if start_at is None:
        raise MazeParseError("maze has no start cell 's'")
    if not targets:
        raise MazeParseError("maze has no target cell 't'")
    return MazeModel(width, len(rows), tuple(rows))


# ---------------------------------------------------------------------------
# B-program

TARGET_FOUND = Event("TARGET_FOUND")
ANY_ENTRANCE = NamePrefix("Enter")


def enter_event(col, row) -> Event:
    return Event(f"Enter({col},{row})", {"col": col, "row": row})


def _cell(maze, col, row):
    adjacent = events_of(enter_event(c, r) for c, r in maze.neighbors(col, row))
    return scripted(f"cell(c:{col} r:{row})", [
        sync(wait_for=adjacent),
        sync(request=enter_event(col, row), wait_for=ANY_ENTRANCE),
    ], loop=True)


def _target(col, row):
    return scripted(f"target(c:{col} r:{row})", [
        sync(wait_for=enter_event(col, row)),
        sync(request=TARGET_FOUND, block=AllExcept({TARGET_FOUND})),
    ])


def build_maze_bprogram(maze: MazeModel, name: str = "maze") -> BProgram:
    threads = [_cell(maze, c, r) for c, r in maze.walkable_cells()]
    threads += [_target(c, r) for c, r in maze.targets]
    threads.append(scripted("start", [sync(request=enter_event(*maze.start))]))
    return BProgram(name, threads)


def target_never_found() -> BThreadDef:
    return scripted("target-never-found", [sync(wait_for=TARGET_FOUND), Violation("target found")])


def only_once() -> BThreadDef:
    """Simplifier: the walker never enters the same cell twice."""

    def step(entered, resume):
        if resume is not START:
            entered = entered | {resume}
        block = events_of(sorted(entered, key=lambda e: (e.data["row"], e.data["col"])))
        return entered, sync(wait_for=ANY_ENTRANCE, block=block)

    return BThreadDef("onlyOnce", step, frozenset())


def solver_program(maze: MazeModel, simplifier: bool = True) -> BProgram:
    program = build_maze_bprogram(maze).with_bthreads(target_never_found())
    if simplifier:
        program = program.with_bthreads(only_once())
    return program


# ---------------------------------------------------------------------------
# Paths

@dataclass(frozen=True)
class MazePath:
    cells: tuple

    def __iter__(self):
        return iter(self.cells)

    def __len__(self):
        return len(self.cells)

    def problems(self, maze: MazeModel, allow_repeats: bool = False) -> list:
        """Reasons this is not a valid start-to-target walk; empty when valid."""
        out = []
        cells = list(self.cells)
        if not cells:
            return ["empty path"]
        if cells[0] != maze.start:
            out.append(f"starts at {cells[0]}, not at start {maze.start}")
        if cells[-1] not in maze.targets:
            out.append(f"ends at {cells[-1]}, not at a target")
        for c, r in cells:
            if not maze.at(c, r).walkable:
                out.append(f"wall at {(c, r)}")
        for a, b in zip(cells, cells[1:]):
            if abs(a[0] - b[0]) + abs(a[1] - b[1]) != 1:
                out.append(f"{a} and {b} are not adjacent")
        if not allow_repeats and len(set(cells)) != len(cells):
            out.append("path repeats a cell")
        return out


def path_from_trace(trace) -> MazePath:
    return MazePath(tuple((e.data["col"], e.data["row"]) for e in trace if ANY_ENTRANCE.contains(e)))


def solve_maze(maze: MazeModel, settings: Optional[VerificationSettings] = None,
               simplifier: bool = True):
    """Path to a target found by verification, or None when none exists.

    Returns ``(path_or_None, VerificationResult)``. Dead ends are not
    deadlocks here: the walker is expected to get stuck, so deadlock
    detection is switched off.
    """
    base = settings or VerificationSettings()
    settings = VerificationSettings(base.strategy, base.store, base.max_depth,
                                    base.detect_hot_cycles, False, base.shorten_counterexamples)
    result = verify(solver_program(maze, simplifier), settings)
    v = result.verdict
    if isinstance(v, AssertionViolation) and v.bthread == "target-never-found":
        return path_from_trace(v.trace), result
    return None, result


def grid_path_exists(maze: MazeModel) -> bool:
    """Plain BFS over walkable cells, independent of the b-program."""
    from collections import deque

    seen = {maze.start}
    todo = deque([maze.start])
    targets = set(maze.targets)
    while todo:
        cur = todo.popleft()
        if cur in targets:
            return True
        for nb in maze.neighbors(*cur):
            if nb not in seen:
                seen.add(nb)
                todo.append(nb)
    return False
