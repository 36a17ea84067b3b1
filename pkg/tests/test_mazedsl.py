import random

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from bpengine.mazedsl import (ANY_ENTRANCE, TARGET_FOUND, Cell, MazeParseError, MazePath,
                              build_maze_bprogram, enter_event, grid_path_exists, parse_maze,
                              solve_maze, solver_program)
from bpengine.runtime import AssertionFailed, RunnerConfig, replay, run
from bpengine.verifier import VerificationSettings, explore

from oracles import grid_bfs, random_maze


# parsing ----------------------------------------------------------------------

def test_minimal_maze():
    m = parse_maze("st")
    assert (m.width, m.height) == (2, 1)
    assert m.start == (0, 0) and m.targets == [(1, 0)]


def test_ragged_lines_are_padded_with_walls():
    m = parse_maze("s \n #\n t")
    assert (m.width, m.height) == (2, 3)
    m = parse_maze("s\n  t\n")
    assert (m.width, m.height) == (3, 2)
    assert m.at(1, 0) is Cell.WALL and m.at(2, 0) is Cell.WALL
    assert m.render() == "s##\n  t"


def test_character_semantics():
    m = parse_maze("s.x\n t*")
    assert [m.at(c, 0) for c in range(3)] == [Cell.START, Cell.WALL, Cell.WALL]
    assert [m.at(c, 1) for c in range(3)] == [Cell.SPACE, Cell.TARGET, Cell.WALL]
    assert m.at(-1, 0) is Cell.WALL and m.at(0, 5) is Cell.WALL


def test_crlf_and_trailing_blank_lines():
    assert parse_maze("s \r\n t\r\n\r\n") == parse_maze("s \n t")


@pytest.mark.parametrize("text,line,col", [
    ("s\tt", 1, 2),
    ("s t\n  s", 2, 3),
])
def test_parse_errors_carry_position(text, line, col):
    with pytest.raises(MazeParseError) as info:
        parse_maze(text)
    assert (info.value.line, info.value.column) == (line, col)


@pytest.mark.parametrize("text", ["", "\n\n", "  t", "s  "])
def test_parse_errors_without_position(text):
    with pytest.raises(MazeParseError):
        parse_maze(text)


# b-program --------------------------------------------------------------------

def test_program_structure_for_minimal_maze():
    prog = build_maze_bprogram(parse_maze("st"))
    assert {bt.name for bt in prog.bthreads} == {
        "cell(c:0 r:0)", "cell(c:1 r:0)", "start", "target(c:1 r:0)"}
    res = run(prog, RunnerConfig(max_events=5))
    assert res.trace[0] == enter_event(0, 0)
    assert res.trace[0].data == {"col": 0, "row": 0}


def test_entrance_set():
    assert ANY_ENTRANCE.contains(enter_event(3, 2))
    assert not ANY_ENTRANCE.contains(TARGET_FOUND)


def test_isolated_cell_never_moves():
    maze = parse_maze("s t\n###\n# #")
    prog = solver_program(maze)
    root, graph = explore(prog)
    for state in graph:
        for name, pc, _ in state.entries:
            if name == "cell(c:1 r:2)":
                assert pc == 0


def test_target_blocks_everything_else():
    prog = build_maze_bprogram(parse_maze("st "))
    res = run(prog, RunnerConfig(seed=0, max_events=50))
    if TARGET_FOUND in res.trace:
        i = res.trace.index(TARGET_FOUND)
        assert res.trace[i - 1] == enter_event(1, 0)


# solving ----------------------------------------------------------------------

def test_solve_trivial():
    path, _ = solve_maze(parse_maze("st"))
    assert path.cells == ((0, 0), (1, 0))
    path, res = solve_maze(parse_maze("s#t"))
    assert path is None and res.ok


POCKET = "\n".join([
    "s   #",
    "### #",
    "#   #",
    "# ###",
    "#   t",
])

POCKET_CLOSED = "\n".join([
    "s   #",
    "### #",
    "#   #",
    "#####",
    "#   t",
])


@pytest.mark.parametrize("text", [POCKET, POCKET_CLOSED])
def test_pocket_maze_agrees_with_bfs(text):
    maze = parse_maze(text)
    path, _ = solve_maze(maze)
    rows = text.split("\n")
    assert (path is not None) == (grid_bfs(rows) is not None) == grid_path_exists(maze)
    if path is not None:
        assert path.problems(maze) == []


def test_counterexample_replays_to_target_found():
    maze = parse_maze(POCKET)
    prog = solver_program(maze)
    path, res = solve_maze(maze)
    assert replay(prog, res.verdict.trace).termination == AssertionFailed("target-never-found", "target found")


@settings(max_examples=80, deadline=None)
@given(st.integers(0, 2**32), st.sampled_from([0.2, 0.3, 0.45]))
def test_solver_agrees_with_grid_bfs(seed, density):
    rows = random_maze(random.Random(seed), 6, 6, density)
    maze = parse_maze("\n".join(rows))
    path, _ = solve_maze(maze)
    assert (path is not None) == (grid_bfs(rows) is not None)
    if path is not None:
        assert path.problems(maze) == []


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 2**32))
def test_random_walk_without_simplifier_at_bounded_depth(seed):
    rows = random_maze(random.Random(seed), 5, 5, 0.3)
    dist = grid_bfs(rows)
    maze = parse_maze("\n".join(rows))
    path, res = solve_maze(maze, VerificationSettings(max_depth=(dist or 1) + 2), simplifier=False)
    if dist is None:
        assert path is None
    else:
        assert path is not None
        assert path.problems(maze, allow_repeats=True) == []


def test_path_problems():
    maze = parse_maze("s t\n   ")
    assert MazePath(((0, 0), (1, 0), (2, 0))).problems(maze) == []
    assert MazePath(()).problems(maze) == ["empty path"]
    assert MazePath(((0, 0), (2, 0))).problems(maze)
    assert MazePath(((1, 0), (2, 0))).problems(maze)
    assert MazePath(((0, 0), (1, 0), (0, 0), (1, 0), (2, 0))).problems(maze) == ["path repeats a cell"]
    walled = parse_maze("s#t")
    assert MazePath(((0, 0), (1, 0), (2, 0))).problems(walled)
