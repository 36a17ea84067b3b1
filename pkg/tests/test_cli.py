import io
import json
import random
import subprocess
import sys
from pathlib import Path

import pytest

from bpengine.cli import main, parse_move

GOLDEN = Path(__file__).parent / "golden"


def cli(*argv, stdin=""):
    out, err = io.StringIO(), io.StringIO()
    code = main(list(argv), stdin=io.StringIO(stdin), stdout=out, stderr=err)
    return code, out.getvalue(), err.getvalue()


GOLDEN_CASES = [
    (("run", "--example", "hotcold:balanced", "--seed", "1"), "run_hotcold_balanced_seed1.txt", 0),
    (("run", "--example", "hotcold", "--seed", "3"), "run_hotcold_seed3.txt", 3),
    (("run", "--example", "philosophers:3", "--seed", "23", "--max-events", "20"),
     "run_philosophers3_seed23.txt", 0),
    (("run", "--example", "ttt", "--seed", "4"), "run_ttt_seed4.txt", 0),
    (("verify", "--example", "philosophers:5"), "verify_philosophers5.txt", 2),
]


@pytest.mark.parametrize("argv,golden,code", GOLDEN_CASES, ids=[g for _, g, _ in GOLDEN_CASES])
def test_golden_output(argv, golden, code):
    got_code, out, _ = cli(*argv)
    assert got_code == code
    assert out == (GOLDEN / golden).read_text(encoding="utf-8")


def test_balanced_run_ends_hot():
    code, out, _ = cli("run", "--example", "hotcold:balanced", "--seed", "1")
    lines = out.splitlines()
    assert len(lines) == 6 and lines[-1] == '{"name":"HOT"}'


def test_event_limit_is_success():
    code, out, _ = cli("run", "--example", "philosophers:3", "--seed", "23", "--max-events", "20")
    assert code == 0 and len(out.splitlines()) == 20


def test_assertion_message_on_stderr():
    code, out, err = cli("run", "--example", "hotcold", "--seed", "3")
    assert code == 3 and "two HOT in a row" in err


@pytest.mark.parametrize("argv", [
    ("run", "--example", "nosuch"),
    ("run", "--example", "philosophers:1"),
    ("run", "--example", "philosophers:x"),
    ("run", "--example", "hotcold", "--strategy", "greedy"),
    ("run", "--example", "hotcold", "--max-events", "0"),
    ("run",),
    ("frobnicate",),
    (),
    ("verify",),
    ("verify", "--example", "ttt", "--maze", "m.txt"),
])
def test_usage_errors_exit_64(argv):
    code, _, err = cli(*argv)
    assert code == 64
    assert "usage" in err or "error" in err


def write(tmp_path, name, text):
    p = tmp_path / name
    p.write_text(text, encoding="utf-8")
    return str(p)


def test_verify_exit_matrix(tmp_path):
    solvable = write(tmp_path, "ok.txt", "s  #\n # #\n   t\n")
    unsolvable = write(tmp_path, "no.txt", "s#t\n")
    broken = write(tmp_path, "bad.txt", "s\ts t\n")
    cases = [
        (("verify", "--example", "hotcold:balanced"), 0),
        (("verify", "--example", "ttt"), 0),
        (("verify", "--example", "philosophers:5"), 2),
        (("verify", "--example", "hotcold"), 3),
        (("verify", "--maze", solvable), 3),
        (("verify", "--maze", unsolvable), 0),
        (("verify", "--example", "hotcold:balanced", "--hot-cycles"), 0),
        (("verify", "--example", "philosophers:6", "--max-depth", "3"), 5),
        (("verify", "--maze", broken), 65),
        (("verify", "--maze", str(tmp_path / "missing.txt")), 66),
        (("verify", "--example", "hotcold", "--store", "hash", "--hot-cycles"), 64),
    ]
    for argv, want in cases:
        assert cli(*argv)[0] == want, argv


def test_hot_cycle_exit(tmp_path, monkeypatch):
    from bpengine import cli as cli_mod
    from bpengine.core import BProgram, Event, scripted, sync

    prog = BProgram("spin", [scripted("s", [sync(request=Event("A"), hot=True)], loop=True)])
    monkeypatch.setattr(cli_mod, "resolve_example",
                        lambda name, for_verify=False: cli_mod.Example(prog))
    code, out, _ = cli("verify", "--example", "spin", "--hot-cycles")
    assert code == 4
    assert "cycle (1 events)" in out


def test_maze_report_prints_path(tmp_path):
    path = write(tmp_path, "m.txt", "st")
    code, out, _ = cli("verify", "--maze", path)
    assert code == 3
    assert "path: (0,0) (1,0)" in out


def test_parse_error_mentions_position(tmp_path):
    path = write(tmp_path, "m.txt", "s t\n s")
    code, _, err = cli("verify", "--maze", path)
    assert code == 65 and "line 2, column 2" in err


def test_json_report(tmp_path):
    out_path = tmp_path / "r.json"
    code, _, _ = cli("verify", "--example", "philosophers:5", "--json", str(out_path))
    doc = json.loads(out_path.read_text())
    assert code == 2
    assert doc["verdict"] == "deadlock"
    assert len(doc["trace"]) == 5
    for key in ("statesVisited", "edgesTraversed", "millis"):
        assert key in doc


def test_daemon_run_reads_external_events():
    events = '{"name":"HOT"}\n{"name":"COLD"}\nnot json\n'
    code, out, err = cli("run", "--example", "hotcold:balanced", "--daemon", stdin=events)
    assert code == 0
    assert out.splitlines()[:6] == ['{"name":"COLD"}', '{"name":"HOT"}'] * 3
    assert "ignoring bad external event" in err


def test_stdout_is_byte_identical_across_processes():
    argv = [sys.executable, "-m", "bpengine", "run", "--example", "philosophers:4",
            "--seed", "11", "--max-events", "40"]
    a = subprocess.run(argv, capture_output=True)
    b = subprocess.run(argv, capture_output=True)
    assert a.stdout == b.stdout and a.returncode == b.returncode


# play-ttt --------------------------------------------------------------------

def board_lines(out):
    return [ln for ln in out.splitlines() if "|" in ln]


def test_play_one_move():
    code, out, _ = cli("play-ttt", stdin="1 1\n")
    assert code == 0
    last_board = "\n".join(board_lines(out)[-3:])
    assert last_board.count("X") == 1 and last_board.count("O") == 1
    assert "O(" in out


def test_play_occupied_square_reprompts():
    code, out, _ = cli("play-ttt", stdin="1 1\n1 1\n")
    assert "square 1 1 is taken" in out
    boards = board_lines(out)
    # empty board, board after first move, nothing new after the refused move
    assert len(boards) == 6


def test_play_bad_input_reprompts():
    code, out, _ = cli("play-ttt", stdin="hello\n5 5\n")
    assert code == 0
    assert out.count("enter two numbers") == 2


@pytest.mark.parametrize("seed", range(6))
def test_play_never_lets_x_win(seed):
    rng = random.Random(seed)
    script = "".join(f"{rng.randrange(3)} {rng.randrange(3)}\n" for _ in range(40))
    code, out, _ = cli("play-ttt", stdin=script)
    assert code == 0
    assert "X wins" not in out
    assert "O wins." in out or "Draw." in out


def test_parse_move():
    assert parse_move("0 2") == (0, 2)
    assert parse_move(" 1   1 \n") == (1, 1)
    for bad in ("", "1", "1 2 3", "a b", "3 0", "-1 0"):
        assert parse_move(bad) is None
