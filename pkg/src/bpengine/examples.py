"""Ready-made b-programs: hot/cold bath, dining philosophers, tic-tac-toe."""
from __future__ import annotations


from .core import (DONE, START, AnyOf, BProgram, BThreadDef, ConfigurationError, Event, NamePrefix,
                   Violation, events_of, scripted, sync)

# ---------------------------------------------------------------------------
# Hot / cold

HOT = Event("HOT")
COLD = Event("COLD")


def no_consecutive_hot() -> BThreadDef:
    """Requirement b-thread: HOT is never selected twice in a row."""

    def step(seen_hot, resume):
        if resume is START:
            return False, sync(wait_for=HOT)
        if resume == HOT:
            if seen_hot:
                return True, Violation("two HOT in a row")
            return True, sync(wait_for=[HOT, COLD])
        return False, sync(wait_for=HOT)

    return BThreadDef("never-two-hot", step, False)


def build_hotcold(with_balancer: bool = False, with_requirement: bool = False) -> BProgram:
    threads = [
        scripted("add-hot", [sync(request=HOT)] * 3),
        scripted("add-cold", [sync(request=COLD)] * 3),
    ]
    if with_balancer:
        threads.append(scripted("control-temp", [sync(wait_for=COLD, block=HOT),
                                                 sync(wait_for=HOT, block=COLD)], loop=True))
    if with_requirement:
        threads.append(no_consecutive_hot())
    return BProgram("hotcold:balanced" if with_balancer else "hotcold", threads)


# ---------------------------------------------------------------------------
# Dining philosophers

def pick(i, side):
    return Event(f"Pick{i}{side}")


def release(i, side):
    return Event(f"Rel{i}{side}")


def _stick(i: int, n: int) -> BThreadDef:
    # stick i is philosopher i's right stick and philosopher i+1's left stick
    j = i % n + 1
    pick_r, pick_l = pick(i, "R"), pick(j, "L")
    statements = {
        "free": sync(wait_for=[pick_r, pick_l]),
        "right": sync(wait_for=release(i, "R"), block=pick_l),
        "left": sync(wait_for=release(j, "L"), block=pick_r),
    }

    def step(holder, resume):
        if resume is START:
            holder = "free"
        elif holder == "free":
            holder = "right" if resume == pick_r else "left"
        else:
            holder = "free"
        return holder, statements[holder]

    return BThreadDef(f"Stick{i}", step, "free")


def _philosopher(i: int) -> BThreadDef:
    return scripted(f"Phil{i}", [sync(request=pick(i, "R")), sync(request=pick(i, "L")),
                                 sync(request=release(i, "L")), sync(request=release(i, "R"))],
                    loop=True)


def build_philosophers(n: int) -> BProgram:
    if n < 2:
        raise ConfigurationError("need at least two philosophers")
    threads = []
    for i in range(1, n + 1):
        threads.append(_stick(i, n))
        threads.append(_philosopher(i))
    return BProgram(f"philosophers:{n}", threads)


# ---------------------------------------------------------------------------
# Tic-tac-toe

SQUARES = [(c, r) for r in range(3) for c in range(3)]
LINES = ([[(c, r) for c in range(3)] for r in range(3)]
         + [[(c, r) for r in range(3)] for c in range(3)]
         + [[(0, 0), (1, 1), (2, 2)], [(2, 0), (1, 1), (0, 2)]])
CENTER = [(1, 1)]
CORNERS = [(0, 0), (2, 0), (0, 2), (2, 2)]
EDGES = [(1, 0), (0, 1), (2, 1), (1, 2)]

X_WIN = Event("XWin")
O_WIN = Event("OWin")
DRAW = Event("Draw")
GAME_OVER = (X_WIN, O_WIN, DRAW)

ANY_X = NamePrefix("X(")
ANY_O = NamePrefix("O(")
ANY_MOVE = AnyOf((ANY_X, ANY_O))


def X(col, row):
    return Event(f"X({col},{row})", {"col": col, "row": row})


def O(col, row):
    return Event(f"O({col},{row})", {"col": col, "row": row})


def move_of(event: Event):
    """``(player, col, row)`` for a move event, else None."""
    if event.name[:2] in ("X(", "O(") and event.data is not None:
        return event.name[0], event.data["col"], event.data["row"]
    return None


def _turns():
    return scripted("Turns", [sync(wait_for=ANY_X, block=ANY_O),
                              sync(wait_for=ANY_O, block=ANY_X)], loop=True)


def _square(c, r):
    marks = [X(c, r), O(c, r)]
    return scripted(f"Square({c},{r})", [sync(wait_for=marks), sync(block=marks)])


def _line_detector(line):
    moves = [f(c, r) for c, r in line for f in (X, O)]
    waiting = sync(wait_for=moves)
    over = sync(block=AnyOf((ANY_MOVE, events_of([DRAW]))))
    announce = {
        "X": sync(request=X_WIN, block=AnyOf((ANY_MOVE, events_of([DRAW])))),
        "O": sync(request=O_WIN, block=AnyOf((ANY_MOVE, events_of([DRAW])))),
    }

    def step(state, resume):
        if resume is START:
            return (0, 0), waiting
        if state == "over":
            return state, over
        if resume in (X_WIN, O_WIN):
            return "over", over
        nx, no = state
        if resume.name[0] == "X":
            nx += 1
        else:
            no += 1
        if nx and no:
            return (nx, no), DONE
        if nx == 3:
            return (nx, no), announce["X"]
        if no == 3:
            return (nx, no), announce["O"]
        return (nx, no), waiting

    name = "Line" + "".join(f"({c},{r})" for c, r in line)
    return BThreadDef(name, step, (0, 0))


def _draw_detector():
    counting = sync(wait_for=AnyOf((ANY_MOVE, events_of(GAME_OVER))))
    announce = sync(request=DRAW, wait_for=[X_WIN, O_WIN])

    def step(marks, resume):
        if resume is START:
            return 0, counting
        if resume in GAME_OVER:
            return marks, DONE
        marks += 1
        return marks, announce if marks == 9 else counting

    return BThreadDef("DrawDetector", step, 0)


def _requester(name, events, hint):
    """Keeps requesting ``events`` at priority ``hint`` until the game ends."""
    statement = sync(request=events, wait_for=list(GAME_OVER), hint=hint)

    def step(state, resume):
        if resume is not START and resume in GAME_OVER:
            return 0, DONE
        return 0, statement

    return BThreadDef(name, step, 0)


def _third_in_line(name, line, target, mark, hint):
    # Waits for ``mark`` on the two other squares in any order, then asks for
    # an O on ``target``. Retires when target is taken or the game ends.
    others = [mark(c, r) for c, r in line if (c, r) != target]
    taken = [X(*target), O(*target)]
    gate = sync(wait_for=others + taken + list(GAME_OVER))
    fire = sync(request=O(*target), wait_for=taken + list(GAME_OVER), hint=hint)

    def step(k, resume):
        if resume is START:
            return 0, gate
        if resume in GAME_OVER or resume in taken:
            return k, DONE
        k += 1
        return k, fire if k == 2 else gate

    return BThreadDef(name, step, 0)


def _line_threats(board, player):
    """Squares that would complete a line for ``player``."""
    out = set()
    for line in LINES:
        vals = [board[r * 3 + c] for c, r in line]
        if vals.count(player) == 2 and vals.count(".") == 1:
            out.add(line[vals.index(".")])
    return out


def _place(board, sq, player):
    c, r = sq
    i = r * 3 + c
    return board[:i] + player + board[i + 1:]


def fork_moves(board: str):
    """O moves chosen by fork tactics on a 9-char board ('.', 'X', 'O'), row major."""
    empties = [sq for sq in SQUARES if board[sq[1] * 3 + sq[0]] == "."]
    o_forks = [m for m in empties if len(_line_threats(_place(board, m, "O"), "O")) >= 2]
    if o_forks:
        return o_forks
    x_forks = [m for m in empties if len(_line_threats(_place(board, m, "X"), "X")) >= 2]
    if not x_forks:
        return []
    safe = []
    for m in empties:
        after = _place(board, m, "O")
        threats = _line_threats(after, "O")
        if threats:
            reply = _place(after, min(threats), "X")
            if len(_line_threats(reply, "X")) < 2:
                safe.append(m)
        elif not any(len(_line_threats(_place(after, x, "X"), "X")) >= 2
                     for x in SQUARES if after[x[1] * 3 + x[0]] == "."):
            safe.append(m)
    return safe or x_forks


def _fork_player(hint=35):
    watch = sync(wait_for=AnyOf((ANY_MOVE, events_of(GAME_OVER))))

    def statement(board):
        if board.count("X") > board.count("O"):
            moves = fork_moves(board)
            if moves:
                return sync(request=[O(c, r) for c, r in moves],
                            wait_for=AnyOf((ANY_MOVE, events_of(GAME_OVER))), hint=hint)
        return watch

    def step(board, resume):
        if resume is START:
            return board, statement(board)
        if resume in GAME_OVER:
            return board, DONE
        player, c, r = move_of(resume)
        board = _place(board, (c, r), player)
        return board, statement(board)

    return BThreadDef("ForkTactics", step, "." * 9)


def x_should_not_win() -> BThreadDef:
    return scripted("R1:XShouldNotWin", [sync(wait_for=X_WIN), Violation("X won.")])


def simulated_opponent() -> BThreadDef:
    return _requester("SimulatedOpponent", [X(c, r) for c, r in SQUARES], 10)


def ttt_rules():
    threads = [_turns()]
    threads += [_square(c, r) for c, r in SQUARES]
    threads += [_line_detector(line) for line in LINES]
    threads.append(_draw_detector())
    return threads


def ttt_strategy():
    threads = []
    for li, line in enumerate(LINES):
        for target in line:
            tag = f"{li}:{target[0]},{target[1]}"
            threads.append(_third_in_line(f"AddThirdO[{tag}]", line, target, O, 50))
            threads.append(_third_in_line(f"PreventThirdX[{tag}]", line, target, X, 40))
    threads.append(_fork_player(35))
    threads.append(_requester("Center", [O(c, r) for c, r in CENTER], 30))
    threads.append(_requester("Corners", [O(c, r) for c, r in CORNERS], 20))
    threads.append(_requester("Edges", [O(c, r) for c, r in EDGES], 10))
    return threads


def build_ttt(include_strategy: bool = True, include_simulated_x: bool = True,
              include_spec: bool = True) -> BProgram:
    """Tic-tac-toe with X moving first.

    Without the strategy group O is played by a naive b-thread that requests
    every square at priority 0, so the game can still progress.
    """
    threads = ttt_rules()
    if include_strategy:
        threads += ttt_strategy()
    else:
        threads.append(_requester("AnyO", [O(c, r) for c, r in SQUARES], 0))
    if include_simulated_x:
        threads.append(simulated_opponent())
    if include_spec:
        threads.append(x_should_not_win())
    return BProgram("ttt", threads)


def board_from_trace(trace) -> str:
    board = "." * 9
    for ev in trace:
        mv = move_of(ev)
        if mv:
            player, c, r = mv
            board = _place(board, (c, r), player)
    return board


def render_board(board: str) -> str:
    rows = []
    for r in range(3):
        rows.append(" " + " | ".join(board[r * 3 + c].replace(".", " ") for c in range(3)))
    return "\n---+---+---\n".join(rows)


def winner(board: str):
    for line in LINES:
        vals = {board[r * 3 + c] for c, r in line}
        if len(vals) == 1 and vals != {"."}:
            return vals.pop()
    return None
