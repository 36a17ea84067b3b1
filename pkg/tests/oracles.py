"""Independent reference models used as test oracles.

Nothing here imports the engine's stepping code: each oracle re-derives the
expected answer from the problem statement directly.
"""
import random
from collections import deque
from functools import lru_cache

# ---------------------------------------------------------------------------
# Dining philosophers as a plain transition system.
# pc: 0 thinking, 1 holds right, 2 holds both, 3 released left (still holds right)


def philosopher_moves(pcs):
    n = len(pcs)
    out = []
    for i, pc in enumerate(pcs):
        right_nb = pcs[(i + 1) % n]   # shares my right stick as its left
        left_nb = pcs[(i - 1) % n]    # shares my left stick as its right
        if pc == 0 and right_nb != 2:
            out.append((f"Pick{i + 1}R", i, 1))
        elif pc == 1 and left_nb not in (1, 2, 3):
            out.append((f"Pick{i + 1}L", i, 2))
        elif pc == 2:
            out.append((f"Rel{i + 1}L", i, 3))
        elif pc == 3:
            out.append((f"Rel{i + 1}R", i, 0))
    return out


def philosopher_reachable(n):
    root = (0,) * n
    seen = {root}
    todo = deque([root])
    while todo:
        s = todo.popleft()
        for _, i, nxt in philosopher_moves(s):
            t = s[:i] + (nxt,) + s[i + 1:]
            if t not in seen:
                seen.add(t)
                todo.append(t)
    return seen


def philosopher_deadlocks(n):
    return [s for s in philosopher_reachable(n) if not philosopher_moves(s)]


# ---------------------------------------------------------------------------
# Tic-tac-toe minimax (X first). Boards are 9-char strings, row major.

LINES = [(0, 1, 2), (3, 4, 5), (6, 7, 8), (0, 3, 6), (1, 4, 7), (2, 5, 8), (0, 4, 8), (2, 4, 6)]


def ttt_winner(board):
    for a, b, c in LINES:
        if board[a] != "." and board[a] == board[b] == board[c]:
            return board[a]
    return None


@lru_cache(maxsize=None)
def minimax(board):
    """+1 X wins, 0 draw, -1 O wins, under perfect play from here."""
    w = ttt_winner(board)
    if w:
        return 1 if w == "X" else -1
    if "." not in board:
        return 0
    to_move = "X" if board.count("X") == board.count("O") else "O"
    vals = [minimax(board[:i] + to_move + board[i + 1:]) for i in range(9) if board[i] == "."]
    return max(vals) if to_move == "X" else min(vals)


@lru_cache(maxsize=None)
def x_can_win_somehow(board):
    """Some legal continuation (any O play) ends with three Xs."""
    w = ttt_winner(board)
    if w:
        return w == "X"
    if "." not in board:
        return False
    to_move = "X" if board.count("X") == board.count("O") else "O"
    return any(x_can_win_somehow(board[:i] + to_move + board[i + 1:])
               for i in range(9) if board[i] == ".")


# ---------------------------------------------------------------------------
# Mazes


def grid_bfs(rows):
    """Shortest start-to-target distance in moves over a list of equal-width strings, or None."""
    h, w = len(rows), len(rows[0])
    start = next((c, r) for r in range(h) for c in range(w) if rows[r][c] == "s")
    dist = {start: 0}
    todo = deque([start])
    while todo:
        c, r = todo.popleft()
        if rows[r][c] == "t":
            return dist[(c, r)]
        for nc, nr in ((c + 1, r), (c - 1, r), (c, r + 1), (c, r - 1)):
            if 0 <= nc < w and 0 <= nr < h and rows[nr][nc] in " st" and (nc, nr) not in dist:
                dist[(nc, nr)] = dist[(c, r)] + 1
                todo.append((nc, nr))
    return None


def random_maze(rng: random.Random, max_w=8, max_h=8, wall_density=0.4):
    w = rng.randint(2, max_w)
    h = rng.randint(1, max_h)
    cells = [["#" if rng.random() < wall_density else " " for _ in range(w)] for _ in range(h)]
    spots = rng.sample([(c, r) for r in range(h) for c in range(w)], k=min(w * h, 3))
    sc, sr = spots[0]
    cells[sr][sc] = "s"
    for tc, tr in spots[1:1 + rng.randint(1, len(spots) - 1)]:
        cells[tr][tc] = "t"
    return ["".join(row) for row in cells]


# ---------------------------------------------------------------------------
# Random synchronization snapshots


def random_snapshot(rng: random.Random, alphabet=6, max_threads=5):
    """A random registration-ordered snapshot over a small event alphabet."""
    from bpengine.core import Event, NamePrefix, AllExcept, sync
    from bpengine.strategy import SnapshotEntry

    pool = [Event(f"E{i}") for i in range(alphabet)]
    entries = []
    for t in range(rng.randint(0, max_threads)):
        request = rng.sample(pool, rng.randint(0, 3))
        roll = rng.random()
        if roll < 0.4:
            block = None
        elif roll < 0.8:
            block = rng.sample(pool, rng.randint(1, 2))
        elif roll < 0.9:
            block = NamePrefix(f"E{rng.randrange(alphabet)}")
        else:
            block = AllExcept(rng.sample(pool, rng.randint(0, 3)))
        hint = rng.choice([None, 0, 10, 40, 50])
        entries.append(SnapshotEntry(f"t{t}", rng.randint(0, 3),
                                     sync(request=request, block=block, hint=hint)))
    return entries
