"""Tic-tac-toe on the 3x3 tile grid. Cells use the same 1..9 numbering as tiles."""

from __future__ import annotations

import enum
from dataclasses import dataclass

from ..errors import CellOccupied, OutOfTurn

LINES = ((1, 2, 3), (4, 5, 6), (7, 8, 9),
         (1, 4, 7), (2, 5, 8), (3, 6, 9),
         (1, 5, 9), (3, 5, 7))


class Mark(str, enum.Enum):
    EMPTY = "."
    X = "X"
    O = "O"


class Outcome(str, enum.Enum):
    NONE = "none"
    X = "X"
    O = "O"
    DRAW = "draw"


@dataclass(frozen=True)
class TicTacToeBoard:
    cells: tuple = (Mark.EMPTY,) * 9
    next: Mark = Mark.X

    def __post_init__(self):
        if len(self.cells) != 9:
            raise ValueError("board needs 9 cells")
        xs = sum(c is Mark.X for c in self.cells)
        os_ = sum(c is Mark.O for c in self.cells)
        if xs - os_ not in (0, 1):
            raise ValueError(f"impossible mark counts X={xs} O={os_}")

    def cell(self, i: int) -> Mark:
        return self.cells[i - 1]

    def free(self) -> list[int]:
        return [i for i in range(1, 10) if self.cells[i - 1] is Mark.EMPTY]

    def __str__(self) -> str:
        rows = ["".join(c.value for c in self.cells[r:r + 3]) for r in (0, 3, 6)]
        return "/".join(rows)


def ttt_apply(board: TicTacToeBoard, cell: int, mark: Mark) -> TicTacToeBoard:
    if not 1 <= cell <= 9:
        raise ValueError(f"cell must be 1..9, got {cell}")
    mark = Mark(mark)
    if mark is not board.next:
        raise OutOfTurn(f"{mark.value} played but it is {board.next.value}'s turn")
    if board.cells[cell - 1] is not Mark.EMPTY:
        raise CellOccupied(f"cell {cell} already holds {board.cells[cell - 1].value}")
    cells = list(board.cells)
    cells[cell - 1] = mark
    return TicTacToeBoard(tuple(cells), Mark.O if mark is Mark.X else Mark.X)


def ttt_winner(board: TicTacToeBoard) -> Outcome:
    for a, b, c in LINES:
        m = board.cells[a - 1]
        if m is not Mark.EMPTY and m is board.cells[b - 1] and m is board.cells[c - 1]:
            return Outcome(m.value)
    if all(c is not Mark.EMPTY for c in board.cells):
        return Outcome.DRAW
    return Outcome.NONE


def replay(moves) -> tuple[TicTacToeBoard, Outcome]:
    """Apply ``(cell, mark)`` pairs from an empty board; raises on any illegal move."""
    board = TicTacToeBoard()
    for cell, mark in moves:
        if ttt_winner(board) is not Outcome.NONE:
            raise OutOfTurn("move after the game ended")
        board = ttt_apply(board, cell, mark)
    return board, ttt_winner(board)
