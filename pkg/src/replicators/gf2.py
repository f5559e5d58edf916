"""Dense GF(2) elimination on rows stored as Python ints (bit j = column j)."""

from __future__ import annotations

from typing import Iterable


def rank(rows: Iterable[int]) -> int:
    pivots: dict[int, int] = {}
    for row in rows:
        while row:
            top = row.bit_length() - 1
            basis = pivots.get(top)
            if basis is None:
                pivots[top] = row
                break
            row ^= basis
    return len(pivots)


def reduce(rows: Iterable[int]) -> dict[int, int]:
    """Echelon basis keyed by leading bit."""
    pivots: dict[int, int] = {}
    for row in rows:
        while row:
            top = row.bit_length() - 1
            basis = pivots.get(top)
            if basis is None:
                pivots[top] = row
                break
            row ^= basis
    return pivots


def in_span(pivots: dict[int, int], row: int) -> bool:
    while row:
        basis = pivots.get(row.bit_length() - 1)
        if basis is None:
            return False
        row ^= basis
    return True


def transpose(rows: list[int], ncols: int) -> list[int]:
    out = [0] * ncols
    for i, row in enumerate(rows):
        while row:
            low = row & -row
            out[low.bit_length() - 1] |= 1 << i
            row ^= low
    return out
