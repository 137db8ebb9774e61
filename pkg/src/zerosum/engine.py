"""Exact zero-sum reachability for sequences over a finite abelian group.

The core object is a table over (group element, subsequence length) telling
which sums are realized by subsequences of each length.  It is built by a
bounded-multiplicity knapsack over the group: multiplicities are split into
binary chunks (1, 2, 4, ...) and each chunk is a 0/1 item whose value is the
chunk-size multiple of the element.  A brute-force subset enumeration is kept
alongside as an independent oracle for cross-validation.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable

import numpy as np

from .errors import ResourceCapExceeded
from .groups import AbelianGroup, GroupElement
from .sequences import GSeq

__all__ = [
    "DEFAULT_MAX_CELLS",
    "ReachTable",
    "IncrementalReach",
    "build_reach",
    "zero_sum_lengths",
    "find_zero_sum",
    "naive_zero_sum_lengths",
]

DEFAULT_MAX_CELLS = 10**9

NAIVE_LIMIT = 20


def _binary_chunks(mult: int) -> list[int]:
    """Split a multiplicity into 1, 2, 4, ... so chunk subsets cover 0..mult."""
    chunks = []
    step = 1
    while mult > 0:
        c = min(step, mult)
        chunks.append(c)
        mult -= c
        step *= 2
    return chunks


def _coords_matrix(group: AbelianGroup) -> np.ndarray:
    fs = group.factors
    n = group.order
    mat = np.zeros((n, len(fs)), dtype=np.int64)
    for j, (f, w) in enumerate(zip(fs, group._weights)):
        mat[:, j] = (np.arange(n) // w) % f
    return mat


def _sub_perm(group: AbelianGroup, coords_mat: np.ndarray, elem: GroupElement) -> np.ndarray:
    """Index permutation g -> g - elem (for row shifts in the knapsack update)."""
    fs = np.array(group.factors, dtype=np.int64)
    shifted = (coords_mat - np.array(elem.coords, dtype=np.int64)) % np.maximum(fs, 1)
    weights = np.array(group._weights, dtype=np.int64)
    if shifted.shape[1] == 0:
        return np.zeros(len(shifted), dtype=np.int64)
    return shifted @ weights


def _estimate_cells(seq: GSeq) -> int:
    n = seq.group.order
    length = len(seq)
    total = 0
    for _, mult in seq.entries:
        for c in _binary_chunks(mult):
            total += (length + 1 - c) * n
    return total


def _apply_item(table: np.ndarray, chunk: int, perm: np.ndarray) -> None:
    # 0/1 item: descending row order so the item is used at most once
    for t in range(table.shape[0] - 1, chunk - 1, -1):
        np.logical_or(table[t], table[t - chunk][perm], out=table[t])


@dataclass
class ReachTable:
    """Exact predicate table: entry (t, g) is True iff some T|S has |T|=t, sum(T)=g."""

    group: AbelianGroup
    max_len: int
    table: np.ndarray

    def reachable(self, elem: GroupElement | int, length: int) -> bool:
        idx = elem if isinstance(elem, int) else self.group.encode(elem)
        if not 0 <= length <= self.max_len:
            return False
        return bool(self.table[length, idx])

    def zero_lengths(self) -> set[int]:
        return {int(t) for t in np.nonzero(self.table[:, 0])[0]}


def build_reach(seq: GSeq, *, max_cells: int = DEFAULT_MAX_CELLS) -> ReachTable:
    """Build the full reachability table for S by bounded knapsack over the group."""
    group = seq.group
    est = _estimate_cells(seq)
    if est > max_cells:
        raise ResourceCapExceeded(
            f"reach table would need ~{est} cell updates (cap {max_cells})",
            estimated=est,
            cap=max_cells,
        )
    length = len(seq)
    table = np.zeros((length + 1, group.order), dtype=bool)
    table[0, 0] = True
    coords_mat = _coords_matrix(group)
    for elem, mult in seq.entries:
        for chunk in _binary_chunks(mult):
            perm = _sub_perm(group, coords_mat, elem.scale(chunk))
            _apply_item(table, chunk, perm)
    return ReachTable(group=group, max_len=length, table=table)


def zero_sum_lengths(seq: GSeq, *, max_cells: int = DEFAULT_MAX_CELLS) -> set[int]:
    """All t such that some subsequence of length t sums to zero (always contains 0)."""
    return build_reach(seq, max_cells=max_cells).zero_lengths()


def _suffix_tables(seq: GSeq, max_cells: int) -> list[np.ndarray]:
    """tables[i] covers entries[i:]; tables[len(entries)] is the empty-sequence table."""
    group = seq.group
    est = _estimate_cells(seq) * max(len(seq.entries), 1)
    if est > max_cells:
        raise ResourceCapExceeded(
            f"witness recovery would need ~{est} cell updates (cap {max_cells})",
            estimated=est,
            cap=max_cells,
        )
    length = len(seq)
    coords_mat = _coords_matrix(group)
    base = np.zeros((length + 1, group.order), dtype=bool)
    base[0, 0] = True
    tables = [base]
    for elem, mult in reversed(seq.entries):
        nxt = tables[-1].copy()
        for chunk in _binary_chunks(mult):
            perm = _sub_perm(group, coords_mat, elem.scale(chunk))
            _apply_item(nxt, chunk, perm)
        tables.append(nxt)
    tables.reverse()
    return tables


def find_zero_sum(
    seq: GSeq, lengths: Iterable[int], *, max_cells: int = DEFAULT_MAX_CELLS
) -> GSeq | None:
    """Deterministic witness with zero sum and length in ``lengths``, or None.

    Smallest admissible length is tried first; recovery walks elements in
    canonical order taking as many copies of the smaller elements as the
    remaining table allows, so the witness is reproducible.
    """
    wanted = sorted({int(t) for t in lengths if 0 <= int(t) <= len(seq)})
    if not wanted:
        return None
    tables = _suffix_tables(seq, max_cells)
    group = seq.group
    for target in wanted:
        if not tables[0][target, 0]:
            continue
        take: list[tuple[GroupElement, int]] = []
        t = target
        need = group.identity
        for i, (elem, mult) in enumerate(seq.entries):
            nxt = tables[i + 1]
            for c in range(min(mult, t), -1, -1):
                rem_need = need - elem.scale(c)
                if nxt[t - c, group.encode(rem_need)]:
                    if c:
                        take.append((elem, c))
                    t -= c
                    need = rem_need
                    break
            else:
                raise AssertionError("reach table inconsistent during recovery")
        assert t == 0 and need.is_identity
        return GSeq.make(group, take)
    return None


def naive_zero_sum_lengths(seq: GSeq) -> set[int]:
    """Independent oracle: enumerate all 2^|S| index subsets (|S| <= 20 only)."""
    length = len(seq)
    if length > NAIVE_LIMIT:
        raise ValueError(f"naive enumeration limited to |S| <= {NAIVE_LIMIT}, got {length}")
    group = seq.group
    elems = seq.expansion()
    add_for: list[list[int]] = []
    for e in elems:
        add_for.append([group.encode(group.decode(g) + e) for g in range(group.order)])
    total = 1 << length
    sums = [0] * total
    sizes = [0] * total
    out = {0}
    for mask in range(1, total):
        low = mask & -mask
        i = low.bit_length() - 1
        rest = mask ^ low
        s = add_for[i][sums[rest]]
        sums[mask] = s
        sizes[mask] = sizes[rest] + 1
        if s == 0:
            out.add(sizes[mask])
    return out


class IncrementalReach:
    """Reach rows as integer bitmasks supporting push/pop of single elements.

    This is the depth-first-search core used by the exhaustive invariant
    searches: pushing one element costs one shifted-OR per occupied length row,
    and backtracking is a pop.  Bit g of row t is set iff some subsequence of
    the pushed multiset has length t and sum equal to element #g (index 0 is
    the identity).
    """

    def __init__(self, group: AbelianGroup, *, max_cells: int = DEFAULT_MAX_CELLS):
        self.group = group
        self.n = group.order
        self._perms: dict[int, list[int]] = {}
        self._stack: list[list[int]] = [[1]]
        self._updates = 0
        self._max_cells = max_cells

    def _perm(self, idx: int) -> list[int]:
        perm = self._perms.get(idx)
        if perm is None:
            g = self.group
            e = g.decode(idx)
            perm = [g.encode(g.decode(i) + e) for i in range(self.n)]
            self._perms[idx] = perm
        return perm

    @property
    def depth(self) -> int:
        return len(self._stack) - 1

    def push(self, idx: int) -> None:
        rows = self._stack[-1]
        perm = self._perm(idx)
        new = [rows[0]]
        for t in range(1, len(rows) + 1):
            base = rows[t] if t < len(rows) else 0
            prev = rows[t - 1]
            shifted = 0
            while prev:
                low = prev & -prev
                shifted |= 1 << perm[low.bit_length() - 1]
                prev ^= low
            new.append(base | shifted)
        self._updates += len(new) * self.n
        if self._updates > self._max_cells:
            raise ResourceCapExceeded(
                f"incremental search exceeded {self._max_cells} cell updates",
                estimated=self._updates,
                cap=self._max_cells,
            )
        self._stack.append(new)

    def pop(self) -> None:
        if len(self._stack) == 1:
            raise IndexError("pop from empty reach stack")
        self._stack.pop()

    def zero_lengths(self) -> set[int]:
        rows = self._stack[-1]
        return {t for t in range(len(rows)) if rows[t] & 1}

    def has_zero_of(self, lengths: Iterable[int]) -> bool:
        rows = self._stack[-1]
        return any(0 <= t < len(rows) and rows[t] & 1 for t in lengths)

    def has_nonempty_zero(self) -> bool:
        rows = self._stack[-1]
        return any(rows[t] & 1 for t in range(1, len(rows)))
