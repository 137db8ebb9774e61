"""Multiset sequences over a finite abelian group.

Sequences are unordered multisets of group elements.  Entries are kept sorted
lexicographically by coordinates with positive multiplicities, which makes
serialization deterministic and search deduplication easy.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Mapping

from .errors import SequenceFormatError
from .groups import AbelianGroup, GroupElement

__all__ = ["GSeq", "sigma", "load_sequence", "save_sequence"]


@dataclass(frozen=True)
class GSeq:
    """A finite multiset of group elements with multiplicities."""

    group: AbelianGroup
    entries: tuple[tuple[GroupElement, int], ...]

    @staticmethod
    def make(group: AbelianGroup, items: Iterable) -> "GSeq":
        """Build from (element, mult) pairs or bare elements; merges and sorts."""
        counts: dict[GroupElement, int] = {}
        for item in items:
            if isinstance(item, GroupElement):
                elem, mult = item, 1
            else:
                elem, mult = item
            if elem.group != group:
                raise ValueError("element from a different group")
            if mult < 0:
                raise ValueError(f"negative multiplicity {mult}")
            if mult:
                counts[elem] = counts.get(elem, 0) + mult
        entries = tuple(sorted(counts.items(), key=lambda kv: kv[0].coords))
        return GSeq(group, entries)

    @staticmethod
    def from_coords(group: AbelianGroup, pairs: Iterable[tuple[Iterable[int], int]]) -> "GSeq":
        return GSeq.make(group, ((group.element(c), m) for c, m in pairs))

    @staticmethod
    def empty(group: AbelianGroup) -> "GSeq":
        return GSeq(group, ())

    def __len__(self) -> int:
        return sum(m for _, m in self.entries)

    def sum(self) -> GroupElement:
        total = self.group.identity
        for elem, mult in self.entries:
            total = total + elem.scale(mult)
        return total

    def multiplicity(self, elem: GroupElement) -> int:
        for e, m in self.entries:
            if e == elem:
                return m
        return 0

    def support(self) -> tuple[GroupElement, ...]:
        return tuple(e for e, _ in self.entries)

    def expansion(self) -> tuple[GroupElement, ...]:
        """All terms with repetition, in canonical order."""
        out: list[GroupElement] = []
        for elem, mult in self.entries:
            out.extend([elem] * mult)
        return tuple(out)

    def counts_by_index(self) -> dict[int, int]:
        return {self.group.encode(e): m for e, m in self.entries}

    def is_subsequence_of(self, other: "GSeq") -> bool:
        if self.group != other.group:
            return False
        return all(m <= other.multiplicity(e) for e, m in self.entries)

    def concat(self, other: "GSeq") -> "GSeq":
        if self.group != other.group:
            raise ValueError("cannot concatenate sequences over different groups")
        return GSeq.make(self.group, list(self.entries) + list(other.entries))

    def remove(self, other: "GSeq") -> "GSeq":
        if self.group != other.group:
            raise ValueError("cannot remove a sequence over a different group")
        if not other.is_subsequence_of(self):
            raise ValueError("not a subsequence: removal would need negative multiplicity")
        counts = {e: m for e, m in self.entries}
        for e, m in other.entries:
            counts[e] -= m
        return GSeq.make(self.group, counts.items())

    def take_prefix(self, length: int) -> tuple["GSeq", "GSeq"]:
        """Split off the first ``length`` terms in canonical order."""
        if not 0 <= length <= len(self):
            raise ValueError(f"prefix length {length} out of range")
        head: list[tuple[GroupElement, int]] = []
        rest: list[tuple[GroupElement, int]] = []
        todo = length
        for elem, mult in self.entries:
            c = min(mult, todo)
            if c:
                head.append((elem, c))
            if mult - c:
                rest.append((elem, mult - c))
            todo -= c
        return GSeq.make(self.group, head), GSeq.make(self.group, rest)

    # -- serialization --------------------------------------------------------

    def to_json_dict(self) -> dict:
        return {
            "group": list(self.group.factors),
            "elements": [{"coords": list(e.coords), "mult": m} for e, m in self.entries],
        }

    @staticmethod
    def from_json_dict(data: Mapping, group: AbelianGroup | None = None) -> "GSeq":
        try:
            factors = tuple(int(f) for f in data["group"])
            raw = list(data["elements"])
        except (KeyError, TypeError, ValueError) as exc:
            raise SequenceFormatError(f"sequence object missing or malformed fields: {exc}") from None
        file_group = AbelianGroup(factors)
        if group is not None and group != file_group:
            raise SequenceFormatError(
                f"sequence group {file_group.spec_text()} does not match expected {group.spec_text()}"
            )
        target = group or file_group
        entries: list[tuple[GroupElement, int]] = []
        prev: tuple[int, ...] | None = None
        for item in raw:
            try:
                coords = tuple(int(c) for c in item["coords"])
                mult = int(item["mult"])
            except (KeyError, TypeError, ValueError) as exc:
                raise SequenceFormatError(f"malformed element entry {item!r}: {exc}") from None
            if len(coords) != len(target.factors):
                raise SequenceFormatError(f"coords {coords} have wrong arity for group {target.spec_text()}")
            if any(not 0 <= c < f for c, f in zip(coords, target.factors)):
                raise SequenceFormatError(f"coords {coords} out of range for group {target.spec_text()}")
            if mult < 1:
                raise SequenceFormatError(f"multiplicity must be >= 1, got {mult}")
            if prev is not None and coords <= prev:
                raise SequenceFormatError("elements must be strictly increasing in lexicographic order")
            prev = coords
            entries.append((GroupElement(target, coords), mult))
        return GSeq(target, tuple(entries))

    def save(self, path) -> None:
        Path(path).write_text(json.dumps(self.to_json_dict(), indent=2) + "\n")

    @staticmethod
    def load(path, group: AbelianGroup | None = None) -> "GSeq":
        try:
            data = json.loads(Path(path).read_text())
        except json.JSONDecodeError as exc:
            raise SequenceFormatError(f"invalid JSON in {path}: {exc}") from None
        return GSeq.from_json_dict(data, group=group)

    def __repr__(self) -> str:
        body = " ".join(f"{e!r}^{m}" if m > 1 else repr(e) for e, m in self.entries)
        return f"GSeq[{self.group.spec_text()}: {body or 'empty'}]"


def sigma(seq: GSeq) -> GroupElement:
    """Sum of all terms of the sequence (the empty sequence sums to 0)."""
    return seq.sum()


def save_sequence(seq: GSeq, path) -> None:
    seq.save(path)


def load_sequence(path, group: AbelianGroup | None = None) -> GSeq:
    return GSeq.load(path, group=group)
