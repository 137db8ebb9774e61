"""Exact zero-sum invariants at desk scale.

Values are certified by exhaustive search over multisets in canonical
nondecreasing element order with incremental reach-table pruning: a branch is
abandoned as soon as the partial multiset acquires a forbidden zero-sum
length, which is sound because the reachable-lengths set only grows when a
sequence is extended.  The longest surviving multiset is a maximal avoider and
pins the invariant exactly one above its length.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Iterable, Mapping

from .engine import DEFAULT_MAX_CELLS, IncrementalReach, find_zero_sum
from .errors import CounterexampleCandidate, ResourceCapExceeded
from .groups import AbelianGroup, GroupElement, davenport_olson
from .sequences import GSeq

__all__ = [
    "LengthSpec",
    "InvariantRecord",
    "SearchOutcome",
    "max_avoiding_length",
    "exact_s",
    "exact_davenport",
    "exact_threshold_ell",
    "threshold_scan",
    "extremal_witness_lower",
    "verify_record",
]


@dataclass(frozen=True)
class LengthSpec:
    """A finite set of admissible zero-sum lengths, absolute or scaled.

    Scaled form keeps the multiplier set and its unit so reports can show both;
    ``resolve()`` gives the absolute lengths either way.  Zero is never an
    admissible length here.
    """

    absolute: frozenset[int] | None = None
    scaled: tuple[frozenset[int], int] | None = None

    def __post_init__(self) -> None:
        if (self.absolute is None) == (self.scaled is None):
            raise ValueError("exactly one of absolute/scaled must be given")
        values = self.absolute if self.absolute is not None else self.scaled[0]
        if not values:
            raise ValueError("length spec must be nonempty")
        if any(v < 1 for v in values):
            raise ValueError("admissible lengths/multipliers must be >= 1")
        if self.scaled is not None and self.scaled[1] < 1:
            raise ValueError("scale unit must be >= 1")

    @staticmethod
    def of(lengths: Iterable[int]) -> "LengthSpec":
        return LengthSpec(absolute=frozenset(int(v) for v in lengths))

    @staticmethod
    def scaled_by(multipliers: Iterable[int], unit: int) -> "LengthSpec":
        return LengthSpec(scaled=(frozenset(int(v) for v in multipliers), int(unit)))

    def resolve(self) -> frozenset[int]:
        if self.absolute is not None:
            return self.absolute
        ks, unit = self.scaled
        return frozenset(k * unit for k in ks)

    def describe(self) -> str:
        if self.absolute is not None:
            return "{" + ",".join(str(v) for v in sorted(self.absolute)) + "}"
        ks, unit = self.scaled
        return "{" + ",".join(str(v) for v in sorted(ks)) + "}*" + str(unit)

    def to_json_dict(self) -> dict:
        if self.absolute is not None:
            return {"kind": "absolute", "lengths": sorted(self.absolute)}
        ks, unit = self.scaled
        return {"kind": "scaled", "multipliers": sorted(ks), "unit": unit}

    @staticmethod
    def from_json_dict(data: Mapping) -> "LengthSpec":
        if data["kind"] == "absolute":
            return LengthSpec.of(data["lengths"])
        return LengthSpec.scaled_by(data["multipliers"], data["unit"])


@dataclass(frozen=True)
class InvariantRecord:
    """A computed invariant with status, provenance and optional witness."""

    group: AbelianGroup
    quantity: str  # "s_K" | "davenport" | "ell"
    lengths: LengthSpec | None
    value: int
    status: str  # "exact" | "upper_bound" | "lower_bound"
    provenance: str  # "search" | "theorem:<id>" | "construction"
    witness: GSeq | None = None

    def __post_init__(self) -> None:
        if self.quantity not in ("s_K", "davenport", "ell"):
            raise ValueError(f"unknown quantity {self.quantity!r}")
        if self.status not in ("exact", "upper_bound", "lower_bound"):
            raise ValueError(f"unknown status {self.status!r}")
        if self.value < 1:
            raise ValueError("invariant values are >= 1")

    def to_json_dict(self) -> dict:
        return {
            "group": list(self.group.factors),
            "quantity": self.quantity,
            "lengths": None if self.lengths is None else self.lengths.to_json_dict(),
            "value": self.value,
            "status": self.status,
            "provenance": self.provenance,
            "witness": None if self.witness is None else self.witness.to_json_dict(),
        }

    @staticmethod
    def from_json_dict(data: Mapping) -> "InvariantRecord":
        group = AbelianGroup(tuple(int(f) for f in data["group"]))
        lengths = None if data.get("lengths") is None else LengthSpec.from_json_dict(data["lengths"])
        witness = None if data.get("witness") is None else GSeq.from_json_dict(data["witness"])
        return InvariantRecord(
            group=group,
            quantity=data["quantity"],
            lengths=lengths,
            value=int(data["value"]),
            status=data["status"],
            provenance=data["provenance"],
            witness=witness,
        )


@dataclass
class SearchOutcome:
    max_len: int
    witness: GSeq
    cap_exceeded: bool
    nodes: int = 0


class _CapHit(Exception):
    pass


def _canonical_first_indices(group: AbelianGroup) -> list[int]:
    """Indices of elements that are lexicographically least in their orbit under
    coordinate permutations preserving factor sizes (a sound symmetry cut for
    the first chosen element)."""
    blocks: dict[int, list[int]] = {}
    for pos, f in enumerate(group.factors):
        blocks.setdefault(f, []).append(pos)
    out = []
    for idx in range(group.order):
        coords = group.decode(idx).coords
        ok = True
        for positions in blocks.values():
            vals = [coords[p] for p in positions]
            if vals != sorted(vals):
                ok = False
                break
        if ok:
            out.append(idx)
    return out


def _avoider_search(
    group: AbelianGroup,
    forbidden: frozenset[int] | None,
    cap: int,
    *,
    normalize_first: bool = False,
    max_cells: int = DEFAULT_MAX_CELLS,
    skip_identity: bool = False,
) -> SearchOutcome:
    """Longest multiset whose zero-sum lengths avoid ``forbidden``.

    ``forbidden=None`` forbids every nonempty zero-sum length (the search for
    zero-sum-free sequences).  Hitting depth ``cap`` aborts with the cap-length
    avoider as witness.
    """
    inc = IncrementalReach(group, max_cells=max_cells)
    order = list(range(group.order))
    if skip_identity:
        order = order[1:]
    allowed = set(order)
    first = [i for i in _canonical_first_indices(group) if i in allowed] if normalize_first else order
    best_len = 0
    best: list[int] = []
    chosen: list[int] = []
    nodes = 0

    def bad_after_push() -> bool:
        if forbidden is None:
            return inc.has_nonempty_zero()
        return inc.has_zero_of(forbidden)

    def dfs(start_pos: int) -> None:
        nonlocal best_len, best, nodes
        depth = inc.depth
        if depth > best_len:
            best_len = depth
            best = list(chosen)
        if depth >= cap:
            raise _CapHit
        candidates = first if depth == 0 else order[start_pos:]
        base = 0 if depth == 0 else start_pos
        for offset, idx in enumerate(candidates):
            nodes += 1
            inc.push(idx)
            ok = not bad_after_push()
            if ok:
                chosen.append(idx)
                pos = order.index(idx) if depth == 0 else base + offset
                dfs(pos)
                chosen.pop()
            inc.pop()

    cap_hit = False
    try:
        dfs(0)
    except _CapHit:
        cap_hit = True
        best_len = len(chosen)
        best = list(chosen)
    witness = GSeq.make(group, (group.decode(i) for i in best))
    return SearchOutcome(max_len=best_len, witness=witness, cap_exceeded=cap_hit, nodes=nodes)


def max_avoiding_length(
    group: AbelianGroup,
    lengths: LengthSpec,
    cap: int,
    *,
    normalize_first: bool = False,
    max_cells: int = DEFAULT_MAX_CELLS,
) -> SearchOutcome:
    """Longest multiset over G with no zero-sum subsequence length in ``lengths``.

    Returns a cap-exceeded outcome when an avoider of length ``cap`` exists.
    """
    if cap < 1:
        raise ValueError("cap must be >= 1")
    return _avoider_search(
        group,
        lengths.resolve(),
        cap,
        normalize_first=normalize_first,
        max_cells=max_cells,
    )


def _default_cap_s(group: AbelianGroup, lengths: LengthSpec) -> tuple[int, str]:
    from . import bounds  # local import: bounds builds on these record types

    resolved = lengths.resolve()
    q = group.exponent
    if not any(t % q == 0 for t in resolved):
        raise ValueError(
            "no admissible length is a multiple of exp(G); the invariant is infinite "
            "(a single repeated element of maximal order avoids every such length)"
        )
    candidates: list[tuple[int, str]] = []
    for result in bounds.upper_bounds_for_spec(group, lengths):
        if result.applicable and result.value is not None:
            candidates.append((result.value, f"theorem:{result.theorem_id}"))
    if candidates:
        return min(candidates)
    if group.is_pgroup:
        dav = davenport_olson(group)
    elif group.order <= 64:
        dav = exact_davenport(group).value
    else:
        raise ValueError("no applicable bound and group too large for a default cap; pass cap explicitly")
    kq = min(t for t in resolved if t % q == 0)
    return kq + dav - 1 + 8, "conjecture+8"


def exact_s(
    group: AbelianGroup,
    lengths: LengthSpec,
    cap: int | None = None,
    *,
    normalize_first: bool = False,
    max_cells: int = DEFAULT_MAX_CELLS,
) -> InvariantRecord:
    """Exact value of the smallest length forcing a zero-sum subsequence with
    length in ``lengths``, certified by a maximal avoider witness."""
    if cap is None:
        cap_value, cap_source = _default_cap_s(group, lengths)
    else:
        cap_value, cap_source = cap, "user"
    outcome = max_avoiding_length(
        group, lengths, cap_value, normalize_first=normalize_first, max_cells=max_cells
    )
    if outcome.cap_exceeded:
        if cap_source.startswith("theorem:"):
            raise CounterexampleCandidate(
                f"avoider of length {cap_value} over {group.spec_text()} contradicts proven bound "
                f"{cap_source} <= {cap_value}",
                artifact={
                    "group": list(group.factors),
                    "lengths": lengths.to_json_dict(),
                    "bound": cap_value,
                    "bound_source": cap_source,
                    "avoider": outcome.witness.to_json_dict(),
                },
            )
        return InvariantRecord(
            group=group,
            quantity="s_K",
            lengths=lengths,
            value=cap_value + 1,
            status="lower_bound",
            provenance="search",
            witness=outcome.witness,
        )
    return InvariantRecord(
        group=group,
        quantity="s_K",
        lengths=lengths,
        value=outcome.max_len + 1,
        status="exact",
        provenance="search",
        witness=outcome.witness,
    )


def exact_davenport(
    group: AbelianGroup,
    cap: int | None = None,
    *,
    max_cells: int = DEFAULT_MAX_CELLS,
) -> InvariantRecord:
    """Davenport constant by search: 1 + the longest zero-sum-free length."""
    if cap is None:
        if group.is_pgroup:
            cap_value, cap_source = davenport_olson(group), "theorem:olson"
        else:
            # D(G) <= |G|: among |G| prefix sums of any ordering two coincide
            cap_value, cap_source = group.order, "pigeonhole"
    else:
        cap_value, cap_source = cap, "user"
    outcome = _avoider_search(group, None, cap_value, max_cells=max_cells, skip_identity=True)
    if outcome.cap_exceeded:
        if cap_source != "user":
            raise CounterexampleCandidate(
                f"zero-sum-free sequence of length {cap_value} over {group.spec_text()} contradicts "
                f"{cap_source}",
                artifact={
                    "group": list(group.factors),
                    "quantity": "davenport",
                    "bound": cap_value,
                    "bound_source": cap_source,
                    "avoider": outcome.witness.to_json_dict(),
                },
            )
        return InvariantRecord(
            group=group,
            quantity="davenport",
            lengths=None,
            value=cap_value + 1,
            status="lower_bound",
            provenance="search",
            witness=outcome.witness,
        )
    return InvariantRecord(
        group=group,
        quantity="davenport",
        lengths=None,
        value=outcome.max_len + 1,
        status="exact",
        provenance="search",
        witness=outcome.witness,
    )


def threshold_scan(
    group: AbelianGroup,
    k_max: int,
    cap: int | None = None,
    *,
    max_cells: int = DEFAULT_MAX_CELLS,
) -> list[InvariantRecord]:
    """Exact s at lengths k*exp(G) for k = 1..k_max."""
    q = group.exponent
    return [
        exact_s(group, LengthSpec.scaled_by({k}, q), cap, max_cells=max_cells)
        for k in range(1, k_max + 1)
    ]


def ell_from_scan(group: AbelianGroup, records: list[InvariantRecord], k_max: int) -> InvariantRecord:
    """Combine exact per-k values into the equality-threshold record.

    The status is exact when coverage beyond the scan is forced (k*exp(G)
    reaching |G|, or the proved equality threshold); otherwise the result is a
    lower bound for the true threshold, since equality could fail beyond k_max.
    """
    if not group.is_pgroup:
        raise ValueError("threshold computation requires a p-group (needs the Davenport formula)")
    if k_max < 1 or len(records) < k_max:
        raise ValueError("need exact values for k = 1..k_max")
    if any(r.status != "exact" for r in records):
        raise ResourceCapExceeded("threshold scan requires exact values for every k")
    profile = group.pgroup_profile
    q = profile.q
    dav = profile.davenport
    equality = [records[k - 1].value == k * q + dav - 1 for k in range(1, k_max + 1)]
    ell = k_max + 1
    for k in range(k_max, 0, -1):
        if equality[k - 1]:
            ell = k
        else:
            break
    covered = (k_max + 1) * q >= group.order
    if not covered:
        from . import bounds

        lb = bounds.evaluate_bound("lbound2", group)
        covered = lb.applicable and lb.value is not None and lb.value <= k_max + 1 and ell <= lb.value
    status = "exact" if covered and ell <= k_max else "lower_bound"
    return InvariantRecord(
        group=group,
        quantity="ell",
        lengths=None,
        value=ell,
        status=status,
        provenance="search",
        witness=None,
    )


def exact_threshold_ell(
    group: AbelianGroup,
    k_max: int,
    cap: int | None = None,
    *,
    max_cells: int = DEFAULT_MAX_CELLS,
) -> InvariantRecord:
    """Smallest ell with s at length k*exp(G) equal to k*exp(G) + D(G) - 1 for
    all k in [ell, k_max], from an exact scan of k = 1..k_max."""
    records = threshold_scan(group, k_max, cap, max_cells=max_cells)
    return ell_from_scan(group, records, k_max)


def extremal_witness_lower(group: AbelianGroup, k: int, *, max_cells: int = DEFAULT_MAX_CELLS) -> GSeq:
    """Canonical avoider of length k*q + D(G) - 2 with no zero-sum subsequence of
    length k*q: k*q - 1 zeros next to each generator repeated (factor - 1) times.

    The generator block is zero-sum-free, so any zero-sum subsequence consists
    of zeros alone and is shorter than k*q; the engine re-checks anyway and a
    failure is an internal error.
    """
    if not group.is_pgroup:
        raise ValueError("the canonical construction is defined for p-groups")
    if k < 1:
        raise ValueError("k must be >= 1")
    q = group.pgroup_profile.q
    items: list[tuple[GroupElement, int]] = []
    if k * q - 1 > 0:
        items.append((group.identity, k * q - 1))
    for j, f in enumerate(group.factors):
        if f > 1:
            coords = [0] * len(group.factors)
            coords[j] = 1
            items.append((group.element(coords), f - 1))
    witness = GSeq.make(group, items)
    hit = find_zero_sum(witness, {k * q}, max_cells=max_cells)
    if hit is not None:
        raise AssertionError(
            f"internal error: canonical avoider over {group.spec_text()} contains a zero-sum "
            f"subsequence of length {k * q}"
        )
    return witness


def verify_record(record: InvariantRecord, *, max_cells: int = DEFAULT_MAX_CELLS) -> bool:
    """Re-verify a record's witness claims through the engine."""
    if record.witness is None:
        return True
    witness = record.witness
    if witness.group != record.group:
        return False
    from .engine import zero_sum_lengths

    if record.quantity == "s_K":
        expected_len = record.value - 1 if record.status == "exact" else None
        if expected_len is not None and len(witness) != expected_len:
            return False
        hit = zero_sum_lengths(witness, max_cells=max_cells) & set(record.lengths.resolve())
        return not hit
    if record.quantity == "davenport":
        if record.status == "exact" and len(witness) != record.value - 1:
            return False
        return zero_sum_lengths(witness, max_cells=max_cells) == {0}
    return True
