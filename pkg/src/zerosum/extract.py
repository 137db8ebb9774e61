"""Constructive extraction of promised zero-sum subsequences.

Each strategy mirrors one proof outline: it checks the length/size hypotheses
up front, then realizes every existence step as an engine search, recording a
trace of the intermediate pieces.  Search steps that the established results
guarantee cannot fail are treated as counterexample candidates when they do:
the failure is cross-checked exhaustively and surfaced with a reproducible
artifact instead of being retried.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from .bounds import Hypothesis, _ceil_div
from .engine import NAIVE_LIMIT, find_zero_sum, naive_zero_sum_lengths, zero_sum_lengths
from .errors import CounterexampleCandidate, PremiseViolation
from .groups import AbelianGroup, quotient_and_subgroup
from .sequences import GSeq

__all__ = [
    "STRATEGIES",
    "TraceStep",
    "Extraction",
    "split_subadditive",
    "extract_pq_lift",
    "extract_proof_guided",
    "extract_filtration",
]

STRATEGIES = (
    "subadditive",
    "pq_lift",
    "two_piece_2d",
    "half_lemma",
    "main_theorem",
    "filtration",
)


@dataclass(frozen=True)
class TraceStep:
    role: str
    length: int
    total: tuple[int, ...]
    seq: GSeq | None = None

    def to_json_dict(self) -> dict:
        return {
            "role": self.role,
            "length": self.length,
            "sum": list(self.total),
            "sequence": None if self.seq is None else self.seq.to_json_dict(),
        }


@dataclass
class Extraction:
    strategy: str
    source: GSeq
    witness: GSeq
    target_lengths: tuple[int, ...]
    hypotheses: list[Hypothesis] = field(default_factory=list)
    trace: list[TraceStep] = field(default_factory=list)
    notes: list[str] = field(default_factory=list)

    def to_json_dict(self) -> dict:
        return {
            "strategy": self.strategy,
            "target_lengths": list(self.target_lengths),
            "witness": self.witness.to_json_dict(),
            "hypotheses": [h.to_json_dict() for h in self.hypotheses],
            "trace": [s.to_json_dict() for s in self.trace],
            "notes": list(self.notes),
        }


def _check(hyps: list[Hypothesis], strategy: str) -> None:
    failed = [h for h in hyps if not h.holds]
    if failed:
        lines = "; ".join(f"{h.condition} ({h.detail})" for h in failed)
        raise PremiseViolation(f"{strategy}: hypothesis not met: {lines}", report=hyps)


def _step(role: str, seq: GSeq) -> TraceStep:
    return TraceStep(role=role, length=len(seq), total=seq.sum().coords, seq=seq)


def _finish(ex: Extraction) -> Extraction:
    w = ex.witness
    if not w.is_subsequence_of(ex.source):
        raise AssertionError(f"{ex.strategy}: witness is not a subsequence of the input")
    if not w.sum().is_identity:
        raise AssertionError(f"{ex.strategy}: witness sum is {w.sum()!r}, not zero")
    if len(w) not in ex.target_lengths:
        raise AssertionError(
            f"{ex.strategy}: witness length {len(w)} not in targets {ex.target_lengths}"
        )
    ex.trace.append(_step("result", w))
    return ex


def _guaranteed_find(seq: GSeq, lengths, claim: str, strategy: str) -> GSeq:
    """Search the engine for something a proven statement promises to exist."""
    hit = find_zero_sum(seq, lengths)
    if hit is not None:
        return hit
    wanted = set(lengths)
    if wanted & zero_sum_lengths(seq):
        raise AssertionError("engine disagreement between search and rebuild")
    if len(seq) <= NAIVE_LIMIT and wanted & naive_zero_sum_lengths(seq):
        raise AssertionError("engine table disagrees with exhaustive subset enumeration")
    raise CounterexampleCandidate(
        f"{strategy}: {claim}, but no such subsequence exists",
        artifact={
            "strategy": strategy,
            "claim": claim,
            "sequence": seq.to_json_dict(),
            "lengths": sorted(wanted),
        },
    )


def _premise_find(seq: GSeq, lengths, stage: str, strategy: str) -> GSeq:
    hit = find_zero_sum(seq, lengths)
    if hit is None:
        raise PremiseViolation(
            f"{strategy}: {stage} found no zero-sum subsequence with length in "
            f"{sorted(set(lengths))}; the supplied premise was wrong"
        )
    return hit


def split_subadditive(
    seq: GSeq, a: int, b: int, *, s_a: int | None = None, s_b: int | None = None
) -> Extraction:
    """Zero-sum subsequence of length a+b: a length-b piece, then a length-a
    piece from what remains.  Supplied s-values are checked; a failing search
    means the caller's premise was wrong."""
    hyps = [
        Hypothesis("a >= 1", a >= 1, f"a={a}"),
        Hypothesis("b >= 1", b >= 1, f"b={b}"),
    ]
    if s_a is not None and s_b is not None:
        need = max(s_a + b, s_b)
        hyps.append(
            Hypothesis("|S| >= max(s(a) + b, s(b))", len(seq) >= need, f"|S|={len(seq)}, need {need}")
        )
    _check(hyps, "subadditive")
    ex = Extraction("subadditive", seq, GSeq.empty(seq.group), (a + b,), hypotheses=hyps)
    first = _premise_find(seq, {b}, "first stage (length b)", "subadditive")
    ex.trace.append(_step("piece_b", first))
    rest = seq.remove(first)
    ex.trace.append(_step("remainder", rest))
    second = _premise_find(rest, {a}, "second stage (length a)", "subadditive")
    ex.trace.append(_step("piece_a", second))
    ex.witness = first.concat(second)
    return _finish(ex)


def extract_pq_lift(seq: GSeq) -> Extraction:
    """Zero-sum subsequence of length exactly p*q from any sequence of length at
    least p*q + D(G) - 1 over a p-group with p >= d.

    Terms are tagged with a generator of an extra C_pq factor; a zero-sum
    subsequence of the tagged sequence is exactly a zero-sum subsequence of S
    with length divisible by p*q, and the Davenport constant of the extended
    group forces one to exist.
    """
    group = seq.group
    profile = group.pgroup_profile
    hyps = [Hypothesis("G is a p-group", profile is not None, group.spec_text())]
    if profile is not None:
        p, q, dav, dim = profile.p, profile.q, profile.davenport, profile.dim
        hyps.append(Hypothesis("p >= d", p >= dim, f"p={p}, d={dim}"))
        hyps.append(
            Hypothesis(
                "|S| >= pq + D(G) - 1", len(seq) >= p * q + dav - 1, f"|S|={len(seq)}, need {p * q + dav - 1}"
            )
        )
    _check(hyps, "pq_lift")
    p, q = profile.p, profile.q
    lifted_group = AbelianGroup(group.factors + (p * q,))
    lifted = GSeq.make(
        lifted_group,
        ((lifted_group.element(e.coords + (1,)), m) for e, m in seq.entries),
    )
    ex = Extraction("pq_lift", seq, GSeq.empty(group), (p * q,), hypotheses=hyps)
    ex.trace.append(_step("tagged_sequence", lifted))
    hit = _guaranteed_find(
        lifted,
        {p * q},
        f"the Davenport constant of the extended group equals pq + D(G) - 1 = {p * q + profile.davenport - 1}, "
        f"so a zero-sum subsequence of length pq = {p * q} must exist",
        "pq_lift",
    )
    ex.witness = GSeq.make(group, ((group.element(e.coords[:-1]), m) for e, m in hit.entries))
    return _finish(ex)


def _two_piece_2d(seq: GSeq, k: int) -> Extraction:
    group = seq.group
    profile = group.pgroup_profile
    hyps = [Hypothesis("G is a p-group", profile is not None, group.spec_text())]
    if profile is not None:
        p, q, dav, dim = profile.p, profile.q, profile.davenport, profile.dim
        hyps.append(
            Hypothesis("2d - 1 <= k <= p", 2 * dim - 1 <= k <= p, f"k={k}, 2d-1={2 * dim - 1}, p={p}")
        )
        hyps.append(
            Hypothesis(
                "|S| >= kq + 2D - 2", len(seq) >= k * q + 2 * dav - 2, f"|S|={len(seq)}, need {k * q + 2 * dav - 2}"
            )
        )
    _check(hyps, "two_piece_2d")
    p, q, dav, dim = profile.p, profile.q, profile.davenport, profile.dim
    ex = Extraction("two_piece_2d", seq, GSeq.empty(group), (k * q,), hypotheses=hyps)
    if dim == 1:
        hit = _guaranteed_find(
            seq, {k * q}, f"a cyclic-case zero-sum subsequence of length kq = {k * q} is forced", "two_piece_2d"
        )
        ex.witness = hit
        ex.notes.append("d = 1: direct single-piece extraction")
        return _finish(ex)
    first, rest = seq.take_prefix((k + 1 - dim) * q + dav - 1)
    ex.trace.append(_step("piece_pool_1", first))
    ex.trace.append(_step("piece_pool_2", rest))
    available = zero_sum_lengths(rest) & {j * q for j in range(1, 2 * dim - 1)}
    if len(available) < dim - 1:
        raise CounterexampleCandidate(
            "two_piece_2d: fewer zero-sum lengths available in the second factor than the set-cover "
            f"argument forces (found {sorted(available)}, need {dim - 1})",
            artifact={"sequence": rest.to_json_dict(), "found": sorted(available), "need": dim - 1},
        )
    lengths_l = {0} | set(sorted(available)[: dim - 1])
    ex.notes.append(f"L = {sorted(lengths_l)} (lengths, including the empty piece)")
    first_hit = _guaranteed_find(
        first,
        {k * q - l for l in lengths_l},
        f"a zero-sum subsequence with length in kq - L = {sorted(k * q - l for l in lengths_l)} is forced",
        "two_piece_2d",
    )
    ex.trace.append(_step("piece_1", first_hit))
    complement = k * q - len(first_hit)
    if complement:
        second_hit = _guaranteed_find(
            rest, {complement}, f"length {complement} was observed among the second factor's zero sums", "two_piece_2d"
        )
    else:
        second_hit = GSeq.empty(group)
    ex.trace.append(_step("piece_2", second_hit))
    ex.witness = first_hit.concat(second_hit)
    return _finish(ex)


def _half_lemma(seq: GSeq, k_set) -> Extraction:
    group = seq.group
    profile = group.pgroup_profile
    ks = sorted(set(k_set))
    hyps = [Hypothesis("G is a p-group", profile is not None, group.spec_text())]
    if profile is not None:
        p, q, dav, dim = profile.p, profile.q, profile.davenport, profile.dim
        hyps.append(Hypothesis("K nonempty, min K >= 1", bool(ks) and ks[0] >= 1, f"K={ks}"))
        hyps.append(Hypothesis("|K| >= d/2", 2 * len(ks) >= dim, f"2|K|={2 * len(ks)}, d={dim}"))
        hyps.append(
            Hypothesis(
                "2*max K + |K| <= p", 2 * ks[-1] + len(ks) <= p, f"2*{ks[-1]}+{len(ks)}, p={p}"
            )
        )
        need = (2 * ks[-1] + 1 - len(ks)) * q + dav - 1
        hyps.append(
            Hypothesis("|S| >= (2 max K + 1 - |K|)q + D - 1", len(seq) >= need, f"|S|={len(seq)}, need {need}")
        )
    _check(hyps, "half_lemma")
    p, q = profile.p, profile.q
    targets = {k * q for k in ks}
    ex = Extraction("half_lemma", seq, GSeq.empty(group), tuple(sorted(targets)), hypotheses=hyps)
    widened = set(ks) | {2 * ks[-1] + i for i in range(1, len(ks) + 1)}
    ex.notes.append(f"widened multiplier set K' = {sorted(widened)}")
    hit = _guaranteed_find(
        seq,
        {w * q for w in widened},
        f"a zero-sum subsequence with length in K'q = {sorted(w * q for w in widened)} is forced",
        "half_lemma",
    )
    ex.trace.append(_step("first_hit", hit))
    if len(hit) in targets:
        ex.witness = hit
        return _finish(ex)
    n = len(hit) // q
    folded = set(ks) | {n - k for k in ks}
    ex.notes.append(f"folded multiplier set L = K u (n - K) = {sorted(folded)} with n = {n}")
    inner = _guaranteed_find(
        hit,
        {f * q for f in folded},
        f"a zero-sum subsequence with length in Lq = {sorted(f * q for f in folded)} inside the first hit is forced",
        "half_lemma",
    )
    ex.trace.append(_step("inner_hit", inner))
    if len(inner) in targets:
        ex.witness = inner
    else:
        ex.witness = hit.remove(inner)
        ex.notes.append("complement step: the first hit is zero-sum, so removing the inner hit stays zero-sum")
    return _finish(ex)


def _main_theorem(seq: GSeq, k: int) -> Extraction:
    group = seq.group
    profile = group.pgroup_profile
    hyps = [Hypothesis("G is a p-group", profile is not None, group.spec_text())]
    if profile is not None:
        p, q, dav, dim = profile.p, profile.q, profile.davenport, profile.dim
        need_p = 2 * dim + 3 * _ceil_div(dav, 2 * q) - 3
        hyps.append(Hypothesis("k >= d", k >= dim, f"k={k}, d={dim}"))
        hyps.append(Hypothesis("p >= 2d + 3*ceil(D/(2q)) - 3", p >= need_p, f"p={p}, need {need_p}"))
        need_len = (k + 2 * dim - 2) * q + 3 * dav - 3
        hyps.append(
            Hypothesis(
                "|S| >= (k + 2d - 2)q + 3D - 3", len(seq) >= need_len, f"|S|={len(seq)}, need {need_len}"
            )
        )
    _check(hyps, "main_theorem")
    p, q, dav, dim = profile.p, profile.q, profile.davenport, profile.dim
    ex = Extraction("main_theorem", seq, GSeq.empty(group), (k * q,), hypotheses=hyps)

    if 2 * dim - 1 <= k <= p:
        inner = _two_piece_2d(seq, k)
        ex.notes.append(f"k = {k} lies in [2d-1, p]: delegated to the two-piece split")
        ex.trace.extend(inner.trace)
        ex.witness = inner.witness
        return _finish(ex)

    if k > p:
        # recursion k = (k - d) + d through the subadditive combination
        k_small = k - dim
        ex.notes.append(f"k = {k} > p: split as {k_small} + {dim} and recurse")
        part_big = _main_theorem(seq, k_small)
        ex.trace.append(_step("recursive_piece", part_big.witness))
        rest = seq.remove(part_big.witness)
        part_small = _main_theorem(rest, dim)
        ex.trace.append(_step("recursive_piece", part_small.witness))
        ex.witness = part_big.witness.concat(part_small.witness)
        return _finish(ex)

    # core case: d <= k <= 2d - 2 (so d >= 2)
    m_half = _ceil_div(dav, 2 * q)
    t = k // 2 + m_half - 1
    ex.notes.append(f"core case with m = {m_half}, t = {t}")
    first, rest = seq.take_prefix((2 * t - m_half + 1) * q + dav - 1)
    ex.trace.append(_step("piece_pool_1", first))
    ex.trace.append(_step("piece_pool_2", rest))
    if m_half == 1:
        mult_l = {0}
    else:
        if t > 2 * m_half - 2:
            window = range(t - 2 * m_half + 2, t + 1)
            needed = m_half
            extra_zero = False
        else:
            window = range(t - 2 * m_half + 3, t + 1)
            needed = m_half - 1
            extra_zero = True
        available = zero_sum_lengths(first) & {j * q for j in window if j >= 1}
        if len(available) < needed:
            raise CounterexampleCandidate(
                f"main_theorem: fewer zero-sum lengths in the first factor than the covering argument "
                f"forces (found {sorted(available)}, need {needed})",
                artifact={"sequence": first.to_json_dict(), "found": sorted(available), "need": needed},
            )
        mult_l = {v // q for v in sorted(available)[:needed]}
        if extra_zero:
            mult_l.add(0)
    ex.notes.append(f"L = {sorted(mult_l)} (multipliers of q, empty piece included as 0)")
    second_hit = _guaranteed_find(
        rest,
        {(k - l) * q for l in mult_l},
        f"a zero-sum subsequence with length in (k - L)q = {sorted((k - l) * q for l in mult_l)} is forced",
        "main_theorem",
    )
    ex.trace.append(_step("piece_2", second_hit))
    complement = k * q - len(second_hit)
    if complement:
        first_hit = _guaranteed_find(
            first,
            {complement},
            f"length {complement} was observed among the first factor's zero sums",
            "main_theorem",
        )
    else:
        first_hit = GSeq.empty(group)
    ex.trace.append(_step("piece_1", first_hit))
    ex.witness = first_hit.concat(second_hit)
    return _finish(ex)


def extract_proof_guided(seq: GSeq, strategy: str, *, k: int | None = None, k_set=None) -> Extraction:
    """Dispatch to one of the proof-shaped strategies.

    ``two_piece_2d`` and ``main_theorem`` take a multiplier k and return a
    zero-sum subsequence of length k*exp(G); ``half_lemma`` takes a multiplier
    set and returns one with length in that set times exp(G).
    """
    if strategy == "two_piece_2d":
        if k is None:
            raise ValueError("two_piece_2d requires k")
        return _two_piece_2d(seq, int(k))
    if strategy == "half_lemma":
        if not k_set:
            raise ValueError("half_lemma requires k_set")
        return _half_lemma(seq, k_set)
    if strategy == "main_theorem":
        if k is None:
            raise ValueError("main_theorem requires k")
        return _main_theorem(seq, int(k))
    raise ValueError(f"unknown proof-guided strategy {strategy!r}")


def extract_filtration(
    seq: GSeq, a: int, b: int, q: int, *, s_an_qg: int | None = None
) -> Extraction:
    """Zero-sum subsequence of length a*b*q*n by two-level descent.

    Pieces of length b*q whose sums lie in the subgroup qG are removed
    repeatedly (searching the projection to H = G/qG); once enough pieces are
    collected, their sums form a sequence over qG with a zero-sum subsequence
    of length a*n, and the union of the selected pieces is the witness.
    Stages that fail raise a premise-violation report.
    """
    group = seq.group
    from .groups import _prime_power_base

    p = _prime_power_base(q)
    split = quotient_and_subgroup(group, q) if group.exponent % q == 0 else None
    hyps = [
        Hypothesis("q is a prime power", p is not None, f"q={q}"),
        Hypothesis("q divides exp(G)", split is not None, f"q={q}, exp(G)={group.exponent}"),
        Hypothesis("a >= 1 and b >= 1", a >= 1 and b >= 1, f"a={a}, b={b}"),
    ]
    if split is None or p is None:
        _check(hyps, "filtration")
    quot, sub = split.quotient, split.subgroup
    profile = quot.pgroup_profile
    n = sub.exponent
    hyps.append(
        Hypothesis(
            "H = G/qG is a nontrivial p-group with exp(H) = q",
            profile is not None and profile.q == q,
            f"H={quot.spec_text()}, exp(H)={quot.exponent}",
        )
    )
    hyps.append(
        Hypothesis("exp(G) = q*n with n = exp(qG)", group.exponent == q * n, f"exp(G)={group.exponent}, q*n={q * n}")
    )
    if profile is not None:
        dav_h, dim = profile.davenport, profile.dim
        need_p = 2 * dim + 3 * _ceil_div(dav_h, 2 * q) - 3
        hyps.append(Hypothesis("p >= 2d + 3*ceil(D(H)/(2q)) - 3", p >= need_p, f"p={p}, need {need_p}"))
        hyps.append(Hypothesis("b >= d (removal step)", b >= dim, f"b={b}, d={dim}"))
    _check(hyps, "filtration")

    if s_an_qg is None:
        from .invariants import LengthSpec, exact_s

        if sub.order == 1:
            s_an_qg = a * n
        else:
            s_an_qg = exact_s(sub, LengthSpec.of({a * n})).value
    target = a * b * q * n
    ex = Extraction("filtration", seq, GSeq.empty(group), (target,), hypotheses=hyps)
    ex.notes.append(f"needs up to s_an(qG) = {s_an_qg} pieces of length bq = {b * q} with sums in qG")

    pieces: list[GSeq] = []
    remaining = seq
    while len(pieces) < s_an_qg:
        projected = GSeq.make(quot, ((split.project(e), m) for e, m in remaining.entries))
        proj_hit = find_zero_sum(projected, {b * q})
        if proj_hit is None:
            break
        # pull the projected piece back to concrete terms, smallest coordinates first
        chosen: list[tuple] = []
        for h_elem, need in proj_hit.entries:
            for e, m in remaining.entries:
                if need == 0:
                    break
                if split.project(e) == h_elem:
                    c = min(m, need)
                    chosen.append((e, c))
                    need -= c
            if need:
                raise AssertionError("projection pullback failed to cover the piece")
        piece = GSeq.make(group, chosen)
        pieces.append(piece)
        ex.trace.append(_step(f"piece_{len(pieces)}", piece))
        remaining = remaining.remove(piece)
    if not pieces:
        raise PremiseViolation(
            f"filtration: no subsequence of length bq = {b * q} with sum in the subgroup exists"
        )

    sums = GSeq.make(sub, (split.unembed(piece.sum()) for piece in pieces))
    ex.trace.append(_step("piece_sums", sums))
    selection = find_zero_sum(sums, {a * n})
    if selection is None:
        raise PremiseViolation(
            f"filtration: collected {len(pieces)} pieces but their sums admit no zero-sum "
            f"subsequence of length a*n = {a * n}"
            + ("" if len(pieces) >= s_an_qg else f" (only {len(pieces)} < {s_an_qg} pieces fit)")
        )
    witness = GSeq.empty(group)
    used: dict[int, int] = {}
    for u_elem, need in selection.entries:
        for idx, piece in enumerate(pieces):
            if need == 0:
                break
            if used.get(idx):
                continue
            if split.unembed(piece.sum()) == u_elem:
                used[idx] = 1
                witness = witness.concat(piece)
                need -= 1
        if need:
            raise AssertionError("piece selection failed to cover the chosen sums")
    ex.witness = witness
    return _finish(ex)
