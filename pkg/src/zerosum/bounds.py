"""Closed-form bound rules with explicit hypothesis checking.

Each rule instantiates one displayed inequality or equality for the smallest
length forcing a zero-sum subsequence of prescribed length(s).  A rule never
fails silently: the result carries one line per hypothesis with the numeric
instantiation, and a value only when every line holds.  ``best_upper`` seeds a
dynamic program with every applicable rule plus caller-supplied exact values
and closes it under the subadditive combination
s(a+b) <= max(s(a) + b, s(b)).

Rule ids and their statements (G a p-group with exponent q, Davenport
constant D, dimension d = ceil(D/q), unless noted):

- sets:       s at lengths Kq <= (max K + 1 - |K|) q + D - 1,   K in [1,p], |K| >= d
- half:       s at lengths Kq <= (2 max K + 1 - |K|) q + D - 1, |K| >= d/2, 2 max K + |K| <= p
- 2d:         s at length kq <= kq + 2D - 2,                    2d-1 <= k <= p
- mainbound:  s at length kq <= (k + 2d - 2) q + 3D - 3,        k >= d, p >= 2d + 3 ceil(D/2q) - 3
- lbound2:    equality threshold <= p + d                       when p >= 2d - 2 + ceil((2D-2)/q);
              with k >= p + d this forces s at kq == kq + D - 1
- pcase:      s at length k p q == k p q + D - 1,               p >= d, k >= 1
- gao_lower:  s at length kn >= kn + D - 1 for every finite abelian G (n = exp(G));
              strict when kn < D
- gao_equality: equality when kn >= |G|
- subadditive: s(a+b) <= max(s(a) + b, s(b)) from caller-supplied s(a), s(b)
- inductivegeneral: s at length a*b*q*n over G with q | exp(G), H = G/qG,
              n = exp(qG):  <= s_an(qG) * bq + (2d-2) q + 3 D(H) - 3 (constants from H),
              or <= s_an(qG) * bq + D(H) - 1 under the stronger prime condition and b >= p + d
- generalbound: filtration sum over the p-parts of G for k = prod a_i
- nine_kn / three_kn: s at length kn over C_n^d <= 9kn resp. 3kn under
              per-prime size conditions
- conjecture: the conjectured equality kq + D - 1 (never fed into closures)
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Iterable, Mapping, Sequence

from .groups import AbelianGroup, _factorize, _prime_power_base, quotient_and_subgroup

__all__ = [
    "THEOREM_IDS",
    "Hypothesis",
    "BoundResult",
    "evaluate_bound",
    "best_upper",
    "upper_bounds_for_spec",
    "bounds_table",
]

THEOREM_IDS = (
    "sets",
    "half",
    "2d",
    "mainbound",
    "lbound2",
    "pcase",
    "gao_lower",
    "gao_equality",
    "subadditive",
    "inductivegeneral",
    "generalbound",
    "nine_kn",
    "three_kn",
    "conjecture",
)


def _ceil_div(a: int, b: int) -> int:
    return -(-a // b)


@dataclass(frozen=True)
class Hypothesis:
    condition: str
    holds: bool
    detail: str

    def to_json_dict(self) -> dict:
        return {"condition": self.condition, "holds": self.holds, "detail": self.detail}


@dataclass(frozen=True)
class BoundResult:
    theorem_id: str
    applicable: bool
    hypotheses: tuple[Hypothesis, ...]
    value: int | None = None
    kind: str | None = None  # "upper" | "lower" | "equality"
    notes: tuple[str, ...] = ()
    trace: tuple[str, ...] = ()

    def to_json_dict(self) -> dict:
        return {
            "theorem": self.theorem_id,
            "applicable": self.applicable,
            "hypotheses": [h.to_json_dict() for h in self.hypotheses],
            "value": self.value,
            "kind": self.kind,
            "notes": list(self.notes),
            "trace": list(self.trace),
        }


def _result(theorem_id, hyps, value=None, kind=None, notes=(), trace=()) -> BoundResult:
    applicable = all(h.holds for h in hyps)
    return BoundResult(
        theorem_id=theorem_id,
        applicable=applicable,
        hypotheses=tuple(hyps),
        value=value if applicable else None,
        kind=kind if applicable else None,
        notes=tuple(notes),
        trace=tuple(trace),
    )


def _pgroup_line(group: AbelianGroup) -> tuple[Hypothesis, tuple[int, int, int, int] | None]:
    profile = group.pgroup_profile
    if profile is None:
        return (
            Hypothesis("G is a p-group", False, f"factors {group.spec_text()} span several primes"),
            None,
        )
    line = Hypothesis(
        "G is a p-group",
        True,
        f"p={profile.p}, q={profile.q}, D={profile.davenport}, d={profile.dim}",
    )
    return line, (profile.p, profile.q, profile.davenport, profile.dim)


def _need(params: Mapping, key: str, theorem_id: str):
    if key not in params or params[key] is None:
        raise ValueError(f"rule {theorem_id!r} requires parameter {key!r}")
    return params[key]


def _k_set(params: Mapping, theorem_id: str) -> list[int]:
    ks = sorted({int(v) for v in _need(params, "k_set", theorem_id)})
    if not ks:
        raise ValueError(f"rule {theorem_id!r} requires a nonempty k_set")
    return ks


def _eval_sets(group, params):
    line, consts = _pgroup_line(group)
    ks = _k_set(params, "sets")
    hyps = [line]
    if consts is None:
        hyps.append(Hypothesis("K is a subset of [1, p]", False, "not evaluable without a p-group"))
        hyps.append(Hypothesis("|K| >= d", False, "not evaluable without a p-group"))
        return _result("sets", hyps)
    p, q, dav, dim = consts
    in_range = ks[0] >= 1 and ks[-1] <= p
    hyps.append(
        Hypothesis("K is a subset of [1, p]", in_range, f"K={ks}, p={p}")
    )
    hyps.append(Hypothesis("|K| >= d", len(ks) >= dim, f"|K|={len(ks)}, d={dim}"))
    value = (ks[-1] + 1 - len(ks)) * q + dav - 1
    return _result(
        "sets",
        hyps,
        value=value,
        kind="upper",
        trace=(f"(max K + 1 - |K|)q + D - 1 = ({ks[-1]}+1-{len(ks)})*{q}+{dav}-1 = {value}",),
    )


def _eval_half(group, params):
    line, consts = _pgroup_line(group)
    ks = _k_set(params, "half")
    hyps = [line]
    if consts is None:
        hyps.append(Hypothesis("|K| >= d/2", False, "not evaluable without a p-group"))
        hyps.append(Hypothesis("2*max K + |K| <= p", False, "not evaluable without a p-group"))
        return _result("half", hyps)
    p, q, dav, dim = consts
    hyps.append(Hypothesis("|K| >= d/2", 2 * len(ks) >= dim, f"2*|K|={2 * len(ks)}, d={dim}"))
    hyps.append(
        Hypothesis(
            "2*max K + |K| <= p", 2 * ks[-1] + len(ks) <= p, f"2*{ks[-1]}+{len(ks)}={2 * ks[-1] + len(ks)}, p={p}"
        )
    )
    value = (2 * ks[-1] + 1 - len(ks)) * q + dav - 1
    return _result(
        "half",
        hyps,
        value=value,
        kind="upper",
        trace=(f"(2 max K + 1 - |K|)q + D - 1 = (2*{ks[-1]}+1-{len(ks)})*{q}+{dav}-1 = {value}",),
    )


def _eval_2d(group, params):
    line, consts = _pgroup_line(group)
    k = int(_need(params, "k", "2d"))
    hyps = [line]
    if consts is None:
        hyps.append(Hypothesis("2d - 1 <= k <= p", False, "not evaluable without a p-group"))
        return _result("2d", hyps)
    p, q, dav, dim = consts
    hyps.append(
        Hypothesis("2d - 1 <= k <= p", 2 * dim - 1 <= k <= p, f"2d-1={2 * dim - 1}, k={k}, p={p}")
    )
    value = k * q + 2 * dav - 2
    return _result(
        "2d",
        hyps,
        value=value,
        kind="upper",
        trace=(f"kq + 2D - 2 = {k}*{q}+2*{dav}-2 = {value}",),
    )


def _eval_mainbound(group, params):
    line, consts = _pgroup_line(group)
    k = int(_need(params, "k", "mainbound"))
    hyps = [line]
    if consts is None:
        hyps.append(Hypothesis("k >= d", False, "not evaluable without a p-group"))
        hyps.append(Hypothesis("p >= 2d + 3*ceil(D/(2q)) - 3", False, "not evaluable without a p-group"))
        return _result("mainbound", hyps)
    p, q, dav, dim = consts
    need_p = 2 * dim + 3 * _ceil_div(dav, 2 * q) - 3
    hyps.append(Hypothesis("k >= d", k >= dim, f"k={k}, d={dim}"))
    hyps.append(
        Hypothesis(
            "p >= 2d + 3*ceil(D/(2q)) - 3",
            p >= need_p,
            f"p={p}, 2*{dim}+3*ceil({dav}/{2 * q})-3={need_p}",
        )
    )
    value = (k + 2 * dim - 2) * q + 3 * dav - 3
    return _result(
        "mainbound",
        hyps,
        value=value,
        kind="upper",
        trace=(f"(k + 2d - 2)q + 3D - 3 = ({k}+{2 * dim}-2)*{q}+{3 * dav}-3 = {value}",),
    )


def _eval_lbound2(group, params):
    line, consts = _pgroup_line(group)
    k = params.get("k")
    hyps = [line]
    if consts is None:
        hyps.append(Hypothesis("p >= 2d - 2 + ceil((2D - 2)/q)", False, "not evaluable without a p-group"))
        return _result("lbound2", hyps)
    p, q, dav, dim = consts
    need_p = 2 * dim - 2 + _ceil_div(2 * dav - 2, q)
    hyps.append(
        Hypothesis(
            "p >= 2d - 2 + ceil((2D - 2)/q)",
            p >= need_p,
            f"p={p}, 2*{dim}-2+ceil({2 * dav - 2}/{q})={need_p}",
        )
    )
    if k is None:
        value = p + dim
        return _result(
            "lbound2",
            hyps,
            value=value,
            kind="upper",
            notes=("value bounds the equality threshold in units of the exponent",),
            trace=(f"threshold <= p + d = {p}+{dim} = {value}",),
        )
    k = int(k)
    hyps.append(Hypothesis("k >= p + d", k >= p + dim, f"k={k}, p+d={p + dim}"))
    value = k * q + dav - 1
    return _result(
        "lbound2",
        hyps,
        value=value,
        kind="equality",
        trace=(f"kq + D - 1 = {k}*{q}+{dav}-1 = {value}",),
    )


def _eval_pcase(group, params):
    line, consts = _pgroup_line(group)
    k = int(_need(params, "k", "pcase"))
    hyps = [line]
    if consts is None:
        hyps.append(Hypothesis("p >= d", False, "not evaluable without a p-group"))
        hyps.append(Hypothesis("k >= 1", k >= 1, f"k={k}"))
        return _result("pcase", hyps)
    p, q, dav, dim = consts
    hyps.append(Hypothesis("p >= d", p >= dim, f"p={p}, d={dim}"))
    hyps.append(Hypothesis("k >= 1", k >= 1, f"k={k}"))
    value = k * p * q + dav - 1
    return _result(
        "pcase",
        hyps,
        value=value,
        kind="equality",
        notes=(f"equality at the admissible length k*p*q = {k * p * q}",),
        trace=(f"kpq + D - 1 = {k}*{p}*{q}+{dav}-1 = {value}",),
    )


def _davenport_for(group: AbelianGroup, params: Mapping, theorem_id: str) -> int:
    if group.is_pgroup:
        return group.pgroup_profile.davenport
    dav = params.get("davenport")
    if dav is None:
        raise ValueError(
            f"rule {theorem_id!r} on a non-p-group requires parameter 'davenport' "
            "(supply an exact value)"
        )
    return int(dav)


def _eval_gao_lower(group, params):
    k = int(_need(params, "k", "gao_lower"))
    dav = _davenport_for(group, params, "gao_lower")
    n = group.exponent
    hyps = [Hypothesis("k >= 1", k >= 1, f"k={k}")]
    value = k * n + dav - 1
    notes = []
    if k * n < dav:
        notes.append(f"strict: kn = {k * n} < D = {dav}, so the bound cannot be attained")
    return _result(
        "gao_lower",
        hyps,
        value=value,
        kind="lower",
        notes=tuple(notes),
        trace=(f"kn + D - 1 = {k}*{n}+{dav}-1 = {value}",),
    )


def _eval_gao_equality(group, params):
    k = int(_need(params, "k", "gao_equality"))
    dav = _davenport_for(group, params, "gao_equality")
    n = group.exponent
    hyps = [
        Hypothesis("k >= 1", k >= 1, f"k={k}"),
        Hypothesis("k*n >= |G|", k * n >= group.order, f"kn={k * n}, |G|={group.order}"),
    ]
    value = k * n + dav - 1
    return _result(
        "gao_equality",
        hyps,
        value=value,
        kind="equality",
        trace=(f"kn + D - 1 = {k}*{n}+{dav}-1 = {value}",),
    )


def _eval_subadditive(group, params):
    a = int(_need(params, "a", "subadditive"))
    b = int(_need(params, "b", "subadditive"))
    s_a = int(_need(params, "s_a", "subadditive"))
    s_b = int(_need(params, "s_b", "subadditive"))
    hyps = [
        Hypothesis("a >= 1", a >= 1, f"a={a}"),
        Hypothesis("b >= 1", b >= 1, f"b={b}"),
    ]
    value = max(s_a + b, s_b)
    return _result(
        "subadditive",
        hyps,
        value=value,
        kind="upper",
        notes=("uses caller-supplied values s(a), s(b); bound applies at length a+b",),
        trace=(f"max(s({a}) + {b}, s({b})) = max({s_a}+{b}, {s_b}) = {value}",),
    )


def _eval_inductivegeneral(group, params):
    q = int(_need(params, "q", "inductivegeneral"))
    a = int(_need(params, "a", "inductivegeneral"))
    b = int(_need(params, "b", "inductivegeneral"))
    s_an_qg = int(_need(params, "s_an_qg", "inductivegeneral"))
    strong = bool(params.get("strong", False))
    hyps = []
    p = _prime_power_base(q)
    hyps.append(Hypothesis("q is a prime power", p is not None, f"q={q}"))
    divides = p is not None and group.exponent % q == 0
    hyps.append(Hypothesis("q divides exp(G)", divides, f"q={q}, exp(G)={group.exponent}"))
    notes = [
        "quotient constants: the rule is evaluated with D and d of H = G/qG "
        "(the stated form mixes in constants of G)",
    ]
    if not divides:
        hyps.append(Hypothesis("quotient hypotheses", False, "not evaluable"))
        return _result("inductivegeneral", hyps, notes=notes)
    split = quotient_and_subgroup(group, q)
    quot, sub = split.quotient, split.subgroup
    profile = quot.pgroup_profile
    hyps.append(
        Hypothesis(
            "H = G/qG is a nontrivial p-group with exp(H) = q",
            profile is not None and profile.q == q,
            f"H={quot.spec_text()}, exp(H)={quot.exponent}",
        )
    )
    if profile is None or profile.q != q:
        return _result("inductivegeneral", hyps, notes=notes)
    dav_h, dim = profile.davenport, profile.dim
    n = sub.exponent
    hyps.append(
        Hypothesis(
            "exp(G) = q * n with n = exp(qG)",
            group.exponent == q * n,
            f"exp(G)={group.exponent}, q*n={q * n}",
        )
    )
    need_p = 2 * dim + 3 * _ceil_div(dav_h, 2 * q) - 3
    hyps.append(
        Hypothesis(
            "p >= 2d + 3*ceil(D(H)/(2q)) - 3",
            p >= need_p,
            f"p={p}, need {need_p} (D(H)={dav_h}, d={dim})",
        )
    )
    hyps.append(Hypothesis("a >= 1", a >= 1, f"a={a}"))
    hyps.append(
        Hypothesis(
            "b >= d (needed by the length-bq removal step)",
            b >= dim,
            f"b={b}, d={dim}",
        )
    )
    notes.append("the stated form only requires b > 0; the removal step needs b >= d")
    if strong:
        need_p2 = 2 * dim - 2 + _ceil_div(2 * dav_h - 2, q)
        hyps.append(
            Hypothesis(
                "p >= 2d - 2 + ceil((2 D(H) - 2)/q)", p >= need_p2, f"p={p}, need {need_p2}"
            )
        )
        hyps.append(Hypothesis("b >= p + d", b >= p + dim, f"b={b}, p+d={p + dim}"))
        value = s_an_qg * b * q + dav_h - 1
        trace = (f"s_an(qG)*bq + D(H) - 1 = {s_an_qg}*{b * q}+{dav_h}-1 = {value}",)
    else:
        value = s_an_qg * b * q + (2 * dim - 2) * q + 3 * dav_h - 3
        trace = (
            f"s_an(qG)*bq + (2d-2)q + 3D(H) - 3 = {s_an_qg}*{b * q}+{(2 * dim - 2) * q}+{3 * dav_h}-3 = {value}",
        )
    return _result(
        "inductivegeneral",
        hyps,
        value=value,
        kind="upper",
        notes=tuple(notes) + (f"bound applies at length a*b*q*n = {a * b * q * n}",),
        trace=trace,
    )


def _p_parts(group: AbelianGroup) -> list[tuple[int, AbelianGroup]]:
    """Decompose into p-parts over the distinct primes of |G| (ascending)."""
    primes = sorted(_factorize(group.order))
    parts = []
    for p in primes:
        fs = []
        for f in group.factors:
            v = 0
            while f % p == 0:
                f //= p
                v += 1
            if v:
                fs.append(p**v)
        parts.append((p, AbelianGroup(tuple(sorted(fs)))))
    return parts


def _eval_generalbound(group, params):
    a_list = [int(v) for v in _need(params, "a_list", "generalbound")]
    strong = bool(params.get("strong", False))
    parts = _p_parts(group)
    hyps = [
        Hypothesis(
            "one a_i per p-part of G (primes ascending)",
            len(a_list) == len(parts),
            f"{len(a_list)} values for {len(parts)} parts",
        )
    ]
    notes = [
        "filtration error term uses the product of a_j*q_j over j <= i "
        "(the displayed product repeats the summation index)",
    ]
    if len(a_list) != len(parts):
        return _result("generalbound", hyps, notes=notes)
    qs, davs, dims, ps = [], [], [], []
    for (p, part), a in zip(parts, a_list):
        profile = part.pgroup_profile
        q_i, dav_i, dim_i = profile.q, profile.davenport, profile.dim
        qs.append(q_i)
        davs.append(dav_i)
        dims.append(dim_i)
        ps.append(p)
        if strong:
            need = 2 * dim_i - 2 + _ceil_div(2 * dav_i - 2, q_i)
            hyps.append(
                Hypothesis(
                    f"p={p}: p >= 2d - 2 + ceil((2D - 2)/q)", p >= need, f"p={p}, need {need}"
                )
            )
            hyps.append(
                Hypothesis(f"p={p}: a_i >= p + d", a >= p + dim_i, f"a_i={a}, p+d={p + dim_i}")
            )
        else:
            need = 2 * dim_i + 3 * _ceil_div(dav_i, 2 * q_i) - 3
            hyps.append(
                Hypothesis(
                    f"p={p}: p >= 2d + 3*ceil(D/(2q)) - 3", p >= need, f"p={p}, need {need}"
                )
            )
            hyps.append(Hypothesis(f"p={p}: a_i >= d", a >= dim_i, f"a_i={a}, d={dim_i}"))
    n = group.exponent
    k = math.prod(a_list)
    total = k * n
    prefix = 1
    terms = []
    for i in range(len(parts)):
        if strong:
            err = davs[i] - 1
        else:
            err = (2 * dims[i] - 2) * qs[i] + 3 * davs[i] - 3
        terms.append(prefix * err)
        total += prefix * err
        prefix *= a_list[i] * qs[i]
    return _result(
        "generalbound",
        hyps,
        value=total,
        kind="upper",
        notes=tuple(notes) + (f"bound applies at length kn = {k * n} (k = {k})",),
        trace=(f"kn + sum of filtration terms = {k * n} + {terms} = {total}",),
    )


def _homocyclic_shape(group: AbelianGroup) -> tuple[int, int] | None:
    fs = group.factors
    if not fs or any(f != fs[0] for f in fs):
        return None
    return fs[0], len(fs)


def _eval_nine_three(theorem_id, group, params):
    a_list = [int(v) for v in _need(params, "a_list", theorem_id)]
    shape = _homocyclic_shape(group)
    hyps = [
        Hypothesis(
            "G = C_n^d (all factors equal)",
            shape is not None,
            f"factors {group.spec_text()}",
        )
    ]
    if shape is None:
        return _result(theorem_id, hyps)
    n, dim = shape
    primes = []
    for p, mult in sorted(_factorize(n).items()):
        primes.extend([p] * mult)
    hyps.append(
        Hypothesis(
            "one a_i per prime factor of n (with multiplicity)",
            len(a_list) == len(primes),
            f"{len(a_list)} values for {len(primes)} primes",
        )
    )
    if len(a_list) != len(primes):
        return _result(theorem_id, hyps)
    if theorem_id == "nine_kn":
        for p in primes:
            hyps.append(
                Hypothesis(f"p={p}: p >= 7d/2 - 3", 2 * p >= 7 * dim - 6, f"2p={2 * p}, 7d-6={7 * dim - 6}")
            )
        for a in a_list:
            hyps.append(Hypothesis(f"a_i={a}: a_i >= d", a >= dim, f"d={dim}"))
        factor = 9
    else:
        for p in primes:
            hyps.append(Hypothesis(f"p={p}: p >= 4d - 2", p >= 4 * dim - 2, f"4d-2={4 * dim - 2}"))
        for p, a in zip(primes, a_list):
            hyps.append(Hypothesis(f"a_i={a}: a_i >= p + d", a >= p + dim, f"p+d={p + dim}"))
        factor = 3
    k = math.prod(a_list)
    value = factor * k * n
    return _result(
        theorem_id,
        hyps,
        value=value,
        kind="upper",
        notes=(f"bound applies at length kn = {k * n} (k = {k})",),
        trace=(f"{factor}*kn = {factor}*{k}*{n} = {value}",),
    )


def _eval_conjecture(group, params):
    line, consts = _pgroup_line(group)
    k = int(_need(params, "k", "conjecture"))
    hyps = [line, Hypothesis("k >= 1", k >= 1, f"k={k}")]
    if consts is None:
        return _result("conjecture", hyps)
    p, q, dav, dim = consts
    hyps.append(
        Hypothesis(
            "k*q >= D(G) (regime where equality is conjectured)",
            k * q >= dav,
            f"kq={k * q}, D={dav}",
        )
    )
    value = k * q + dav - 1
    return _result(
        "conjecture",
        hyps,
        value=value,
        kind="equality",
        notes=("conjectured value only; never used as a proven bound",),
        trace=(f"kq + D - 1 = {k}*{q}+{dav}-1 = {value}",),
    )


_RULES = {
    "sets": _eval_sets,
    "half": _eval_half,
    "2d": _eval_2d,
    "mainbound": _eval_mainbound,
    "lbound2": _eval_lbound2,
    "pcase": _eval_pcase,
    "gao_lower": _eval_gao_lower,
    "gao_equality": _eval_gao_equality,
    "subadditive": _eval_subadditive,
    "inductivegeneral": _eval_inductivegeneral,
    "generalbound": _eval_generalbound,
    "nine_kn": lambda g, p: _eval_nine_three("nine_kn", g, p),
    "three_kn": lambda g, p: _eval_nine_three("three_kn", g, p),
    "conjecture": _eval_conjecture,
}


def evaluate_bound(theorem_id: str, group: AbelianGroup, params: Mapping | None = None) -> BoundResult:
    """Evaluate one bound rule on (G, params) with a full hypothesis report."""
    if theorem_id not in _RULES:
        raise ValueError(f"unknown rule {theorem_id!r}; known: {', '.join(THEOREM_IDS)}")
    return _RULES[theorem_id](group, dict(params or {}))


def _known_singletons(group: AbelianGroup, known: Iterable) -> dict[int, tuple[int, str]]:
    """Singleton-length exact/upper values usable as closure seeds."""
    out: dict[int, tuple[int, str]] = {}
    for rec in known or ():
        if getattr(rec, "group", None) != group or getattr(rec, "quantity", None) != "s_K":
            continue
        if rec.status not in ("exact", "upper_bound") or rec.lengths is None:
            continue
        resolved = rec.lengths.resolve()
        if len(resolved) != 1:
            continue
        (t,) = resolved
        cur = out.get(t)
        if cur is None or rec.value < cur[0]:
            out[t] = (rec.value, f"known:{rec.status}")
    return out


def _known_davenport(group: AbelianGroup, known: Iterable) -> int | None:
    for rec in known or ():
        if (
            getattr(rec, "group", None) == group
            and getattr(rec, "quantity", None) == "davenport"
            and rec.status == "exact"
        ):
            return rec.value
    return None


def best_upper(group: AbelianGroup, target_len: int, known: Iterable = ()) -> BoundResult:
    """Minimum upper bound derivable for the target length from all applicable
    rules and caller-supplied exact values, closed under the subadditive step."""
    q = group.exponent
    if target_len < 1 or target_len % q != 0:
        raise ValueError(f"target length {target_len} is not a positive multiple of exp(G) = {q}")
    profile = group.pgroup_profile
    dav = profile.davenport if profile else _known_davenport(group, known)
    seeds = _known_singletons(group, known)

    best: dict[int, tuple[int, str, tuple[int, int] | None]] = {}
    for j in range(1, target_len // q + 1):
        t = j * q
        options: list[tuple[int, str, tuple[int, int] | None]] = []
        if t in seeds:
            options.append((seeds[t][0], seeds[t][1], None))
        if profile is not None:
            p, dim = profile.p, profile.dim
            r = evaluate_bound("2d", group, {"k": j})
            if r.applicable:
                options.append((r.value, "2d", None))
            r = evaluate_bound("mainbound", group, {"k": j})
            if r.applicable:
                options.append((r.value, "mainbound", None))
            if j % p == 0:
                r = evaluate_bound("pcase", group, {"k": j // p})
                if r.applicable:
                    options.append((r.value, "pcase", None))
            r = evaluate_bound("lbound2", group, {"k": j})
            if r.applicable:
                options.append((r.value, "lbound2", None))
            if dim == 1 and j <= p:
                r = evaluate_bound("sets", group, {"k_set": {j}})
                if r.applicable:
                    options.append((r.value, "sets", None))
        if dav is not None:
            r = evaluate_bound("gao_equality", group, {"k": j, "davenport": dav})
            if r.applicable:
                options.append((r.value, "gao_equality", None))
        for a in range(q, t, q):
            b = t - a
            if a in best and b in best:
                combined = max(best[a][0] + b, best[b][0])
                options.append((combined, "subadditive", (a, b)))
        if options:
            best[t] = min(options, key=lambda o: o[0])

    if target_len not in best:
        return BoundResult(
            theorem_id="subadditive",
            applicable=False,
            hypotheses=(
                Hypothesis(
                    "some rule or known value applies at or below the target length",
                    False,
                    f"no seed found for target {target_len}",
                ),
            ),
        )

    trace: list[str] = []

    def explain(t: int) -> None:
        value, label, combo = best[t]
        if combo is None:
            trace.append(f"s({t}) <= {value} [{label}]")
        else:
            a, b = combo
            explain(a)
            explain(b)
            trace.append(
                f"s({t}) <= max(s({a}) + {b}, s({b})) = max({best[a][0]}+{b}, {best[b][0]}) = {value} [subadditive]"
            )

    explain(target_len)
    value, label, combo = best[target_len]
    return BoundResult(
        theorem_id=label if combo is None else "subadditive",
        applicable=True,
        hypotheses=(
            Hypothesis(
                "target length is a positive multiple of exp(G)",
                True,
                f"target={target_len}, exp(G)={q}",
            ),
        ),
        value=value,
        kind="upper",
        trace=tuple(trace),
    )


def upper_bounds_for_spec(group: AbelianGroup, lengths, known: Iterable = ()) -> list[BoundResult]:
    """Every applicable proven upper bound for s at the given length spec.

    Scaled specs whose unit is exp(G) get the direct set-based rules; any spec
    also inherits the best single-length bound of each admissible length that
    is a multiple of exp(G) (allowing more lengths never increases the value).
    """
    out: list[BoundResult] = []
    q = group.exponent
    if lengths.scaled is not None and lengths.scaled[1] == q:
        ks = set(lengths.scaled[0])
        for rule in ("sets", "half"):
            r = evaluate_bound(rule, group, {"k_set": ks})
            if r.applicable:
                out.append(r)
    for t in sorted(lengths.resolve()):
        if t % q == 0:
            r = best_upper(group, t, known)
            if r.applicable:
                out.append(r)
    return out


def bounds_table(group: AbelianGroup, k: int, k_set=None, known: Iterable = ()) -> list[BoundResult]:
    """All single-target rules evaluated at length k*exp(G) (plus set rules when
    a multiplier set is supplied), ending with the closure value."""
    results = []
    params_k = {"k": k}
    dav = None if group.is_pgroup else _known_davenport(group, known)
    if dav is not None:
        params_k = {"k": k, "davenport": dav}
    for rule in ("gao_lower", "gao_equality"):
        try:
            results.append(evaluate_bound(rule, group, params_k))
        except ValueError:
            pass
    for rule in ("2d", "mainbound", "lbound2", "conjecture"):
        results.append(evaluate_bound(rule, group, {"k": k}))
    if group.is_pgroup and k % group.pgroup_profile.p == 0:
        results.append(evaluate_bound("pcase", group, {"k": k // group.pgroup_profile.p}))
    if k_set:
        results.append(evaluate_bound("sets", group, {"k_set": k_set}))
        results.append(evaluate_bound("half", group, {"k_set": k_set}))
    results.append(best_upper(group, k * group.exponent, known))
    return results
