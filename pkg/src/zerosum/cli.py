"""Command-line surface tying the library together.

Exit codes: 0 all checks passed, 1 verified mathematical inconsistency (a
counterexample artifact is written), 2 usage error, 3 resource cap hit.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import os
import random
import sys
import time
from pathlib import Path

from . import bounds as bounds_mod
from .cache import ResultCache, cache_key
from .engine import DEFAULT_MAX_CELLS
from .errors import (
    CounterexampleCandidate,
    GroupSpecError,
    PremiseViolation,
    ResourceCapExceeded,
    SequenceFormatError,
    ZerosumError,
)
from .extract import STRATEGIES, extract_filtration, extract_pq_lift, extract_proof_guided, split_subadditive
from .groups import AbelianGroup, davenport_olson, parse_group
from .invariants import (
    InvariantRecord,
    LengthSpec,
    ell_from_scan,
    exact_davenport,
    exact_s,
    extremal_witness_lower,
)
from .polynomial import WitnessInstance, full_coefficient, theorem_length, vanishing_report
from .sequences import GSeq

ENV_MAX_CELLS = "ZEROSUM_MAX_CELLS"


def _max_cells(args) -> int:
    if getattr(args, "max_cells", None):
        return args.max_cells
    env = os.environ.get(ENV_MAX_CELLS)
    return int(env) if env else DEFAULT_MAX_CELLS


def _int_set(text: str) -> set[int]:
    try:
        return {int(v) for v in text.split(",") if v.strip() != ""}
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected a comma-separated integer list, got {text!r}")


def _emit(args, report: dict, rows: list[dict] | None = None) -> None:
    fmt = getattr(args, "format", "json") or "json"
    if fmt == "json" or not rows:
        print(json.dumps(report, indent=2, sort_keys=True))
        return
    if fmt == "csv":
        buf = io.StringIO()
        writer = csv.DictWriter(buf, fieldnames=list(rows[0].keys()))
        writer.writeheader()
        writer.writerows(rows)
        print(buf.getvalue(), end="")
        return
    # markdown table
    headers = list(rows[0].keys())
    print("| " + " | ".join(headers) + " |")
    print("|" + "|".join("---" for _ in headers) + "|")
    for row in rows:
        print("| " + " | ".join(str(row[h]) for h in headers) + " |")


def _write_artifact(args, artifact: dict) -> Path:
    directory = Path(getattr(args, "artifact_dir", ".") or ".")
    directory.mkdir(parents=True, exist_ok=True)
    path = directory / f"counterexample-{int(time.time() * 1000)}.json"
    path.write_text(json.dumps(artifact, indent=2, sort_keys=True) + "\n")
    print(f"counterexample artifact written to {path}", file=sys.stderr)
    return path


def _cache(args) -> ResultCache:
    return ResultCache(getattr(args, "cache", None), enabled=not getattr(args, "no_cache", False))


def _length_spec(args, group: AbelianGroup) -> LengthSpec:
    if getattr(args, "lengths", None):
        return LengthSpec.of(args.lengths)
    if getattr(args, "k_set", None):
        unit = args.unit or group.exponent
        return LengthSpec.scaled_by(args.k_set, unit)
    raise SystemExit2("one of --lengths or --k-set is required")


class SystemExit2(Exception):
    """Usage error carrying a message (mapped to exit code 2)."""


def _hypothesis_rows(results) -> list[dict]:
    rows = []
    for r in results:
        rows.append(
            {
                "theorem": r.theorem_id,
                "applicable": r.applicable,
                "value": "" if r.value is None else r.value,
                "kind": r.kind or "",
                "failing": "; ".join(h.condition for h in r.hypotheses if not h.holds),
            }
        )
    return rows


def cmd_group_info(args) -> int:
    group = parse_group(args.group)
    report: dict = {
        "command": "group info",
        "group": list(group.factors),
        "order": group.order,
        "exponent": group.exponent,
        "invariant_factors": list(group.invariant_factors),
    }
    profile = group.pgroup_profile
    if profile is not None:
        p, q, dav, dim = profile.p, profile.q, profile.davenport, profile.dim
        report["pgroup"] = {"p": p, "q": q, "davenport": dav, "dim": dim}
        checks = {
            "sets (some valid K exists)": p >= dim,
            "half (some valid K exists)": 3 * -(-dim // 2) <= p,
            "2d (interval [2d-1, p] nonempty)": p >= 2 * dim - 1,
            "mainbound": p >= 2 * dim + 3 * -(-dav // (2 * q)) - 3,
            "lbound2": p >= 2 * dim - 2 + -(-(2 * dav - 2) // q),
            "pcase": p >= dim,
        }
        report["prime_size_hypotheses"] = {k: bool(v) for k, v in checks.items()}
    else:
        report["pgroup"] = None
    _emit(args, report)
    return 0


def _cached_exact_s(args, group: AbelianGroup, spec: LengthSpec):
    cache = _cache(args)
    key = cache_key(group, "s_K", spec)
    record, entry, from_cache = cache.compute_record(
        key,
        group,
        lambda: exact_s(group, spec, cap=args.cap, max_cells=_max_cells(args)),
    )
    if from_cache:
        print("cache hit", file=sys.stderr)
    return record, entry


def cmd_exact(args) -> int:
    group = parse_group(args.group)
    if args.quantity == "s":
        spec = _length_spec(args, group)
        record, entry = _cached_exact_s(args, group, spec)
        report = {
            "command": "exact s",
            "key": entry.key,
            "record": entry.record,
            "stamp": entry.stamp,
            "wall_time": entry.wall_time,
        }
        _emit(args, report)
        return 0
    if args.quantity == "davenport":
        cache = _cache(args)
        key = cache_key(group, "davenport", None)
        record, entry, from_cache = cache.compute_record(
            key, group, lambda: exact_davenport(group, cap=args.cap, max_cells=_max_cells(args))
        )
        if from_cache:
            print("cache hit", file=sys.stderr)
        report = {
            "command": "exact davenport",
            "key": entry.key,
            "record": entry.record,
            "stamp": entry.stamp,
            "wall_time": entry.wall_time,
        }
        _emit(args, report)
        return 0
    if args.quantity == "ell":
        if args.kmax is None:
            raise SystemExit2("exact ell requires --kmax")
        q = group.exponent
        records = []
        for k in range(1, args.kmax + 1):
            record, _ = _cached_exact_s(args, group, LengthSpec.scaled_by({k}, q))
            records.append(record)
        ell = ell_from_scan(group, records, args.kmax)
        rows = [
            {
                "k": k,
                "length": k * q,
                "value": records[k - 1].value,
                "equality": records[k - 1].value == k * q + davenport_olson(group) - 1,
            }
            for k in range(1, args.kmax + 1)
        ]
        report = {"command": "exact ell", "record": ell.to_json_dict(), "scan": rows}
        _emit(args, report, rows)
        return 0
    raise SystemExit2(f"unknown exact quantity {args.quantity!r}")


def cmd_bounds(args) -> int:
    group = parse_group(args.group)
    known = []
    results = bounds_mod.bounds_table(group, args.k, k_set=args.k_set, known=known)
    report = {
        "command": "bounds",
        "group": list(group.factors),
        "k": args.k,
        "target_length": args.k * group.exponent,
        "bounds": [r.to_json_dict() for r in results],
    }
    _emit(args, report, _hypothesis_rows(results))
    return 0


def cmd_witness(args) -> int:
    group = parse_group(args.group)
    witness = extremal_witness_lower(group, args.k, max_cells=_max_cells(args))
    q = group.exponent
    dav = davenport_olson(group)
    report = {
        "command": "witness",
        "group": list(group.factors),
        "k": args.k,
        "length": len(witness),
        "certifies": f"s at length {args.k * q} >= {args.k * q + dav - 1}",
        "sequence": witness.to_json_dict(),
    }
    if args.out:
        witness.save(args.out)
        report["written_to"] = str(args.out)
    _emit(args, report)
    return 0


def _load_or_random_sequence(args, group: AbelianGroup, length: int | None) -> GSeq:
    if getattr(args, "sequence", None):
        return GSeq.load(args.sequence, group=group)
    if length is None:
        raise SystemExit2("either --sequence or --length is required")
    if args.seed is None:
        raise SystemExit2("randomized runs require --seed (unseeded randomness is forbidden)")
    rng = random.Random(args.seed)
    elems = [group.decode(rng.randrange(group.order)) for _ in range(length)]
    return GSeq.make(group, elems)


def cmd_poly_check(args) -> int:
    group = parse_group(args.group)
    if not group.is_pgroup:
        raise SystemExit2("poly check requires a p-group")
    k_set = args.k_set
    length = args.length if args.length is not None else theorem_length(group, k_set)
    seq = _load_or_random_sequence(args, group, length)
    inst = WitnessInstance.make(group, seq, k_set)
    coeff = full_coefficient(inst)
    report_obj = vanishing_report(inst, max_hits=args.max_hits)
    p = group.pgroup_profile.p
    ok = report_obj.all_hits_zero_sum and report_obj.all_hits_in_targets
    theorem_ok = (not inst.theorem_mode) or (coeff == 0)
    report = {
        "command": "poly check",
        "group": list(group.factors),
        "k_set": sorted(k_set),
        "m": inst.m,
        "theorem_length": theorem_length(group, k_set),
        "theorem_mode": inst.theorem_mode,
        "full_coefficient_mod_p": coeff,
        "p": p,
        "vanishing": report_obj.to_json_dict(),
        "checks": {
            "hits_verified": ok,
            "full_coefficient_vanishes_in_theorem_mode": theorem_ok,
        },
    }
    _emit(args, report)
    if not (ok and theorem_ok):
        _write_artifact(args, report)
        return 1
    return 0


def cmd_extract(args) -> int:
    group = parse_group(args.group)
    strategy = args.strategy
    default_len = args.length
    seq = _load_or_random_sequence(args, group, default_len)
    if strategy == "subadditive":
        if args.a is None or args.b is None:
            raise SystemExit2("subadditive requires --a and --b")
        result = split_subadditive(seq, args.a, args.b)
    elif strategy == "pq_lift":
        result = extract_pq_lift(seq)
    elif strategy == "filtration":
        if args.a is None or args.b is None or args.q is None:
            raise SystemExit2("filtration requires --a, --b and --q")
        result = extract_filtration(seq, args.a, args.b, args.q)
    elif strategy in ("two_piece_2d", "main_theorem"):
        if args.k is None:
            raise SystemExit2(f"{strategy} requires --k")
        result = extract_proof_guided(seq, strategy, k=args.k)
    elif strategy == "half_lemma":
        if not args.k_set:
            raise SystemExit2("half_lemma requires --k-set")
        result = extract_proof_guided(seq, strategy, k_set=args.k_set)
    else:
        raise SystemExit2(f"unknown strategy {strategy!r}; known: {', '.join(STRATEGIES)}")
    report = {"command": "extract", "group": list(group.factors), "input_length": len(seq)}
    report.update(result.to_json_dict())
    _emit(args, report)
    return 0


def cmd_verify_conjecture(args) -> int:
    group = parse_group(args.group)
    if not group.is_pgroup:
        raise SystemExit2("verify-conjecture requires a p-group")
    profile = group.pgroup_profile
    q, dav, p = profile.q, profile.davenport, profile.p
    rows = []
    violations = []
    for k in range(1, args.kmax + 1):
        record, _ = _cached_exact_s(args, group, LengthSpec.scaled_by({k}, q))
        conjectured = k * q + dav - 1
        value = record.value
        if record.status != "exact":
            raise ResourceCapExceeded(f"k={k}: scan did not reach an exact value")
        if value < conjectured:
            verdict = "below proven lower bound"
            violations.append((k, "theorem_violation", "gao_lower"))
        elif k * q < dav:
            verdict = "strict (expected: below the Davenport constant)"
            if value == conjectured:
                verdict = "equality where strictness is proven"
                violations.append((k, "theorem_violation", "gao_strictness"))
        elif value == conjectured:
            verdict = "equality"
        else:
            verdict = "conjecture counterexample"
            if k * q >= group.order:
                violations.append((k, "theorem_violation", "gao_equality"))
            elif k % p == 0:
                violations.append((k, "theorem_violation", "pcase"))
            else:
                violations.append((k, "conjecture_counterexample", "conjecture"))
        rows.append(
            {"k": k, "length": k * q, "value": value, "conjectured": conjectured, "verdict": verdict}
        )
    report = {
        "command": "verify-conjecture",
        "group": list(group.factors),
        "kmax": args.kmax,
        "rows": rows,
        "violations": [
            {"k": k, "kind": kind, "statement": statement} for k, kind, statement in violations
        ],
    }
    _emit(args, report, rows)
    if violations:
        _write_artifact(args, report)
        return 1
    return 0


def _add_common(parser, *, fmt=True, cache=False, cells=True, artifacts=False) -> None:
    if fmt:
        parser.add_argument("--format", choices=("json", "csv", "md"), default="json")
    if cache:
        parser.add_argument("--cache", default=None, help="cache file (default ~/.zerosum-cache.ndjson or ZEROSUM_CACHE)")
        parser.add_argument("--no-cache", action="store_true")
    if cells:
        parser.add_argument("--max-cells", type=int, default=None, help="table-update budget (default 1e9 or ZEROSUM_MAX_CELLS)")
    if artifacts:
        parser.add_argument("--artifact-dir", default=".", help="where counterexample artifacts are written")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="zerosum", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    p_group = sub.add_parser("group", help="group structure reports")
    group_sub = p_group.add_subparsers(dest="subcommand", required=True)
    p_info = group_sub.add_parser("info", help="structural constants and hypothesis checks")
    p_info.add_argument("group")
    _add_common(p_info, cells=False)
    p_info.set_defaults(func=cmd_group_info)

    p_exact = sub.add_parser("exact", help="exact invariants by exhaustive search")
    p_exact.add_argument("quantity", choices=("s", "davenport", "ell"))
    p_exact.add_argument("--group", required=True)
    p_exact.add_argument("--lengths", type=_int_set, default=None, help="absolute admissible lengths, e.g. 3,6")
    p_exact.add_argument("--k-set", type=_int_set, default=None, help="multiplier set (scaled by --unit or exp(G))")
    p_exact.add_argument("--unit", type=int, default=None)
    p_exact.add_argument("--cap", type=int, default=None)
    p_exact.add_argument("--kmax", type=int, default=None, help="scan limit for ell")
    _add_common(p_exact, cache=True, artifacts=True)
    p_exact.set_defaults(func=cmd_exact)

    p_bounds = sub.add_parser("bounds", help="evaluate every bound rule at one target")
    p_bounds.add_argument("--group", required=True)
    p_bounds.add_argument("--k", type=int, required=True, help="target length in units of exp(G)")
    p_bounds.add_argument("--k-set", type=_int_set, default=None)
    _add_common(p_bounds, cells=False)
    p_bounds.set_defaults(func=cmd_bounds)

    p_witness = sub.add_parser("witness", help="canonical extremal lower-bound witness")
    p_witness.add_argument("--group", required=True)
    p_witness.add_argument("--k", type=int, required=True)
    p_witness.add_argument("--out", default=None, help="write the sequence file here")
    _add_common(p_witness)
    p_witness.set_defaults(func=cmd_witness)

    p_poly = sub.add_parser("poly", help="algebraic certificates")
    poly_sub = p_poly.add_subparsers(dest="subcommand", required=True)
    p_check = poly_sub.add_parser("check", help="cube evaluation, top coefficient, non-vanishing report")
    p_check.add_argument("--group", required=True)
    p_check.add_argument("--k-set", type=_int_set, required=True)
    p_check.add_argument("--length", type=int, default=None, help="sequence length (default: critical length)")
    p_check.add_argument("--sequence", default=None, help="sequence file instead of a random instance")
    p_check.add_argument("--seed", type=int, default=None)
    p_check.add_argument("--max-hits", type=int, default=4096)
    _add_common(p_check, artifacts=True)
    p_check.set_defaults(func=cmd_poly_check)

    p_extract = sub.add_parser("extract", help="proof-guided constructive extraction")
    p_extract.add_argument("--group", required=True)
    p_extract.add_argument("--strategy", required=True, choices=STRATEGIES)
    p_extract.add_argument("--sequence", default=None)
    p_extract.add_argument("--length", type=int, default=None)
    p_extract.add_argument("--seed", type=int, default=None)
    p_extract.add_argument("--k", type=int, default=None)
    p_extract.add_argument("--k-set", type=_int_set, default=None)
    p_extract.add_argument("--a", type=int, default=None)
    p_extract.add_argument("--b", type=int, default=None)
    p_extract.add_argument("--q", type=int, default=None)
    _add_common(p_extract, artifacts=True)
    p_extract.set_defaults(func=cmd_extract)

    p_verify = sub.add_parser("verify-conjecture", help="scan exact values against the conjectured equality")
    p_verify.add_argument("--group", required=True)
    p_verify.add_argument("--kmax", type=int, required=True)
    _add_common(p_verify, cache=True, artifacts=True)
    p_verify.set_defaults(func=cmd_verify_conjecture)

    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return 2 if exc.code not in (0, None) else 0
    try:
        return args.func(args)
    except SystemExit2 as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return 2
    except (GroupSpecError, SequenceFormatError, PremiseViolation, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except ResourceCapExceeded as exc:
        print(f"resource cap: {exc}", file=sys.stderr)
        return 3
    except CounterexampleCandidate as exc:
        print(f"inconsistency: {exc}", file=sys.stderr)
        _write_artifact(args, exc.artifact)
        return 1


if __name__ == "__main__":
    sys.exit(main())
