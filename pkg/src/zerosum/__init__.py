"""Zero-sum invariants of finite abelian groups.

Exact values by exhaustive search, closed-form bound rules with hypothesis
checking, algebraic certificates on the Boolean cube, and proof-guided
constructive extraction, behind one CLI.
"""

from .bounds import THEOREM_IDS, BoundResult, Hypothesis, best_upper, evaluate_bound
from .engine import (
    ReachTable,
    build_reach,
    find_zero_sum,
    naive_zero_sum_lengths,
    zero_sum_lengths,
)
from .errors import (
    CounterexampleCandidate,
    GroupSpecError,
    PremiseViolation,
    ResourceCapExceeded,
    SequenceFormatError,
    ZerosumError,
)
from .extract import extract_filtration, extract_pq_lift, extract_proof_guided, split_subadditive
from .groups import (
    AbelianGroup,
    GroupElement,
    davenport_olson,
    parse_group,
    pgroup_dimension,
    quotient_and_subgroup,
)
from .invariants import (
    InvariantRecord,
    LengthSpec,
    exact_davenport,
    exact_s,
    exact_threshold_ell,
    extremal_witness_lower,
    max_avoiding_length,
)
from .polynomial import (
    MultilinearCoeffs,
    WitnessInstance,
    full_coefficient,
    lucas_binom,
    vanishing_report,
)
from .sequences import GSeq, sigma

__version__ = "0.1.0"

__all__ = [
    "AbelianGroup",
    "BoundResult",
    "CounterexampleCandidate",
    "GSeq",
    "GroupElement",
    "GroupSpecError",
    "Hypothesis",
    "InvariantRecord",
    "LengthSpec",
    "MultilinearCoeffs",
    "PremiseViolation",
    "ReachTable",
    "ResourceCapExceeded",
    "SequenceFormatError",
    "THEOREM_IDS",
    "WitnessInstance",
    "ZerosumError",
    "best_upper",
    "build_reach",
    "davenport_olson",
    "evaluate_bound",
    "exact_davenport",
    "exact_s",
    "exact_threshold_ell",
    "extract_filtration",
    "extract_pq_lift",
    "extract_proof_guided",
    "extremal_witness_lower",
    "find_zero_sum",
    "full_coefficient",
    "lucas_binom",
    "max_avoiding_length",
    "naive_zero_sum_lengths",
    "parse_group",
    "pgroup_dimension",
    "quotient_and_subgroup",
    "sigma",
    "split_subadditive",
    "vanishing_report",
    "zero_sum_lengths",
]
