"""Exact run-length sequence calculus for diagonal operator ideals."""

from .bigint import format_int, parse_int
from .dyadic import Dyadic, exact_log2, to_exact
from .ideal import (
    DominanceResult,
    DominanceWitness,
    IdealSpec,
    MembershipResult,
    SearchBounds,
    StabilityVerdict,
    dominance_check,
    membership_search,
    stability_probe,
)
from .profiles import CesaroProfile, GeometricMeanProfile, StepProfile, UndecidedComparison, as_profile
from .sequence import BlockSequence, CoverageError, RunSequence, SequenceInvariantError, SignedRuns
from .serialize import scalar_from_json, scalar_to_json, sequence_from_json, sequence_to_json
from .transforms import (
    Log2Value,
    add_sequences,
    cesaro_transform,
    dilate,
    geometric_mean_transform,
    interleave,
    partial_sum,
    scale,
    value_at,
)

__all__ = [
    "BlockSequence",
    "CesaroProfile",
    "CoverageError",
    "DominanceResult",
    "DominanceWitness",
    "Dyadic",
    "GeometricMeanProfile",
    "IdealSpec",
    "Log2Value",
    "MembershipResult",
    "RunSequence",
    "SearchBounds",
    "SequenceInvariantError",
    "SignedRuns",
    "StabilityVerdict",
    "StepProfile",
    "UndecidedComparison",
    "add_sequences",
    "as_profile",
    "cesaro_transform",
    "dilate",
    "dominance_check",
    "exact_log2",
    "format_int",
    "geometric_mean_transform",
    "interleave",
    "membership_search",
    "parse_int",
    "partial_sum",
    "scalar_from_json",
    "scalar_to_json",
    "scale",
    "sequence_from_json",
    "sequence_to_json",
    "stability_probe",
    "to_exact",
    "value_at",
]
