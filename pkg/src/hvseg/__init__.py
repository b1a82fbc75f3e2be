"""Semi-fixed HV-segment intersection graph recognition and its
equivalent formulations: constrained level planarity and sequential
PQ-ordering."""

from __future__ import annotations

from .core import (
    CheckResult,
    InstanceError,
    LevelInstance,
    LevelWitness,
    OrderWitness,
    SegInstance,
    SegWitness,
    SeqPQInstance,
    WitnessError,
    check_witness,
    level_structure,
    validate,
)
from .solve import (
    check_lemma4,
    merge_orders,
    recognize_fixed_both,
    solve_seqpq,
    solve_sfhvseg,
    solve_tlp,
)

__all__ = [
    "CheckResult",
    "InstanceError",
    "LevelInstance",
    "LevelWitness",
    "OrderWitness",
    "SegInstance",
    "SegWitness",
    "SeqPQInstance",
    "WitnessError",
    "check_lemma4",
    "check_witness",
    "level_structure",
    "merge_orders",
    "recognize_fixed_both",
    "solve_seqpq",
    "solve_sfhvseg",
    "solve_tlp",
    "validate",
]
