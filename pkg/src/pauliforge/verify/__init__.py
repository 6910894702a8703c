"""Dense and stabilizer oracles for circuit equivalence."""

from .dense import (
    BranchReport,
    CorrectionSearchFailed,
    Verdict,
    branch_operator,
    check_equivalence,
    compare_circuits,
    derive_corrections,
    enumerate_branches,
    install_corrections,
    phase_deviation,
    target_exponential,
)
from ._accel import backend_name
from .program import LimitExceeded

__all__ = [
    "BranchReport",
    "CorrectionSearchFailed",
    "LimitExceeded",
    "Verdict",
    "backend_name",
    "branch_operator",
    "check_equivalence",
    "compare_circuits",
    "derive_corrections",
    "enumerate_branches",
    "install_corrections",
    "phase_deviation",
    "target_exponential",
]
