"""Structured pass/fail records for numerical theorem checks."""

from __future__ import annotations

from dataclasses import dataclass, field

PASS = "pass"
FAIL = "fail"
INCONCLUSIVE = "inconclusive"


@dataclass
class VerificationReport:
    """Outcome of one check: status, worst residual, and a witness on failure.

    ``worst_residual`` is signed in the check's own normalization: values
    at or below the check tolerance mean the inequality held.  On failure,
    ``witness`` pins down a reproducing (vertex, function, time) triple.
    ``parameters`` records tolerances and inputs for provenance.
    """

    check_name: str
    status: str
    worst_residual: float
    witness: dict | None = None
    parameters: dict = field(default_factory=dict)

    @property
    def passed(self) -> bool:
        return self.status == PASS

    def to_dict(self) -> dict:
        return {
            "check": self.check_name,
            "status": self.status,
            "worst_residual": self.worst_residual,
            "witness": self.witness,
            "parameters": self.parameters,
        }


def aggregate_exit_code(reports) -> int:
    """CI contract: 0 all pass, 1 any fail, 2 any inconclusive."""
    statuses = {r.status for r in reports}
    if FAIL in statuses:
        return 1
    if INCONCLUSIVE in statuses:
        return 2
    return 0
