"""Check reports shared by the sampler and the verification suite."""

from __future__ import annotations

from dataclasses import dataclass, field


@dataclass(frozen=True)
class CheckReport:
    """Outcome of one verification check.

    ``exact`` distinguishes linear-algebra checks (compared against a
    tolerance) from sampled checks (compared against a critical value).
    ``passed`` always means the discrepancy respects the declared bound.
    """

    name: str
    exact: bool
    discrepancy: float
    tolerance: float
    passed: bool
    n: int = 0
    seed: object = None
    details: dict = field(default_factory=dict)

    def to_dict(self):
        return {
            "name": self.name,
            "exact": self.exact,
            "discrepancy": self.discrepancy,
            "tolerance": self.tolerance,
            "passed": self.passed,
            "n": self.n,
            "seed": self.seed,
            "details": _jsonable(self.details),
        }


def _jsonable(value):
    if isinstance(value, dict):
        return {str(k): _jsonable(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [_jsonable(v) for v in value]
    if hasattr(value, "item"):
        return value.item()
    return value
