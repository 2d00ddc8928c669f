"""Evaluation result record shared by the integral evaluators."""

from __future__ import annotations

from dataclasses import dataclass

# Below this theta the closed forms are replaced by their limit value 1.0.
LIMIT_THETA = 1e-12
# Below this theta the result is flagged as being in the small-theta regime,
# where cancellation costs roughly log10(1/sqrt(theta)) digits.
NEAR_LIMIT_THETA = 1e-8


@dataclass(frozen=True)
class IntegralResult:
    """A floating value together with how it was obtained.

    ``method`` is one of ``"closed-form"``, ``"consolidated"``,
    ``"direct-sum"``, ``"mp"`` or ``"theta-limit"``.  ``near_limit`` is set
    whenever ``theta < NEAR_LIMIT_THETA``.
    """

    value: float
    p: int
    theta: float
    args: tuple[float, ...]
    method: str
    near_limit: bool = False

    def __float__(self):
        return self.value

    def to_dict(self) -> dict:
        return {
            "value": self.value,
            "p": self.p,
            "theta": self.theta,
            "args": list(self.args),
            "method": self.method,
            "near_limit": self.near_limit,
        }
