"""Communication metrics: wrong-click mutual information, error rates and
detector-sensitivity thinning."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .engine import OutcomeDistribution

__all__ = [
    "OUTCOMES",
    "ClickStatistics",
    "ErrorRates",
    "build_statistics",
    "mutual_information",
    "error_rates",
]

OUTCOMES = ("D1", "D2", "D3", "bob", "inconclusive")
D1, D2, D3, BOB, INCONCLUSIVE = range(5)


@dataclass(frozen=True, eq=False)
class ClickStatistics:
    """Joint probabilities ``P(bit, outcome)`` as a ``(2, 5)`` array.

    Rows are Bob's bit (0 = pass, 1 = block), columns follow :data:`OUTCOMES`.
    """

    joint: np.ndarray

    def __post_init__(self):
        joint = np.array(self.joint, dtype=float)
        if joint.shape != (2, len(OUTCOMES)):
            raise ValueError(f"joint must have shape (2, {len(OUTCOMES)}), got {joint.shape}")
        if (joint < 0).any():
            raise ValueError("joint probabilities must be non-negative")
        if abs(math.fsum(joint.ravel()) - 1.0) > 1e-10:
            raise ValueError(f"joint sums to {math.fsum(joint.ravel())!r}, not 1")
        joint.setflags(write=False)
        object.__setattr__(self, "joint", joint)

    def p(self, bit: int, outcome: str) -> float:
        return float(self.joint[bit, OUTCOMES.index(outcome)])

    def marginal(self, outcome: str) -> float:
        col = OUTCOMES.index(outcome)
        return math.fsum(self.joint[:, col])

    @property
    def wrong_d1(self) -> float:
        """D1 clicked although Bob blocked."""
        return float(self.joint[1, D1])

    @property
    def wrong_d2(self) -> float:
        """D2 clicked although Bob passed."""
        return float(self.joint[0, D2])


@dataclass(frozen=True)
class ErrorRates:
    wrong_click_rate: float
    inconclusive_rate: float
    # None when no D1/D2 click can occur.
    conclusive_accuracy: float | None


def _row(dist: OutcomeDistribution, eta: float) -> list[float]:
    d1, d2 = eta * dist.p_d1, eta * dist.p_d2
    missed = math.fsum([dist.p_d1 - d1, dist.p_d2 - d2, dist.p_noise])
    return [d1, d2, dist.p_d3, dist.p_bob, missed]


def build_statistics(
    pass_dist: OutcomeDistribution, block_dist: OutcomeDistribution, eta: float = 1.0
) -> ClickStatistics:
    """Joint click statistics for equiprobable bits and D1/D2 sensitivity ``eta``.

    D1/D2 arrivals click with probability ``eta``; misses and photons taken
    by foreign obstructions are inconclusive. D3 and D4 are ideal.
    """
    if not 0.0 <= eta <= 1.0:
        raise ValueError(f"eta must lie in [0, 1], got {eta!r}")
    joint = 0.5 * np.array([_row(pass_dist, eta), _row(block_dist, eta)])
    return ClickStatistics(joint)


def mutual_information(stats: ClickStatistics) -> float:
    """Wrong-click information in bits: ``-sum_i P(y=D_i) log2 P(x=D_i)``.

    ``P(y=D1)`` is a D1 click for a blocked photon, ``P(y=D2)`` a D2 click for
    a passed photon, and ``P(x=D_i)`` the total click probability of D_i.
    """
    terms = []
    for wrong, detector in ((stats.wrong_d1, "D1"), (stats.wrong_d2, "D2")):
        if wrong == 0.0:
            continue
        marginal = stats.marginal(detector)
        if marginal <= 0.0:
            raise ValueError(f"P(y={detector}) > 0 but detector {detector} never clicks")
        terms.append(-wrong * math.log2(marginal))
    return math.fsum(terms)


def error_rates(stats: ClickStatistics) -> ErrorRates:
    wrong = stats.wrong_d1 + stats.wrong_d2
    clicks = stats.marginal("D1") + stats.marginal("D2")
    accuracy = (stats.p(0, "D1") + stats.p(1, "D2")) / clicks if clicks > 0 else None
    return ErrorRates(
        wrong_click_rate=wrong,
        inconclusive_rate=stats.marginal("inconclusive"),
        conclusive_accuracy=accuracy,
    )
