"""Streaming likelihood-ratio state between two forecasters and the verdict
rules built on it.

The tracked quantity is the running log of (expert 1's probability of the
realized outcome) / (expert 0's probability of the realized outcome).  Exact
zero factors are recorded as absorbing flags instead of infinities, so no
NaN can arise from inf - inf.

Both finite-horizon verdicts are explicit policies approximating limit
statements: the derivative rule asks the log-ratio to sit beyond a threshold
both at the horizon and throughout the post-burn-in window, which keeps it
inconclusive on ratios that stay bounded or oscillate; the ratio rule only
asks for a post-burn-in sign.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum

__all__ = [
    "Verdict",
    "LikelihoodState",
    "VerdictParams",
    "update_likelihood",
    "derivative_verdict",
    "likelihood_ratio_verdict",
    "is_anomalous",
]

_INF = math.inf


class Verdict(Enum):
    """Three-valued outcome of a comparison: expert 0, undecided, expert 1.

    Serialized as the scores 0, 1/2 and 1; complementing swaps the experts
    and fixes the inconclusive value.
    """

    EXPERT0 = 0.0
    INCONCLUSIVE = 0.5
    EXPERT1 = 1.0

    @property
    def score(self) -> float:
        return self.value

    def complement(self) -> "Verdict":
        return Verdict(1.0 - self.value)

    @property
    def label(self) -> str:
        return self.name.lower()


class LikelihoodState:
    """Running log likelihood ratio with zero-factor flags.

    ``numerator_zero`` is set once expert 1 assigns probability 0 to a
    realized outcome (the product is then 0 forever); ``denominator_zero``
    once expert 0 does (the ratio is then +inf by definition).  Both flags
    are absorbing.  Extremes of the log-ratio are tracked only after the
    first ``burn_in`` steps; ``overall_min`` / ``overall_max`` cover every
    step and exist for threshold-crossing statistics.
    """

    __slots__ = (
        "t",
        "log_ratio",
        "numerator_zero",
        "denominator_zero",
        "burn_in",
        "running_min",
        "running_max",
        "overall_min",
        "overall_max",
    )

    def __init__(self, burn_in: int = 10):
        if burn_in < 0:
            raise ValueError(f"burn_in must be >= 0, got {burn_in}")
        self.t = 0
        self.log_ratio = 0.0
        self.numerator_zero = False
        self.denominator_zero = False
        self.burn_in = burn_in
        self.running_min = _INF
        self.running_max = -_INF
        self.overall_min = _INF
        self.overall_max = -_INF

    def __repr__(self) -> str:
        flags = ""
        if self.numerator_zero:
            flags += " num0"
        if self.denominator_zero:
            flags += " den0"
        return f"LikelihoodState(t={self.t}, log_ratio={self.log_ratio:.6g}{flags})"


def update_likelihood(
    state: LikelihoodState, f0_prob: float, f1_prob: float
) -> LikelihoodState:
    """Fold one period into the state; returns the same (mutated) state.

    ``f0_prob`` and ``f1_prob`` are the probabilities each expert assigned to
    the outcome that was actually realized.  A zero on either side sets the
    corresponding flag; when both sides hit zero on the same step both flags
    are set, keeping expert-swap symmetry exact.
    """
    if not 0.0 <= f0_prob <= 1.0 or not 0.0 <= f1_prob <= 1.0:
        raise ValueError(f"probabilities must lie in [0, 1], got {f0_prob}, {f1_prob}")
    state.t += 1
    if f0_prob == 0.0 or f1_prob == 0.0:
        if f0_prob == 0.0:
            state.denominator_zero = True
        if f1_prob == 0.0:
            state.numerator_zero = True
    else:
        state.log_ratio += math.log(f1_prob) - math.log(f0_prob)
    x = state.log_ratio
    if x < state.overall_min:
        state.overall_min = x
    if x > state.overall_max:
        state.overall_max = x
    if state.t > state.burn_in:
        if x < state.running_min:
            state.running_min = x
        if x > state.running_max:
            state.running_max = x
    return state


@dataclass(frozen=True, slots=True)
class VerdictParams:
    """Finite-horizon decision policy.

    ``lam`` is the threshold on the log-ratio (ratio boundary exp(lam));
    ``burn_in`` is the number of leading steps excluded from the running
    extremes and must leave a nonempty window before ``horizon``.
    """

    horizon: int
    lam: float = math.log(100.0)
    burn_in: int = 10

    def __post_init__(self):
        if self.horizon < 1:
            raise ValueError(f"horizon must be >= 1, got {self.horizon}")
        if self.lam <= 0.0:
            raise ValueError(f"lam must be positive, got {self.lam}")
        if not 0 <= self.burn_in < self.horizon:
            raise ValueError(
                f"burn_in must lie in [0, horizon), got {self.burn_in} with horizon {self.horizon}"
            )


def is_anomalous(state: LikelihoodState) -> bool:
    """True when the path is impossible under both experts (both flags set);
    no ranking is fabricated there."""
    return state.numerator_zero and state.denominator_zero


def _check_at_horizon(state: LikelihoodState, params: VerdictParams) -> None:
    if state.t != params.horizon:
        raise ValueError(
            f"verdict requested at t={state.t}, but params.horizon={params.horizon}"
        )


def derivative_verdict(state: LikelihoodState, params: VerdictParams) -> Verdict:
    """Finite proxy for the ratio having limit 0 (expert 0) or +inf (expert 1).

    Expert 1 wins when expert 0 zeroed out, or when the log-ratio exceeds
    +lam both currently and at its post-burn-in minimum; expert 0
    symmetrically with the maximum below -lam.  A bounded or oscillating
    ratio therefore stays inconclusive, as does a path with both flags set.
    """
    _check_at_horizon(state, params)
    if is_anomalous(state):
        return Verdict.INCONCLUSIVE
    if state.denominator_zero:
        return Verdict.EXPERT1
    if state.numerator_zero:
        return Verdict.EXPERT0
    lam = params.lam
    if state.running_min > lam and state.log_ratio > lam:
        return Verdict.EXPERT1
    if state.running_max < -lam and state.log_ratio < -lam:
        return Verdict.EXPERT0
    return Verdict.INCONCLUSIVE


def likelihood_ratio_verdict(state: LikelihoodState, params: VerdictParams) -> Verdict:
    """Finite proxy for liminf of the ratio above 1 / limsup below 1.

    Expert 1 wins when expert 0 zeroed out or the post-burn-in log-ratio
    stayed strictly positive; expert 0 symmetrically.  A log-ratio pinned at
    exactly 0 is inconclusive.
    """
    _check_at_horizon(state, params)
    if is_anomalous(state):
        return Verdict.INCONCLUSIVE
    if state.denominator_zero:
        return Verdict.EXPERT1
    if state.numerator_zero:
        return Verdict.EXPERT0
    if state.running_min > 0.0:
        return Verdict.EXPERT1
    if state.running_max < 0.0:
        return Verdict.EXPERT0
    return Verdict.INCONCLUSIVE
