"""Cross-calibration of two forecasters and the comparison verdict it induces.

The unit interval is split into N > 4 equal closed subintervals.  Each period
the pair of announced forecasts maps to a profile (j0, j1) of interval
indices; per profile we count occurrences and realized ones.  An expert
passes when, over every profile that recurs often enough, the conditional
frequency of ones stays within half an interval width of the midpoint of the
interval that expert announced.  One expert passing while the other fails is
the only decisive case.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .likelihood import Verdict

__all__ = [
    "CrossCalibState",
    "CrossCalibParams",
    "interval_index",
    "update_cross_calibration",
    "cross_calibration_pass",
    "cross_comparison_verdict",
    "profile_rows",
]


def interval_index(p: float, n_intervals: int) -> int:
    """Index in {1..N} of the leftmost closed subinterval containing ``p``.

    Interval j covers [(j-1)/N, j/N]; interior boundary points k/N belong to
    two intervals and deterministically map to the lower index k.
    """
    if n_intervals <= 4:
        raise ValueError(f"need more than 4 subintervals, got {n_intervals}")
    if not 0.0 <= p <= 1.0:
        raise ValueError(f"probability must lie in [0, 1], got {p}")
    if p == 0.0:
        return 1
    return min(math.ceil(p * n_intervals), n_intervals)


class CrossCalibState:
    """Per-profile occurrence and ones counters for a pair of forecasters.

    ``profiles`` maps (j0, j1) to a mutable [count, ones_sum] pair.  The
    conditional frequency of a profile is ones_sum / count, defined only for
    profiles that occurred.
    """

    __slots__ = ("n_intervals", "t", "profiles")

    def __init__(self, n_intervals: int = 5):
        if n_intervals <= 4:
            raise ValueError(f"need more than 4 subintervals, got {n_intervals}")
        self.n_intervals = n_intervals
        self.t = 0
        self.profiles: dict[tuple[int, int], list[int]] = {}

    def frequency(self, profile: tuple[int, int]) -> float:
        count, ones = self.profiles[profile]
        return ones / count

    def __repr__(self) -> str:
        return f"CrossCalibState(N={self.n_intervals}, t={self.t}, profiles={len(self.profiles)})"


@dataclass(frozen=True, slots=True)
class CrossCalibParams:
    """Finite proxies for the limit statements: a profile counts as recurring
    once it has been seen ``min_count`` times, and ``slack`` widens the
    half-width band to absorb finite-sample noise."""

    min_count: int = 25
    slack: float = 0.02

    def __post_init__(self):
        if self.min_count < 1:
            raise ValueError(f"min_count must be >= 1, got {self.min_count}")
        if self.slack < 0.0:
            raise ValueError(f"slack must be >= 0, got {self.slack}")


def update_cross_calibration(
    state: CrossCalibState, forecast0: float, forecast1: float, outcome: int
) -> CrossCalibState:
    """Fold one period into the profile table; returns the same state."""
    if outcome not in (0, 1):
        raise ValueError(f"outcome must be 0 or 1, got {outcome!r}")
    n = state.n_intervals
    key = (interval_index(forecast0, n), interval_index(forecast1, n))
    cell = state.profiles.get(key)
    if cell is None:
        state.profiles[key] = [1, outcome]
    else:
        cell[0] += 1
        cell[1] += outcome
    state.t += 1
    return state


def cross_calibration_pass(
    state: CrossCalibState, i: int, params: CrossCalibParams
) -> bool:
    """Whether expert ``i`` is cross-calibrated on the recorded play.

    True iff every profile seen at least ``min_count`` times has its
    conditional frequency within 1/(2N) + slack of the midpoint of the
    interval expert i announced there; vacuously true when no profile
    recurs that often.
    """
    if i not in (0, 1):
        raise ValueError(f"expert index must be 0 or 1, got {i}")
    n = state.n_intervals
    band = 1.0 / (2 * n) + params.slack
    for key, (count, ones) in state.profiles.items():
        if count < params.min_count:
            continue
        midpoint = (2 * key[i] - 1) / (2 * n)
        if abs(ones / count - midpoint) > band:
            return False
    return True


def cross_comparison_verdict(pass0: bool, pass1: bool) -> Verdict:
    """Decisive only when exactly one expert passes."""
    if pass0 == pass1:
        return Verdict.INCONCLUSIVE
    return Verdict.EXPERT0 if pass0 else Verdict.EXPERT1


def profile_rows(state: CrossCalibState) -> list[dict]:
    """Final profile table as rows (l0, l1, nu, ones_sum, freq, midpoint0,
    midpoint1, band), sorted by profile; used for CSV export."""
    n = state.n_intervals
    rows = []
    for (l0, l1), (count, ones) in sorted(state.profiles.items()):
        rows.append(
            {
                "l0": l0,
                "l1": l1,
                "nu": count,
                "ones_sum": ones,
                "freq": ones / count,
                "midpoint0": (2 * l0 - 1) / (2 * n),
                "midpoint1": (2 * l1 - 1) / (2 * n),
                "band": 1.0 / (2 * n),
            }
        )
    return rows
