"""Comparison tests packaged behind one streaming interface.

A comparison test consumes a play path (outcomes plus both experts' announced
forecasts, so everything is non-counterfactual) and emits a three-valued
verdict.  Tests expose ``new_state`` / ``update`` / ``finish`` so a Monte
Carlo runner can feed several tests from a single simulated path; the
``evaluate`` convenience wraps that for a finished ``PlayPath``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

from .core import (
    DiracStrategy,
    ForecastingStrategy,
    PlayPath,
    outcome_probability,
)
from .crosscal import (
    CrossCalibParams,
    CrossCalibState,
    cross_calibration_pass,
    cross_comparison_verdict,
    update_cross_calibration,
)
from .likelihood import (
    LikelihoodState,
    Verdict,
    VerdictParams,
    derivative_verdict,
    is_anomalous,
    likelihood_ratio_verdict,
    update_likelihood,
)

__all__ = [
    "ComparisonTest",
    "DerivativeTest",
    "LikelihoodRatioTest",
    "CrossCalibrationTest",
    "IdealIIDTest",
    "PathPin",
    "PinnedPathTest",
    "ideal_iid_verdict",
    "day_one_anchored_test",
]


def _noop() -> None:
    pass


def _likelihood_updater(state: LikelihoodState):
    """Hot-loop twin of ``update_likelihood``: accumulates in locals and
    writes the state back once at flush; arithmetic is identical."""
    log = math.log
    t = state.t
    log_ratio = state.log_ratio
    num0 = state.numerator_zero
    den0 = state.denominator_zero
    burn = state.burn_in
    rmin, rmax = state.running_min, state.running_max
    omin, omax = state.overall_min, state.overall_max

    def push(outcome: int, forecast0: float, forecast1: float) -> None:
        nonlocal t, log_ratio, num0, den0, rmin, rmax, omin, omax
        if outcome != 1:
            forecast0 = 1.0 - forecast0
            forecast1 = 1.0 - forecast1
        t += 1
        if forecast0 == 0.0 or forecast1 == 0.0:
            if forecast0 == 0.0:
                den0 = True
            if forecast1 == 0.0:
                num0 = True
        else:
            log_ratio += log(forecast1) - log(forecast0)
        if log_ratio < omin:
            omin = log_ratio
        if log_ratio > omax:
            omax = log_ratio
        if t > burn:
            if log_ratio < rmin:
                rmin = log_ratio
            if log_ratio > rmax:
                rmax = log_ratio

    def flush() -> None:
        state.t = t
        state.log_ratio = log_ratio
        state.numerator_zero = num0
        state.denominator_zero = den0
        state.running_min = rmin
        state.running_max = rmax
        state.overall_min = omin
        state.overall_max = omax

    return push, flush


class ComparisonTest:
    """Streaming interface shared by every shipped comparison test."""

    name: str = ""

    def new_state(self):
        raise NotImplementedError

    def update(self, state, outcome: int, forecast0: float, forecast1: float) -> None:
        raise NotImplementedError

    def finish(self, state) -> tuple[Verdict, bool]:
        """Final (verdict, anomalous) once the horizon has been consumed."""
        raise NotImplementedError

    def evaluate(self, path: PlayPath) -> Verdict:
        verdict, _ = self.evaluate_full(path)
        return verdict

    def evaluate_full(self, path: PlayPath) -> tuple[Verdict, bool]:
        state = self.new_state()
        for w, a, b in path.iter_triples():
            self.update(state, w, a, b)
        return self.finish(state)

    def updater(self, state):
        """Per-trial (push, flush) pair for the hot sampling loop: ``push``
        is equivalent to calling ``update`` with ``state`` bound, ``flush``
        syncs any locally accumulated values back into ``state`` and must be
        called before ``finish``."""
        update = self.update

        def push(outcome: int, forecast0: float, forecast1: float) -> None:
            update(state, outcome, forecast0, forecast1)

        return push, _noop

    def params_dict(self) -> dict:
        return {}


@dataclass(frozen=True)
class DerivativeTest(ComparisonTest):
    """Names an expert only when the likelihood ratio has collapsed to zero
    against the rival (flagged zero factors, or log-ratio beyond the
    threshold currently and throughout the post-burn-in window)."""

    params: VerdictParams
    name: str = field(default="derivative", compare=False)

    def new_state(self) -> LikelihoodState:
        return LikelihoodState(burn_in=self.params.burn_in)

    def update(self, state, outcome, forecast0, forecast1) -> None:
        update_likelihood(
            state,
            outcome_probability(forecast0, outcome),
            outcome_probability(forecast1, outcome),
        )

    def finish(self, state) -> tuple[Verdict, bool]:
        return derivative_verdict(state, self.params), is_anomalous(state)

    def updater(self, state):
        return _likelihood_updater(state)

    def params_dict(self) -> dict:
        return {
            "lambda": self.params.lam,
            "burn_in": self.params.burn_in,
            "horizon": self.params.horizon,
        }


@dataclass(frozen=True)
class LikelihoodRatioTest(ComparisonTest):
    """Names the expert whose side of ratio 1 the post-burn-in likelihood
    ratio settled on; decisive far more often than the derivative rule."""

    params: VerdictParams
    name: str = field(default="likelihood_ratio", compare=False)

    def new_state(self) -> LikelihoodState:
        return LikelihoodState(burn_in=self.params.burn_in)

    def update(self, state, outcome, forecast0, forecast1) -> None:
        update_likelihood(
            state,
            outcome_probability(forecast0, outcome),
            outcome_probability(forecast1, outcome),
        )

    def finish(self, state) -> tuple[Verdict, bool]:
        return likelihood_ratio_verdict(state, self.params), is_anomalous(state)

    def updater(self, state):
        return _likelihood_updater(state)

    def params_dict(self) -> dict:
        return {"burn_in": self.params.burn_in, "horizon": self.params.horizon}


@dataclass(frozen=True)
class CrossCalibrationTest(ComparisonTest):
    """Runs the per-profile calibration check for both experts and is
    decisive only when exactly one of them passes."""

    n_intervals: int = 5
    params: CrossCalibParams = CrossCalibParams()
    name: str = field(default="crosscal", compare=False)

    def new_state(self) -> CrossCalibState:
        return CrossCalibState(self.n_intervals)

    def update(self, state, outcome, forecast0, forecast1) -> None:
        update_cross_calibration(state, forecast0, forecast1, outcome)

    def finish(self, state) -> tuple[Verdict, bool]:
        pass0 = cross_calibration_pass(state, 0, self.params)
        pass1 = cross_calibration_pass(state, 1, self.params)
        return cross_comparison_verdict(pass0, pass1), False

    def updater(self, state):
        # hot-loop twin of update_cross_calibration, without per-call checks
        from math import ceil

        n = self.n_intervals
        profiles = state.profiles
        get = profiles.get

        def push(outcome: int, forecast0: float, forecast1: float) -> None:
            j0 = 1 if forecast0 == 0.0 else ceil(forecast0 * n)
            j1 = 1 if forecast1 == 0.0 else ceil(forecast1 * n)
            key = (j0 if j0 < n else n, j1 if j1 < n else n)
            cell = get(key)
            if cell is None:
                profiles[key] = [1, outcome]
            else:
                cell[0] += 1
                cell[1] += outcome

        def flush() -> None:
            state.t = sum(cell[0] for cell in profiles.values())

        return push, flush

    def params_dict(self) -> dict:
        return {
            "intervals": self.n_intervals,
            "min_count": self.params.min_count,
            "slack": self.params.slack,
        }


def ideal_iid_verdict(
    f0_first: float, f1_first: float, a_hat: float, tol: float
) -> Verdict:
    """Names the expert whose opening forecast matches the average realization
    to within ``tol`` while the rival's does not."""
    if not 0.0 <= a_hat <= 1.0:
        raise ValueError(f"average realization must lie in [0, 1], got {a_hat}")
    if tol < 0.0:
        raise ValueError(f"tol must be >= 0, got {tol}")
    hit0 = abs(f0_first - a_hat) <= tol
    hit1 = abs(f1_first - a_hat) <= tol
    if hit1 and not hit0:
        return Verdict.EXPERT1
    if hit0 and not hit1:
        return Verdict.EXPERT0
    return Verdict.INCONCLUSIVE


class _IdealIIDState:
    __slots__ = ("t", "ones", "f0_first", "f1_first")

    def __init__(self):
        self.t = 0
        self.ones = 0
        self.f0_first = 0.5
        self.f1_first = 0.5


@dataclass(frozen=True)
class IdealIIDTest(ComparisonTest):
    """Average-realization test for constant forecasters: compares each
    expert's opening forecast against the empirical frequency of ones."""

    tol: float = 0.05
    name: str = field(default="ideal_iid", compare=False)

    def new_state(self) -> _IdealIIDState:
        return _IdealIIDState()

    def update(self, state, outcome, forecast0, forecast1) -> None:
        if state.t == 0:
            state.f0_first = forecast0
            state.f1_first = forecast1
        state.t += 1
        state.ones += outcome

    def finish(self, state) -> tuple[Verdict, bool]:
        if state.t == 0:
            return Verdict.INCONCLUSIVE, False
        a_hat = state.ones / state.t
        return ideal_iid_verdict(state.f0_first, state.f1_first, a_hat, self.tol), False

    def params_dict(self) -> dict:
        return {"tol": self.tol}


@dataclass(frozen=True)
class PathPin:
    """A distinguished play path (strategy pair plus its target outcome
    sequence) carrying a fixed verdict."""

    f0: ForecastingStrategy
    f1: ForecastingStrategy
    target: DiracStrategy
    verdict: Verdict


class _PinTracker:
    __slots__ = ("alive", "s0", "s1", "target", "t")

    def __init__(self, pin: PathPin):
        self.alive = True
        self.s0 = pin.f0.session()
        self.s1 = pin.f1.session()
        self.target = pin.target
        self.t = 0


class _PinnedState:
    __slots__ = ("trackers", "base_state")

    def __init__(self, trackers, base_state):
        self.trackers = trackers
        self.base_state = base_state


@dataclass(frozen=True)
class PinnedPathTest(ComparisonTest):
    """Delegates to a base test except on explicitly pinned play paths.

    A sampled path matches a pin only if every outcome follows the pin's
    target sequence and both announced forecasts equal the pin pair's
    forecasts at every period.  Mirrored pins keep the test anonymous; pins
    anchored at early periods make it sensitive to prefix surgery, which is
    exactly what a tail test may not be.
    """

    pins: tuple[PathPin, ...]
    base: ComparisonTest
    name: str = field(default="pinned_path", compare=False)

    def new_state(self) -> _PinnedState:
        return _PinnedState([_PinTracker(p) for p in self.pins], self.base.new_state())

    def update(self, state, outcome, forecast0, forecast1) -> None:
        for tr in state.trackers:
            if not tr.alive:
                continue
            e0 = tr.s0.forecast()
            e1 = tr.s1.forecast()
            if (
                outcome != tr.target.target_symbol(tr.t)
                or forecast0 != e0
                or forecast1 != e1
            ):
                tr.alive = False
                continue
            tr.s0.advance(outcome, e0, e1)
            tr.s1.advance(outcome, e0, e1)
            tr.t += 1
        self.base.update(state.base_state, outcome, forecast0, forecast1)

    def finish(self, state) -> tuple[Verdict, bool]:
        for pin, tr in zip(self.pins, state.trackers):
            if tr.alive:
                return pin.verdict, False
        return self.base.finish(state.base_state)

    def params_dict(self) -> dict:
        return {"pins": len(self.pins), "base": self.base.name, **self.base.params_dict()}


def day_one_anchored_test(base: ComparisonTest) -> PinnedPathTest:
    """Comparison test that overrides the verdict on the two all-ones play
    paths where one expert opened certain and the other opened at one half.

    The expert who announced 1 on day one is named on its own path; by the
    mirrored pin the test stays anonymous, yet replacing the day-one
    forecasts flips its verdict, so it is not invariant to prefix surgery.
    """
    from .core import FirstStepStrategy, IIDStrategy

    half_first = FirstStepStrategy(0.5, IIDStrategy(1.0))
    one_always = IIDStrategy(1.0)
    ones = DiracStrategy((), 1)
    return PinnedPathTest(
        pins=(
            PathPin(half_first, one_always, ones, Verdict.EXPERT1),
            PathPin(one_always, half_first, ones, Verdict.EXPERT0),
        ),
        base=base,
        name="day_one_anchored",
    )
