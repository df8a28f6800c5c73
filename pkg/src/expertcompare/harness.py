"""Monte Carlo estimation of verdict distributions and checkers for the
properties a comparison test may or may not have: error-free behavior under
the informed expert's measure, reasonableness on measure-gap events,
anonymity under expert swap, invariance to prefix surgery, and perfect
identification for separated constant forecasters.

Trials are embarrassingly parallel: every trial draws its randomness from a
counter-based stream keyed by (master_seed, trial_index), so reports are
identical for any worker count and any scheduling.
"""

from __future__ import annotations

import math
import multiprocessing
import time
from dataclasses import dataclass, field
from typing import Optional, Sequence, Union

from .comparison import (
    ComparisonTest,
    CrossCalibrationTest,
    DerivativeTest,
    IdealIIDTest,
    LikelihoodRatioTest,
)
from .core import (
    ExpertMeasure,
    ExternalNature,
    ForecastingStrategy,
    Nature,
    PlayPath,
    dirac_strategy,
    first_step_strategy,
    generate_outcomes,
    iid_strategy,
    induced_prefix_probability,
    mixture_strategy,
    prefix_forced_strategy,
    replay_path,
    sample_path,
    time_varying_strategy,
    trial_rng,
)
from .crosscal import CrossCalibParams, profile_rows, update_cross_calibration
from .likelihood import LikelihoodState, Verdict, VerdictParams, update_likelihood

__all__ = [
    "PrefixCylinder",
    "AllOnesTail",
    "EventSpec",
    "Scenario",
    "TestReport",
    "RunReport",
    "wilson_interval",
    "estimate_verdict_distribution",
    "check_error_free",
    "check_reasonable",
    "check_anonymity",
    "check_tail",
    "check_ideal_iid",
    "check_equivalence",
    "check_inconclusive_under_absolute_continuity",
    "anonymity_suite",
    "random_strategy",
]


# --- decidable events -------------------------------------------------------

@dataclass(frozen=True, slots=True)
class PrefixCylinder:
    """Realizations whose first outcomes equal a fixed finite sequence."""

    outcomes: tuple[int, ...]

    @property
    def label(self) -> str:
        return "prefix:" + "".join(map(str, self.outcomes))

    def contains(self, outcomes: Sequence[int]) -> bool:
        k = len(self.outcomes)
        if len(outcomes) < k:
            raise ValueError(f"path shorter than the {k}-cylinder")
        return tuple(outcomes[:k]) == self.outcomes


@dataclass(frozen=True, slots=True)
class AllOnesTail:
    """The all-ones realization, checked on the realized finite path."""

    @property
    def label(self) -> str:
        return "all_ones"

    def contains(self, outcomes: Sequence[int]) -> bool:
        return all(w == 1 for w in outcomes)


EventSpec = Union[PrefixCylinder, AllOnesTail]


def wilson_interval(successes: int, n: int, z: float = 1.959963984540054) -> tuple[float, float]:
    """Wilson score interval for a binomial proportion; sane at 0 and 1."""
    if n == 0:
        return 0.0, 1.0
    p = successes / n
    z2 = z * z
    denom = 1.0 + z2 / n
    center = (p + z2 / (2 * n)) / denom
    half = z * math.sqrt(p * (1.0 - p) / n + z2 / (4 * n * n)) / denom
    lo = 0.0 if successes == 0 else max(0.0, center - half)
    hi = 1.0 if successes == n else min(1.0, center + half)
    return lo, hi


# --- scenario ---------------------------------------------------------------

@dataclass(frozen=True)
class Scenario:
    """Everything needed to reproduce one batch of trials.

    ``tests`` may hold several comparison tests; they are all evaluated on
    the same simulated paths, which is what disagreement estimates and
    joint conditional reports need.
    """

    f0: ForecastingStrategy
    f1: ForecastingStrategy
    nature: Nature
    horizon: int
    trials: int
    master_seed: int
    tests: tuple[ComparisonTest, ...]
    events: tuple[EventSpec, ...] = ()
    label: str = ""
    config: Optional[dict] = None

    def __post_init__(self):
        if self.horizon < 1:
            raise ValueError(f"horizon must be >= 1, got {self.horizon}")
        if self.trials < 1:
            raise ValueError(f"trials must be >= 1, got {self.trials}")
        if not self.tests:
            raise ValueError("scenario needs at least one comparison test")
        if not 0 <= self.master_seed < 2**64:
            raise ValueError("master_seed must be an unsigned 64-bit integer")
        for ev in self.events:
            if isinstance(ev, PrefixCylinder) and len(ev.outcomes) > self.horizon:
                raise ValueError(
                    f"event {ev.label} not decidable within horizon {self.horizon}"
                )

    def summary(self) -> dict:
        return {
            "label": self.label,
            "f0": self.f0.spec_str(),
            "f1": self.f1.spec_str(),
            "nature": self.nature.spec_str(),
            "horizon": self.horizon,
            "trials": self.trials,
            "master_seed": self.master_seed,
            "tests": [{"name": t.name, **t.params_dict()} for t in self.tests],
            "events": [ev.label for ev in self.events],
        }


# --- per-trial execution -----------------------------------------------------

def _run_one_trial(scenario: Scenario, index: int):
    """Simulate one path and stream it through every configured test.

    Returns (verdicts, anomalous flags, event memberships, final log-ratio
    and zero flags of the first likelihood-based test, or None).
    """
    f0, f1, nature = scenario.f0, scenario.f1, scenario.nature
    horizon = scenario.horizon
    rng = trial_rng(scenario.master_seed, index)
    u = rng.random(horizon)

    s0, s1 = f0.session(), f1.session()
    f0_next, f1_next = s0.forecast, s1.forecast
    f0_adv, f1_adv = s0.advance, s1.advance
    if isinstance(nature, ExpertMeasure):
        which = nature.index
        sx_next = sx_adv = None
    else:
        sx = nature.strategy.session()
        which = -1
        sx_next, sx_adv = sx.forecast, sx.advance

    tests = scenario.tests
    states = [t.new_state() for t in tests]
    pushes = []
    flushes = []
    for test, st in zip(tests, states):
        push, flush = test.updater(st)
        pushes.append(push)
        flushes.append(flush)
    pushes = tuple(pushes)
    outcomes: list[int] = []
    record = outcomes.append

    for t in range(horizon):
        p0 = f0_next()
        p1 = f1_next()
        if which == 0:
            pn = p0
        elif which == 1:
            pn = p1
        else:
            pn = sx_next()
        w = 1 if u[t] < pn else 0
        record(w)
        for push in pushes:
            push(w, p0, p1)
        f0_adv(w, p0, p1)
        f1_adv(w, p0, p1)
        if sx_adv is not None:
            sx_adv(w, p0, p1)

    for flush in flushes:
        flush()
    verdicts = []
    anomalous = []
    for test, st in zip(tests, states):
        v, anom = test.finish(st)
        verdicts.append(v)
        anomalous.append(anom)
    memberships = tuple(ev.contains(outcomes) for ev in scenario.events)

    lr_stats = None
    for st in states:
        if isinstance(st, LikelihoodState):
            lr_stats = (st.log_ratio, st.numerator_zero, st.denominator_zero,
                        st.overall_min, st.overall_max)
            break
    return tuple(verdicts), tuple(anomalous), memberships, lr_stats


_WORKER_SCENARIO: Optional[Scenario] = None


def _worker_init(scenario: Scenario) -> None:
    global _WORKER_SCENARIO
    _WORKER_SCENARIO = scenario


def _worker_chunk(chunk: tuple[int, int]):
    lo, hi = chunk
    scenario = _WORKER_SCENARIO
    return [_run_one_trial(scenario, i) for i in range(lo, hi)]


# --- reports ------------------------------------------------------------------

_VERDICT_KEYS = ("expert0", "inconclusive", "expert1")


def _empty_counts() -> dict:
    return {"expert0": 0, "inconclusive": 0, "expert1": 0, "anomalous": 0}


@dataclass
class TestReport:
    """Verdict tally for one comparison test over all trials.

    Anomalous trials (paths impossible under both experts) are binned
    separately, so the four counts always sum to the trial count.
    """

    name: str
    params: dict
    counts: dict
    trials: int
    conditional: dict = field(default_factory=dict)

    def frequency(self, key: str) -> float:
        return self.counts[key] / self.trials

    def interval(self, key: str) -> tuple[float, float]:
        return wilson_interval(self.counts[key], self.trials)

    def to_dict(self) -> dict:
        out = {
            "name": self.name,
            "params": self.params,
            "counts": dict(self.counts),
            "frequencies": {},
            "conditional": self.conditional,
        }
        for key in (*_VERDICT_KEYS, "anomalous"):
            lo, hi = self.interval(key)
            out["frequencies"][key] = {
                "frequency": self.frequency(key),
                "ci95_low": lo,
                "ci95_high": hi,
            }
        return out


@dataclass
class RunReport:
    """Aggregate of one scenario run: per-test verdict tallies, per-event hit
    rates and conditional tallies, wall time, and an echo of the scenario."""

    scenario: dict
    trials: int
    horizon: int
    wall_time_s: float
    tests: list[TestReport]
    events: dict
    anomaly_total: int
    trial_records: Optional[list] = None
    trajectory: Optional[list] = None
    crosscal_profiles: Optional[list] = None
    config: Optional[dict] = None

    def test(self, name: str) -> TestReport:
        for tr in self.tests:
            if tr.name == name:
                return tr
        raise KeyError(f"no test named {name!r} in this report")

    def to_dict(self) -> dict:
        out = {
            "scenario": self.scenario,
            "trials": self.trials,
            "horizon": self.horizon,
            "wall_time_s": self.wall_time_s,
            "anomaly_total": self.anomaly_total,
            "tests": [tr.to_dict() for tr in self.tests],
            "events": self.events,
        }
        if self.config is not None:
            out["config"] = self.config
        return out


def _verdict_key(verdict: Verdict, anomalous: bool) -> str:
    return "anomalous" if anomalous else verdict.label


def estimate_verdict_distribution(
    scenario: Scenario,
    workers: int = 1,
    collect_trials: bool = False,
    record_trajectory: bool = False,
) -> RunReport:
    """Run every trial of a scenario and tally verdicts per test.

    Frequencies estimate, for each test, the probability the induced nature
    measure gives to each verdict.  Identical scenarios (including the
    master seed) produce identical reports for any ``workers`` value.
    """
    start = time.perf_counter()
    n = scenario.trials
    if workers > 1 and n > 1:
        chunk = max(64, -(-n // (workers * 8)))
        spans = [(lo, min(lo + chunk, n)) for lo in range(0, n, chunk)]
        with multiprocessing.Pool(
            processes=workers, initializer=_worker_init, initargs=(scenario,)
        ) as pool:
            blocks = pool.map(_worker_chunk, spans)
        results = [rec for block in blocks for rec in block]
    else:
        results = [_run_one_trial(scenario, i) for i in range(n)]

    counts = [_empty_counts() for _ in scenario.tests]
    event_hits = [0] * len(scenario.events)
    cond_counts = [
        [_empty_counts() for _ in scenario.events] for _ in scenario.tests
    ]
    anomaly_total = 0
    for verdicts, anomalous, memberships, _ in results:
        if any(anomalous):
            anomaly_total += 1
        for k, (v, anom) in enumerate(zip(verdicts, anomalous)):
            counts[k][_verdict_key(v, anom)] += 1
        for j, hit in enumerate(memberships):
            if hit:
                event_hits[j] += 1
                for k, (v, anom) in enumerate(zip(verdicts, anomalous)):
                    cond_counts[k][j][_verdict_key(v, anom)] += 1

    test_reports = []
    for k, test in enumerate(scenario.tests):
        conditional = {}
        for j, ev in enumerate(scenario.events):
            hits = event_hits[j]
            block = {"hits": hits, "counts": cond_counts[k][j]}
            if hits > 0:
                block["frequencies"] = {
                    key: cond_counts[k][j][key] / hits
                    for key in (*_VERDICT_KEYS, "anomalous")
                }
            else:
                block["note"] = "event unobserved"
            conditional[ev.label] = block
        test_reports.append(
            TestReport(
                name=test.name,
                params=test.params_dict(),
                counts=counts[k],
                trials=n,
                conditional=conditional,
            )
        )

    events = {}
    for j, ev in enumerate(scenario.events):
        lo, hi = wilson_interval(event_hits[j], n)
        events[ev.label] = {
            "hits": event_hits[j],
            "frequency": event_hits[j] / n,
            "ci95_low": lo,
            "ci95_high": hi,
        }

    trial_records = None
    if collect_trials:
        trial_records = []
        for i, (verdicts, anomalous, memberships, lr) in enumerate(results):
            rec = {
                "trial": i,
                "seed_key": [scenario.master_seed, i],
                "verdicts": {
                    t.name: v.score for t, v in zip(scenario.tests, verdicts)
                },
                "anomalous": any(anomalous),
                "events": {
                    ev.label: bool(m)
                    for ev, m in zip(scenario.events, memberships)
                },
            }
            if lr is not None:
                rec["log_ratio"] = lr[0]
                rec["numerator_zero"] = lr[1]
                rec["denominator_zero"] = lr[2]
                rec["log_ratio_min"] = lr[3]
                rec["log_ratio_max"] = lr[4]
            trial_records.append(rec)

    trajectory = None
    crosscal_profs = None
    if record_trajectory:
        trajectory, crosscal_profs = _trace_trial(scenario, 0)

    return RunReport(
        scenario=scenario.summary(),
        trials=n,
        horizon=scenario.horizon,
        wall_time_s=time.perf_counter() - start,
        tests=test_reports,
        events=events,
        anomaly_total=anomaly_total,
        trial_records=trial_records,
        trajectory=trajectory,
        crosscal_profiles=crosscal_profs,
        config=scenario.config,
    )


def _trace_trial(scenario: Scenario, index: int):
    """Re-run one trial recording the per-step log-ratio trajectory and the
    final cross-calibration profile table (when such tests are configured)."""
    from .core import generate_outcomes, outcome_probability

    lk_test = next(
        (t for t in scenario.tests if isinstance(t, (DerivativeTest, LikelihoodRatioTest))),
        None,
    )
    cc_test = next(
        (t for t in scenario.tests if isinstance(t, CrossCalibrationTest)), None
    )
    lk_state = lk_test.new_state() if lk_test is not None else LikelihoodState()
    cc_state = cc_test.new_state() if cc_test is not None else None
    rows: list[dict] = []

    def sink(t, w, p0, p1):
        update_likelihood(
            lk_state, outcome_probability(p0, w), outcome_probability(p1, w)
        )
        rows.append(
            {
                "t": t + 1,
                "log_ratio": lk_state.log_ratio,
                "numerator_zero": int(lk_state.numerator_zero),
                "denominator_zero": int(lk_state.denominator_zero),
            }
        )
        if cc_state is not None:
            update_cross_calibration(cc_state, p0, p1, w)

    generate_outcomes(
        scenario.f0,
        scenario.f1,
        scenario.nature,
        scenario.horizon,
        trial_rng(scenario.master_seed, index),
        sink=sink,
    )
    profiles = profile_rows(cc_state) if cc_state is not None else None
    return rows, profiles


# --- property checkers --------------------------------------------------------

@dataclass
class ErrorFreeReport:
    """Frequency of the wrong-expert verdict under an informed-expert nature."""

    nature_expert: int
    wrong_verdict: str
    per_test: dict
    run: RunReport

    def to_dict(self) -> dict:
        return {
            "nature_expert": self.nature_expert,
            "wrong_verdict": self.wrong_verdict,
            "per_test": self.per_test,
        }


def check_error_free(scenario: Scenario, workers: int = 1) -> ErrorFreeReport:
    """Estimate how often each test names the expert that nature is not.

    Requires an expert-measure nature.  For derivative tests the analytic
    one-sided bound exp(-lambda) is attached: the wrong verdict needs the
    likelihood ratio to cross that threshold, which a maximal inequality
    caps at exp(-lambda) probability under the informed expert's measure.
    """
    if not isinstance(scenario.nature, ExpertMeasure):
        raise ValueError("check_error_free needs nature drawn from an expert measure")
    i = scenario.nature.index
    wrong = "expert1" if i == 0 else "expert0"
    run = estimate_verdict_distribution(scenario, workers=workers)
    per_test = {}
    for tr in run.tests:
        lo, hi = tr.interval(wrong)
        entry = {
            "wrong_count": tr.counts[wrong],
            "wrong_frequency": tr.frequency(wrong),
            "ci95_low": lo,
            "ci95_high": hi,
        }
        if "lambda" in tr.params:
            bound = math.exp(-tr.params["lambda"])
            entry["analytic_bound"] = bound
            entry["bound_plus_3se"] = bound + 3 * math.sqrt(bound / scenario.trials)
        per_test[tr.name] = entry
    return ErrorFreeReport(i, wrong, per_test, run)


@dataclass
class ReasonableReport:
    """Empirical view of the reasonableness condition on one event."""

    event: str
    expert: int
    event_hits: int
    event_frequency: float
    per_test: dict
    unobserved: bool
    run: RunReport

    def to_dict(self) -> dict:
        return {
            "event": self.event,
            "expert": self.expert,
            "event_hits": self.event_hits,
            "event_frequency": self.event_frequency,
            "per_test": self.per_test,
            "unobserved": self.unobserved,
        }


def check_reasonable(
    tests: Sequence[ComparisonTest],
    f0: ForecastingStrategy,
    f1: ForecastingStrategy,
    event: EventSpec,
    i: int,
    horizon: int,
    trials: int,
    master_seed: int,
    nature: Optional[Nature] = None,
    workers: int = 1,
) -> ReasonableReport:
    """Estimate P(A), P(A and verdict=i) and the verdict distribution given A.

    The scenario designer asserts the measure-zero side (the event must be
    null under the rival's measure); nature defaults to expert ``i``'s
    measure.  An event never hit is reported as unobserved, not as failure.
    """
    if i not in (0, 1):
        raise ValueError(f"expert index must be 0 or 1, got {i}")
    scenario = Scenario(
        f0=f0,
        f1=f1,
        nature=nature if nature is not None else ExpertMeasure(i),
        horizon=horizon,
        trials=trials,
        master_seed=master_seed,
        tests=tuple(tests),
        events=(event,),
        label=f"reasonable:{event.label}",
    )
    run = estimate_verdict_distribution(scenario, workers=workers)
    hits = run.events[event.label]["hits"]
    key = f"expert{i}"
    per_test = {}
    for tr in run.tests:
        block = tr.conditional[event.label]
        joint = block["counts"][key] / trials
        per_test[tr.name] = {
            "joint_frequency": joint,
            "conditional": block.get("frequencies"),
        }
    return ReasonableReport(
        event=event.label,
        expert=i,
        event_hits=hits,
        event_frequency=hits / trials,
        per_test=per_test,
        unobserved=hits == 0,
        run=run,
    )


def check_anonymity(
    test: ComparisonTest,
    f0: ForecastingStrategy,
    f1: ForecastingStrategy,
    path: PlayPath,
) -> bool:
    """True iff swapping the experts complements the verdict on this path.

    The swapped evaluation replays the same outcomes against (f1, f0), which
    regenerates the announced forecasts with roles exchanged.
    """
    v = test.evaluate(path)
    swapped = replay_path(f1, f0, path.outcomes)
    v_swapped = test.evaluate(swapped)
    return v.score + v_swapped.score == 1.0


@dataclass
class TailReport:
    """Verdict agreement between a pair and its prefix-forced surgery."""

    forced: tuple[int, ...]
    cutover: int
    trials: int
    disagreements: int
    first_disagreement: Optional[int]

    @property
    def disagreement_frequency(self) -> float:
        return self.disagreements / self.trials

    def to_dict(self) -> dict:
        return {
            "forced": list(self.forced),
            "cutover": self.cutover,
            "trials": self.trials,
            "disagreements": self.disagreements,
            "disagreement_frequency": self.disagreement_frequency,
            "first_disagreement": self.first_disagreement,
        }


def check_tail(
    test: ComparisonTest,
    f0: ForecastingStrategy,
    f1: ForecastingStrategy,
    forced: Sequence[int],
    horizon: int,
    trials: int,
    master_seed: int,
    nature_expert: int = 0,
    workers: int = 1,
) -> TailReport:
    """Compare verdicts before and after pinning play to a forced prefix.

    Both strategies are rebuilt to announce the forced prefix with certainty
    and to defer to the originals afterwards; sampling follows the rebuilt
    expert ``nature_expert``, so every trial continues the forced prefix and
    the original and rebuilt triplets coincide from the cutover on.  A test
    that only looks at the tail must agree on every such trial.

    The forced prefix must have positive probability under both original
    experts, otherwise the comparison is vacuous and a ValueError is raised.
    """
    forced = tuple(int(w) for w in forced)
    for i in (0, 1):
        if induced_prefix_probability(f0, f1, i, forced) == 0.0:
            raise ValueError(
                f"forced prefix {forced} has probability 0 under expert {i}"
            )
    n = len(forced) + 1
    g0 = prefix_forced_strategy(f0, forced, n)
    g1 = prefix_forced_strategy(f1, forced, n)

    disagreements = 0
    first = None
    for idx in range(trials):
        outcomes = generate_outcomes(
            g0, g1, ExpertMeasure(nature_expert), horizon, trial_rng(master_seed, idx)
        )
        if tuple(outcomes[: len(forced)]) != forced:
            raise AssertionError("forced sampling left the forced prefix")
        forced_path = replay_path(g0, g1, outcomes)
        original_path = replay_path(f0, f1, outcomes)
        if test.evaluate(forced_path) != test.evaluate(original_path):
            disagreements += 1
            if first is None:
                first = idx
    return TailReport(forced, n, trials, disagreements, first)


@dataclass
class IdealIIDReport:
    """Identification rates for a separated constant-forecast pair."""

    p0: float
    p1: float
    per_nature: dict

    def to_dict(self) -> dict:
        return {"p0": self.p0, "p1": self.p1, "per_nature": self.per_nature}


def check_ideal_iid(
    tests: Sequence[ComparisonTest],
    p0: float,
    p1: float,
    horizon: int,
    trials: int,
    master_seed: int,
    workers: int = 1,
) -> IdealIIDReport:
    """Under each expert's measure, how often each test names that expert.

    The two constant forecasts must differ; their induced measures then sit
    on disjoint sets of realizations, which is what makes exact
    identification possible at all.
    """
    if p0 == p1:
        raise ValueError("the two constant forecasts must differ")
    f0, f1 = iid_strategy(p0), iid_strategy(p1)
    per_nature = {}
    for i in (0, 1):
        scenario = Scenario(
            f0=f0,
            f1=f1,
            nature=ExpertMeasure(i),
            horizon=horizon,
            trials=trials,
            master_seed=master_seed,
            tests=tuple(tests),
            label=f"ideal_iid:nature{i}",
        )
        run = estimate_verdict_distribution(scenario, workers=workers)
        key = f"expert{i}"
        per_nature[key] = {
            tr.name: {
                "correct_frequency": tr.frequency(key),
                "ci95": list(tr.interval(key)),
            }
            for tr in run.tests
        }
    return IdealIIDReport(p0, p1, per_nature)


@dataclass
class EquivalenceReport:
    """Per-nature disagreement frequencies between two tests on joint paths."""

    per_nature: dict

    def to_dict(self) -> dict:
        return {"per_nature": self.per_nature}


def check_equivalence(
    test_a: ComparisonTest,
    test_b: ComparisonTest,
    f0: ForecastingStrategy,
    f1: ForecastingStrategy,
    natures: Sequence[Nature],
    horizon: int,
    trials: int,
    master_seed: int,
    workers: int = 1,
) -> EquivalenceReport:
    """Estimate, under each given nature, how often the two tests disagree.

    Two tests are equivalent for the pair when the disagreement probability
    vanishes under both experts' measures.
    """
    per_nature = {}
    for nature in natures:
        scenario = Scenario(
            f0=f0,
            f1=f1,
            nature=nature,
            horizon=horizon,
            trials=trials,
            master_seed=master_seed,
            tests=(test_a, test_b),
            label="equivalence",
        )
        run = estimate_verdict_distribution(
            scenario, workers=workers, collect_trials=True
        )
        names = [test_a.name, test_b.name]
        disagreements = sum(
            1
            for rec in run.trial_records
            if rec["verdicts"][names[0]] != rec["verdicts"][names[1]]
        )
        lo, hi = wilson_interval(disagreements, trials)
        per_nature[nature.spec_str()] = {
            "disagreements": disagreements,
            "frequency": disagreements / trials,
            "ci95_low": lo,
            "ci95_high": hi,
        }
    return EquivalenceReport(per_nature)


def check_inconclusive_under_absolute_continuity(
    horizon: int = 2000,
    trials: int = 10000,
    master_seed: int = 118305,
    lam: float = math.log(100.0),
    burn_in: Optional[int] = None,
    workers: int = 1,
) -> RunReport:
    """Verdict distribution for a pair where expert 1's measure is absolutely
    continuous with respect to expert 0's.

    Expert 0 mixes a fair coin with a 0.3-coin; expert 1 is the fair coin.
    Under expert 0's measure the derivative test can never name expert 1,
    and on the fair-coin half of the mixture the ratio converges to a finite
    constant, so the verdict there must stay inconclusive.
    """
    if burn_in is None:
        burn_in = horizon // 2
    f0 = mixture_strategy([(0.5, iid_strategy(0.5)), (0.5, iid_strategy(0.3))])
    f1 = iid_strategy(0.5)
    scenario = Scenario(
        f0=f0,
        f1=f1,
        nature=ExpertMeasure(0),
        horizon=horizon,
        trials=trials,
        master_seed=master_seed,
        tests=(DerivativeTest(VerdictParams(horizon=horizon, lam=lam, burn_in=burn_in)),),
        label="absolute-continuity",
    )
    return estimate_verdict_distribution(scenario, workers=workers)


# --- randomized anonymity sweep -------------------------------------------------

def random_strategy(rng, depth: int = 0) -> ForecastingStrategy:
    """Random strategy from the shipped constructors, for property sweeps."""
    kinds = ["iid", "dirac", "timevarying", "firststep"]
    if depth == 0:
        kinds.append("mixture")
    kind = kinds[rng.integers(0, len(kinds))]
    if kind == "iid":
        return iid_strategy(round(float(rng.uniform(0.05, 0.95)), 6))
    if kind == "dirac":
        prefix = tuple(int(b) for b in rng.integers(0, 2, size=int(rng.integers(0, 4))))
        return dirac_strategy(prefix, int(rng.integers(0, 2)))
    if kind == "timevarying":
        return time_varying_strategy("approach_one")
    if kind == "firststep":
        return first_step_strategy(
            round(float(rng.uniform(0.05, 0.95)), 6), random_strategy(rng, depth + 1)
        )
    # one strictly interior component keeps the mixture conditional defined
    # on every realized history, whatever nature drives the sweep
    w = round(float(rng.uniform(0.1, 0.9)), 6)
    return mixture_strategy(
        [
            (w, random_strategy(rng, depth + 1)),
            (1.0 - w, iid_strategy(round(float(rng.uniform(0.05, 0.95)), 6))),
        ]
    )


def anonymity_suite(
    n_scenarios: int,
    master_seed: int,
    horizon: int = 25,
    lam: float = math.log(100.0),
) -> int:
    """Evaluate every shipped test on randomized pairs, paths and natures;
    returns the number of expert-swap violations (must be zero)."""
    import numpy as np

    params = VerdictParams(horizon=horizon, lam=lam, burn_in=min(10, horizon - 1))
    tests = (
        DerivativeTest(params),
        LikelihoodRatioTest(params),
        CrossCalibrationTest(5, CrossCalibParams(min_count=5, slack=0.0)),
        IdealIIDTest(tol=0.05),
    )
    violations = 0
    rng = np.random.default_rng(master_seed)
    for _ in range(n_scenarios):
        f0 = random_strategy(rng)
        f1 = random_strategy(rng)
        pick = int(rng.integers(0, 3))
        if pick == 2:
            nature: Nature = ExternalNature(
                iid_strategy(round(float(rng.uniform(0.1, 0.9)), 6))
            )
        else:
            nature = ExpertMeasure(pick)
        path = sample_path(f0, f1, nature, horizon, int(rng.integers(0, 2**63)))
        for test in tests:
            if not check_anonymity(test, f0, f1, path):
                violations += 1
    return violations
